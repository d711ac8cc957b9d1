#include <algorithm>
#include <cmath>
#include <variant>

#include "engine_internal.hpp"

namespace mhdec {

const char* to_string(CaseTag t) {
    switch (t) {
        case CaseTag::FLAT_CORE: return "FLAT_CORE";
        case CaseTag::NONDEG: return "NONDEG";
        case CaseTag::A1: return "A1";
        case CaseTag::A1_POWER: return "A1_POWER";
        case CaseTag::A2: return "A2";
        case CaseTag::B1: return "B1";
        case CaseTag::B2: return "B2";
    }
    return "?";
}

std::optional<CaseTag> case_tag_from_string(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(CaseTag::B2); ++i)
        if (s == to_string(static_cast<CaseTag>(i))) return static_cast<CaseTag>(i);
    return std::nullopt;
}

std::vector<AffineMap> Partition::chain(const PartitionPiece& p) const {
    const AffineMap& G = frames.at(p.frame);
    Parallelogram model = p.shape.mapped(G.inverse());
    return {model.unit_map(), G};
}

std::vector<Parallelogram> Partition::shapes() const {
    std::vector<Parallelogram> s;
    s.reserve(pieces.size());
    for (const auto& p : pieces) s.push_back(p.shape);
    return s;
}

namespace {

using detail::AxisRegion;
using detail::CurveRegion;
using detail::EngineContext;
using detail::LocalPiece;

constexpr int kQuadSign[4][2] = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};

// Neighborhood of a degenerate component, described in engine coordinates:
// {x in [x_lo, x_hi], |y - g(x)| <= c} with g = 0 (axis) or the increasing curve g.
struct Neighborhood {
    bool swapped = false;
    bool has_curve = false;
    CurveSpec curve;
    AffineMap to_engine;  // quadrant -> engine (swap or shear)
    double x_lo = 0, x_hi = 0, c = 0;

    double g(double x) const { return has_curve ? curve.gamma(std::max(x, 0.0)) : 0.0; }
    bool contains(Vec2 q) const {
        Vec2 p = to_engine.apply(q);
        return p.x >= x_lo && p.x <= x_hi && std::fabs(p.y - g(p.x)) <= c;
    }
    // Conservative tests on an engine-coordinate bounding box; g is increasing.
    bool inside(const Box& b) const {
        return b.x0 >= x_lo && b.x1 <= x_hi && b.y1 <= g(b.x0) + c && b.y0 >= g(b.x1) - c;
    }
    bool disjoint(const Box& b) const {
        if (b.x1 < x_lo || b.x0 > x_hi) return true;
        double ga = g(std::max(b.x0, x_lo)), gb = g(std::min(b.x1, x_hi));
        return b.y0 > gb + c || b.y1 < ga - c;
    }
};

struct Task {
    std::string kind;
    CaseTag tag = CaseTag::NONDEG;
    int k = 0;
    double lambda = 0;
    NumPoly phi;    // engine coordinates
    AffineMap base; // engine -> quadrant
    bool curve = false;
    AxisRegion axis;
    CurveRegion curve_region;
};

struct QuadrantPlan {
    NumPoly phi;  // quadrant coordinates
    std::vector<Task> tasks;
    std::vector<Neighborhood> hoods;
};

const AffineMap kSwap{{0, 1, 1, 0}, {}};

int order_of_y(const BivariatePoly& p) { return p.is_zero() ? 0 : p.min_y_exponent(); }

// Axis component along y = 0 of phi_e (engine coordinates already applied).
Task axis_task(const BivariatePoly& phi_e, const MixedHomogeneity& mh, int k_K) {
    Task t;
    AxisCase ac;
    try {
        ac = classify_axis_case(phi_e, mh);
    } catch (const std::logic_error& e) {
        throw ConstructionError(std::string("axis classification: ") + e.what());
    }
    if (auto* a1 = std::get_if<AxisCaseA1>(&ac)) {
        t.tag = CaseTag::A1;
        t.k = a1->k;
    } else {
        t.tag = CaseTag::A2;
        t.k = k_K;
    }
    t.phi = NumPoly::from_exact(phi_e);
    return t;
}

// x-range of a component neighborhood inside the annulus [0,X]x[0,Y] \ [0,1)^2 (engine coordinates).
void curve_range(const CurveSpec& g, double X, double Y, double c, double& lo, double& hi) {
    double xe = std::min(1.0, g.inverse(1.0));
    lo = std::max(0.5 * xe, std::min(xe, g.inverse(std::max(1.0 - c, 1e-12))));
    hi = std::min(X, g.inverse(Y + c));
}

QuadrantPlan plan_quadrant(const BivariatePoly& phi, const MixedHomogeneity& mh, const BivariatePoly& K,
                           const HomogeneousFactorization& fact, int quad, double c, double X, double Y) {
    const int ex = kQuadSign[quad][0], ey = kQuadSign[quad][1];
    QuadrantPlan plan;
    BivariatePoly pe = phi.reflected(ex, ey);
    plan.phi = NumPoly::from_exact(pe);
    const int nu1 = K.min_x_exponent(), nu2 = order_of_y(K);
    if (nu2 > 0) {
        Task t = axis_task(pe, mh, nu2);
        t.kind = "x-axis";
        t.axis = {1, X, c};
        plan.tasks.push_back(t);
        plan.hoods.push_back(Neighborhood{false, false, {}, AffineMap::identity(), 1, X, c});
    }
    if (nu1 > 0) {
        MixedHomogeneity sw{mh.q, mh.s, mh.r};
        Task t = axis_task(pe.swapped(), sw, nu1);
        t.kind = "y-axis";
        t.base = kSwap;
        t.axis = {1, Y, c};
        plan.tasks.push_back(t);
        plan.hoods.push_back(Neighborhood{true, false, {}, kSwap, 1, Y, c});
    }
    for (const auto& cf : fact.curve_factors) {
        int sgn = cf.lambda.sign() * ((mh.s % 2) && ex < 0 ? -1 : 1) * ((mh.r % 2) && ey < 0 ? -1 : 1);
        if (sgn <= 0) continue;
        double lam = std::fabs(cf.lambda.approx());
        CurveCase cc = classify_curve_case(phi, mh, cf.lambda);
        CaseTag tag = cc.b1 ? CaseTag::B1 : CaseTag::B2;
        int k = cc.b1 ? cc.k : cf.multiplicity;
        if (mh.r == mh.s) {
            // Line y = m x; the shear (x, y) -> (x, y + m x) puts it on the x-axis.
            double m = 1 / lam;
            AffineMap shear{{1, 0, m, 1}, {}};
            double xe = std::min(1.0, 1 / m);
            double lo = std::max(0.5 * xe, std::min(xe, (1 - c) / m)), hi = std::min(X, (Y + c) / m);
            NumPoly ps = compose(plan.phi, shear);
            for (int side : {1, -1}) {
                Task t;
                t.kind = "line";
                t.tag = cc.b1 ? CaseTag::A1 : CaseTag::A2;
                t.k = k;
                t.lambda = cf.lambda.approx();
                AffineMap refl = AffineMap::diagonal(1, side);
                t.phi = compose(ps, refl);
                t.base = shear.compose(refl);
                t.axis = {lo, hi, c};
                plan.tasks.push_back(t);
            }
            plan.hoods.push_back(Neighborhood{false, false, {}, shear.inverse(), lo, hi, c});
            continue;
        }
        bool swapped = mh.s < mh.r;
        CurveSpec g = swapped ? CurveSpec{1 / lam, mh.s, mh.r, 1} : CurveSpec{lam, mh.r, mh.s, 1};
        double Xe = swapped ? Y : X, Ye = swapped ? X : Y;
        double lo, hi;
        curve_range(g, Xe, Ye, c, lo, hi);
        AffineMap to_engine = swapped ? kSwap : AffineMap::identity();
        NumPoly pq = compose(plan.phi, to_engine);  // swap is an involution
        for (int side : {1, -1}) {
            Task t;
            t.kind = "curve";
            t.tag = tag;
            t.k = k;
            t.lambda = cf.lambda.approx();
            t.curve = true;
            AffineMap refl = AffineMap::diagonal(1, side);
            t.phi = compose(pq, refl);
            t.base = to_engine.compose(refl);
            CurveSpec gs = g;
            gs.sign = side;
            t.curve_region = {gs, lo, hi, c};
            plan.tasks.push_back(t);
        }
        plan.hoods.push_back(Neighborhood{swapped, true, g, to_engine, lo, hi, c});
    }
    return plan;
}

void check_disjoint(const QuadrantPlan& plan, double X, double Y) {
    if (plan.hoods.size() < 2) return;
    const int n = 200;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            Vec2 p{X * i / n, Y * j / n};
            if (p.x < 1 && p.y < 1) continue;
            int hits = 0;
            for (const auto& h : plan.hoods) hits += h.contains(p);
            if (hits > 1)
                throw EstimateViolation("component separation", "neighborhoods overlap near (" + std::to_string(p.x) +
                                                                     ", " + std::to_string(p.y) + ")");
        }
}

Classifier away_classifier(const std::vector<Neighborhood>& hoods) {
    return [&hoods](const Parallelogram& shape) {
        Box b = shape.bbox();
        bool all_disjoint = true;
        for (const auto& h : hoods) {
            Box e = b;
            if (h.to_engine.linear[1] != 0 || h.to_engine.linear[2] != 0) {
                e = Parallelogram::from_box(b).mapped(h.to_engine).bbox();
            }
            if (h.inside(e)) return RegionClass::Drop;
            if (!h.disjoint(e)) all_disjoint = false;
        }
        return all_disjoint ? RegionClass::Keep : RegionClass::Mixed;
    };
}

// Quadrant part of one level in model coordinates: [0, xo] x [0, yo] minus [0, 1)^2.
// Tiles outside it are covered by the neighboring level or quadrant.
Classifier level_clip(double xo, double yo) {
    return [=](const Parallelogram& p) {
        Box b = p.bbox();
        if (b.x1 <= 0 || b.y1 <= 0 || b.x0 >= xo || b.y0 >= yo) return RegionClass::Drop;
        if (b.x0 >= 0 && b.y0 >= 0 && b.x1 < 1 && b.y1 < 1) return RegionClass::Drop;
        bool inside = b.x0 >= 0 && b.y0 >= 0 && b.x1 <= xo && b.y1 <= yo && (b.x0 >= 1 || b.y0 >= 1);
        return inside ? RegionClass::Keep : RegionClass::Mixed;
    };
}

// b minus r as up to four boxes appended to out.
void subtract_box(const Box& b, const Box& r, std::vector<Box>& out) {
    double x0 = std::max(b.x0, r.x0), x1 = std::min(b.x1, r.x1), y0 = std::max(b.y0, r.y0), y1 = std::min(b.y1, r.y1);
    if (!(x0 < x1 && y0 < y1)) {
        out.push_back(b);
        return;
    }
    auto add = [&](Box c) {
        if (c.x1 > c.x0 && c.y1 > c.y0) out.push_back(c);
    };
    add(Box{b.x0, x0, b.y0, b.y1});
    add(Box{x1, b.x1, b.y0, b.y1});
    add(Box{x0, x1, b.y0, y0});
    add(Box{x0, x1, y1, b.y1});
}

bool meets_unit_square(const Parallelogram& p) {
    Box b = p.bbox();
    return b.x1 >= -1 && b.x0 <= 1 && b.y1 >= -1 && b.y0 <= 1;
}

// Greedy maximal flat intervals of g on [a0, a1]: (1/2) sup|g''| len^2 <= target.
std::vector<std::pair<double, double>> flat_intervals(const NumPoly& g2, double a0, double a1, double target) {
    auto ok = [&](double a, double b) { return 0.5 * g2.range(Box{a, b, 0, 0}).mag() * (b - a) * (b - a) <= target; };
    std::vector<std::pair<double, double>> out;
    double a = a0;
    while (a < a1) {
        double b;
        if (ok(a, a1)) {
            b = a1;
        } else {
            double M = std::max(g2.range(Box{a, a1, 0, 0}).mag(), 1e-300);
            double good = std::sqrt(2 * target / M), bad = a1 - a;
            while (good * 2 < bad && ok(a, a + good * 2)) good *= 2;
            bad = std::min(bad, good * 2);
            for (int it = 0; it < 40; ++it) {
                double mid = 0.5 * (good + bad);
                (ok(a, a + mid) ? good : bad) = mid;
            }
            b = a + good;
        }
        out.emplace_back(a, b);
        a = b;
    }
    return out;
}

// det D^2 phi = 0: phi = g(l) + linear with l = x + rho y or l = y.
void cylinder_case(Partition& P) {
    const BivariatePoly& phi = P.phi;
    BivariatePoly pxx = phi.dx().dx(), pxy = phi.dx().dy(), pyy = phi.dy().dy();
    P.frames = {AffineMap::identity()};
    auto add = [&](const Parallelogram& s, CaseTag tag, double sigma, int band) {
        P.pieces.push_back(PartitionPiece{s, tag, 0, band, sigma, 0, 0});
    };
    if (pxx.is_zero() && pxy.is_zero() && pyy.is_zero()) {
        add(Parallelogram::from_box(Box{-1, 1, -1, 1}), CaseTag::FLAT_CORE, 1, 0);
        return;
    }
    const double target = P.config.tile_fraction * P.config.C_flat * P.delta;
    bool along_y = pxx.is_zero();
    Rational rho = 0;
    BivariatePoly g2;
    if (along_y) {
        if (!pxy.is_zero()) throw ConstructionError("degenerate Hessian without a cylinder direction");
        g2 = BivariatePoly();
        for (const auto& [e, c] : pyy.terms)
            if (e.first == 0) g2.add_term(e.second, 0, c);
    } else {
        const auto& [e0, c0] = *pxx.terms.begin();
        rho = pxy.coeff(e0.first, e0.second) / c0;
        if (pxy != rho * pxx || pyy != (rho * rho) * pxx)
            throw ConstructionError("degenerate Hessian is not of rank-one cylinder form");
        for (const auto& [e, c] : pxx.terms)
            if (e.second == 0) g2.add_term(e.first, 0, c);
    }
    double r = rho.get_d();
    double tm = 1 + std::fabs(r);
    auto iv = flat_intervals(NumPoly::from_exact(g2), -tm, tm, target);
    int idx = 0;
    for (const auto& [a, b] : iv) {
        Parallelogram s = along_y ? Parallelogram{{-1, a}, {2, 0}, {0, b - a}}
                                  : Parallelogram{{a + r, -1}, {b - a, 0}, {-2 * r, 2}};
        add(s, CaseTag::A1_POWER, b - a, idx++);
    }
}

void run_engines(Partition& P, const BivariatePoly& K, double c) {
    const auto& mh = P.mh;
    const EngineConfig& cfg = P.config;
    const double delta = P.delta;
    const double X = std::pow(2.0, static_cast<double>(mh.r) / mh.q), Y = std::pow(2.0, static_cast<double>(mh.s) / mh.q);
    // K has weight 2(q - r - s) under the same scaling; a constant K has no curve factors.
    HomogeneousFactorization fact;
    if (!K.is_constant()) fact = factorize_mixed_homogeneous(K, MixedHomogeneity{2 * (mh.q - mh.r - mh.s), mh.r, mh.s});

    std::vector<QuadrantPlan> plans;
    for (int q = 0; q < 4; ++q) {
        plans.push_back(plan_quadrant(P.phi, mh, K, fact, q, c, X, Y));
        check_disjoint(plans.back(), X, Y);
    }
    P.stats.components.clear();
    for (int q = 0; q < 4; ++q)
        for (const auto& t : plans[q].tasks)
            P.stats.components.push_back({t.kind, q, t.tag, t.k, t.lambda});

    P.pieces.clear();
    P.frames.clear();
    P.stats.M_phi = 0;
    P.stats.warnings.clear();
    // Core A0 = D_rho0 [-1,1]^2 at model scale 1.
    const NumPoly phi_num = NumPoly::from_exact(P.phi);
    const double rho0 = std::pow(delta, 1.0 / mh.q);
    P.frames.push_back(AffineMap::diagonal(std::pow(rho0, mh.r), std::pow(rho0, mh.s)));
    {
        std::vector<LocalPiece> local;
        EngineContext ctx{&cfg, 1.0, AffineMap::identity(), &local, &P.stats.M_phi, &P.stats.warnings, {}};
        detail::tile_frame(phi_num, AffineMap::identity(), Box{-1, 1, -1, 1}, ctx, CaseTag::FLAT_CORE, 0, 1, 0);
        for (const auto& lp : local)
            P.pieces.push_back(PartitionPiece{lp.shape.mapped(P.frames[0]), lp.tag, 0, lp.band, lp.sigma, lp.l, 0});
    }
    const int J = static_cast<int>(std::ceil(-std::log2(delta) - 1e-12));
    P.stats.radial_levels = J;
    for (int j = 1; j <= J; ++j) {
        const double dl = std::ldexp(1.0, 1 - j);
        const double rho = std::pow(std::ldexp(delta, j - 1), 1.0 / mh.q);
        const double rr = std::pow(rho, mh.r), rs = std::pow(rho, mh.s);
        for (int q = 0; q < 4; ++q) {
            const QuadrantPlan& plan = plans[q];
            AffineMap frame = AffineMap::diagonal(rr * kQuadSign[q][0], rs * kQuadSign[q][1]);
            int fidx = static_cast<int>(P.frames.size());
            P.frames.push_back(frame);
            std::vector<LocalPiece> local;
            EngineContext ctx{&cfg, dl, AffineMap::identity(), &local, &P.stats.M_phi, &P.stats.warnings, {}};
            ctx.clip = level_clip(std::min(X, 1 / rr), std::min(Y, 1 / rs));
            for (const auto& t : plan.tasks) {
                ctx.base = t.base;
                switch (t.tag) {
                    case CaseTag::A1: detail::engine_A1(t.phi, t.k, t.axis, ctx); break;
                    case CaseTag::A2: detail::engine_A2(t.phi, t.k, t.axis, ctx); break;
                    case CaseTag::B1: detail::engine_B1(t.phi, t.k, t.curve_region, ctx); break;
                    case CaseTag::B2: detail::engine_B2(t.phi, t.k, t.curve_region, ctx); break;
                    default: break;
                }
            }
            ctx.base = AffineMap::identity();
            // Axis neighborhoods are rectangles and are cut out exactly; curved ones go through the classifier.
            std::vector<Box> away{Box{1, X, 0, Y}, Box{0, 1, 1, Y}};
            std::vector<Neighborhood> curved;
            for (const auto& h : plan.hoods) {
                if (h.has_curve || !(h.to_engine.linear == AffineMap::identity().linear || h.swapped)) {
                    curved.push_back(h);
                    continue;
                }
                Box r = h.swapped ? Box{-h.c, h.c, h.x_lo, h.x_hi} : Box{h.x_lo, h.x_hi, -h.c, h.c};
                std::vector<Box> next;
                for (const Box& b : away) subtract_box(b, r, next);
                away = std::move(next);
            }
            Classifier cls = curved.empty() ? Classifier{} : away_classifier(curved);
            for (const Box& b : away)
                detail::tile_frame(plan.phi, AffineMap::identity(), b, ctx, CaseTag::NONDEG, 0, 0, 0, cls);
            for (const auto& lp : local) {
                Parallelogram s = lp.shape.mapped(frame);
                if (!meets_unit_square(s)) continue;
                P.pieces.push_back(PartitionPiece{s, lp.tag, j, lp.band, lp.sigma, lp.l, fidx});
            }
            if (P.pieces.size() > cfg.max_pieces) throw ConstructionError("partition: piece budget exceeded");
        }
    }
}

}  // namespace

std::vector<ComponentInfo> degenerate_components(const BivariatePoly& phi, double c_phi) {
    auto mh = detect_mixed_homogeneity(phi);
    if (!mh) throw NotMixedHomogeneous("polynomial is not mixed-homogeneous");
    BivariatePoly K = hessian_determinant(phi);
    if (K.is_zero()) return {};
    HomogeneousFactorization fact;
    if (!K.is_constant()) fact = factorize_mixed_homogeneous(K, MixedHomogeneity{2 * (mh->q - mh->r - mh->s), mh->r, mh->s});
    const double X = std::pow(2.0, static_cast<double>(mh->r) / mh->q), Y = std::pow(2.0, static_cast<double>(mh->s) / mh->q);
    std::vector<ComponentInfo> out;
    for (int q = 0; q < 4; ++q)
        for (const auto& t : plan_quadrant(phi, *mh, K, fact, q, c_phi, X, Y).tasks)
            out.push_back({t.kind, q, t.tag, t.k, t.lambda});
    return out;
}

Partition decompose(const BivariatePoly& phi, double delta, const EngineConfig& cfg) {
    if (!(delta > 0 && delta < 1)) throw std::invalid_argument("delta must lie in (0, 1)");
    if (!(cfg.c_phi > 0 && cfg.c_phi <= 0.25)) throw std::invalid_argument("c_phi must lie in (0, 1/4]");
    if (!(cfg.M_bound >= 100)) throw std::invalid_argument("M_bound must be at least 100");
    auto mh = detect_mixed_homogeneity(phi);
    if (!mh) throw NotMixedHomogeneous("polynomial is not mixed-homogeneous");
    Partition P;
    P.phi = phi;
    P.delta = delta;
    P.mh = *mh;
    P.config = cfg;
    P.l2_applicable = convexity_tag(phi) == ConvexityTag::Convex;
    BivariatePoly K = hessian_determinant(phi);
    if (K.is_zero()) {
        cylinder_case(P);
        P.stats.c_phi = cfg.c_phi;
    } else {
        double c = cfg.c_phi;
        for (int halving = 0;; ++halving) {
            try {
                run_engines(P, K, c);
                P.stats.c_phi = c;
                P.stats.c_phi_halvings = halving;
                break;
            } catch (const EstimateViolation& e) {
                if (!cfg.adaptive_c_phi || halving >= cfg.max_halvings) throw;
                c *= 0.5;
            }
        }
    }
    std::stable_sort(P.pieces.begin(), P.pieces.end(), [](const PartitionPiece& a, const PartitionPiece& b) {
        if (a.radial_level != b.radial_level) return a.radial_level < b.radial_level;
        if (a.tag != b.tag) return a.tag < b.tag;
        return a.band_level < b.band_level;
    });
    P.stats.pieces = P.pieces.size();
    P.stats.per_case.clear();
    for (const auto& p : P.pieces) ++P.stats.per_case[p.tag];
    return P;
}

}  // namespace mhdec
