#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "engine_internal.hpp"

namespace mhdec {

namespace {

struct GridChoice {
    long nx = 1, ny = 1;
    double cost() const { return static_cast<double>(nx) * static_cast<double>(ny); }
};

// Fewest cells nx * ny of a box such that every cell of size a x b has
// sup |d^T H d| / 2 <= target over differences d in the cell. With d^T H d bounded above by
// xx+ a^2 + 2 |xy| a b + yy+ b^2 and below by the same with the negative parts, saddle
// regions get cells about twice as large as a magnitude bound would allow.
GridChoice best_grid(const NumPoly& P, const Box& b, double target) {
    auto S = P.second_derivative_ranges(b);
    double W = b.x1 - b.x0, H = b.y1 - b.y0;
    double two_t = 2 * target;
    const double m = S.xy.mag();
    auto b_quad = [&](double A, double B, double a) {
        double rem = two_t - A * a * a;
        if (rem <= 0) return 0.0;
        if (B == 0) return m == 0 ? std::numeric_limits<double>::infinity() : rem / (2 * m * a);
        return (-m * a + std::sqrt(m * m * a * a + B * rem)) / B;
    };
    const double ap = std::max(0.0, S.xx.hi), an = std::max(0.0, -S.xx.lo);
    const double bp = std::max(0.0, S.yy.hi), bn = std::max(0.0, -S.yy.lo);
    auto b_max = [&](double a) { return std::min(b_quad(ap, bp, a), b_quad(an, bn, a)); };
    const double sxx = S.xx.mag();
    long nx_min = sxx > 0 ? static_cast<long>(std::floor(W * std::sqrt(sxx / two_t))) + 1 : 1;
    GridChoice best{0, 0};
    double best_cost = std::numeric_limits<double>::infinity();
    auto consider = [&](long nx) {
        double bm = b_max(W / nx);
        if (bm <= 0) return;
        double ny = std::max(1.0, std::ceil(H / bm));
        if (!std::isfinite(ny) || ny > 1e12) return;
        double cost = static_cast<double>(nx) * ny;
        if (cost < best_cost) {
            best_cost = cost;
            best = {nx, static_cast<long>(ny)};
        }
    };
    long nx = nx_min;
    for (int i = 0; i < 64; ++i, ++nx) {
        if (static_cast<double>(nx) >= best_cost) break;
        consider(nx);
    }
    while (static_cast<double>(nx) < best_cost && nx <= 4 * nx_min + 64) {
        consider(nx);
        nx = static_cast<long>(std::ceil(nx * 1.05));
    }
    if (best.nx == 0) throw ConstructionError("tiling: no admissible cell size (non-finite derivative bounds)");
    return best;
}

// Cell layout for one box. Sheared layouts stay inside the box: each row of height dv holds
// parallelogram cells of a grid in (u, v) = (x + k y, y) over the part of the row they fit in,
// and the two end strips of width |k| dv get axis grids. Overlap is confined to the box.
struct Layout {
    GridChoice g;       // axis grid; for sheared layouts g.ny rows of g.nx cells
    int shear = 0;      // 0 axis, 1 rows along x, 2 rows along y (transposed)
    double k = 0;
    double end = 0;     // end strip width
    GridChoice end_lo{0, 0}, end_hi{0, 0};
    double cost() const { return g.cost() + end_lo.cost() + end_hi.cost(); }
};

Box transpose(const Box& b) { return Box{b.y0, b.y1, b.x0, b.x1}; }

Parallelogram transpose(const Parallelogram& p) {
    auto t = [](Vec2 v) { return Vec2{v.y, v.x}; };
    return {t(p.origin), t(p.edge2), t(p.edge1)};
}

// Certified second-order bound for sub-cells of one box: the Hessian at the cell center (with a
// rounding margin from the absolute-value polynomial) widened by third-derivative bounds over the box.
class LocalBound {
public:
    LocalBound(const NumPoly& Q, const Box& box) : Q_(Q), A_(Q) {
        for (double& v : A_.c) v = std::fabs(v);
        NumPoly qx = Q.dx(), qy = Q.dy();
        auto sx = qx.second_derivative_ranges(box);
        auto sy = qy.second_derivative_ranges(box);
        txxx_ = sx.xx.mag();
        txxy_ = sx.xy.mag();
        txyy_ = sx.yy.mag();
        tyyy_ = sy.yy.mag();
    }

    // Cell [x0, x0 + a] x [y0, y0 + b] inside the box.
    bool ok(double x0, double y0, double a, double b, double two_t) const {
        double cx = x0 + 0.5 * a, cy = y0 + 0.5 * b, hx = 0.5 * a, hy = 0.5 * b;
        Jet2 J = Q_.jet(cx, cy), M = A_.jet(std::fabs(cx), std::fabs(cy));
        const double eps = 1e-12;
        double rxx = txxx_ * hx + txxy_ * hy + eps * M.hxx;
        double rxy = txxy_ * hx + txyy_ * hy + eps * M.hxy;
        double ryy = txyy_ * hx + tyyy_ * hy + eps * M.hyy;
        double ap = std::max(0.0, J.hxx + rxx), an = std::max(0.0, rxx - J.hxx);
        double bp = std::max(0.0, J.hyy + ryy), bn = std::max(0.0, ryy - J.hyy);
        double m = std::fabs(J.hxy) + rxy;
        double lim = two_t * (1 - 1e-9);
        return ap * a * a + 2 * m * a * b + bp * b * b <= lim && an * a * a + 2 * m * a * b + bn * b * b <= lim;
    }

private:
    NumPoly Q_, A_;
    double txxx_ = 0, txxy_ = 0, txyy_ = 0, tyyy_ = 0;
};

// Cells of one row [y0, y1] over [x0, x1], widened while the local bound allows. When guaranteed,
// width a0 is certified for this row height (it came from a uniform grid) and no cell is narrower.
// Otherwise narrower starts down to a0 / 8 are tried; returns -1 when none is admissible.
template <class Out>
long pack_row(const LocalBound& lb, double x0, double x1, double y0, double y1, double a0, bool guaranteed,
              double two_t, Out&& out) {
    const double b = y1 - y0;
    double x = x0;
    long count = 0;
    while (x < x1) {
        double rest = x1 - x;
        double start = std::min(a0, rest);
        if (!guaranteed) {
            while (!lb.ok(x, y0, start, b, two_t)) {
                start *= 0.5;
                if (start < a0 / 8) return -1;
            }
        }
        double a = start;
        if (rest <= start * (1 + 1e-9) || lb.ok(x, y0, rest, b, two_t)) {
            a = rest;
        } else {
            double lo = start, g = std::min(2 * start, rest);
            while (g < rest && lb.ok(x, y0, g, b, two_t)) {
                lo = g;
                g = std::min(2 * g, rest);
            }
            double hi = g;
            for (int it = 0; it < 5; ++it) {
                double mid = 0.5 * (lo + hi);
                if (lb.ok(x, y0, mid, b, two_t)) lo = mid; else hi = mid;
            }
            a = lo;
        }
        double xn = x + a >= x1 ? x1 : x + a;
        out(Box{x, xn, y0, y1});
        ++count;
        x = xn;
    }
    return count;
}

// Rows of a box whose uniform grid has cells a0 x b0. Each row takes the height among a few
// multiples of b0 that covers the most area per cell.
template <class Out>
void pack_box(const LocalBound& lb, const Box& u, double a0, double b0, double two_t, Out&& out) {
    auto none = [](const Box&) {};
    double y = u.y0;
    while (y < u.y1) {
        double rest = u.y1 - y;
        if (rest <= b0 * (1 + 1e-9)) {
            pack_row(lb, u.x0, u.x1, y, u.y1, a0, true, two_t, out);
            break;
        }
        double best_h = b0;
        double best_density = b0 / static_cast<double>(pack_row(lb, u.x0, u.x1, y, y + b0, a0, true, two_t, none));
        for (double f : {1.5, 2.0, 3.0, 4.0}) {
            double h = std::min(f * b0, rest);
            long c = pack_row(lb, u.x0, u.x1, y, y + h, a0, false, two_t, none);
            if (c < 0) break;
            if (h / c > best_density) {
                best_density = h / c;
                best_h = h;
            }
            if (h == rest) break;
        }
        double yn = best_h >= rest ? u.y1 : y + best_h;
        pack_row(lb, u.x0, u.x1, y, yn, a0, best_h <= b0, two_t, out);
        y = yn;
    }
}

class Tiler {
public:
    Tiler(const NumPoly& P, const AffineMap& F, double target, const Classifier& cls,
          const std::function<void(const Parallelogram&)>& emit, int max_depth, std::size_t max_pieces)
        : P_(P), PT_(compose(P, AffineMap{{0, 1, 1, 0}, {}})), F_(F), target_(target), cls_(cls), emit_(emit),
          max_depth_(max_depth), max_pieces_(max_pieces) {}

    // Rows along x for x = u - k v; P and b already in row orientation.
    void consider_rows(const NumPoly& P, const Box& b, double k, int shear, Layout& best) const {
        const double W = b.x1 - b.x0, H = b.y1 - b.y0;
        double lo = std::min(k * b.y0, k * b.y1), hi = std::max(k * b.y0, k * b.y1);
        NumPoly Q = compose(P, AffineMap{{1, -k, 0, 1}, {}});
        GridChoice g = best_grid(Q, Box{b.x0 + lo, b.x1 + hi, b.y0, b.y1}, target_);
        const double du = (W + hi - lo) / g.nx;
        // More rows narrow the end strips; a cell of the same width and a smaller height stays admissible.
        for (long m = 1; m <= 4; m *= 2) {
            long ny = g.ny * m;
            double D = std::fabs(k) * H / ny;
            if (D > 0.5 * W) continue;
            Layout L;
            L.shear = shear;
            L.k = k;
            L.end = D;
            L.g = {std::max(1L, static_cast<long>(std::ceil((W - D) / du - 1e-9))), ny};
            if (D > 0) {
                L.end_lo = best_grid(P, Box{b.x0, b.x0 + D, b.y0, b.y1}, target_);
                L.end_hi = best_grid(P, Box{b.x1 - D, b.x1, b.y0, b.y1}, target_);
            }
            if (L.cost() < 0.9 * best.cost()) best = L;
        }
    }

    Layout plan(const Box& b) const {
        Layout best{best_grid(P_, b, target_)};
        if (best.cost() <= 1) return best;
        Jet2 J = P_.jet(0.5 * (b.x0 + b.x1), 0.5 * (b.y0 + b.y1));
        double a = J.hxx, m = J.hxy, c = J.hyy;
        if (!(std::fabs(m) > 0.05 * std::sqrt(std::fabs(a * c)))) return best;
        // A steep shear can leave no admissible cell; the axis layout stands then.
        try {
            if (a != 0) consider_rows(P_, b, m / a, 1, best);
            if (c != 0) consider_rows(PT_, transpose(b), m / c, 2, best);
        } catch (const ConstructionError&) {
        }
        return best;
    }

    struct Node {
        Box box;
        RegionClass rc = RegionClass::Keep;
        Layout layout;
        double cost = 0;
        std::unique_ptr<Node> lo, hi;
    };

    // Greedy: a box splits when its two halves, each with its own best layout, need fewer cells.
    std::unique_ptr<Node> build(const Box& b, int depth, const Layout* known = nullptr) {
        auto n = std::make_unique<Node>();
        n->box = b;
        n->rc = cls_ ? cls_(Parallelogram::from_box(b).mapped(F_)) : RegionClass::Keep;
        if (n->rc == RegionClass::Drop) return n;
        n->layout = known ? *known : plan(b);
        n->cost = n->layout.cost();
        if (n->cost > 1 && depth < max_depth_) {
            auto halves = [&](bool along_x) {
                Box h1 = b, h2 = b;
                if (along_x) {
                    h1.x1 = h2.x0 = 0.5 * (b.x0 + b.x1);
                } else {
                    h1.y1 = h2.y0 = 0.5 * (b.y0 + b.y1);
                }
                return std::make_pair(h1, h2);
            };
            // Mixed boxes always split so that dropped parts are shed.
            if (n->rc == RegionClass::Mixed) {
                auto [h1, h2] = halves(n->layout.g.nx >= n->layout.g.ny);
                n->lo = build(h1, depth + 1);
                n->hi = build(h2, depth + 1);
            } else {
                auto [x1, x2] = halves(true);
                auto [y1, y2] = halves(false);
                Layout lx1 = plan(x1), lx2 = plan(x2), ly1 = plan(y1), ly2 = plan(y2);
                double cx = lx1.cost() + lx2.cost(), cy = ly1.cost() + ly2.cost();
                if (std::min(cx, cy) < n->cost) {
                    if (cx <= cy) {
                        n->lo = build(x1, depth + 1, &lx1);
                        n->hi = build(x2, depth + 1, &lx2);
                    } else {
                        n->lo = build(y1, depth + 1, &ly1);
                        n->hi = build(y2, depth + 1, &ly2);
                    }
                }
            }
        }
        return n;
    }

    void emit(const Node& n) {
        if (n.rc == RegionClass::Drop) return;
        if (n.lo) {
            emit(*n.lo);
            emit(*n.hi);
            return;
        }
        const Layout& L = n.layout;
        if (L.cost() > 1e8 || count_ + static_cast<std::size_t>(L.cost()) > max_pieces_)
            throw ConstructionError("tiling: piece budget exceeded");
        const bool check = n.rc == RegionClass::Mixed && L.cost() > 1;
        auto out = [&](Parallelogram local) {
            if (L.shear == 2) local = transpose(local);
            Parallelogram shape = local.mapped(F_);
            if (check && cls_(shape) == RegionClass::Drop) return;
            emit_(shape);
            ++count_;
        };
        const double two_t = 2 * target_;
        auto box_out = [&](const Box& c) { out(Parallelogram::from_box(c)); };
        auto grid = [&](const NumPoly& Q, const Box& u, const GridChoice& g) {
            LocalBound lb(Q, u);
            double du = (u.x1 - u.x0) / g.nx, dv = (u.y1 - u.y0) / g.ny;
            pack_box(lb, u, du, dv, two_t, box_out);
        };
        if (L.shear == 0) {
            grid(P_, n.box, L.g);
            return;
        }
        const NumPoly& R = L.shear == 2 ? PT_ : P_;
        const Box r = L.shear == 2 ? transpose(n.box) : n.box;
        const AffineMap S{{1, -L.k, 0, 1}, {}};
        const double lo = std::min(L.k * r.y0, L.k * r.y1), hi = std::max(L.k * r.y0, L.k * r.y1);
        const Box ub{r.x0 + lo, r.x1 + hi, r.y0, r.y1};
        LocalBound lb(compose(R, S), ub);
        const double dv = (r.y1 - r.y0) / L.g.ny;
        for (long j = 0; j < L.g.ny; ++j) {
            double y0 = r.y0 + j * dv, y1 = j + 1 == L.g.ny ? r.y1 : r.y0 + (j + 1) * dv;
            // u = x + k y ranges over values whose whole segment in the row lies in [x0, x1].
            double ta = r.x0 + std::max(L.k * y0, L.k * y1), tb = r.x1 + std::min(L.k * y0, L.k * y1);
            pack_row(lb, ta, tb, y0, y1, (tb - ta) / L.g.nx, true, two_t,
                     [&](const Box& c) { out(Parallelogram::from_box(c).mapped(S)); });
        }
        if (L.end > 0) {
            grid(R, Box{r.x0, r.x0 + L.end, r.y0, r.y1}, L.end_lo);
            grid(R, Box{r.x1 - L.end, r.x1, r.y0, r.y1}, L.end_hi);
        }
    }

    void run(const Box& b) { emit(*build(b, 0)); }

private:
    const NumPoly& P_;
    NumPoly PT_;  // P with x and y exchanged
    AffineMap F_;
    double target_;
    const Classifier& cls_;
    const std::function<void(const Parallelogram&)>& emit_;
    int max_depth_;
    std::size_t max_pieces_;
    std::size_t count_ = 0;
};

}  // namespace

void tile_region(const NumPoly& phi, const AffineMap& frame, const Box& box, double target, const Classifier& cls,
                 const std::function<void(const Parallelogram&)>& emit, int max_depth, std::size_t max_pieces) {
    if (!(target > 0)) throw std::invalid_argument("tile_region: target must be positive");
    if (!(box.x1 > box.x0) || !(box.y1 > box.y0)) return;
    NumPoly P = compose(phi, frame);
    Tiler t(P, frame, target, cls, emit, max_depth, max_pieces);
    t.run(box);
}

std::vector<Parallelogram> tile_nondegenerate(const NumPoly& phi, double delta, const Parallelogram& region,
                                              const TileOptions& opt) {
    if (!(delta > 0)) throw std::invalid_argument("tile_nondegenerate: delta must be positive");
    if (region.degenerate()) throw std::invalid_argument("tile_nondegenerate: degenerate region");
    std::vector<Parallelogram> out;
    if (opt.mode == TileOptions::Mode::Uniform) {
        // Squares of side delta^{1/2} in the region's own frame, clipped at the far edges.
        double side = std::sqrt(delta);
        double L1 = region.edge1.norm(), L2 = region.edge2.norm();
        long n1 = static_cast<long>(std::ceil(L1 / side - 1e-12)), n2 = static_cast<long>(std::ceil(L2 / side - 1e-12));
        if (static_cast<double>(n1) * n2 > static_cast<double>(opt.max_pieces))
            throw ConstructionError("tile_nondegenerate: piece budget exceeded");
        AffineMap U = region.unit_map();
        for (long i = 0; i < n1; ++i)
            for (long j = 0; j < n2; ++j) {
                Box cell{i * side / L1, std::min(1.0, (i + 1) * side / L1), j * side / L2, std::min(1.0, (j + 1) * side / L2)};
                out.push_back(Parallelogram::from_box(cell).mapped(U));
            }
        return out;
    }
    tile_region(phi, region.unit_map(), Box{0, 1, 0, 1}, opt.fraction * opt.C_flat * delta, {},
                [&](const Parallelogram& p) { out.push_back(p); }, opt.max_depth, opt.max_pieces);
    return out;
}

namespace detail {

void EngineContext::emit(const Parallelogram& engine_shape, CaseTag tag, int band, double sigma, int l) const {
    if (out->size() >= cfg->max_pieces) throw ConstructionError("partition: piece budget exceeded");
    out->push_back(LocalPiece{engine_shape.mapped(base), tag, band, sigma, l});
}

void tile_frame(const NumPoly& phi, const AffineMap& F, const Box& box, const EngineContext& ctx, CaseTag tag,
                int band, double sigma, int l, const Classifier& cls) {
    Classifier both = cls;
    if (ctx.clip) {
        both = [&](const Parallelogram& p) {
            RegionClass a = ctx.clip(p.mapped(ctx.base));
            if (a == RegionClass::Drop) return a;
            RegionClass b = cls ? cls(p) : RegionClass::Keep;
            if (b == RegionClass::Drop) return b;
            return a == RegionClass::Keep && b == RegionClass::Keep ? RegionClass::Keep : RegionClass::Mixed;
        };
    }
    tile_region(phi, F, box, ctx.target(), both,
                [&](const Parallelogram& p) { ctx.emit(p, tag, band, sigma, l); }, 12, ctx.cfg->max_pieces);
}

namespace {
std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}
}  // namespace

void ScaleCheck::sim(const std::string& name, double lo, double hi) {
    if (!(lo > 0) || !std::isfinite(hi))
        throw EstimateViolation(lemma_, name + " is not bounded away from zero (inf " + fmt(lo) + ")");
    auto [it, fresh] = ref_.emplace(name, std::make_pair(lo, hi));
    if (fresh) {
        if (hi > factor_ * lo) throw EstimateViolation(lemma_, name + " varies by more than the ~ factor on one band");
        return;
    }
    auto& [rlo, rhi] = it->second;
    if (lo < rlo / factor_ || hi > rhi * factor_)
        throw EstimateViolation(lemma_, name + " left its reference range [" + fmt(rlo) + ", " + fmt(rhi) + "]: got [" +
                                            fmt(lo) + ", " + fmt(hi) + "]");
}

void ScaleCheck::lesssim(const std::string& name, double hi) {
    if (!std::isfinite(hi)) throw EstimateViolation(lemma_, name + " is not finite");
    // Reference floor avoids dividing against an exactly vanishing first band.
    auto [it, fresh] = ref_.emplace(name, std::make_pair(0.0, std::max(hi, 1.0)));
    if (fresh) return;
    if (hi > it->second.second * factor_)
        throw EstimateViolation(lemma_, name + " exceeds " + fmt(factor_) + " x reference " + fmt(it->second.second) +
                                            ": got " + fmt(hi));
}

}  // namespace detail

}  // namespace mhdec
