#include <cmath>
#include <functional>
#include <stdexcept>

#include "engine_internal.hpp"

namespace mhdec {

namespace {

using SeriesD = UPoly<double>;

struct Recursion {
    double w = 0;
    double M_bound = 100;
    int max_recursion = 64;
    double* max_mu = nullptr;
    std::vector<double>* mus = nullptr;
    // leaf region in top-frame coordinates
    std::function<void(const Parallelogram&, int depth, double mu)> leaf;

    void run(const ParametricPoly<double>& tau, int l, const Box& dom, const AffineMap& rel, int depth, double last_mu) {
        if (depth > max_recursion) throw ConstructionError("cylindrical decoupling: recursion depth exceeds max_recursion");
        if (l == 0) {
            leaf(Parallelogram::from_box(dom).mapped(rel), depth, last_mu);
            return;
        }
        const int N = 2 * l + 2;
        const SeriesD one = SeriesD::constant(1.0), zero;
        double b = dom.y0;
        const double eps = 1e-12 * std::max(1.0, dom.y1 - dom.y0);
        while (b < dom.y1 - eps) {
            ParametricPoly<double> tau_b = tau.affine_substituted(one, zero, zero, zero, one, SeriesD::constant(b), N);
            SeriesD mu;
            try {
                mu = taylor_shear_coefficient(tau_b, l);
            } catch (const std::domain_error&) {
                throw EstimateViolation("shear lemma", "tau_xx(0,0) vanishes at band start y = " + std::to_string(b));
            }
            double muv = mu.eval(w);
            if (!std::isfinite(muv) || std::fabs(muv) > M_bound)
                throw ConstructionError("cylindrical decoupling: |mu| = " + std::to_string(std::fabs(muv)) +
                                        " exceeds M_bound");
            if (max_mu) *max_mu = std::max(*max_mu, std::fabs(muv));
            if (mus) mus->push_back(muv);
            // Band height 1/(10|mu|) measured at the band start.
            double h = std::min(dom.y1 - b, 1.0 / (10.0 * std::max(std::fabs(muv), 1e-3)));
            ParametricPoly<double> psi = tau_b.affine_substituted(one, SeriesD() - mu, zero, zero, one, zero, N);
            // x_old = x_new - mu y, so the band's x-range widens by |mu| h on one side.
            double xr0 = dom.x0 + std::min(0.0, muv * h), xr1 = dom.x1 + std::max(0.0, muv * h);
            long n = std::max(1L, static_cast<long>(std::ceil((xr1 - xr0) / w - 1e-9)));
            double ww = (xr1 - xr0) / n;
            AffineMap shear{{1, -muv, 0, 1}, {0, b}};
            for (long i = 0; i < n; ++i) {
                double bp = xr0 + i * ww;
                ParametricPoly<double> eta = psi.affine_substituted(SeriesD::monomial(1.0, 1), zero, SeriesD::constant(bp),
                                                                    zero, one, zero, N)
                                                 .without_linear_part()
                                                 .divided_by_w(2)
                                                 .truncated(2 * (l - 1) + 2);
                AffineMap strip{{w, 0, 0, 1}, {bp, 0}};
                run(eta, l - 1, Box{0, ww / w, 0, h}, rel.compose(shear).compose(strip), depth + 1, muv);
            }
            b += h;
        }
    }
};

}  // namespace

CylinderResult cylindrical_decouple(const ParametricPoly<double>& tau, int l, double sigma, const Box& domain,
                                    double M_bound, int max_recursion) {
    if (l < 0) throw std::invalid_argument("cylindrical_decouple: l must be nonnegative");
    if (!(sigma > 0) || !(sigma < 1)) throw std::invalid_argument("cylindrical_decouple: sigma must lie in (0, 1)");
    CylinderResult res;
    Recursion r;
    r.w = std::sqrt(sigma);
    r.M_bound = M_bound;
    r.max_recursion = max_recursion;
    r.max_mu = &res.max_mu;
    r.mus = &res.mus;
    r.leaf = [&](const Parallelogram& p, int depth, double mu) { res.leaves.push_back({p, depth, mu}); };
    r.run(tau, l, domain, AffineMap::identity(), 0, 0);
    return res;
}

double shear_residual(const ParametricPolyQ& tau, int l, double w, int samples) {
    UPolyQ mu = taylor_shear_coefficient(tau, l);
    ParametricPolyQ psi = tau.substituted(UPolyQ() - mu, UPolyQ(), UPolyQ(), 1 << 20);
    // psi_xy(0, y) = sum_b b * coeff(1, b)(w) * y^{b-1}
    std::vector<double> c;
    for (const auto& [e, s] : psi.terms)
        if (e.first == 1 && e.second >= 1) {
            if (static_cast<int>(c.size()) < e.second) c.resize(e.second, 0.0);
            c[e.second - 1] = e.second * s.template eval<double>(w);
        }
    double best = 0;
    for (int i = 0; i < samples; ++i) {
        double y = samples > 1 ? static_cast<double>(i) / (samples - 1) : 0.0;
        double acc = 0;
        for (std::size_t j = c.size(); j-- > 0;) acc = acc * y + c[j];
        best = std::max(best, std::fabs(acc));
    }
    return best;
}

ParametricPolyQ a2_band_series(const BivariatePoly& phi, const Rational& x_a) {
    Rational S = abs(phi.dx().dx().eval(x_a, Rational(0)));
    if (S == 0) throw std::domain_error("a2_band_series: phi_xx vanishes at the anchor point");
    UPolyQ one = UPolyQ::constant(Rational(1)), zero, w2 = UPolyQ::monomial(Rational(1), 2);
    ParametricPolyQ p = ParametricPolyQ::from_poly(phi);
    return p.affine_substituted(one, zero, UPolyQ::constant(x_a), zero, w2, w2, 1 << 20)
        .scaled(Rational(1) / S)
        .without_linear_part();
}

namespace detail {

void cylinder_tiled(const CylinderJob& job, const ParametricPoly<double>& tau, int l, const Box& dom,
                    const AffineMap& rel, int depth, const EngineContext& ctx) {
    Recursion r;
    r.w = std::sqrt(job.sigma);
    r.M_bound = ctx.cfg->M_bound;
    r.max_recursion = ctx.cfg->max_recursion;
    r.max_mu = ctx.max_mu;
    r.leaf = [&](const Parallelogram& p, int leaf_depth, double) {
        // The leaf itself, not its enclosing rectangle: the rectangle's tilt pushes it across the band
        // edge y = 0 into the mirrored quadrant. Long slanted side first.
        Parallelogram q{p.origin, p.edge2, p.edge1};
        if (q.degenerate()) return;
        AffineMap G = job.top.compose(q.unit_map());
        tile_frame(*job.phi, G, Box{0, 1, 0, 1}, ctx, job.tag, job.band, job.sigma_report, leaf_depth, job.cls);
    };
    r.run(tau, l, dom, rel, depth, 0);
}

}  // namespace detail

}  // namespace mhdec
