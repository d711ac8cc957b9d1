#include <algorithm>
#include <cmath>

#include "engine_internal.hpp"

namespace mhdec {

namespace detail {

namespace {

using SeriesD = UPoly<double>;

struct Hess {
    double xx, xy, yy;
};

// Third derivatives needed by the family bounds.
struct Derivs3 {
    NumPoly xx, xy, yy, xxx, xxy, xyy;
    explicit Derivs3(const NumPoly& p) {
        NumPoly px = p.dx(), py = p.dy();
        xx = px.dx();
        xy = px.dy();
        yy = py.dy();
        xxx = xx.dx();
        xxy = xx.dy();
        xyy = xy.dy();
    }
};

// Family A_l bounds sampled on an n x n grid over a box.
void check_family(ScaleCheck& chk, const NumPoly& tau, double sigma, int l, const Box& b, int n) {
    Derivs3 d(tau);
    double xx_lo = INFINITY, xx_hi = 0, xy = 0, xxy = 0, det = 0, ddet = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double x = b.x0 + (b.x1 - b.x0) * i / (n - 1), y = b.y0 + (b.y1 - b.y0) * j / (n - 1);
            double txx = d.xx.eval(x, y), txy = d.xy.eval(x, y), tyy = d.yy.eval(x, y);
            double txxx = d.xxx.eval(x, y), txxy = d.xxy.eval(x, y), txyy = d.xyy.eval(x, y);
            xx_lo = std::min(xx_lo, std::fabs(txx));
            xx_hi = std::max(xx_hi, std::fabs(txx));
            xy = std::max(xy, std::fabs(txy));
            xxy = std::max(xxy, std::fabs(txxy));
            det = std::max(det, std::fabs(txx * tyy - txy * txy));
            ddet = std::max(ddet, std::fabs(txxx * tyy + txx * txyy - 2 * txy * txxy));
        }
    double sl = std::pow(sigma, l);
    chk.sim("|tau_xx|", xx_lo, xx_hi);
    chk.lesssim("|tau_xy| / sigma", xy / sigma);
    chk.lesssim("|tau_xxy| / sigma", xxy / sigma);
    chk.lesssim("|det D^2 tau| / sigma^l", det / sl);
    chk.lesssim("|d_x det D^2 tau| / sigma^l", ddet / sl);
}

// Tangent parallelogram over [x0, x0 + width] holding every point with y - gamma(x) in [t_lo, t_hi].
Parallelogram cover_strip(const CurveSpec& g, double x0, double width, double t_lo, double t_hi) {
    double g0 = g.gamma(x0), d0 = g.dgamma(x0);
    // gamma'' has constant sign, so the deviation from the tangent is monotone in x - x0.
    double dev = g.gamma(x0 + width) - g0 - d0 * width;
    double o_lo = t_lo + std::min(0.0, dev), o_hi = t_hi + std::max(0.0, dev);
    return Parallelogram{{x0, g0 + o_lo}, {width, width * d0}, {0, o_hi - o_lo}};
}

// Classifier against {x in [xa, xb], y - gamma(x) in [t_lo, t_hi]}.
Classifier band_classifier(const CurveSpec& g, double xa, double xb, double t_lo, double t_hi) {
    return [=](const Parallelogram& p) {
        Box bb = p.bbox();
        if (bb.x1 < xa || bb.x0 > xb) return RegionClass::Drop;
        double tmin = INFINITY, tmax = -INFINITY;
        for (Vec2 c : p.corners()) {
            double t = c.y - g.gamma(std::max(c.x, 1e-300));
            tmin = std::min(tmin, t);
            tmax = std::max(tmax, t);
        }
        // y - gamma(x) has |second x-derivative| <= Gamma; interior excess is at most Gamma/4 * dx^2.
        double x_lo = std::max(bb.x0, 1e-300);
        double G = std::max(std::fabs(g.ddgamma(x_lo)), std::fabs(g.ddgamma(bb.x1)));
        double slack = 0.25 * G * (bb.x1 - bb.x0) * (bb.x1 - bb.x0);
        if (tmax + slack < t_lo || tmin - slack > t_hi) return RegionClass::Drop;
        if (bb.x0 >= xa && bb.x1 <= xb && tmin - slack >= t_lo && tmax + slack <= t_hi) return RegionClass::Keep;
        return RegionClass::Mixed;
    };
}

// Strips of the neighborhood with t in [t_lo, t_hi], tiled directly.
void tile_curve_strips(const NumPoly& phi, const CurveRegion& R, double width, double t_lo, double t_hi,
                       const EngineContext& ctx, CaseTag tag, int band, double sigma) {
    double L = R.x_hi - R.x_lo;
    long n = std::max(1L, static_cast<long>(std::ceil(L / width - 1e-9)));
    double ww = L / n;
    for (long i = 0; i < n; ++i) {
        double x0 = R.x_lo + i * ww;
        Parallelogram P = cover_strip(R.curve, x0, ww, t_lo, t_hi);
        tile_frame(phi, P.unit_map(), Box{0, 1, 0, 1}, ctx, tag, band, sigma, 0,
                   band_classifier(R.curve, x0, x0 + ww, t_lo, t_hi));
    }
}

// Strip of band [t_lo, t_hi] with sigma = t_lo / C, width ww <= sigma^{1/2}.
Parallelogram band_strip(const CurveSpec& g, double x0, double sigma, double ww, double C) {
    // band_to_parallelogram puts the vertical side first; strips want the tangent side first.
    Parallelogram P = band_to_parallelogram(x0, sigma, g, C, false);
    return Parallelogram{P.origin, {ww, ww * g.dgamma(x0)}, P.edge1};
}

// psi = phi restricted to a tangent-parallelogram frame, divided by sigma and normalized so tau_xx(0,0) = 1,
// with frame entries written as series in w = sigma^{1/4}.
ParametricPoly<double> curve_series(const ParametricPoly<double>& PP, const CurveSpec& g, const Parallelogram& P,
                                    double sigma, int N, double* scale) {
    double x0 = P.origin.x, g0 = g.gamma(x0);
    double nu = P.edge1.x / std::sqrt(sigma);
    double k_lo = (P.origin.y - g0) / sigma, k = P.edge2.y / sigma;
    SeriesD a11 = wmono(nu, 2), a21 = wmono(nu * g.dgamma(x0), 2), a22 = wmono(k, 4);
    SeriesD b1 = wconst(x0), b2 = wconst(g0) + wmono(k_lo, 4);
    ParametricPoly<double> psi =
        PP.affine_substituted(a11, SeriesD(), b1, a21, a22, b2, N + 4).without_linear_part().divided_by_w(4).truncated(N);
    double txx = 2 * psi.coeff(2, 0).coeff(0);
    if (!(std::fabs(txx) > 0))
        throw EstimateViolation("curve-band tangential curvature", "psi_xx vanishes at the strip base x0 = " +
                                                                        std::to_string(x0));
    *scale = std::fabs(txx);
    return psi.scaled(1.0 / std::fabs(txx));
}

}  // namespace

void engine_A1(const NumPoly& phi, int k, const AxisRegion& R, const EngineContext& ctx) {
    const double delta = ctx.delta;
    const double s1 = std::pow(delta, 1.0 / k);
    const Box whole{R.x_lo, R.x_hi, 0, R.c};
    if (s1 >= R.c) {
        tile_frame(phi, AffineMap::identity(), whole, ctx, CaseTag::A1, 0, s1, 0);
        return;
    }
    tile_frame(phi, AffineMap::identity(), Box{R.x_lo, R.x_hi, 0, s1}, ctx, CaseTag::A1, 0, s1, 0);
    ScaleCheck chk("axis factor y^k: S = K / y^(2k-2) bounded below", ctx.cfg->sim_factor);
    for (int j = 1;; ++j) {
        double sigma = std::ldexp(s1, j - 1);
        if (sigma >= R.c) break;
        double ytop = std::min(2 * sigma, R.c);
        if (ctx.cfg->verify_inline) {
            double lo = INFINITY, hi = 0;
            for (int i = 0; i < 16; ++i)
                for (int m = 0; m < 4; ++m) {
                    double x = R.x_lo + (R.x_hi - R.x_lo) * i / 15, y = sigma + (ytop - sigma) * m / 3;
                    Jet2 J = phi.jet(x, y);
                    double S = (J.hxx * J.hyy - J.hxy * J.hxy) / std::pow(y, 2 * k - 2);
                    lo = std::min(lo, std::fabs(S));
                    hi = std::max(hi, std::fabs(S));
                }
            chk.sim("|S|", lo, hi);
        }
        // psi(x, y) = sigma^{-k} phi(x, sigma y) on [x_lo, x_hi] x [1, ytop / sigma]
        tile_frame(phi, AffineMap::diagonal(1, sigma), Box{R.x_lo, R.x_hi, 1, ytop / sigma}, ctx, CaseTag::A1, j, sigma, 0);
    }
}

void engine_A2(const NumPoly& phi, int k, const AxisRegion& R, const EngineContext& ctx) {
    const int l = k + 2;
    const double delta = ctx.delta;
    const double s0 = std::pow(delta, 1.0 / l);
    if (s0 >= R.c) {
        tile_frame(phi, AffineMap::identity(), Box{R.x_lo, R.x_hi, 0, R.c}, ctx, CaseTag::A2, 0, s0, 0);
        return;
    }
    const double L = R.x_hi - R.x_lo;
    const double S = std::fabs(phi.jet(R.x_lo, 0).hxx);
    if (!(S > 0)) throw EstimateViolation("axis case A2 structure", "phi_xx(x_lo, 0) vanishes");
    const int N = 2 * l + 2;
    const ParametricPoly<double> PP = ParametricPoly<double>::from_num(phi);
    const SeriesD one = wconst(1), zero, w2 = wmono(1, 2);

    // R0: tau = phi(x_lo + x, sigma0 y) / S - linear on [0, L] x [0, 1].
    {
        ParametricPoly<double> tau =
            PP.affine_substituted(one, zero, wconst(R.x_lo), zero, w2, zero, N).scaled(1 / S).without_linear_part();
        CylinderJob job{&phi, AffineMap{{1, 0, 0, s0}, {R.x_lo, 0}}, l, s0, CaseTag::A2, 0, s0, {}};
        cylinder_tiled(job, tau, l, Box{0, L, 0, 1}, AffineMap::identity(), 0, ctx);
    }
    ScaleCheck chk("family A_l derivative bounds", ctx.cfg->sim_factor);
    ScaleCheck chk_wide("family A_l derivative bounds on the enlarged domain", ctx.cfg->sim_factor);
    bool wide_ok = true;
    for (int j = 1;; ++j) {
        double sigma = std::ldexp(s0, j - 1);
        if (sigma >= R.c) break;
        double ytop = std::min(2 * sigma, R.c);
        double H = ytop / sigma - 1;
        ParametricPoly<double> tau =
            PP.affine_substituted(one, zero, wconst(R.x_lo), zero, w2, w2, N).scaled(1 / S).without_linear_part();
        if (ctx.cfg->verify_inline) {
            NumPoly tn = tau.specialize_num(std::sqrt(sigma));
            check_family(chk, tn, sigma, l, Box{0, L, 0, H}, 9);
            if (wide_ok) {
                try {
                    check_family(chk_wide, tn, sigma, l, Box{-L / 2, 1.5 * L, 0, H}, 9);
                } catch (const EstimateViolation& e) {
                    wide_ok = false;
                    ctx.warnings->push_back(std::string("enlarged-domain check: ") + e.what());
                }
            }
        }
        CylinderJob job{&phi, AffineMap{{1, 0, 0, sigma}, {R.x_lo, sigma}}, l, sigma, CaseTag::A2, j, sigma, {}};
        cylinder_tiled(job, tau, l, Box{0, L, 0, H}, AffineMap::identity(), 0, ctx);
    }
}

void engine_B1(const NumPoly& phi, int k, const CurveRegion& R, const EngineContext& ctx) {
    const double delta = ctx.delta;
    const double t0 = std::pow(delta, 1.0 / k);
    if (t0 >= R.c) {
        tile_curve_strips(phi, R, std::sqrt(R.c), 0, R.c, ctx, CaseTag::B1, 0, R.c);
        return;
    }
    tile_curve_strips(phi, R, std::sqrt(t0), 0, t0, ctx, CaseTag::B1, 0, t0);
    const double C = curve_C_rs(R.curve, R.x_lo, R.x_hi);
    const double cd = 1 + 1 / C;
    const double L = R.x_hi - R.x_lo;
    ScaleCheck chk("curve-band estimates for a squared curve factor", ctx.cfg->sim_factor);
    double t_lo = t0;
    for (int j = 1; t_lo < R.c; ++j, t_lo *= cd) {
        double t_hi = std::min(t_lo * cd, R.c);
        double sigma = t_lo / C;
        long n = std::max(1L, static_cast<long>(std::ceil(L / std::sqrt(sigma) - 1e-9)));
        double ww = L / n;
        for (long i = 0; i < n; ++i) {
            double x0 = R.x_lo + i * ww;
            if (ctx.cfg->verify_inline && (i == 0 || i == n - 1 || i == n / 2)) {
                B1Estimates e = b1_estimates(phi, R.curve, x0, sigma, k, C);
                chk.lesssim("|psi_xx| / sigma^(k-1)", e.psi_xx_over);
                chk.sim("|psi_yy| / sigma^(k-2)", e.psi_yy_min, e.psi_yy_max);
                if (k >= 2 && e.det_max > 0) chk.sim("|det D^2 psi| / sigma^(2k-3)", e.det_min, e.det_max);
            }
            Parallelogram P = band_strip(R.curve, x0, sigma, ww, C);
            tile_frame(phi, P.unit_map(), Box{0, 1, 0, 1}, ctx, CaseTag::B1, j, sigma, 0,
                       band_classifier(R.curve, x0, x0 + ww, t_lo, t_hi));
        }
    }
}

void engine_B2(const NumPoly& phi, int k, const CurveRegion& R, const EngineContext& ctx) {
    const double delta = ctx.delta;
    const double t0 = std::pow(delta, 1.0 / (k + 2));
    if (t0 >= R.c) {
        tile_curve_strips(phi, R, std::sqrt(R.c), 0, R.c, ctx, CaseTag::B2, 0, R.c);
        return;
    }
    const int l = 2 * k + 2;
    const int N = 2 * l + 2;
    const double L = R.x_hi - R.x_lo;
    const ParametricPoly<double> PP = ParametricPoly<double>::from_num(phi);
    ScaleCheck chk("curve-band tangential curvature for a simple curve factor", ctx.cfg->sim_factor);
    auto run_strip = [&](const Parallelogram& P, double sigma, int band, const Classifier& cls) {
        double scale = 0;
        ParametricPoly<double> tau = curve_series(PP, R.curve, P, sigma, N, &scale);
        if (ctx.cfg->verify_inline && band > 0) chk.sim("|psi_xx| at the strip base", scale, scale);
        // Family parameter sigma^{1/2}, series variable sigma^{1/4}.
        CylinderJob job{&phi, P.unit_map(), l, std::sqrt(sigma), CaseTag::B2, band, sigma, cls};
        cylinder_tiled(job, tau, l, Box{0, 1, 0, 1}, AffineMap::identity(), 0, ctx);
    };
    // R0: strips of width t0^{1/2} covering t in [0, t0].
    {
        long n = std::max(1L, static_cast<long>(std::ceil(L / std::sqrt(t0) - 1e-9)));
        double ww = L / n;
        for (long i = 0; i < n; ++i) {
            double x0 = R.x_lo + i * ww;
            run_strip(cover_strip(R.curve, x0, ww, 0, t0), t0, 0, band_classifier(R.curve, x0, x0 + ww, 0, t0));
        }
    }
    const double C = curve_C_rs(R.curve, R.x_lo, R.x_hi);
    const double cd = 1 + 1 / C;
    double t_lo = t0;
    for (int j = 1; t_lo < R.c; ++j, t_lo *= cd) {
        double t_hi = std::min(t_lo * cd, R.c);
        double sigma = t_lo / C;
        long n = std::max(1L, static_cast<long>(std::ceil(L / std::sqrt(sigma) - 1e-9)));
        double ww = L / n;
        for (long i = 0; i < n; ++i) {
            double x0 = R.x_lo + i * ww;
            run_strip(band_strip(R.curve, x0, sigma, ww, C), sigma, j, band_classifier(R.curve, x0, x0 + ww, t_lo, t_hi));
        }
    }
}

}  // namespace detail

B1Estimates b1_estimates(const NumPoly& phi, const CurveSpec& g, double x0, double sigma, int k, double C_rs) {
    B1Estimates e;
    e.psi_yy_min = e.det_min = INFINITY;
    const double d0 = g.dgamma(x0), h = std::sqrt(sigma);
    const int n = 6;
    for (int i = 0; i < n; ++i)
        for (int m = 0; m < n; ++m) {
            double x = x0 + h * i / (n - 1);
            double t = C_rs * sigma + sigma * m / (n - 1);
            Jet2 J = phi.jet(x, g.gamma(x) + t);
            // Hessian of phi(x, y + gamma(x0) + gamma'(x0)(x - x0)).
            double pxx = J.hxx + 2 * d0 * J.hxy + d0 * d0 * J.hyy;
            double pyy = J.hyy;
            double det = J.hxx * J.hyy - J.hxy * J.hxy;
            e.psi_xx_over = std::max(e.psi_xx_over, std::fabs(pxx) / std::pow(sigma, k - 1));
            double yy = std::fabs(pyy) / std::pow(sigma, k - 2);
            e.psi_yy_min = std::min(e.psi_yy_min, yy);
            e.psi_yy_max = std::max(e.psi_yy_max, yy);
            double dd = std::fabs(det) / std::pow(sigma, 2 * k - 3);
            e.det_min = std::min(e.det_min, dd);
            e.det_max = std::max(e.det_max, dd);
        }
    return e;
}

}  // namespace mhdec
