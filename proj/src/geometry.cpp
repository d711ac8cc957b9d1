#include "mhdec/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace mhdec {

double Vec2::norm() const { return std::hypot(x, y); }

AffineMap AffineMap::compose(const AffineMap& in) const {
    AffineMap r;
    const auto& a = linear;
    const auto& b = in.linear;
    r.linear = {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
    r.shift = apply(in.shift);
    return r;
}

AffineMap AffineMap::inverse() const {
    double d = det();
    if (d == 0 || !std::isfinite(d)) throw std::domain_error("affine map is not invertible");
    AffineMap r;
    r.linear = {linear[3] / d, -linear[1] / d, -linear[2] / d, linear[0] / d};
    Vec2 t = r.apply_linear(shift);
    r.shift = {-t.x, -t.y};
    return r;
}

double AffineMap::condition_number() const {
    // Singular values of a 2x2 matrix from its Frobenius norm and determinant.
    double f2 = linear[0] * linear[0] + linear[1] * linear[1] + linear[2] * linear[2] + linear[3] * linear[3];
    double d = std::fabs(det());
    double disc = std::sqrt(std::max(0.0, f2 * f2 - 4 * d * d));
    double smax = std::sqrt((f2 + disc) / 2), smin2 = (f2 - disc) / 2;
    double smin = smin2 > 0 ? std::sqrt(smin2) : d / smax;
    return smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
}

NumPoly compose(const NumPoly& phi, const AffineMap& T) {
    return phi.compose_affine(T.linear[0], T.linear[1], T.linear[2], T.linear[3], T.shift.x, T.shift.y);
}

double Parallelogram::area() const { return std::fabs(signed_area()); }

bool Parallelogram::degenerate() const { return area() <= 1e-30; }

Box Parallelogram::bbox() const {
    auto c = corners();
    Box b{c[0].x, c[0].x, c[0].y, c[0].y};
    for (const auto& p : c) {
        b.x0 = std::min(b.x0, p.x);
        b.x1 = std::max(b.x1, p.x);
        b.y0 = std::min(b.y0, p.y);
        b.y1 = std::max(b.y1, p.y);
    }
    return b;
}

double Parallelogram::diameter() const { return std::max((edge1 + edge2).norm(), (edge1 - edge2).norm()); }

Vec2 Parallelogram::local(Vec2 p) const {
    double d = signed_area();
    Vec2 q = p - origin;
    return {cross(q, edge2) / d, cross(edge1, q) / d};
}

bool Parallelogram::contains(Vec2 p, double tol) const {
    Vec2 uv = local(p);
    return uv.x >= -tol && uv.x <= 1 + tol && uv.y >= -tol && uv.y <= 1 + tol;
}

Parallelogram Parallelogram::mapped(const AffineMap& T) const {
    return {T.apply(origin), T.apply_linear(edge1), T.apply_linear(edge2)};
}

double CurveSpec::gamma(double x) const { return sign * std::pow(lambda, -1.0 / r) * std::pow(x, double(s) / r); }

double CurveSpec::dgamma(double x) const {
    double e = double(s) / r;
    return sign * std::pow(lambda, -1.0 / r) * e * std::pow(x, e - 1);
}

double CurveSpec::ddgamma(double x) const {
    double e = double(s) / r;
    return sign * std::pow(lambda, -1.0 / r) * e * (e - 1) * std::pow(x, e - 2);
}

double CurveSpec::inverse(double y) const {
    return std::pow(y / (sign * std::pow(lambda, -1.0 / r)), double(r) / s);
}

bool CurvedBand::contains(Vec2 p, double tol) const {
    if (p.x < x_lo - tol || p.x > x_hi + tol) return false;
    double t = p.y - curve.gamma(p.x);
    return t >= j_lo - tol && t <= j_hi + tol;
}

double curve_C_rs(const CurveSpec& c, double x_lo, double x_hi) {
    // |gamma''| is monotone on (0, inf) for power curves.
    return std::max(std::fabs(c.ddgamma(x_lo)), std::fabs(c.ddgamma(x_hi))) + 1;
}

FlatnessReport flatness(const NumPoly& phi, const Parallelogram& region, double delta, int grid_n, bool with_bound) {
    if (grid_n < 3) throw std::invalid_argument("grid_n must be at least 3");
    FlatnessReport rep;
    // Work in the region's affine coordinates; the deviation is invariant under this change of variables.
    NumPoly L = compose(phi, region.unit_map()).without_linear();
    int n = grid_n;
    std::vector<double> v(n * n), gx(n * n), gy(n * n), us(n * n), vs(n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            int k = i * n + j;
            us[k] = double(i) / (n - 1);
            vs[k] = double(j) / (n - 1);
            Jet2 J = L.jet(us[k], vs[k]);
            v[k] = J.v;
            gx[k] = J.gx;
            gy[k] = J.gy;
        }
    int bu = 0, bv = 0;
    double best = 0;
    for (int a = 0; a < n * n; ++a)
        for (int b = 0; b < n * n; ++b) {
            double d = std::fabs(v[b] - v[a] - gx[a] * (us[b] - us[a]) - gy[a] * (vs[b] - vs[a]));
            if (d > best) {
                best = d;
                bu = a;
                bv = b;
            }
        }
    rep.sup_deviation = best;
    rep.ratio = delta > 0 ? best / delta : std::numeric_limits<double>::infinity();
    rep.samples = long(n) * n * n * n;
    AffineMap U = region.unit_map();
    rep.argmax_pair = {U.apply({us[bu], vs[bu]}), U.apply({us[bv], vs[bv]})};
    if (with_bound) {
        auto sb = phi.second_derivative_bounds(region.bbox());
        double diam = region.diameter();
        rep.second_order_bound = 0.5 * (std::max(sb.sxx, sb.syy) + sb.sxy) * diam * diam;
    }
    return rep;
}

FlatnessReport flatness(const BivariatePoly& phi, const Parallelogram& region, double delta, int grid_n) {
    return flatness(NumPoly::from_exact(phi), region, delta, grid_n);
}

std::pair<FlatnessReport, FlatnessReport> flatness_affine_invariance(const NumPoly& phi, const Parallelogram& region,
                                                                    const AffineMap& T, double delta, int grid_n) {
    // phi o T^{-1} expanded about o = T(region.origin): v -> region.origin + A^{-1} v. Expanding about
    // the plane origin instead cancels terms of size |A^{-1} t|^deg and loses digits when T is ill-conditioned.
    Vec2 o = T.apply(region.origin);
    AffineMap inv = T.inverse();
    NumPoly moved = compose(phi, AffineMap{inv.linear, region.origin});
    Parallelogram image = region.mapped(T);
    FlatnessReport b = flatness(moved, Parallelogram{{0, 0}, image.edge1, image.edge2}, delta, grid_n);
    for (Vec2& p : b.argmax_pair) p = p + o;
    return {flatness(phi, region, delta, grid_n), b};
}

Parallelogram band_to_parallelogram(double x0, double sigma, const CurveSpec& curve, double C, bool check) {
    if (!(sigma > 0)) throw std::invalid_argument("sigma must be positive");
    double h = std::sqrt(sigma);
    bool convex = curve.ddgamma(x0) >= 0;
    double lo = convex ? C * sigma : 0.5 * (C + 1) * sigma;
    double hi = convex ? 2 * C * sigma : (C + 1) * sigma;
    Parallelogram P{{x0, curve.gamma(x0) + lo}, {0, hi - lo}, {h, h * curve.dgamma(x0)}};
    if (check) {
        // Sandwich R(I, [C s, (C+1) s]) inside P inside R(I, [s, 2 C s]).
        const int m = 32;
        CurvedBand inner{x0, x0 + h, C * sigma, (C + 1) * sigma, curve};
        CurvedBand outer{x0, x0 + h, sigma, 2 * C * sigma, curve};
        double tol = 1e-9;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                double a = (i + 0.5) / m, b = (j + 0.5) / m;
                Vec2 p = P.origin + a * P.edge1 + b * P.edge2;
                if (!outer.contains(p, tol * sigma)) throw std::logic_error("band parallelogram leaves the outer band; C_rs too small");
                double x = x0 + b * h;
                Vec2 q{x, curve.gamma(x) + inner.j_lo + a * (inner.j_hi - inner.j_lo)};
                if (!P.contains(q, tol)) throw std::logic_error("band parallelogram misses the inner band; C_rs too small");
            }
    }
    return P;
}

PieceLocator::PieceLocator(const std::vector<Parallelogram>& pieces, const Box& domain, int cells)
    : pieces_(pieces), domain_(domain) {
    n_ = cells > 0 ? cells : std::clamp(int(std::sqrt(double(pieces.size()))), 8, 2048);
    double cw = (domain.x1 - domain.x0) / n_, ch = (domain.y1 - domain.y0) / n_;
    auto range = [&](const Parallelogram& p, int& i0, int& i1, int& j0, int& j1) {
        Box b = p.bbox();
        i0 = std::max(0, int(std::floor((b.x0 - domain.x0) / cw)));
        i1 = std::min(n_ - 1, int(std::floor((b.x1 - domain.x0) / cw)));
        j0 = std::max(0, int(std::floor((b.y0 - domain.y0) / ch)));
        j1 = std::min(n_ - 1, int(std::floor((b.y1 - domain.y0) / ch)));
    };
    std::vector<std::uint32_t> count(std::size_t(n_) * n_ + 1, 0);
    for (const auto& p : pieces) {
        int i0, i1, j0, j1;
        range(p, i0, i1, j0, j1);
        for (int i = i0; i <= i1; ++i)
            for (int j = j0; j <= j1; ++j) ++count[std::size_t(i) * n_ + j + 1];
    }
    for (std::size_t k = 1; k < count.size(); ++k) count[k] += count[k - 1];
    start_ = count;
    items_.resize(count.back());
    std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
    for (std::uint32_t idx = 0; idx < pieces.size(); ++idx) {
        int i0, i1, j0, j1;
        range(pieces[idx], i0, i1, j0, j1);
        for (int i = i0; i <= i1; ++i)
            for (int j = j0; j <= j1; ++j) items_[fill[std::size_t(i) * n_ + j]++] = idx;
    }
}

int PieceLocator::multiplicity(Vec2 p, double tol) const {
    double cw = (domain_.x1 - domain_.x0) / n_, ch = (domain_.y1 - domain_.y0) / n_;
    int i = std::clamp(int(std::floor((p.x - domain_.x0) / cw)), 0, n_ - 1);
    int j = std::clamp(int(std::floor((p.y - domain_.y0) / ch)), 0, n_ - 1);
    std::size_t c = std::size_t(i) * n_ + j;
    int m = 0;
    for (std::uint32_t k = start_[c]; k < start_[c + 1]; ++k)
        if (pieces_[items_[k]].contains(p, tol)) ++m;
    return m;
}

CoverageReport coverage_and_overlap(const std::vector<Parallelogram>& pieces, const Box& domain, long n_samples,
                                    std::uint64_t seed) {
    CoverageReport rep;
    PieceLocator loc(pieces, domain);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(domain.x0, domain.x1), uy(domain.y0, domain.y1);
    long covered = 0;
    for (long k = 0; k < n_samples; ++k) {
        Vec2 p{ux(rng), uy(rng)};
        int m = loc.multiplicity(p);
        ++rep.histogram[m];
        if (m > 0) {
            ++covered;
        } else if (!rep.has_uncovered) {
            rep.has_uncovered = true;
            rep.first_uncovered = p;
        }
        rep.max_multiplicity = std::max(rep.max_multiplicity, m);
    }
    rep.samples = n_samples;
    rep.covered_fraction = n_samples > 0 ? double(covered) / n_samples : 0;
    return rep;
}

Parallelogram enclosing_rectangle(const Parallelogram& p, double* inflation) {
    if (p.degenerate()) throw std::domain_error("degenerate parallelogram has no enclosing rectangle");
    double len = p.edge1.norm();
    Vec2 e = (1.0 / len) * p.edge1;
    // Any direction lies within pi/4 of an axis; reject only non-finite input here.
    if (!std::isfinite(e.x) || !std::isfinite(e.y)) throw std::domain_error("edge direction is not finite");
    Vec2 n{-e.y, e.x};
    double pmin = 1e300, pmax = -1e300, qmin = 1e300, qmax = -1e300;
    for (const auto& c : p.corners()) {
        double a = dot(c, e), b = dot(c, n);
        pmin = std::min(pmin, a);
        pmax = std::max(pmax, a);
        qmin = std::min(qmin, b);
        qmax = std::max(qmax, b);
    }
    Parallelogram r{pmin * e + qmin * n, (pmax - pmin) * e, (qmax - qmin) * n};
    if (inflation) *inflation = r.area() / p.area();
    return r;
}

std::string svg_path(const Parallelogram& p) {
    auto c = p.corners();
    char buf[256];
    std::snprintf(buf, sizeof buf, "M%.6g %.6gL%.6g %.6gL%.6g %.6gL%.6g %.6gZ", c[0].x, -c[0].y, c[1].x, -c[1].y, c[2].x,
                  -c[2].y, c[3].x, -c[3].y);
    return buf;
}

}  // namespace mhdec
