#include <cmath>
#include <numeric>

#include "mhdec/numpoly.hpp"
#include "mhdec/polyalg.hpp"

namespace mhdec {

std::optional<MixedHomogeneity> detect_mixed_homogeneity(const BivariatePoly& phi) {
    if (phi.is_zero()) return std::nullopt;
    auto it = phi.terms.begin();
    const Exponent e0 = it->first;
    if (phi.terms.size() == 1) {
        // Minimal r + s is 2, i.e. r = s = 1.
        if (e0.first + e0.second == 0) return std::nullopt;
        return MixedHomogeneity{e0.first + e0.second, 1, 1};
    }
    int r = 0, s = 0;
    for (++it; it != phi.terms.end(); ++it) {
        int da = it->first.first - e0.first, db = it->first.second - e0.second;
        if (r == 0) {
            // r*da + s*db = 0 with r, s > 0 forces opposite signs.
            if (!((da > 0 && db < 0) || (da < 0 && db > 0))) return std::nullopt;
            int g = std::gcd(std::abs(da), std::abs(db));
            r = std::abs(db) / g;
            s = std::abs(da) / g;
        } else if (r * da + s * db != 0) {
            return std::nullopt;
        }
    }
    int q = r * e0.first + s * e0.second;
    if (q <= 0) return std::nullopt;
    return MixedHomogeneity{q, r, s};
}

bool verify_determinant_weight(const BivariatePoly& phi, const MixedHomogeneity& mh) {
    BivariatePoly K = hessian_determinant(phi);
    int target = 2 * (mh.q - (mh.r + mh.s));
    for (const auto& [e, c] : K.terms)
        if (mh.r * e.first + mh.s * e.second != target) return false;
    return true;
}

namespace {

struct LatticeForm {
    int nu1 = 0, nu2 = 0, n = 0;
    UPolyQ H;  // H(t, 1), t standing for x^s / y^r
};

LatticeForm lattice_form(const BivariatePoly& phi, const MixedHomogeneity& mh) {
    if (phi.is_zero()) throw std::invalid_argument("zero polynomial has no lattice form");
    LatticeForm L;
    L.nu1 = phi.min_x_exponent();
    L.nu2 = phi.min_y_exponent();
    int qr = mh.q - mh.r * L.nu1 - mh.s * L.nu2;
    if (qr % (mh.r * mh.s) != 0) throw std::logic_error("exponents do not fit the x^s/y^r lattice");
    L.n = qr / (mh.r * mh.s);
    std::vector<Rational> c(L.n + 1, Rational(0));
    for (const auto& [e, v] : phi.terms) {
        int a = e.first - L.nu1, b = e.second - L.nu2;
        if (a % mh.s != 0 || b % mh.r != 0 || a / mh.s + b / mh.r != L.n)
            throw std::logic_error("exponents do not fit the x^s/y^r lattice");
        c[a / mh.s] = v;
    }
    L.H = UPolyQ(c);
    return L;
}

BivariatePoly homogenize(const UPolyQ& h, int n, const MixedHomogeneity& mh) {
    BivariatePoly p;
    for (int i = 0; i <= h.degree(); ++i)
        if (h.coeff(i) != 0) p.add_term(mh.s * i, mh.r * (n - i), h.coeff(i));
    return p;
}

}  // namespace

HomogeneousFactorization factorize_mixed_homogeneous(const BivariatePoly& phi, const MixedHomogeneity& mh,
                                                     const Rational& max_width) {
    LatticeForm L = lattice_form(phi, mh);
    HomogeneousFactorization f;
    f.nu1 = L.nu1;
    f.nu2 = L.nu2;
    f.h_univariate = L.H;
    f.h_degree = L.n;
    UPolyQ rest = L.H;
    auto parts = squarefree_decomposition(L.H);
    for (std::size_t m = 0; m < parts.size(); ++m) {
        for (auto& root : isolate_real_roots(parts[m], max_width)) {
            f.curve_factors.push_back({root, static_cast<int>(m + 1)});
            UPolyQ lin({-root.midpoint(), Rational(1)});
            for (std::size_t i = 0; i <= m; ++i) {
                UPolyQ q, r;
                UPolyQ::divmod(rest, lin, q, r);
                rest = q;
            }
        }
    }
    std::sort(f.curve_factors.begin(), f.curve_factors.end(),
              [](const CurveFactor& a, const CurveFactor& b) { return a.lambda.lo < b.lambda.lo; });
    int removed = 0;
    for (const auto& cf : f.curve_factors) removed += cf.multiplicity;
    f.residual = homogenize(rest, L.n - removed, mh);
    return f;
}

BivariatePoly curve_polynomial(const Rational& lambda, const MixedHomogeneity& mh) {
    return BivariatePoly::monomial(1, mh.s, 0) - BivariatePoly::monomial(lambda, 0, mh.r);
}

BivariatePoly reassemble(const HomogeneousFactorization& f, const MixedHomogeneity& mh) {
    BivariatePoly p = BivariatePoly::monomial(1, f.nu1, f.nu2);
    for (const auto& cf : f.curve_factors) p = p * pow(curve_polynomial(cf.lambda.midpoint(), mh), cf.multiplicity);
    return p * f.residual;
}

int divisibility_order(const BivariatePoly& phi, const BivariatePoly& factor) {
    if (factor.is_zero() || factor.is_constant()) throw std::invalid_argument("factor must be non-constant");
    if (phi.is_zero()) throw std::invalid_argument("zero polynomial has unbounded divisibility order");
    int k = 0;
    BivariatePoly cur = phi;
    while (auto q = exact_divide(cur, factor)) {
        cur = std::move(*q);
        ++k;
    }
    return k;
}

int curve_divisibility_order(const BivariatePoly& phi, const MixedHomogeneity& mh, const RealAlgebraic& lambda) {
    UPolyQ f = lattice_form(phi, mh).H;
    int k = 0;
    while (!f.is_zero() && lambda.is_root_of(f)) {
        ++k;
        f = f.derivative();
    }
    return k;
}

AxisCase classify_axis_case(const BivariatePoly& phi, const MixedHomogeneity& mh) {
    int k = divisibility_order(phi, BivariatePoly::y());
    if (k >= 2) return AxisCaseA1{k};
    if (mh.q % mh.r != 0) throw std::logic_error("structural contradiction: no pure x-power in phi");
    int m = mh.q / mh.r;
    Rational C = phi.coeff(m, 0);
    if (C == 0) throw std::logic_error("structural contradiction: phi is not of the form C x^m + y P");
    auto P = exact_divide(phi - BivariatePoly::monomial(C, m, 0), BivariatePoly::y());
    if (!P) throw std::logic_error("structural contradiction: phi - C x^m not divisible by y");
    return AxisCaseA2{C, m, *P};
}

CurveCase classify_curve_case(const BivariatePoly& phi, const MixedHomogeneity& mh, const RealAlgebraic& lambda) {
    int k = curve_divisibility_order(phi, mh, lambda);
    return CurveCase{k >= 2, k};
}

CurveOrderCheck check_prop_curve_order(const BivariatePoly& phi, const MixedHomogeneity& mh, const Rational& lambda, int k,
                                       int samples) {
    CurveOrderCheck out;
    BivariatePoly K = hessian_determinant(phi);
    if (K.is_zero()) return out;
    BivariatePoly g = curve_polynomial(lambda, mh);
    out.order = divisibility_order(K, g);
    BivariatePoly Q = K;
    for (int i = 0; i < out.order; ++i) Q = *exact_divide(Q, g);
    // Points on x^s = lambda y^r: x = t^r, y = lambda^{-1/r} t^s, t in [1, 2^{1/r}].
    double lam = lambda.get_d();
    double tmax = std::pow(2.0, 1.0 / mh.r);
    NumPoly Qn = NumPoly::from_exact(Q);
    for (int i = 0; i < samples; ++i) {
        double t = 1 + (tmax - 1) * i / std::max(1, samples - 1);
        double x = std::pow(t, mh.r), y = std::pow(lam, -1.0 / mh.r) * std::pow(t, mh.s);
        double scale = 0;
        for (const auto& [e, c] : Q.terms) scale += std::fabs(c.get_d()) * std::pow(x, e.first) * std::pow(y, e.second);
        if (std::fabs(Qn.eval(x, y)) > 1e-9 * scale) ++out.nonzero_samples;
    }
    out.ok = out.order == 2 * k - 3 && out.nonzero_samples == samples;
    return out;
}

ConvexityTag convexity_tag(const BivariatePoly& phi) {
    NumPoly pxx = NumPoly::from_exact(phi.dx().dx());
    NumPoly pyy = NumPoly::from_exact(phi.dy().dy());
    NumPoly K = NumPoly::from_exact(hessian_determinant(phi));
    const int n = 201;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double x = -1 + 2.0 * i / (n - 1), y = -1 + 2.0 * j / (n - 1);
            if (pxx.eval(x, y) < 0 || pyy.eval(x, y) < 0 || K.eval(x, y) < 0) return ConvexityTag::NotCertified;
        }
    const int cells = 32;
    for (int i = 0; i < cells; ++i)
        for (int j = 0; j < cells; ++j) {
            Box b{-1 + 2.0 * i / cells, -1 + 2.0 * (i + 1) / cells, -1 + 2.0 * j / cells, -1 + 2.0 * (j + 1) / cells};
            if (pxx.range(b).lo < 0 || pyy.range(b).lo < 0 || K.range(b).lo < 0) return ConvexityTag::NotCertified;
        }
    return ConvexityTag::Convex;
}

const char* to_string(ConvexityTag t) { return t == ConvexityTag::Convex ? "convex" : "not-certified"; }

}  // namespace mhdec
