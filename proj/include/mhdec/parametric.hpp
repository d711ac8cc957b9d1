#pragma once

#include <map>

#include "mhdec/numpoly.hpp"
#include "mhdec/polyalg.hpp"
#include "mhdec/upoly.hpp"

namespace mhdec {

// Bivariate polynomial whose coefficients are polynomials in a parameter w (w = sigma^{1/2}).
// T = Rational for exact work, T = double inside the engine.
template <class T>
class ParametricPoly {
public:
    using Series = UPoly<T>;
    std::map<Exponent, Series> terms;

    static ParametricPoly from_poly(const BivariatePoly& p) {
        ParametricPoly r;
        for (const auto& [e, c] : p.terms) r.add_term(e.first, e.second, Series::constant(scalar_cast<T>(c)));
        return r;
    }

    bool is_zero() const { return terms.empty(); }
    Series coeff(int a, int b) const {
        auto it = terms.find({a, b});
        return it == terms.end() ? Series() : it->second;
    }
    void add_term(int a, int b, const Series& c) {
        if (c.is_zero()) return;
        auto [it, inserted] = terms.emplace(Exponent{a, b}, c);
        if (!inserted) {
            it->second = it->second + c;
            if (it->second.is_zero()) terms.erase(it);
        }
    }

    BivariatePoly specialize(const Rational& w) const
        requires std::is_same_v<T, Rational>
    {
        BivariatePoly p;
        for (const auto& [e, c] : terms) p.add_term(e.first, e.second, c.eval(w));
        return p;
    }

    NumPoly specialize_num(double w) const {
        int deg = 1;
        for (const auto& [e, c] : terms) deg = std::max(deg, e.first + e.second);
        NumPoly p(deg);
        for (const auto& [e, c] : terms) p.at(e.first, e.second) = c.template eval<double>(w);
        return p;
    }

    friend ParametricPoly operator+(const ParametricPoly& p, const ParametricPoly& q) {
        ParametricPoly r = p;
        for (const auto& [e, c] : q.terms) r.add_term(e.first, e.second, c);
        return r;
    }
    friend ParametricPoly operator-(const ParametricPoly& p, const ParametricPoly& q) {
        ParametricPoly r = p;
        for (const auto& [e, c] : q.terms) r.add_term(e.first, e.second, -c);
        return r;
    }
    friend ParametricPoly operator*(const ParametricPoly& p, const ParametricPoly& q) {
        ParametricPoly r;
        for (const auto& [e1, c1] : p.terms)
            for (const auto& [e2, c2] : q.terms) r.add_term(e1.first + e2.first, e1.second + e2.second, c1 * c2);
        return r;
    }
    friend bool operator==(const ParametricPoly& p, const ParametricPoly& q) { return p.terms == q.terms; }

    ParametricPoly truncated(int n) const {
        ParametricPoly r;
        for (const auto& [e, c] : terms) r.add_term(e.first, e.second, c.truncated(n));
        return r;
    }

    ParametricPoly dx() const {
        ParametricPoly r;
        for (const auto& [e, c] : terms)
            if (e.first > 0) r.add_term(e.first - 1, e.second, T(e.first) * c);
        return r;
    }
    ParametricPoly dy() const {
        ParametricPoly r;
        for (const auto& [e, c] : terms)
            if (e.second > 0) r.add_term(e.first, e.second - 1, T(e.second) * c);
        return r;
    }

    static ParametricPoly from_num(const NumPoly& p) {
        ParametricPoly r;
        for (int a = 0; a <= p.deg; ++a)
            for (int b = 0; a + b <= p.deg; ++b)
                if (p.at(a, b) != 0) r.add_term(a, b, Series::constant(T(p.at(a, b))));
        return r;
    }

    ParametricPoly scaled(const T& f) const {
        ParametricPoly r;
        for (const auto& [e, c] : terms) r.add_term(e.first, e.second, f * c);
        return r;
    }

    // p(a11 x + a12 y + b1, a21 x + a22 y + b2) with series entries; coefficients truncated at w^n.
    ParametricPoly affine_substituted(const Series& a11, const Series& a12, const Series& b1, const Series& a21,
                                      const Series& a22, const Series& b2, int n) const {
        using Form = std::map<Exponent, Series>;
        auto add = [](Form& f, Exponent key, const Series& s) {
            if (s.is_zero()) return;
            auto [it, ins] = f.emplace(key, s);
            if (!ins) it->second = it->second + s;
        };
        auto times_linear = [&](const Form& f, const Series& cx, const Series& cy, const Series& c0) {
            Form out;
            for (const auto& [m, v] : f) {
                add(out, {m.first + 1, m.second}, Series::mul_trunc(v, cx, n));
                add(out, {m.first, m.second + 1}, Series::mul_trunc(v, cy, n));
                add(out, m, Series::mul_trunc(v, c0, n));
            }
            return out;
        };
        int da = 0, db = 0;
        for (const auto& [e, c] : terms) {
            da = std::max(da, e.first);
            db = std::max(db, e.second);
        }
        std::vector<Form> X{Form{{{0, 0}, Series::constant(T(1))}}}, Y{Form{{{0, 0}, Series::constant(T(1))}}};
        for (int k = 0; k < da; ++k) X.push_back(times_linear(X.back(), a11, a12, b1));
        for (int k = 0; k < db; ++k) Y.push_back(times_linear(Y.back(), a21, a22, b2));
        ParametricPoly r;
        for (const auto& [e, c] : terms) {
            for (const auto& [mx, vx] : X[e.first]) {
                Series cv = Series::mul_trunc(c, vx, n);
                if (cv.is_zero()) continue;
                for (const auto& [my, vy] : Y[e.second])
                    r.add_term(mx.first + my.first, mx.second + my.second, Series::mul_trunc(cv, vy, n));
            }
        }
        return r;
    }

    // p(x + alpha*y + cx, y + cy)
    ParametricPoly substituted(const Series& alpha, const Series& cx, const Series& cy, int n) const {
        Series one = Series::constant(T(1));
        return affine_substituted(one, alpha, cx, Series(), one, cy, n);
    }

    // p(w x, y)
    ParametricPoly scaled_x_by_w() const {
        ParametricPoly r;
        for (const auto& [e, c] : terms) r.add_term(e.first, e.second, Series::monomial(T(1), e.first) * c);
        return r;
    }

    // Division by w^k; the dropped low-order coefficients are formally zero by construction.
    ParametricPoly divided_by_w(int k) const {
        ParametricPoly r;
        for (const auto& [e, c] : terms) {
            if (static_cast<int>(c.coeffs.size()) <= k) continue;
            r.add_term(e.first, e.second, Series(std::vector<T>(c.coeffs.begin() + k, c.coeffs.end())));
        }
        return r;
    }

    ParametricPoly without_linear_part() const {
        ParametricPoly r = *this;
        r.terms.erase({0, 0});
        r.terms.erase({1, 0});
        r.terms.erase({0, 1});
        return r;
    }
};

using ParametricPolyQ = ParametricPoly<Rational>;

// Taylor polynomial of order 2l-1 in w of tau_xy(0,0) / tau_xx(0,0).
template <class T>
UPoly<T> taylor_shear_coefficient(const ParametricPoly<T>& tau, int l) {
    UPoly<T> txx = T(2) * tau.coeff(2, 0);
    UPoly<T> txy = tau.coeff(1, 1);
    if (txx.is_zero() || txx.coeffs[0] == T(0))
        throw std::domain_error("tau_xx(0,0) has vanishing constant term; tau is not in the family A_l");
    return UPoly<T>::series_div(txy, txx, 2 * l - 1);
}

}  // namespace mhdec
