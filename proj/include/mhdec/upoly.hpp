#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include <gmpxx.h>

namespace mhdec {

template <class S, class T>
S scalar_cast(const T& v) {
    if constexpr (std::is_same_v<S, T>) {
        return v;
    } else if constexpr (std::is_same_v<T, mpq_class> && std::is_floating_point_v<S>) {
        return static_cast<S>(v.get_d());
    } else {
        return S(v);
    }
}

// Dense univariate polynomial; coeffs[i] multiplies t^i. Trailing zeros are trimmed.
template <class T>
class UPoly {
public:
    std::vector<T> coeffs;

    UPoly() = default;
    explicit UPoly(std::vector<T> c) : coeffs(std::move(c)) { trim(); }
    static UPoly constant(const T& c) { return UPoly(std::vector<T>{c}); }
    static UPoly monomial(const T& c, std::size_t deg) {
        std::vector<T> v(deg + 1, T(0));
        v[deg] = c;
        return UPoly(std::move(v));
    }

    bool is_zero() const { return coeffs.empty(); }
    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    T coeff(std::size_t i) const { return i < coeffs.size() ? coeffs[i] : T(0); }
    const T& leading() const { return coeffs.back(); }

    void trim() {
        while (!coeffs.empty() && coeffs.back() == T(0)) coeffs.pop_back();
    }

    template <class S>
    S eval(const S& t) const {
        S acc(0);
        for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * t + scalar_cast<S>(coeffs[i]);
        return acc;
    }

    UPoly derivative() const {
        if (coeffs.size() <= 1) return UPoly();
        std::vector<T> d(coeffs.size() - 1);
        for (std::size_t i = 1; i < coeffs.size(); ++i) d[i - 1] = coeffs[i] * T(static_cast<long>(i));
        return UPoly(std::move(d));
    }

    // Keeps terms of degree <= n.
    UPoly truncated(int n) const {
        if (n < 0) return UPoly();
        std::vector<T> v(coeffs.begin(), coeffs.begin() + std::min<std::size_t>(coeffs.size(), n + 1));
        return UPoly(std::move(v));
    }

    friend UPoly operator+(const UPoly& a, const UPoly& b) {
        std::vector<T> v(std::max(a.coeffs.size(), b.coeffs.size()), T(0));
        for (std::size_t i = 0; i < a.coeffs.size(); ++i) v[i] += a.coeffs[i];
        for (std::size_t i = 0; i < b.coeffs.size(); ++i) v[i] += b.coeffs[i];
        return UPoly(std::move(v));
    }
    friend UPoly operator-(const UPoly& a, const UPoly& b) {
        std::vector<T> v(std::max(a.coeffs.size(), b.coeffs.size()), T(0));
        for (std::size_t i = 0; i < a.coeffs.size(); ++i) v[i] += a.coeffs[i];
        for (std::size_t i = 0; i < b.coeffs.size(); ++i) v[i] -= b.coeffs[i];
        return UPoly(std::move(v));
    }
    friend UPoly operator-(const UPoly& a) {
        std::vector<T> v(a.coeffs);
        for (auto& c : v) c = -c;
        return UPoly(std::move(v));
    }
    friend UPoly operator*(const UPoly& a, const UPoly& b) {
        if (a.is_zero() || b.is_zero()) return UPoly();
        std::vector<T> v(a.coeffs.size() + b.coeffs.size() - 1, T(0));
        for (std::size_t i = 0; i < a.coeffs.size(); ++i)
            for (std::size_t j = 0; j < b.coeffs.size(); ++j) v[i + j] += a.coeffs[i] * b.coeffs[j];
        return UPoly(std::move(v));
    }
    friend UPoly operator*(const T& s, const UPoly& a) {
        std::vector<T> v(a.coeffs);
        for (auto& c : v) c *= s;
        return UPoly(std::move(v));
    }
    friend bool operator==(const UPoly& a, const UPoly& b) { return a.coeffs == b.coeffs; }

    // Product truncated at degree n (power-series multiplication).
    static UPoly mul_trunc(const UPoly& a, const UPoly& b, int n) {
        if (a.is_zero() || b.is_zero() || n < 0) return UPoly();
        std::size_t len = std::min<std::size_t>(a.coeffs.size() + b.coeffs.size() - 1, n + 1);
        std::vector<T> v(len, T(0));
        for (std::size_t i = 0; i < a.coeffs.size() && i < len; ++i)
            for (std::size_t j = 0; j < b.coeffs.size() && i + j < len; ++j) v[i + j] += a.coeffs[i] * b.coeffs[j];
        return UPoly(std::move(v));
    }

    // Power series quotient a/b modulo t^(n+1); b(0) must be nonzero.
    static UPoly series_div(const UPoly& a, const UPoly& b, int n) {
        if (b.is_zero() || b.coeffs[0] == T(0)) throw std::domain_error("series division by a series with zero constant term");
        std::vector<T> q(n + 1, T(0));
        for (int k = 0; k <= n; ++k) {
            T acc = a.coeff(k);
            for (int i = 1; i <= k; ++i) acc -= b.coeff(i) * q[k - i];
            q[k] = acc / b.coeffs[0];
        }
        return UPoly(std::move(q));
    }

    // Euclidean division; exact for field coefficients.
    static void divmod(const UPoly& a, const UPoly& b, UPoly& q, UPoly& r) {
        if (b.is_zero()) throw std::domain_error("polynomial division by zero");
        r = a;
        if (a.degree() < b.degree()) { q = UPoly(); return; }
        std::vector<T> qc(a.degree() - b.degree() + 1, T(0));
        while (!r.is_zero() && r.degree() >= b.degree()) {
            int shift = r.degree() - b.degree();
            T f = r.leading() / b.leading();
            qc[shift] = f;
            for (int i = 0; i <= b.degree(); ++i) r.coeffs[i + shift] -= f * b.coeffs[i];
            r.coeffs.back() = T(0);
            r.trim();
        }
        q = UPoly(std::move(qc));
    }

    UPoly monic() const {
        if (is_zero()) return *this;
        T l = leading();
        std::vector<T> v(coeffs);
        for (auto& c : v) c /= l;
        return UPoly(std::move(v));
    }

    static UPoly gcd(UPoly a, UPoly b) {
        while (!b.is_zero()) {
            UPoly q, r;
            divmod(a, b, q, r);
            a = std::move(b);
            b = std::move(r);
        }
        return a.monic();
    }
};

}  // namespace mhdec
