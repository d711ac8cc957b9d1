#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mhdec/polyalg.hpp"

namespace mhdec {

// Closed interval with outward rounding after every operation.
struct Interval {
    double lo = 0, hi = 0;

    Interval() = default;
    Interval(double v) : lo(v), hi(v) {}
    Interval(double l, double h) : lo(l), hi(h) {}

    // Outward step of at least one ulp: |v| 2^-52 >= ulp(v) for normal v, denorm_min covers the rest.
    static double down(double v) {
        return std::isfinite(v) ? v - (std::fabs(v) * 0x1p-52 + std::numeric_limits<double>::denorm_min()) : v;
    }
    static double up(double v) {
        return std::isfinite(v) ? v + (std::fabs(v) * 0x1p-52 + std::numeric_limits<double>::denorm_min()) : v;
    }

    double mag() const { return std::max(std::fabs(lo), std::fabs(hi)); }
    bool contains(double v) const { return lo <= v && v <= hi; }

    // Sums and products with an exact zero operand are exact and are not widened.
    static double add_down(double a, double b) { return (a == 0 || b == 0) ? a + b : down(a + b); }
    static double add_up(double a, double b) { return (a == 0 || b == 0) ? a + b : up(a + b); }
    static double mul_down(double a, double b) { return (a == 0 || b == 0) ? 0.0 : down(a * b); }
    static double mul_up(double a, double b) { return (a == 0 || b == 0) ? 0.0 : up(a * b); }

    friend Interval operator+(const Interval& a, const Interval& b) { return {add_down(a.lo, b.lo), add_up(a.hi, b.hi)}; }
    friend Interval operator-(const Interval& a, const Interval& b) { return {add_down(a.lo, -b.hi), add_up(a.hi, -b.lo)}; }
    friend Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }
    friend Interval operator*(const Interval& a, const Interval& b) {
        double lo = std::min({mul_down(a.lo, b.lo), mul_down(a.lo, b.hi), mul_down(a.hi, b.lo), mul_down(a.hi, b.hi)});
        double hi = std::max({mul_up(a.lo, b.lo), mul_up(a.lo, b.hi), mul_up(a.hi, b.lo), mul_up(a.hi, b.hi)});
        return {lo, hi};
    }
    Interval& operator+=(const Interval& b) { return *this = *this + b; }
    // Symmetric interval [-h, h] raised to the n-th power.
    static Interval sym_pow(double h, int n) {
        if (n == 0) return Interval(1.0);
        double v = 1;
        for (int i = 0; i < n; ++i) v = up(v * h);
        return n % 2 == 0 ? Interval(0.0, v) : Interval(-v, v);
    }
    Interval pow(int n) const {
        if (n == 0) return Interval(1.0);
        double a = std::fabs(lo), b = std::fabs(hi);
        double small = (lo <= 0 && hi >= 0) ? 0.0 : std::min(a, b), big = std::max(a, b);
        double pl = 1, ph = 1;
        for (int i = 0; i < n; ++i) {
            pl = mul_down(pl, small);
            ph = mul_up(ph, big);
        }
        pl = std::max(pl, 0.0);
        if (n % 2 == 0) return {pl, ph};
        // odd powers are monotone
        double l = 1, h = 1;
        for (int i = 0; i < n; ++i) {
            l = (lo < 0) ? up(l * std::fabs(lo)) : down(l * lo);
            h = (hi < 0) ? down(h * std::fabs(hi)) : up(h * hi);
        }
        return {lo < 0 ? -l : l, hi < 0 ? -h : h};
    }
};

struct Box {
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
};

struct Jet2 {
    double v = 0, gx = 0, gy = 0, hxx = 0, hxy = 0, hyy = 0;
};

// Dense bivariate polynomial with double coefficients, used by all geometric code.
// c[a * (deg + 1) + b] multiplies x^a y^b, with a + b <= deg.
class NumPoly {
public:
    int deg = 0;
    std::vector<double> c{0.0};

    NumPoly() = default;
    explicit NumPoly(int degree) : deg(degree), c((degree + 1) * (degree + 1), 0.0) {}
    static NumPoly from_exact(const BivariatePoly& p);

    double& at(int a, int b) { return c[a * (deg + 1) + b]; }
    double at(int a, int b) const { return (a <= deg && b <= deg) ? c[a * (deg + 1) + b] : 0.0; }

    double eval(double x, double y) const;
    Jet2 jet(double x, double y) const;
    NumPoly dx() const;
    NumPoly dy() const;

    // p(x0 + u, y0 + v) as a polynomial in (u, v)
    NumPoly taylor_at(double x0, double y0) const;
    // p(m11 u + m12 v + b1, m21 u + m22 v + b2)
    NumPoly compose_affine(double m11, double m12, double m21, double m22, double b1, double b2) const;
    NumPoly without_linear() const;
    NumPoly scaled(double f) const;
    double max_abs_coeff() const;

    // Rigorous enclosures over a box via the centered form in interval arithmetic.
    Interval range(const Box& b) const;
    struct SecondBounds {
        double sxx = 0, sxy = 0, syy = 0;
    };
    SecondBounds second_derivative_bounds(const Box& b) const;
    // Signed enclosures of p_xx, p_xy, p_yy over the box.
    struct SecondRanges {
        Interval xx, xy, yy;
    };
    SecondRanges second_derivative_ranges(const Box& b) const;
};

}  // namespace mhdec
