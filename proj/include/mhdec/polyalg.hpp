#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <gmpxx.h>

#include "mhdec/upoly.hpp"

namespace mhdec {

using Rational = mpq_class;
using UPolyQ = UPoly<Rational>;
using Exponent = std::pair<int, int>;  // (x-exponent a, y-exponent b)

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " at position " + std::to_string(pos)), position(pos) {}
    std::size_t position;
};

// Exact sparse bivariate polynomial. No stored coefficient is zero.
class BivariatePoly {
public:
    std::map<Exponent, Rational> terms;

    BivariatePoly() = default;
    static BivariatePoly constant(const Rational& c);
    static BivariatePoly monomial(const Rational& c, int a, int b);
    static BivariatePoly x() { return monomial(1, 1, 0); }
    static BivariatePoly y() { return monomial(1, 0, 1); }

    bool is_zero() const { return terms.empty(); }
    bool is_constant() const;
    Rational coeff(int a, int b) const;
    void add_term(int a, int b, const Rational& c);
    int degree_x() const;
    int degree_y() const;
    int total_degree() const;
    int min_x_exponent() const;
    int min_y_exponent() const;

    BivariatePoly dx() const;
    BivariatePoly dy() const;
    BivariatePoly swapped() const;                 // p(y, x)
    BivariatePoly reflected(int ex, int ey) const;  // p(ex*x, ey*y), ex, ey in {+1,-1}
    // p(x + cx, y + cy)
    BivariatePoly translated(const Rational& cx, const Rational& cy) const;
    // p(x, c*y)
    BivariatePoly scaled_y(const Rational& c) const;
    BivariatePoly without_linear_part() const;

    Rational eval(const Rational& xv, const Rational& yv) const;
    double eval(double xv, double yv) const;

    std::string to_string() const;

    friend BivariatePoly operator+(const BivariatePoly& p, const BivariatePoly& q);
    friend BivariatePoly operator-(const BivariatePoly& p, const BivariatePoly& q);
    friend BivariatePoly operator-(const BivariatePoly& p);
    friend BivariatePoly operator*(const BivariatePoly& p, const BivariatePoly& q);
    friend BivariatePoly operator*(const Rational& c, const BivariatePoly& p);
    friend bool operator==(const BivariatePoly& p, const BivariatePoly& q) { return p.terms == q.terms; }
    friend bool operator!=(const BivariatePoly& p, const BivariatePoly& q) { return !(p == q); }
};

BivariatePoly pow(const BivariatePoly& p, int n);
BivariatePoly parse_poly(const std::string& text);
BivariatePoly hessian_determinant(const BivariatePoly& phi);
// Exact quotient p/d when d divides p, otherwise empty.
std::optional<BivariatePoly> exact_divide(const BivariatePoly& p, const BivariatePoly& d);

struct MixedHomogeneity {
    int q = 0, r = 0, s = 0;
    friend bool operator==(const MixedHomogeneity&, const MixedHomogeneity&) = default;
};

std::optional<MixedHomogeneity> detect_mixed_homogeneity(const BivariatePoly& phi);
bool verify_determinant_weight(const BivariatePoly& phi, const MixedHomogeneity& mh);

// Real root of a square-free rational polynomial, held as an isolating interval
// [lo, hi] containing exactly one root of g. When lo == hi the root is exact.
struct RealAlgebraic {
    UPolyQ g;
    Rational lo, hi;

    bool is_exact() const { return lo == hi; }
    Rational width() const { return hi - lo; }
    Rational midpoint() const { return (lo + hi) / 2; }
    double approx() const { return midpoint().get_d(); }
    int sign() const;  // sign of the root (never zero for curve factors)
    void refine(const Rational& max_width);
    // True iff the root is also a root of f.
    bool is_root_of(const UPolyQ& f) const;
};

std::vector<RealAlgebraic> isolate_real_roots(const UPolyQ& squarefree, const Rational& max_width);
// Yun decomposition: returns P_1, P_2, ... with p = lc * prod P_i^i, P_i monic square-free.
std::vector<UPolyQ> squarefree_decomposition(const UPolyQ& p);
int sturm_count(const UPolyQ& squarefree, const Rational& a, const Rational& b);  // roots in (a, b]

struct CurveFactor {
    RealAlgebraic lambda;
    int multiplicity = 0;
};

struct HomogeneousFactorization {
    int nu1 = 0, nu2 = 0;
    std::vector<CurveFactor> curve_factors;
    BivariatePoly residual;
    UPolyQ h_univariate;  // H(t, 1) of the x^s / y^r lattice form
    int h_degree = 0;     // homogeneous degree n of H
};

HomogeneousFactorization factorize_mixed_homogeneous(const BivariatePoly& phi, const MixedHomogeneity& mh,
                                                     const Rational& max_width = Rational(1, 1099511627776));  // 2^-40
// x^{nu1} y^{nu2} prod (x^s - lambda_j y^r)^{n_j} * residual, with each lambda_j at its interval midpoint.
BivariatePoly reassemble(const HomogeneousFactorization& f, const MixedHomogeneity& mh);

// x^s - lambda y^r for rational lambda
BivariatePoly curve_polynomial(const Rational& lambda, const MixedHomogeneity& mh);

int divisibility_order(const BivariatePoly& phi, const BivariatePoly& factor);
// Order of (x^s - lambda y^r) in phi for an algebraic lambda, computed in the H(t,1) lattice.
int curve_divisibility_order(const BivariatePoly& phi, const MixedHomogeneity& mh, const RealAlgebraic& lambda);

struct AxisCaseA1 {
    int k = 0;
};
struct AxisCaseA2 {
    Rational C;
    int m = 0;
    BivariatePoly P;  // phi = C x^m + y P
};
using AxisCase = std::variant<AxisCaseA1, AxisCaseA2>;
AxisCase classify_axis_case(const BivariatePoly& phi, const MixedHomogeneity& mh);

struct CurveCase {
    bool b1 = false;
    int k = 0;  // order of the curve factor in phi (B1); 0 or 1 for B2
};
CurveCase classify_curve_case(const BivariatePoly& phi, const MixedHomogeneity& mh, const RealAlgebraic& lambda);

struct CurveOrderCheck {
    bool ok = false;
    int order = 0;  // divisibility order of the curve factor in det D^2 phi
    int nonzero_samples = 0;
};
// phi = (x^s - lambda y^r)^k * P with rational lambda > 0.
CurveOrderCheck check_prop_curve_order(const BivariatePoly& phi, const MixedHomogeneity& mh, const Rational& lambda, int k,
                                       int samples = 50);

enum class ConvexityTag { Convex, NotCertified };
ConvexityTag convexity_tag(const BivariatePoly& phi);
const char* to_string(ConvexityTag t);

}  // namespace mhdec
