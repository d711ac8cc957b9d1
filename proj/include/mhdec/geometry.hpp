#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mhdec/numpoly.hpp"
#include "mhdec/polyalg.hpp"

namespace mhdec {

struct Vec2 {
    double x = 0, y = 0;
    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
    double norm() const;
};
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

// p -> linear * p + shift
struct AffineMap {
    std::array<double, 4> linear{1, 0, 0, 1};  // row-major a11 a12 a21 a22
    Vec2 shift;

    static AffineMap identity() { return {}; }
    static AffineMap diagonal(double sx, double sy, Vec2 t = {}) { return {{sx, 0, 0, sy}, t}; }
    static AffineMap from_columns(Vec2 c1, Vec2 c2, Vec2 t) { return {{c1.x, c2.x, c1.y, c2.y}, t}; }
    Vec2 apply(Vec2 p) const { return {linear[0] * p.x + linear[1] * p.y + shift.x, linear[2] * p.x + linear[3] * p.y + shift.y}; }
    Vec2 apply_linear(Vec2 v) const { return {linear[0] * v.x + linear[1] * v.y, linear[2] * v.x + linear[3] * v.y}; }
    double det() const { return linear[0] * linear[3] - linear[1] * linear[2]; }
    // (*this)(inner(p))
    AffineMap compose(const AffineMap& inner) const;
    AffineMap inverse() const;
    double condition_number() const;
};

// phi(T(u)) as a polynomial in u
NumPoly compose(const NumPoly& phi, const AffineMap& T);

struct Parallelogram {
    Vec2 origin, edge1, edge2;

    static Parallelogram from_box(const Box& b) { return {{b.x0, b.y0}, {b.x1 - b.x0, 0}, {0, b.y1 - b.y0}}; }
    // Parallelogram image of the unit square under T.
    static Parallelogram from_map(const AffineMap& T) {
        return {T.shift, T.apply_linear({1, 0}), T.apply_linear({0, 1})};
    }
    AffineMap unit_map() const { return AffineMap::from_columns(edge1, edge2, origin); }
    double signed_area() const { return cross(edge1, edge2); }
    double area() const;
    bool degenerate() const;
    std::array<Vec2, 4> corners() const { return {origin, origin + edge1, origin + edge1 + edge2, origin + edge2}; }
    Vec2 center() const { return origin + 0.5 * (edge1 + edge2); }
    Box bbox() const;
    double diameter() const;
    // Affine coordinates (u, v) with p = origin + u*edge1 + v*edge2.
    Vec2 local(Vec2 p) const;
    bool contains(Vec2 p, double tol = 1e-9) const;
    Parallelogram mapped(const AffineMap& T) const;
};

// Curve x^s = lambda y^r in the first quadrant: gamma(x) = sign * lambda^{-1/r} x^{s/r}.
// sign = -1 describes the mirrored curve used for the lower side of a neighborhood.
struct CurveSpec {
    double lambda = 1;
    int r = 1, s = 1;
    double sign = 1;
    double gamma(double x) const;
    double dgamma(double x) const;
    double ddgamma(double x) const;
    double inverse(double y) const;  // x with gamma(x) = y
};

struct CurvedBand {
    double x_lo = 0, x_hi = 0, j_lo = 0, j_hi = 0;
    CurveSpec curve;
    bool contains(Vec2 p, double tol = 0) const;
};

// sup of |gamma''| over [x_lo, x_hi] plus one
double curve_C_rs(const CurveSpec& c, double x_lo = 1, double x_hi = 2);

struct FlatnessReport {
    double sup_deviation = 0;
    double ratio = 0;
    std::array<Vec2, 2> argmax_pair{};
    long samples = 0;
    double second_order_bound = 0;
};

// Sampled sup over grid pairs; the rigorous majorant is skipped when with_bound is false.
FlatnessReport flatness(const NumPoly& phi, const Parallelogram& region, double delta, int grid_n, bool with_bound = true);
FlatnessReport flatness(const BivariatePoly& phi, const Parallelogram& region, double delta, int grid_n);

std::pair<FlatnessReport, FlatnessReport> flatness_affine_invariance(const NumPoly& phi, const Parallelogram& region,
                                                                    const AffineMap& T, double delta, int grid_n);

// Tangent parallelogram over [x0, x0 + sigma^{1/2}]. For convex gamma its offsets above the tangent
// are [C sigma, 2 C sigma]; for concave gamma they are [(C+1)/2 sigma, (C+1) sigma].
Parallelogram band_to_parallelogram(double x0, double sigma, const CurveSpec& curve, double C_rs, bool check = true);

// Fixed-radius bucket grid for point location over many parallelograms.
class PieceLocator {
public:
    PieceLocator(const std::vector<Parallelogram>& pieces, const Box& domain, int cells_per_axis = 0);
    // Number of pieces containing p.
    int multiplicity(Vec2 p, double tol = 1e-9) const;

private:
    const std::vector<Parallelogram>& pieces_;
    Box domain_;
    int n_ = 1;
    std::vector<std::uint32_t> start_;
    std::vector<std::uint32_t> items_;
};

struct CoverageReport {
    double covered_fraction = 0;
    int max_multiplicity = 0;
    std::map<int, long> histogram;
    long samples = 0;
    Vec2 first_uncovered{};
    bool has_uncovered = false;
};

CoverageReport coverage_and_overlap(const std::vector<Parallelogram>& pieces, const Box& domain, long n_samples,
                                    std::uint64_t seed);

// Minimal rectangle with one side parallel to edge1 containing p.
Parallelogram enclosing_rectangle(const Parallelogram& p, double* inflation = nullptr);

std::string svg_path(const Parallelogram& p);

}  // namespace mhdec
