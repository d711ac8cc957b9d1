#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mhdec/geometry.hpp"

namespace mhdec {

struct Freq3 {
    double x = 0, y = 0, z = 0;
};

// Frequencies in the vertical delta-neighborhood of the graph, grouped by piece.
struct FrequencyCloud {
    double delta = 0;
    int density = 1;
    std::vector<std::vector<Freq3>> points;
    std::size_t size() const;
};

struct GridSpec {
    int N = 64;     // points per axis
    double T = 8;   // box side; frequencies snap to the 1/T lattice
};

// Thrown when N^3 times the point count exceeds the configured budget.
class ResourceBudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// 4e10 unless MHDEC_BUDGET holds a positive number.
double estimator_budget();

// density points per piece: an n x n lattice in the piece frame (n = ceil(sqrt(density))),
// first density cells, jittered inside their cell when density > 1.
// The third coordinate is phi + uniform(-delta/2, delta/2).
FrequencyCloud sample_cloud(const NumPoly& phi, const std::vector<Parallelogram>& pieces, double delta, int density,
                            std::uint64_t seed);

struct NormReport {
    double total = 0;
    std::vector<double> per_piece;
};

using Coefficients = std::vector<std::vector<std::complex<double>>>;  // parallel to cloud.points

// Lattice index of a frequency: round(xi * T) per axis.
std::array<long, 3> snap(const Freq3& f, double T);

// Riemann-sum L^4 norm of sum c_k e(xi_k . x) over [0,T]^3 on an FFT grid. The grid is N per axis,
// enlarged along any axis whose lattice spread would alias the quartic spectrum.
double l4_norm_grid(const std::vector<Freq3>& freqs, const std::vector<std::complex<double>>& c, const GridSpec& g,
                    double budget);

// Exact L^4 norm over the period box from additive pair sums on the lattice:
// ||f||^4 = T^3 sum_s |sum_{a+b=s} c_a c_b|^2. Equals the alias-free Riemann sum.
double l4_norm_lattice(const std::vector<Freq3>& freqs, const std::vector<std::complex<double>>& c, double T);

// Total norm on the grid, per-piece norms from the lattice formula.
NormReport synthesize_and_norm(const FrequencyCloud& cloud, const Coefficients& coeffs, const GridSpec& g,
                               double budget);

struct RatioReport {
    double delta = 0;
    std::size_t pieces = 0;
    int trials = 0;
    double D4_mean = 0, D4_max = 0, D2_mean = 0, D2_max = 0;
    GridSpec grid;
    std::uint64_t seed = 0;
};

struct EstimatorOptions {
    int trials = 8;
    GridSpec grid;
    std::uint64_t seed = 0;
    int density = 4;
    double budget = 0;  // 0 selects estimator_budget()
};

// Average of D4 and D2 over unit-modulus random-phase draws; trial t uses its own stream from (seed, t).
RatioReport decoupling_ratio(const NumPoly& phi, const std::vector<Parallelogram>& pieces, double delta,
                             const EstimatorOptions& opt);

std::string ratio_csv_header();
std::string ratio_csv_row(const RatioReport& r);

}  // namespace mhdec
