#include "mhdec/estimator.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <numbers>
#include <random>

namespace mhdec {

std::size_t FrequencyCloud::size() const {
    std::size_t n = 0;
    for (const auto& p : points) n += p.size();
    return n;
}

double estimator_budget() {
    if (const char* s = std::getenv("MHDEC_BUDGET")) {
        char* end = nullptr;
        double v = std::strtod(s, &end);
        if (end != s && *end == '\0' && v > 0) return v;
    }
    return 4e10;
}

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index, std::uint64_t purpose) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      static_cast<std::uint32_t>(purpose)};
    return std::mt19937_64(seq);
}

using Key = std::array<long, 3>;

// Coefficients merged by lattice point, in lexicographic key order.
std::map<Key, std::complex<double>> merge(const std::vector<Freq3>& freqs, const std::vector<std::complex<double>>& c,
                                          double T) {
    if (freqs.size() != c.size()) throw std::invalid_argument("frequency and coefficient counts differ");
    std::map<Key, std::complex<double>> m;
    for (std::size_t i = 0; i < freqs.size(); ++i) m[snap(freqs[i], T)] += c[i];
    return m;
}

std::size_t alias_free_size(long spread, int N) {
    std::size_t need = static_cast<std::size_t>(2 * spread + 1), n = static_cast<std::size_t>(N);
    while (n < need) n *= 2;
    return n;
}

long wrap(long k, std::size_t n) {
    long r = k % static_cast<long>(n);
    return r < 0 ? r + static_cast<long>(n) : r;
}

}  // namespace

FrequencyCloud sample_cloud(const NumPoly& phi, const std::vector<Parallelogram>& pieces, double delta, int density,
                            std::uint64_t seed) {
    if (density < 1) throw std::invalid_argument("sample_cloud: density must be at least 1");
    if (!(delta > 0)) throw std::invalid_argument("sample_cloud: delta must be positive");
    FrequencyCloud cloud;
    cloud.delta = delta;
    cloud.density = density;
    cloud.points.resize(pieces.size());
    const int n = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(density)) - 1e-12));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t p = 0; p < pieces.size(); ++p) {
        auto rng = stream(seed, p, 1);
        const Parallelogram& P = pieces[p];
        auto& pts = cloud.points[p];
        pts.reserve(density);
        for (int i = 0; i < density; ++i) {
            double u = 0.5, v = 0.5;
            if (density > 1) {
                u = ((i % n) + unit(rng)) / n;
                v = ((i / n) + unit(rng)) / n;
            }
            Vec2 xi = P.origin + u * P.edge1 + v * P.edge2;
            // Open interval (-delta/2, delta/2) keeps the point strictly inside the neighborhood.
            double h = (unit(rng) - 0.5) * delta;
            pts.push_back({xi.x, xi.y, phi.eval(xi.x, xi.y) + h});
        }
    }
    return cloud;
}

std::array<long, 3> snap(const Freq3& f, double T) {
    return {std::lround(f.x * T), std::lround(f.y * T), std::lround(f.z * T)};
}

double l4_norm_grid(const std::vector<Freq3>& freqs, const std::vector<std::complex<double>>& c, const GridSpec& g,
                    double budget) {
    if (g.N < 16) throw std::invalid_argument("estimator: grid N must be at least 16");
    if (!(g.T >= 1)) throw std::invalid_argument("estimator: box T must be at least 1");
    auto m = merge(freqs, c, g.T);
    if (m.empty()) return 0;
    Key lo = m.begin()->first, hi = lo;
    for (const auto& [k, v] : m)
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], k[a]);
            hi[a] = std::max(hi[a], k[a]);
        }
    std::array<std::size_t, 3> n;
    for (int a = 0; a < 3; ++a) n[a] = alias_free_size(hi[a] - lo[a], g.N);
    const std::size_t cells = n[0] * n[1] * n[2];
    if (static_cast<double>(cells) * static_cast<double>(freqs.size()) > (budget > 0 ? budget : estimator_budget()))
        throw ResourceBudgetExceeded("estimator: grid " + std::to_string(n[0]) + "x" + std::to_string(n[1]) + "x" +
                                     std::to_string(n[2]) + " times " + std::to_string(freqs.size()) +
                                     " frequencies exceeds the resource budget");
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * cells));
    if (!buf) throw ResourceBudgetExceeded("estimator: grid allocation failed");
    for (std::size_t i = 0; i < cells; ++i) buf[i][0] = buf[i][1] = 0;
    for (const auto& [k, v] : m) {
        std::size_t idx = (static_cast<std::size_t>(wrap(k[0], n[0])) * n[1] + wrap(k[1], n[1])) * n[2] + wrap(k[2], n[2]);
        buf[idx][0] += v.real();
        buf[idx][1] += v.imag();
    }
    // Backward transform evaluates sum c_k e^{2 pi i k j / n}, i.e. f at x_j = j T / n.
    fftw_plan plan = fftw_plan_dft_3d(static_cast<int>(n[0]), static_cast<int>(n[1]), static_cast<int>(n[2]), buf, buf,
                                      FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    double s = 0;
    for (std::size_t i = 0; i < cells; ++i) {
        double a2 = buf[i][0] * buf[i][0] + buf[i][1] * buf[i][1];
        s += a2 * a2;
    }
    fftw_free(buf);
    return std::pow(g.T * g.T * g.T / static_cast<double>(cells), 0.25) * std::pow(s, 0.25);
}

double l4_norm_lattice(const std::vector<Freq3>& freqs, const std::vector<std::complex<double>>& c, double T) {
    auto m = merge(freqs, c, T);
    std::map<Key, std::complex<double>> pairs;
    for (auto a = m.begin(); a != m.end(); ++a)
        for (auto b = a; b != m.end(); ++b) {
            Key s{a->first[0] + b->first[0], a->first[1] + b->first[1], a->first[2] + b->first[2]};
            pairs[s] += (a == b ? 1.0 : 2.0) * a->second * b->second;
        }
    double e = 0;
    for (const auto& [s, v] : pairs) e += std::norm(v);
    return std::pow(T * T * T * e, 0.25);
}

NormReport synthesize_and_norm(const FrequencyCloud& cloud, const Coefficients& coeffs, const GridSpec& g,
                               double budget) {
    if (coeffs.size() != cloud.points.size()) throw std::invalid_argument("estimator: coefficient groups differ from pieces");
    NormReport rep;
    std::vector<Freq3> all;
    std::vector<std::complex<double>> call;
    all.reserve(cloud.size());
    call.reserve(cloud.size());
    for (std::size_t p = 0; p < cloud.points.size(); ++p) {
        rep.per_piece.push_back(l4_norm_lattice(cloud.points[p], coeffs[p], g.T));
        all.insert(all.end(), cloud.points[p].begin(), cloud.points[p].end());
        call.insert(call.end(), coeffs[p].begin(), coeffs[p].end());
    }
    rep.total = l4_norm_grid(all, call, g, budget);
    return rep;
}

RatioReport decoupling_ratio(const NumPoly& phi, const std::vector<Parallelogram>& pieces, double delta,
                             const EstimatorOptions& opt) {
    if (pieces.empty()) throw std::invalid_argument("decoupling_ratio: partition is empty");
    if (opt.trials < 1) throw std::invalid_argument("decoupling_ratio: trials must be at least 1");
    RatioReport r;
    r.delta = delta;
    r.pieces = pieces.size();
    r.trials = opt.trials;
    r.grid = opt.grid;
    r.seed = opt.seed;
    FrequencyCloud cloud = sample_cloud(phi, pieces, delta, opt.density, opt.seed);
    const double P = static_cast<double>(pieces.size());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double s4 = 0, s2 = 0;
    for (int t = 0; t < opt.trials; ++t) {
        auto rng = stream(opt.seed, static_cast<std::uint64_t>(t), 2);
        Coefficients c(cloud.points.size());
        for (std::size_t p = 0; p < cloud.points.size(); ++p)
            for (std::size_t i = 0; i < cloud.points[p].size(); ++i)
                c[p].push_back(std::polar(1.0, 2 * std::numbers::pi * unit(rng)));
        NormReport n = synthesize_and_norm(cloud, c, opt.grid, opt.budget);
        double q4 = 0, q2 = 0;
        for (double v : n.per_piece) {
            q4 += v * v * v * v;
            q2 += v * v;
        }
        double d4 = n.total / (std::pow(P, 0.25) * std::pow(q4, 0.25));
        double d2 = n.total / std::sqrt(q2);
        s4 += d4;
        s2 += d2;
        r.D4_max = std::max(r.D4_max, d4);
        r.D2_max = std::max(r.D2_max, d2);
    }
    r.D4_mean = s4 / opt.trials;
    r.D2_mean = s2 / opt.trials;
    return r;
}

std::string ratio_csv_header() { return "delta,pieces,D4_mean,D4_max,D2_mean,D2_max,grid_N,box_T,trials,seed"; }

std::string ratio_csv_row(const RatioReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%d,%llu", r.delta, r.pieces, r.D4_mean,
                  r.D4_max, r.D2_mean, r.D2_max, r.grid.N, r.grid.T, r.trials, static_cast<unsigned long long>(r.seed));
    return buf;
}

}  // namespace mhdec
