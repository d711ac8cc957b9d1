#include <cmath>
#include <random>

#include "doctest.h"
#include "mhdec/estimator.hpp"
#include "mhdec/partition.hpp"

using namespace mhdec;

namespace {

using cd = std::complex<double>;

std::vector<cd> unit_phases(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 2 * M_PI);
    std::vector<cd> c(n);
    for (auto& z : c) z = std::polar(1.0, u(rng));
    return c;
}

}  // namespace

TEST_CASE("single frequency has norm T^(3/4)") {
    GridSpec g{32, 8};
    double n = l4_norm_grid({{0.5, -0.25, 1.125}}, {cd(1, 0)}, g, 1e12);
    CHECK(n == doctest::Approx(std::pow(8.0, 0.75)).epsilon(1e-12));
    CHECK(l4_norm_lattice({{0.5, -0.25, 1.125}}, {cd(0, 1)}, 8) == doctest::Approx(std::pow(8.0, 0.75)).epsilon(1e-12));
}

TEST_CASE("two frequencies give 6 T^3") {
    std::vector<Freq3> f{{0.25, 0, 0}, {0, 0.5, 0.125}};
    std::vector<cd> c{cd(1, 0), cd(1, 0)};
    for (int N : {32, 64}) {
        double n = l4_norm_grid(f, c, GridSpec{N, 8}, 1e12);
        CHECK(std::pow(n, 4) == doctest::Approx(6 * 512.0).epsilon(1e-2));
    }
    CHECK(std::pow(l4_norm_lattice(f, c, 8), 4) == doctest::Approx(6 * 512.0).epsilon(1e-12));
}

TEST_CASE("zero coefficients give zero") {
    std::vector<Freq3> f{{0.25, 0, 0}, {0, 0.5, 0.125}};
    CHECK(l4_norm_grid(f, {cd(0, 0), cd(0, 0)}, GridSpec{16, 8}, 1e12) == 0);
    CHECK(l4_norm_lattice(f, {cd(0, 0), cd(0, 0)}, 8) == 0);
}

TEST_CASE("grid and lattice norms agree") {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> k(-6, 6);
    std::vector<Freq3> f;
    for (int i = 0; i < 20; ++i) f.push_back({k(rng) / 8.0, k(rng) / 8.0, k(rng) / 8.0});
    auto c = unit_phases(f.size(), 9);
    double a = l4_norm_grid(f, c, GridSpec{64, 8}, 1e12), b = l4_norm_lattice(f, c, 8);
    CHECK(a == doctest::Approx(b).epsilon(1e-9));
}

TEST_CASE("norms are homogeneous and modulation invariant") {
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> k(-5, 5);
    std::vector<Freq3> f, g;
    for (int i = 0; i < 12; ++i) f.push_back({k(rng) / 8.0, k(rng) / 8.0, k(rng) / 8.0});
    for (const auto& x : f) g.push_back({x.x + 0.375, x.y - 0.25, x.z + 0.5});
    auto c = unit_phases(f.size(), 2);
    std::vector<cd> c3;
    for (auto z : c) c3.push_back(3.0 * z);
    double n1 = l4_norm_lattice(f, c, 8);
    CHECK(l4_norm_lattice(f, c3, 8) == doctest::Approx(3 * n1).epsilon(1e-12));
    CHECK(l4_norm_lattice(g, c, 8) == doctest::Approx(n1).epsilon(1e-12));
    CHECK(l4_norm_grid(g, c, GridSpec{64, 8}, 1e12) == doctest::Approx(l4_norm_grid(f, c, GridSpec{64, 8}, 1e12)).epsilon(1e-10));
}

TEST_CASE("frequency cloud lies in the vertical neighborhood") {
    NumPoly phi = NumPoly::from_exact(parse_poly("x^2+y^2"));
    double delta = 1.0 / 16;
    auto pieces = decompose(parse_poly("x^2+y^2"), delta).shapes();
    for (int density : {1, 3, 4}) {
        FrequencyCloud cl = sample_cloud(phi, pieces, delta, density, 5);
        CHECK(cl.size() == pieces.size() * density);
        for (std::size_t i = 0; i < pieces.size(); ++i)
            for (const auto& p : cl.points[i]) {
                CHECK(pieces[i].contains({p.x, p.y}));
                CHECK(std::fabs(p.z - phi.eval(p.x, p.y)) < delta / 2 + 1e-15);
            }
    }
    FrequencyCloud one = sample_cloud(phi, pieces, delta, 1, 5);
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        Vec2 c = pieces[i].center();
        CHECK(one.points[i][0].x == doctest::Approx(c.x));
        CHECK(one.points[i][0].y == doctest::Approx(c.y));
    }
}

TEST_CASE("single piece ratios are exactly one") {
    NumPoly phi = NumPoly::from_exact(parse_poly("x^2+y^2"));
    EstimatorOptions opt;
    opt.trials = 3;
    RatioReport r = decoupling_ratio(phi, {Parallelogram::from_box(Box{-1, 1, -1, 1})}, 1.0 / 16, opt);
    CHECK(std::fabs(r.D4_mean - 1) <= 1e-12);
    CHECK(std::fabs(r.D2_mean - 1) <= 1e-12);
    CHECK(r.pieces == 1);
}

TEST_CASE("two pieces with one frequency each match the closed form") {
    // Distinct frequencies: ||f||^4 = 6 T^3 and ||f_P||^4 = T^3, so D4 = (6/4)^{1/4} and D2 = 6^{1/4}/2^{1/2}.
    NumPoly phi = NumPoly::from_exact(parse_poly("x^2+y^2"));
    std::vector<Parallelogram> two{Parallelogram::from_box(Box{-1, 0, -1, 1}), Parallelogram::from_box(Box{0, 1, -1, 1})};
    EstimatorOptions opt;
    opt.trials = 2;
    opt.density = 1;
    RatioReport r = decoupling_ratio(phi, two, 1.0 / 16, opt);
    CHECK(r.D4_mean == doctest::Approx(std::pow(1.5, 0.25)).epsilon(1e-9));
    CHECK(r.D2_mean == doctest::Approx(std::pow(6.0, 0.25) / std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("triangle inequality and refinement stability") {
    NumPoly phi = NumPoly::from_exact(parse_poly("x^4+6*x^2*y+6*y^2"));
    double delta = 1.0 / 16;
    auto pieces = decompose(parse_poly("x^4+6*x^2*y+6*y^2"), delta).shapes();
    FrequencyCloud cl = sample_cloud(phi, pieces, delta, 4, 3);
    Coefficients co;
    for (std::size_t i = 0; i < cl.points.size(); ++i) co.push_back(unit_phases(cl.points[i].size(), 100 + i));
    NormReport a = synthesize_and_norm(cl, co, GridSpec{32, 8}, 1e12);
    NormReport b = synthesize_and_norm(cl, co, GridSpec{64, 8}, 1e12);
    double sum = 0;
    for (double n : a.per_piece) sum += n;
    CHECK(a.total <= sum);
    CHECK(std::fabs(b.total - a.total) <= 0.02 * a.total);
    for (std::size_t i = 0; i < a.per_piece.size(); ++i)
        CHECK(std::fabs(b.per_piece[i] - a.per_piece[i]) <= 0.02 * a.per_piece[i]);
}

TEST_CASE("ratios are deterministic in the seed") {
    NumPoly phi = NumPoly::from_exact(parse_poly("x^2+y^2"));
    auto pieces = decompose(parse_poly("x^2+y^2"), 1.0 / 16).shapes();
    EstimatorOptions opt;
    opt.trials = 2;
    opt.seed = 42;
    RatioReport a = decoupling_ratio(phi, pieces, 1.0 / 16, opt), b = decoupling_ratio(phi, pieces, 1.0 / 16, opt);
    CHECK(ratio_csv_row(a) == ratio_csv_row(b));
    CHECK(a.D4_mean >= 0);
    CHECK(a.D4_max >= a.D4_mean);
    CHECK(ratio_csv_header() == "delta,pieces,D4_mean,D4_max,D2_mean,D2_max,grid_N,box_T,trials,seed");
}

TEST_CASE("resource budget guard") {
    std::vector<Freq3> f(10, Freq3{0.125, 0, 0});
    std::vector<cd> c(10, cd(1, 0));
    CHECK_THROWS_AS(l4_norm_grid(f, c, GridSpec{64, 8}, 1000), ResourceBudgetExceeded);
    CHECK(estimator_budget() > 0);
}
