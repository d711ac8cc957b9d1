#include <cmath>
#include <random>

#include "doctest.h"
#include "mhdec/geometry.hpp"

using namespace mhdec;

namespace {

NumPoly random_poly(std::mt19937_64& rng, int deg) {
    std::uniform_real_distribution<double> u(-1, 1);
    NumPoly p(deg);
    for (int a = 0; a <= deg; ++a)
        for (int b = 0; a + b <= deg; ++b) p.at(a, b) = u(rng);
    return p;
}

NumPoly num(const char* text) { return NumPoly::from_exact(parse_poly(text)); }

}  // namespace

TEST_CASE("flatness of the paraboloid on a square of side delta^(1/2)") {
    double delta = 1.0 / 64;
    Parallelogram sq = Parallelogram::from_box(Box{0.3, 0.3 + std::sqrt(delta), -0.2, -0.2 + std::sqrt(delta)});
    FlatnessReport r = flatness(parse_poly("x^2+y^2"), sq, delta, 9);
    CHECK(r.sup_deviation == doctest::Approx(2 * delta).epsilon(1e-12));
    CHECK(r.ratio == doctest::Approx(2).epsilon(1e-12));
    CHECK(r.sup_deviation <= r.second_order_bound);
}

TEST_CASE("flatness on a point-sized region vanishes") {
    Parallelogram dot{{0.5, 0.5}, {1e-300, 0}, {0, 1e-300}};
    FlatnessReport r = flatness(num("x^3+y^4"), dot, 0.01, 5);
    CHECK(r.sup_deviation <= 1e-300);
}

TEST_CASE("sampled flatness never exceeds the rigorous majorant") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 100; ++i) {
        NumPoly phi = random_poly(rng, 2 + i % 4);
        Parallelogram p{{u(rng), u(rng)}, {0.5 * u(rng), 0.5 * u(rng)}, {0.5 * u(rng), 0.5 * u(rng)}};
        if (p.degenerate()) continue;
        FlatnessReport r = flatness(phi, p, 0.01, 7);
        CHECK(r.sup_deviation <= r.second_order_bound * (1 + 1e-12));
    }
}

TEST_CASE("flatness is translation invariant") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 50; ++i) {
        NumPoly phi = random_poly(rng, 4);
        Parallelogram p{{u(rng), u(rng)}, {0.4, 0.1 * u(rng)}, {0.1 * u(rng), 0.4}};
        Vec2 t{u(rng), u(rng)};
        NumPoly shifted = compose(phi, AffineMap::diagonal(1, 1, Vec2{-t.x, -t.y}));
        Parallelogram q{p.origin + t, p.edge1, p.edge2};
        double a = flatness(phi, p, 0.01, 7, false).sup_deviation;
        double b = flatness(shifted, q, 0.01, 7, false).sup_deviation;
        CHECK(std::fabs(a - b) <= 1e-9 * std::max(a, 1e-300));
    }
}

TEST_CASE("affine invariance examples") {
    Parallelogram unit = Parallelogram::from_box(Box{0, 1, 0, 1});
    auto [a, b] = flatness_affine_invariance(num("x^2+y^2"), unit, AffineMap::identity(), 0.1, 9);
    CHECK(a.sup_deviation == b.sup_deviation);
    CHECK(a.ratio == b.ratio);

    double c = std::cos(M_PI / 4), s = std::sin(M_PI / 4);
    auto [r1, r2] = flatness_affine_invariance(num("x^2+y^2"), unit, AffineMap{{c, -s, s, c}, {}}, 0.1, 9);
    CHECK(r2.sup_deviation == doctest::Approx(r1.sup_deviation).epsilon(1e-12));

    auto [s1, s2] = flatness_affine_invariance(num("x^3"), unit, AffineMap{{1, 3, 0, 1}, {}}, 0.1, 9);
    CHECK(s2.sup_deviation == doctest::Approx(s1.sup_deviation).epsilon(1e-12));
}

TEST_CASE("affine invariance on random triples with bounded condition number") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1, 1);
    int tested = 0;
    while (tested < 100) {
        NumPoly phi = random_poly(rng, 2 + tested % 4);
        Parallelogram p{{u(rng), u(rng)}, {0.3 + std::fabs(u(rng)), 0.2 * u(rng)}, {0.2 * u(rng), 0.3 + std::fabs(u(rng))}};
        AffineMap T{{2 * u(rng), 2 * u(rng), 2 * u(rng), 2 * u(rng)}, {u(rng), u(rng)}};
        if (std::fabs(T.det()) < 1e-3 || T.condition_number() > 1e3) continue;
        ++tested;
        auto [a, b] = flatness_affine_invariance(phi, p, T, 0.01, 7);
        CHECK(std::fabs(a.sup_deviation - b.sup_deviation) <= 1e-9 * a.sup_deviation);
    }
}

TEST_CASE("affine maps compose and invert") {
    AffineMap A{{2, 1, -1, 3}, {0.5, -0.25}}, B{{0, 1, 1, 0}, {1, 2}};
    Vec2 p{0.3, -1.7};
    Vec2 q = A.compose(B).apply(p), r = A.apply(B.apply(p));
    CHECK(q.x == doctest::Approx(r.x));
    CHECK(q.y == doctest::Approx(r.y));
    for (double x = -2; x <= 2; x += 0.5)
        for (double y = -2; y <= 2; y += 0.5) {
            Vec2 back = A.inverse().apply(A.apply({x, y}));
            CHECK(std::fabs(back.x - x) <= 1e-12);
            CHECK(std::fabs(back.y - y) <= 1e-12);
        }
}

TEST_CASE("parallelogram membership and geometry") {
    Parallelogram p{{1, 1}, {2, 0}, {1, 1}};
    CHECK(p.contains({1, 1}));
    CHECK(p.contains({4, 2}));
    CHECK(p.contains({2.5, 1.5}));
    CHECK_FALSE(p.contains({1, 1.5}));
    CHECK(p.area() == doctest::Approx(2));
    Vec2 l = p.local({2.5, 1.5});
    CHECK(l.x == doctest::Approx(0.5));
    CHECK(l.y == doctest::Approx(0.5));
    Parallelogram flat{{0, 0}, {1, 1}, {2, 2}};
    CHECK(flat.degenerate());
}

TEST_CASE("curve constant and tangent parallelogram") {
    CurveSpec parabola{1, 1, 2, 1};
    CHECK(curve_C_rs(parabola) == doctest::Approx(3));
    Parallelogram P = band_to_parallelogram(1, 1.0 / 16, parabola, 3);
    CHECK(P.edge2.x == doctest::Approx(0.25));
    CHECK(P.edge2.y == doctest::Approx(0.5));
    Parallelogram thin = band_to_parallelogram(1.5, 1e-14, parabola, 3);
    CHECK(thin.area() < 1e-20);
}

TEST_CASE("tangent parallelogram sandwich on a log grid") {
    for (auto [r, s] : {std::pair{1, 2}, std::pair{2, 3}, std::pair{3, 2}})
        for (double lam : {0.5, 1.0, 2.0}) {
            CurveSpec g{lam, r, s, 1};
            double C = curve_C_rs(g);
            for (int e = 2; e <= 20; ++e)
                for (double x0 = 1; x0 <= 2; x0 += 0.25) {
                    double sigma = std::ldexp(1.0, -e);
                    Parallelogram P;
                    CHECK_NOTHROW(P = band_to_parallelogram(x0, sigma, g, C, true));
                    // Every point sits in the band [sigma, 2 C sigma] above the curve.
                    for (double u : {0.0, 0.5, 1.0})
                        for (double v : {0.0, 0.5, 1.0}) {
                            Vec2 p = P.origin + u * P.edge1 + v * P.edge2;
                            double off = p.y - g.gamma(p.x);
                            CHECK(off >= sigma * (1 - 1e-9));
                            CHECK(off <= 2 * C * sigma * (1 + 1e-9));
                        }
                }
        }
}

TEST_CASE("enclosing rectangle") {
    Parallelogram rect = Parallelogram::from_box(Box{0, 2, 0, 1});
    double infl = 0;
    Parallelogram r = enclosing_rectangle(rect, &infl);
    CHECK(r.area() == doctest::Approx(2));
    CHECK(infl == doctest::Approx(1));

    Parallelogram sheared{{0, 0}, {1, 0}, {0.1, 1}};
    Parallelogram e = enclosing_rectangle(sheared, &infl);
    CHECK(e.area() == doctest::Approx(1.1));
    CHECK(infl == doctest::Approx(1.1));
    for (Vec2 c : sheared.corners()) CHECK(e.contains(c));
    CHECK(std::fabs(dot(e.edge1, e.edge2)) < 1e-12);

    CHECK_THROWS(enclosing_rectangle(Parallelogram{{0, 0}, {1, 0}, {2, 0}}));
}

TEST_CASE("coverage and overlap") {
    Box dom{-1, 1, -1, 1};
    std::vector<Parallelogram> one{Parallelogram::from_box(dom)};
    CoverageReport a = coverage_and_overlap(one, dom, 10000, 1);
    CHECK(a.covered_fraction == 1.0);
    CHECK(a.max_multiplicity == 1);
    CHECK(a.histogram.at(1) == 10000);

    std::vector<Parallelogram> two{one[0], one[0]};
    CoverageReport b = coverage_and_overlap(two, dom, 10000, 1);
    CHECK(b.max_multiplicity == 2);
    CHECK(b.histogram.size() == 1);

    std::vector<Parallelogram> half{Parallelogram::from_box(Box{-1, 0, -1, 1})};
    CoverageReport c = coverage_and_overlap(half, dom, 10000, 2);
    CHECK(c.covered_fraction == doctest::Approx(0.5).epsilon(0.05));
    CHECK(c.has_uncovered);
    CHECK(c.first_uncovered.x > 0);
}

TEST_CASE("curved band membership") {
    CurvedBand b{1, 2, 0.1, 0.2, CurveSpec{1, 1, 2, 1}};
    CHECK(b.contains({1.5, 2.25 + 0.15}));
    CHECK_FALSE(b.contains({1.5, 2.25 + 0.25}));
    CHECK_FALSE(b.contains({2.5, 6.25 + 0.15}));
}
