#include <cmath>
#include <random>

#include "doctest.h"
#include "mhdec/parametric.hpp"
#include "mhdec/polyalg.hpp"

using namespace mhdec;

namespace {

const char* kA2 = "x^4+6*x^2*y+6*y^2";
const char* kDeg8 = "8*x^8+112*x^6*y+504*x^4*y^2+756*x^2*y^3+189*y^4";

BivariatePoly random_poly(std::mt19937_64& rng, int deg) {
    std::uniform_int_distribution<int> c(-5, 5), d(1, 4);
    BivariatePoly p;
    for (int a = 0; a <= deg; ++a)
        for (int b = 0; a + b <= deg; ++b) p.add_term(a, b, Rational(c(rng), d(rng)));
    return p;
}

// Random weighted-homogeneous polynomial: a combination of the monomials on the weight line r a + s b = q.
BivariatePoly random_weighted(std::mt19937_64& rng, MixedHomogeneity& mh) {
    static const std::pair<int, int> kRS[] = {{1, 1}, {1, 2}, {2, 1}, {1, 3}, {2, 3}, {3, 2}};
    std::uniform_int_distribution<int> pick(0, 5), c(-4, 4), qd(2, 12);
    auto [r, s] = kRS[pick(rng)];
    for (;;) {
        int q = qd(rng);
        BivariatePoly p;
        for (int a = 0; r * a <= q; ++a)
            if ((q - r * a) % s == 0) p.add_term(a, (q - r * a) / s, c(rng));
        if (p.is_zero()) continue;
        mh = MixedHomogeneity{q, r, s};
        return p;
    }
}

}  // namespace

TEST_CASE("parse examples") {
    CHECK(parse_poly("x^4 + 6*x^2*y + 6*y^2").terms.size() == 3);
    CHECK(parse_poly("0").is_zero());
    CHECK(parse_poly(kDeg8).terms.size() == 5);
    CHECK(parse_poly("3/4*x*y") == BivariatePoly::monomial(Rational(3, 4), 1, 1));
    CHECK(parse_poly("(x+y)^2") == parse_poly("x^2+2*x*y+y^2"));
    CHECK_THROWS_AS(parse_poly("x^^2"), ParseError);
    CHECK_THROWS_AS(parse_poly("1.5*x"), ParseError);
}

TEST_CASE("printer round-trips through the parser") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        BivariatePoly p = random_poly(rng, 5);
        CHECK(parse_poly(p.to_string()) == p);
    }
}

TEST_CASE("ring axioms and commuting derivatives") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 50; ++i) {
        BivariatePoly p = random_poly(rng, 4), q = random_poly(rng, 3), r = random_poly(rng, 3);
        CHECK((p + q) * r == p * r + q * r);
        CHECK(p.dx().dy() == p.dy().dx());
        CHECK((p + q).dx() == p.dx() + q.dx());
        for (const auto& [e, c] : p.terms) CHECK(c != 0);
    }
}

TEST_CASE("hessian determinant examples") {
    BivariatePoly K = hessian_determinant(parse_poly(kA2));
    CHECK(K == BivariatePoly::monomial(144, 0, 1));
    CHECK(hessian_determinant(parse_poly("x^2+y^2")) == BivariatePoly::constant(4));
    BivariatePoly K8 = hessian_determinant(parse_poly(kDeg8));
    CHECK(divisibility_order(K8, BivariatePoly::y()) == 5);
}

TEST_CASE("mixed homogeneity detection") {
    CHECK(detect_mixed_homogeneity(parse_poly(kA2)) == MixedHomogeneity{4, 1, 2});
    CHECK_FALSE(detect_mixed_homogeneity(parse_poly("x^2+x*y+y^3")).has_value());
    CHECK(detect_mixed_homogeneity(parse_poly("x^2")) == MixedHomogeneity{2, 1, 1});
    CHECK(detect_mixed_homogeneity(parse_poly("(x^2-y^3)^2*(x^2+y^3)")) == MixedHomogeneity{18, 3, 2});
}

TEST_CASE("determinant weight identity") {
    CHECK(verify_determinant_weight(parse_poly(kA2), MixedHomogeneity{4, 1, 2}));
    CHECK(verify_determinant_weight(parse_poly("x^2+y^2"), MixedHomogeneity{2, 1, 1}));
    std::mt19937_64 rng(5);
    int checked = 0;
    for (int i = 0; i < 200; ++i) {
        MixedHomogeneity mh;
        BivariatePoly p = random_weighted(rng, mh);
        if (hessian_determinant(p).is_zero()) continue;
        ++checked;
        CHECK(verify_determinant_weight(p, mh));
    }
    CHECK(checked > 100);
}

TEST_CASE("factorization examples") {
    auto f = factorize_mixed_homogeneous(BivariatePoly::monomial(144, 0, 1), MixedHomogeneity{2, 1, 2});
    CHECK(f.nu1 == 0);
    CHECK(f.nu2 == 1);
    CHECK(f.curve_factors.empty());
    CHECK(f.residual == BivariatePoly::constant(144));

    // x^2 + y^3 = x^2 - (-1) y^3 carries the real root lambda = -1, which lives in the lower quadrants.
    MixedHomogeneity mh{18, 3, 2};
    auto g = factorize_mixed_homogeneous(parse_poly("(x^2-y^3)^2*(x^2+y^3)"), mh);
    CHECK(g.nu1 == 0);
    CHECK(g.nu2 == 0);
    REQUIRE(g.curve_factors.size() == 2);
    for (const auto& cf : g.curve_factors) {
        CHECK(cf.lambda.is_exact());
        CHECK(cf.multiplicity == (cf.lambda.lo == 1 ? 2 : 1));
        CHECK(abs(cf.lambda.lo) == 1);
    }
    CHECK(g.residual == BivariatePoly::constant(1));
    CHECK(reassemble(g, mh) == parse_poly("(x^2-y^3)^2*(x^2+y^3)"));

    auto h = factorize_mixed_homogeneous(parse_poly("x^2*y^2"), MixedHomogeneity{4, 1, 1});
    CHECK(h.nu1 == 2);
    CHECK(h.nu2 == 2);
    CHECK(h.curve_factors.empty());
    CHECK(h.residual == BivariatePoly::constant(1));
}

TEST_CASE("factorization of irrational roots reassembles within the interval width") {
    auto f = factorize_mixed_homogeneous(parse_poly(kA2), MixedHomogeneity{4, 1, 2});
    CHECK(f.curve_factors.size() == 2);  // x^2 + (3 -+ sqrt 3) y
    for (const auto& cf : f.curve_factors) {
        CHECK(cf.lambda.width() <= Rational(1, 1099511627776));
        CHECK(cf.lambda.sign() < 0);
    }
    BivariatePoly back = reassemble(f, MixedHomogeneity{4, 1, 2});
    BivariatePoly diff = back - parse_poly(kA2);
    for (const auto& [e, c] : diff.terms) CHECK(std::abs(c.get_d()) < 1e-10);
}

TEST_CASE("square-free decomposition and Sturm counts") {
    UPolyQ t = UPolyQ::monomial(Rational(1), 1);
    UPolyQ p = (t - UPolyQ::constant(1)) * (t - UPolyQ::constant(1)) * (t + UPolyQ::constant(2));
    auto parts = squarefree_decomposition(p);
    REQUIRE(parts.size() == 2);
    CHECK(parts[0] == t + UPolyQ::constant(2));
    CHECK(parts[1] == t - UPolyQ::constant(1));
    UPolyQ q = t * t - UPolyQ::constant(2);
    CHECK(sturm_count(q, -10, 10) == 2);
    CHECK(sturm_count(q, 0, 10) == 1);
    auto roots = isolate_real_roots(q, Rational(1, 1 << 20));
    REQUIRE(roots.size() == 2);
    CHECK(roots[1].approx() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("divisibility orders") {
    CHECK(divisibility_order(BivariatePoly::monomial(144, 0, 1), BivariatePoly::y()) == 1);
    CHECK(divisibility_order(parse_poly(kA2), BivariatePoly::y()) == 0);
    CHECK(divisibility_order(parse_poly("(x^2-y)^3*(x+1)"), parse_poly("x^2-y")) == 3);
}

TEST_CASE("axis classification") {
    auto a = classify_axis_case(parse_poly("y^2*(x^2+y)"), MixedHomogeneity{6, 1, 2});
    REQUIRE(std::holds_alternative<AxisCaseA1>(a));
    CHECK(std::get<AxisCaseA1>(a).k == 2);
    auto b = classify_axis_case(parse_poly(kA2), MixedHomogeneity{4, 1, 2});
    REQUIRE(std::holds_alternative<AxisCaseA2>(b));
    CHECK(std::get<AxisCaseA2>(b).C == 1);
    CHECK(std::get<AxisCaseA2>(b).m == 4);
    auto c = classify_axis_case(parse_poly(kDeg8), MixedHomogeneity{8, 1, 2});
    REQUIRE(std::holds_alternative<AxisCaseA2>(c));
    CHECK(std::get<AxisCaseA2>(c).C == 8);
    CHECK(std::get<AxisCaseA2>(c).m == 8);
}

TEST_CASE("axis classification on fuzz inputs whose determinant vanishes on the x-axis") {
    std::mt19937_64 rng(17);
    int seen = 0;
    for (int i = 0; i < 400; ++i) {
        MixedHomogeneity mh;
        BivariatePoly p = random_weighted(rng, mh);
        BivariatePoly K = hessian_determinant(p);
        if (K.is_zero() || K.min_y_exponent() == 0) continue;
        if (divisibility_order(p, BivariatePoly::y()) >= 2) continue;
        ++seen;
        AxisCase ac = classify_axis_case(p, mh);
        REQUIRE(std::holds_alternative<AxisCaseA2>(ac));
        const auto& a2 = std::get<AxisCaseA2>(ac);
        CHECK(a2.C != 0);
        CHECK(p == BivariatePoly::monomial(a2.C, a2.m, 0) + BivariatePoly::y() * a2.P);
    }
    CHECK(seen > 10);
}

TEST_CASE("curve classification") {
    RealAlgebraic one{UPolyQ::monomial(Rational(1), 1) - UPolyQ::constant(1), 1, 1};
    auto c1 = classify_curve_case(parse_poly("(x^2-y^3)^2"), MixedHomogeneity{12, 3, 2}, one);
    CHECK(c1.b1);
    CHECK(c1.k == 2);
    auto c3 = classify_curve_case(parse_poly("(x^2-y)^3"), MixedHomogeneity{6, 1, 2}, one);
    CHECK(c3.b1);
    CHECK(c3.k == 3);
    MixedHomogeneity a2{4, 1, 2};
    BivariatePoly phi = parse_poly(kA2);
    for (const auto& cf : factorize_mixed_homogeneous(phi, a2).curve_factors)
        CHECK_FALSE(classify_curve_case(phi, a2, cf.lambda).b1);
}

TEST_CASE("curve order formula") {
    MixedHomogeneity m32{18, 3, 2};
    BivariatePoly phi = pow(parse_poly("x^2-y^3"), 2) * parse_poly("x^2+y^3");
    auto a = check_prop_curve_order(phi, m32, 1, 2);
    CHECK(a.ok);
    CHECK(a.order == 1);
    auto b = check_prop_curve_order(parse_poly("(x^2-y)^3"), MixedHomogeneity{6, 1, 2}, 1, 3);
    CHECK(b.ok);
    CHECK(b.order == 3);
    auto c = check_prop_curve_order(parse_poly("(x^2-2*y)^2"), MixedHomogeneity{4, 1, 2}, 2, 2);
    CHECK(c.ok);
    CHECK(c.order == 1);
    for (int k : {2, 3})
        for (auto [r, s] : {std::pair{1, 2}, std::pair{2, 3}, std::pair{3, 2}})
            for (Rational lam : {Rational(1, 2), Rational(1), Rational(2)}) {
                MixedHomogeneity mh{k * r * s, r, s};
                CHECK(check_prop_curve_order(pow(curve_polynomial(lam, mh), k), mh, lam, k).ok);
            }
}

TEST_CASE("convexity tags") {
    CHECK(convexity_tag(parse_poly("x^2+y^2")) == ConvexityTag::Convex);
    CHECK(convexity_tag(parse_poly("x^2-y^2")) == ConvexityTag::NotCertified);
    CHECK(convexity_tag(parse_poly(kA2)) == ConvexityTag::NotCertified);
    CHECK(convexity_tag(parse_poly("x^4+y^4")) == ConvexityTag::Convex);
}

TEST_CASE("taylor shear coefficient") {
    ParametricPolyQ tau = ParametricPolyQ::from_poly(parse_poly("x^2+y^2"));
    CHECK(taylor_shear_coefficient(tau, 2).is_zero());

    // tau = x^2 + w x y + w^3 x y: mu = (w + w^3) / 2, truncated at order 2l - 1.
    ParametricPolyQ t;
    t.add_term(2, 0, UPolyQ::constant(1));
    t.add_term(1, 1, UPolyQ::monomial(Rational(1), 1) + UPolyQ::monomial(Rational(1), 3));
    UPolyQ mu1 = taylor_shear_coefficient(t, 1);
    CHECK(mu1 == UPolyQ::monomial(Rational(1, 2), 1));
    UPolyQ mu2 = taylor_shear_coefficient(t, 2);
    CHECK(mu2 == UPolyQ::monomial(Rational(1, 2), 1) + UPolyQ::monomial(Rational(1, 2), 3));

    ParametricPolyQ bad = ParametricPolyQ::from_poly(parse_poly("x*y"));
    CHECK_THROWS_AS(taylor_shear_coefficient(bad, 1), std::domain_error);
}

TEST_CASE("taylor shear coefficient matches the numeric quotient on the model band") {
    BivariatePoly phi = parse_poly(kA2);
    // tau(x, y) = phi(1 + x, w^2 y + w^2) minus linear terms.
    ParametricPolyQ tau = ParametricPolyQ::from_poly(phi).affine_substituted(
        UPolyQ::constant(1), UPolyQ(), UPolyQ::constant(1), UPolyQ(), UPolyQ::monomial(Rational(1), 2),
        UPolyQ::monomial(Rational(1), 2), 64);
    for (int l : {1, 2, 3}) {
        UPolyQ mu = taylor_shear_coefficient(tau, l);
        double w = 1.0 / 16;
        double exact = tau.coeff(1, 1).eval<double>(w) / (2 * tau.coeff(2, 0).eval<double>(w));
        CHECK(std::fabs(mu.eval<double>(w) - exact) <= 4 * std::pow(w, 2 * l));
    }
}

TEST_CASE("parametric specialization is a ring homomorphism") {
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> c(-3, 3);
    auto rand_pp = [&] {
        ParametricPolyQ p;
        for (int a = 0; a <= 2; ++a)
            for (int b = 0; a + b <= 2; ++b) p.add_term(a, b, UPolyQ(std::vector<Rational>{c(rng), c(rng), c(rng)}));
        return p;
    };
    for (int i = 0; i < 30; ++i) {
        ParametricPolyQ p = rand_pp(), q = rand_pp();
        Rational w(c(rng), 7);
        CHECK((p * q).specialize(w) == p.specialize(w) * q.specialize(w));
        CHECK((p + q).specialize(w) == p.specialize(w) + q.specialize(w));
    }
}
