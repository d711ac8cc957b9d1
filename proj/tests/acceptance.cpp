// One pass/fail line per acceptance criterion; exit status 1 when any fails.
// Usage: acceptance <path-to-mhdec> [criterion...]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "mhdec/estimator.hpp"
#include "mhdec/partition.hpp"

using namespace mhdec;

namespace {

const char* kA2 = "x^4+6*x^2*y+6*y^2";
const char* kDeg8 = "8*x^8+112*x^6*y+504*x^4*y^2+756*x^2*y^3+189*y^4";
const std::vector<std::string> kSuite = {"x^2+y^2", "x^2-y^2", "x*y", "x^2*y^2", kA2, kDeg8, "y^2*(x^2+y)",
                                         "(x^2-y^3)^2*(x^2+y^3)"};

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Outcome symbolic_models() {
    auto t0 = std::chrono::steady_clock::now();
    BivariatePoly K = hessian_determinant(parse_poly(kA2));
    BivariatePoly K8 = hessian_determinant(parse_poly(kDeg8));
    bool a2 = K == BivariatePoly::monomial(144, 0, 1) && divisibility_order(K, BivariatePoly::y()) == 1;
    int o8 = divisibility_order(K8, BivariatePoly::y());
    double t = seconds_since(t0);
    return {a2 && o8 == 5 && t < 1, fmt("K(A2)=%s, ord_y K(deg8)=%d, %.3fs", K.to_string().c_str(), o8, t)};
}

// Weighted-homogeneous input x^nu1 y^nu2 prod (x^s - lambda_j y^r)^{n_j} (x^{2s} + c y^{2r}).
struct FuzzCase {
    BivariatePoly phi;
    MixedHomogeneity mh;
    int nu1 = 0, nu2 = 0;
    std::vector<std::pair<Rational, int>> factors;
};

FuzzCase fuzz_case(std::mt19937_64& rng) {
    static const std::pair<int, int> kRS[] = {{1, 1}, {1, 2}, {2, 1}, {1, 3}, {3, 2}, {2, 3}};
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    FuzzCase f;
    auto [r, s] = kRS[pick(0, 5)];
    f.nu1 = pick(0, 2);
    f.nu2 = pick(0, 2);
    f.phi = BivariatePoly::monomial(1, f.nu1, f.nu2);
    std::set<Rational> used;
    int nf = pick(0, 2);
    for (int j = 0; j < nf; ++j) {
        Rational lam(pick(1, 9), pick(1, 9));
        lam.canonicalize();
        if (!used.insert(lam).second) continue;
        int n = pick(1, 3);
        f.factors.emplace_back(lam, n);
        f.phi = f.phi * pow(curve_polynomial(lam, MixedHomogeneity{r * s, r, s}), n);
    }
    Rational c(pick(1, 7), pick(1, 5));
    c.canonicalize();
    f.phi = f.phi * (BivariatePoly::monomial(1, 2 * s, 0) + BivariatePoly::monomial(c, 0, 2 * r));
    int q = r * f.nu1 + s * f.nu2 + 2 * r * s;
    for (const auto& fc : f.factors) q += fc.second * r * s;
    f.mh = MixedHomogeneity{q, r, s};
    return f;
}

Outcome fuzz_factorization() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20240917);
    const Rational eps(1, 1099511627776);  // 2^-40
    int ok = 0, weight_checked = 0;
    std::string first_fail;
    for (int i = 0; i < 200; ++i) {
        FuzzCase f = fuzz_case(rng);
        bool good = true;
        BivariatePoly K = hessian_determinant(f.phi);
        if (!K.is_zero()) {
            ++weight_checked;
            good = good && verify_determinant_weight(f.phi, f.mh);
        }
        HomogeneousFactorization h = factorize_mixed_homogeneous(f.phi, f.mh, eps);
        good = good && h.nu1 == f.nu1 && h.nu2 == f.nu2 && h.curve_factors.size() == f.factors.size();
        for (const auto& [lam, n] : f.factors) {
            bool found = false;
            for (const auto& cf : h.curve_factors)
                if (cf.lambda.width() <= eps && cf.lambda.lo <= lam && lam <= cf.lambda.hi) found = cf.multiplicity == n;
            good = good && found;
        }
        if (good) {
            ++ok;
        } else if (first_fail.empty()) {
            first_fail = " first failure " + f.phi.to_string();
        }
    }
    double t = seconds_since(t0);
    return {ok == 200 && t < 30, fmt("%d/200 round-trips, %d weight identities, %.2fs%s", ok, weight_checked, t,
                                     first_fail.c_str())};
}

Outcome curve_order_suite() {
    auto t0 = std::chrono::steady_clock::now();
    int ok = 0, total = 0;
    for (int k : {2, 3})
        for (auto [r, s] : {std::pair{1, 2}, std::pair{2, 3}, std::pair{3, 2}})
            for (Rational lam : {Rational(1, 2), Rational(1), Rational(2)}) {
                MixedHomogeneity mh{k * r * s, r, s};
                BivariatePoly phi = pow(curve_polynomial(lam, mh), k);
                CurveOrderCheck c = check_prop_curve_order(phi, mh, lam, k, 50);
                ++total;
                ok += c.ok && c.order == 2 * k - 3 && c.nonzero_samples == 50;
            }
    double t = seconds_since(t0);
    return {ok == 18 && total == 18 && t < 30, fmt("%d/%d combinations, %.2fs", ok, total, t)};
}

Outcome partition_soundness() {
    auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    std::ostringstream fails;
    double worst = 0;
    for (const auto& s : kSuite) {
        BivariatePoly phi = parse_poly(s);
        int mult_first = 0;
        for (int e = 6; e <= 16; e += 2) {
            double delta = std::ldexp(1.0, -e);
            Partition P = decompose(phi, delta);
            VerifyReport v = verify_partition(P, 1'000'000, 5, 7);
            worst = std::max(worst, v.worst_ratio);
            int mult = v.coverage.max_multiplicity;
            if (e == 6) mult_first = mult;
            double cap = 64 / delta;
            if (!v.covered()) fails << " " << s << "@2^-" << e << ":coverage=" << v.coverage.covered_fraction;
            if (!v.flat()) fails << " " << s << "@2^-" << e << ":flatness=" << v.worst_ratio;
            if (P.pieces.size() > cap) fails << " " << s << "@2^-" << e << ":#P=" << P.pieces.size() << ">" << cap;
            if (e == 16 && mult > mult_first + 2)
                fails << " " << s << ":mult " << mult << ">" << mult_first << "+2";
            pass = pass && v.ok() && P.pieces.size() <= cap && !(e == 16 && mult > mult_first + 2);
            std::fprintf(stderr, "  %-24s 2^-%-2d pieces=%-8zu cov=%.7f worst=%.2f mult=%d\n", s.c_str(), e,
                         P.pieces.size(), v.coverage.covered_fraction, v.worst_ratio, mult);
        }
    }
    double t = seconds_since(t0);
    pass = pass && t < 600;
    return {pass, fmt("48 runs, worst flatness %.2f, %.1fs", worst, t) + (pass ? "" : ";" + fails.str())};
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    double n = x.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Outcome shear_decay() {
    auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    std::string detail;
    // A2 bands live at l = k + 2 with k the order of y in K.
    for (auto [p, l] : {std::pair{kA2, 3}, std::pair{kDeg8, 7}}) {
        for (Rational xa : {Rational(1), Rational(3, 2)}) {
            ParametricPolyQ tau = a2_band_series(parse_poly(p), xa);
            std::vector<double> ls, lr;
            for (int e = 2; e <= 10; ++e) {
                double sigma = std::ldexp(1.0, -e);
                ls.push_back(std::log(sigma));
                lr.push_back(std::log(shear_residual(tau, l, std::sqrt(sigma), 401)));
            }
            double m = slope(ls, lr);
            pass = pass && m >= l - 0.1;
            detail += fmt("l=%d x_a=%g slope %.3f; ", l, xa.get_d(), m);
        }
    }
    double t = seconds_since(t0);
    return {pass && t < 60, detail + fmt("%.2fs", t)};
}

NumPoly random_poly(std::mt19937_64& rng, int deg) {
    std::uniform_real_distribution<double> u(-1, 1);
    NumPoly p(deg);
    for (int a = 0; a <= deg; ++a)
        for (int b = 0; a + b <= deg; ++b) p.at(a, b) = u(rng);
    return p;
}

Outcome affine_invariance() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1, 1);
    int ok = 0;
    double worst = 0;
    for (int i = 0; i < 100;) {
        NumPoly phi = random_poly(rng, 2 + i % 4);
        Parallelogram region{{u(rng), u(rng)}, {0.5 + 0.5 * std::fabs(u(rng)), 0.3 * u(rng)},
                             {0.3 * u(rng), 0.5 + 0.5 * std::fabs(u(rng))}};
        AffineMap T{{1 + u(rng), u(rng), u(rng), 1 + u(rng)}, {u(rng), u(rng)}};
        if (std::fabs(T.det()) < 1e-6 || T.condition_number() > 1e3) continue;
        ++i;
        auto [a, b] = flatness_affine_invariance(phi, region, T, 0.01, 9);
        double dev = std::fabs(a.sup_deviation - b.sup_deviation) / std::max(std::fabs(a.sup_deviation), 1e-300);
        worst = std::max(worst, dev);
        ok += dev <= 1e-9;
    }
    double t = seconds_since(t0);
    return {ok == 100 && t < 10, fmt("%d/100 triples, worst relative deviation %.2e, %.2fs", ok, worst, t)};
}

Outcome estimator_growth() {
    auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    std::string detail;
    EstimatorOptions opt;
    opt.trials = 8;
    opt.grid = GridSpec{64, 8};
    for (const char* s : {"x^2+y^2", kA2}) {
        BivariatePoly phi = parse_poly(s);
        NumPoly num = NumPoly::from_exact(phi);
        for (int e : {4, 5, 6}) {
            double delta = std::ldexp(1.0, -e);
            RatioReport r = decoupling_ratio(num, decompose(phi, delta).shapes(), delta, opt);
            double bound = 4 * std::pow(delta, -0.2);
            pass = pass && r.D2_mean <= bound;
            detail += fmt("%s 2^-%d D2=%.3f<=%.3f; ", s, e, r.D2_mean, bound);
        }
        RatioReport one = decoupling_ratio(num, {Parallelogram::from_box(Box{-1, 1, -1, 1})}, 1.0 / 16, opt);
        bool unit = std::fabs(one.D4_mean - 1) <= 1e-12 && std::fabs(one.D2_mean - 1) <= 1e-12;
        pass = pass && unit;
        detail += fmt("%s single piece D4-1=%.1e D2-1=%.1e; ", s, one.D4_mean - 1, one.D2_mean - 1);
    }
    double t = seconds_since(t0);
    return {pass && t < 300, detail + fmt("%.1fs", t)};
}

std::string read_without_timestamp(const std::string& path) {
    std::ifstream in(path);
    std::string line, out;
    while (std::getline(in, line))
        if (line.rfind("\"timestamp\":", 0) != 0) out += line + "\n";
    return out;
}

Outcome determinism(const std::string& tool) {
    std::string base = "/tmp/mhdec_accept_" + std::to_string(::getpid());
    std::string args = std::string(" partition -p '") + kA2 + "' -d 0.00390625 --seed 3 --threads 1 --out ";
    bool ran = true;
    for (const char* suffix : {"_a.json", "_b.json"})
        ran = ran && std::system((tool + args + base + suffix + " 2>/dev/null").c_str()) == 0;
    std::string a = read_without_timestamp(base + "_a.json"), b = read_without_timestamp(base + "_b.json");
    std::remove((base + "_a.json").c_str());
    std::remove((base + "_b.json").c_str());
    bool same = ran && !a.empty() && a == b;
    return {same, fmt("two CLI runs, %zu bytes each, %s", a.size(), same ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <path-to-mhdec> [criterion...]\n");
        return 2;
    }
    const std::string tool = argv[1];
    std::set<int> only;
    for (int i = 2; i < argc; ++i) only.insert(std::atoi(argv[i]));
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all = {
        {1, "symbolic model determinants", symbolic_models},
        {2, "weight identity and factorization round-trip", fuzz_factorization},
        {3, "curve order formula", curve_order_suite},
        {4, "partition soundness", partition_soundness},
        {5, "shear residual decay", shear_decay},
        {6, "flatness affine invariance", affine_invariance},
        {7, "estimator slow growth", estimator_growth},
        {8, "partition determinism", [&] { return determinism(tool); }},
    };
    int failed = 0;
    for (const auto& c : all) {
        if (!only.empty() && !only.count(c.id)) continue;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
