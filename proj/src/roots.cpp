#include <algorithm>

#include "mhdec/polyalg.hpp"

namespace mhdec {

namespace {

int sign_of(const Rational& v) { return sgn(v); }

std::vector<UPolyQ> sturm_sequence(const UPolyQ& p) {
    std::vector<UPolyQ> seq{p, p.derivative()};
    while (!seq.back().is_zero()) {
        UPolyQ q, r;
        UPolyQ::divmod(seq[seq.size() - 2], seq.back(), q, r);
        if (r.is_zero()) break;
        seq.push_back(-r);
    }
    return seq;
}

int sign_changes(const std::vector<UPolyQ>& seq, const Rational& x) {
    int changes = 0, last = 0;
    for (const auto& p : seq) {
        int s = sign_of(p.eval(x));
        if (s == 0) continue;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    return changes;
}

Rational cauchy_bound(const UPolyQ& p) {
    Rational m = 0;
    for (int i = 0; i < p.degree(); ++i) m = std::max(m, Rational(abs(p.coeffs[i] / p.leading())));
    return m + 1;
}

// Rational with the smallest denominator in [a, b], a <= b.
Rational simplest_between(const Rational& a, const Rational& b) {
    if (a <= 0 && b >= 0) return Rational(0);
    if (b < 0) return -simplest_between(-b, -a);
    mpz_class fl;
    mpz_fdiv_q(fl.get_mpz_t(), a.get_num_mpz_t(), a.get_den_mpz_t());
    if (Rational(fl) == a) return a;
    if (Rational(fl + 1) <= b) return Rational(fl + 1);
    Rational inner = simplest_between(1 / (b - fl), 1 / (a - fl));
    return Rational(fl) + 1 / inner;
}

}  // namespace

int sturm_count(const UPolyQ& squarefree, const Rational& a, const Rational& b) {
    if (squarefree.degree() < 1) return 0;
    auto seq = sturm_sequence(squarefree);
    return sign_changes(seq, a) - sign_changes(seq, b);
}

std::vector<UPolyQ> squarefree_decomposition(const UPolyQ& p) {
    std::vector<UPolyQ> out;
    if (p.degree() < 1) return out;
    UPolyQ f = p.monic();
    UPolyQ fp = f.derivative();
    UPolyQ a = UPolyQ::gcd(f, fp);
    UPolyQ q, r;
    UPolyQ::divmod(f, a, q, r);
    UPolyQ b = q;
    UPolyQ::divmod(fp, a, q, r);
    UPolyQ c = q;
    UPolyQ d = c - b.derivative();
    while (b.degree() >= 1) {
        UPolyQ g = UPolyQ::gcd(b, d);
        out.push_back(g);
        UPolyQ::divmod(b, g, q, r);
        b = q;
        UPolyQ::divmod(d, g, q, r);
        d = q - b.derivative();
    }
    while (!out.empty() && out.back().degree() < 1) out.pop_back();
    return out;
}

int RealAlgebraic::sign() const {
    if (lo > 0) return 1;
    if (hi < 0) return -1;
    if (lo == 0 && hi == 0) return 0;
    // The isolating interval straddles zero; zero is the root iff g(0) == 0.
    if (g.coeff(0) == 0 && sturm_count(g, lo, Rational(0)) == 1) return 0;
    return sturm_count(g, lo, Rational(0)) == 1 ? -1 : 1;
}

void RealAlgebraic::refine(const Rational& max_width) {
    if (is_exact()) return;
    auto seq = sturm_sequence(g);
    while (width() > max_width) {
        Rational mid = midpoint();
        if (g.eval(mid) == 0) {
            lo = hi = mid;
            return;
        }
        if (sign_changes(seq, lo) - sign_changes(seq, mid) > 0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

bool RealAlgebraic::is_root_of(const UPolyQ& f) const {
    if (f.is_zero()) return true;
    if (is_exact()) return f.eval(lo) == 0;
    UPolyQ h = UPolyQ::gcd(g, f);
    if (h.degree() < 1) return false;
    // h divides g, so h has at most one root in the isolating interval.
    return sturm_count(h, lo, hi) > 0;
}

std::vector<RealAlgebraic> isolate_real_roots(const UPolyQ& p, const Rational& max_width) {
    std::vector<RealAlgebraic> roots;
    if (p.degree() < 1) return roots;
    auto seq = sturm_sequence(p);
    Rational bound = cauchy_bound(p);
    struct Range {
        Rational a, b;
    };
    // Intervals are half-open (a, b]; an exact root found at a bisection point is recorded directly.
    std::vector<Range> stack{{-bound, bound}};
    std::vector<RealAlgebraic> found;
    while (!stack.empty()) {
        Range rg = stack.back();
        stack.pop_back();
        int n = sign_changes(seq, rg.a) - sign_changes(seq, rg.b);
        if (n == 0) continue;
        if (n == 1) {
            RealAlgebraic ra{p, rg.a, rg.b};
            if (p.eval(rg.b) == 0) {
                ra.lo = ra.hi = rg.b;
            }
            found.push_back(ra);
            continue;
        }
        Rational mid = (rg.a + rg.b) / 2;
        stack.push_back({rg.a, mid});
        stack.push_back({mid, rg.b});
    }
    for (auto& ra : found) {
        if (!ra.is_exact()) {
            ra.refine(max_width);
        }
        if (!ra.is_exact()) {
            Rational cand = simplest_between(ra.lo, ra.hi);
            if (cand != ra.lo && p.eval(cand) == 0) ra.lo = ra.hi = cand;
        }
        roots.push_back(ra);
    }
    std::sort(roots.begin(), roots.end(), [](const RealAlgebraic& a, const RealAlgebraic& b) { return a.lo < b.lo; });
    return roots;
}

}  // namespace mhdec
