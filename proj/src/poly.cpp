#include <cctype>
#include <cmath>
#include <sstream>
#include <tuple>

#include "mhdec/polyalg.hpp"

namespace mhdec {

BivariatePoly BivariatePoly::constant(const Rational& c) { return monomial(c, 0, 0); }

BivariatePoly BivariatePoly::monomial(const Rational& c, int a, int b) {
    BivariatePoly p;
    p.add_term(a, b, c);
    return p;
}

bool BivariatePoly::is_constant() const { return terms.empty() || (terms.size() == 1 && terms.begin()->first == Exponent{0, 0}); }

Rational BivariatePoly::coeff(int a, int b) const {
    auto it = terms.find({a, b});
    return it == terms.end() ? Rational(0) : it->second;
}

void BivariatePoly::add_term(int a, int b, const Rational& c) {
    if (c == 0) return;
    if (a < 0 || b < 0) throw std::invalid_argument("negative exponent");
    // Callers may pass unreduced fractions such as 2/4; equality relies on canonical form.
    Rational v = c;
    v.canonicalize();
    auto [it, inserted] = terms.emplace(Exponent{a, b}, v);
    if (!inserted) {
        it->second += v;
        if (it->second == 0) terms.erase(it);
    }
}

int BivariatePoly::degree_x() const {
    int d = 0;
    for (const auto& [e, c] : terms) d = std::max(d, e.first);
    return d;
}
int BivariatePoly::degree_y() const {
    int d = 0;
    for (const auto& [e, c] : terms) d = std::max(d, e.second);
    return d;
}
int BivariatePoly::total_degree() const {
    int d = 0;
    for (const auto& [e, c] : terms) d = std::max(d, e.first + e.second);
    return d;
}
int BivariatePoly::min_x_exponent() const {
    if (terms.empty()) return 0;
    int d = terms.begin()->first.first;
    for (const auto& [e, c] : terms) d = std::min(d, e.first);
    return d;
}
int BivariatePoly::min_y_exponent() const {
    if (terms.empty()) return 0;
    int d = terms.begin()->first.second;
    for (const auto& [e, c] : terms) d = std::min(d, e.second);
    return d;
}

BivariatePoly BivariatePoly::dx() const {
    BivariatePoly r;
    for (const auto& [e, c] : terms)
        if (e.first > 0) r.add_term(e.first - 1, e.second, c * e.first);
    return r;
}

BivariatePoly BivariatePoly::dy() const {
    BivariatePoly r;
    for (const auto& [e, c] : terms)
        if (e.second > 0) r.add_term(e.first, e.second - 1, c * e.second);
    return r;
}

BivariatePoly BivariatePoly::swapped() const {
    BivariatePoly r;
    for (const auto& [e, c] : terms) r.add_term(e.second, e.first, c);
    return r;
}

BivariatePoly BivariatePoly::reflected(int ex, int ey) const {
    BivariatePoly r;
    for (const auto& [e, c] : terms) {
        int sgn = 1;
        if (ex < 0 && (e.first % 2)) sgn = -sgn;
        if (ey < 0 && (e.second % 2)) sgn = -sgn;
        r.add_term(e.first, e.second, sgn * c);
    }
    return r;
}

namespace {

std::vector<Rational> binomial_row(int n) {
    std::vector<Rational> row(n + 1, Rational(1));
    for (int k = 1; k < n; ++k) row[k] = row[k - 1] * (n - k + 1) / k;
    return row;
}

}  // namespace

BivariatePoly BivariatePoly::translated(const Rational& cx, const Rational& cy) const {
    BivariatePoly r;
    for (const auto& [e, c] : terms) {
        auto bx = binomial_row(e.first);
        auto by = binomial_row(e.second);
        for (int i = 0; i <= e.first; ++i) {
            Rational fx = bx[i];
            for (int k = 0; k < e.first - i; ++k) fx *= cx;
            if (fx == 0) continue;
            for (int j = 0; j <= e.second; ++j) {
                Rational fy = by[j];
                for (int k = 0; k < e.second - j; ++k) fy *= cy;
                if (fy == 0) continue;
                r.add_term(i, j, c * fx * fy);
            }
        }
    }
    return r;
}

BivariatePoly BivariatePoly::scaled_y(const Rational& cy) const {
    BivariatePoly r;
    for (const auto& [e, c] : terms) {
        Rational f = c;
        for (int k = 0; k < e.second; ++k) f *= cy;
        r.add_term(e.first, e.second, f);
    }
    return r;
}

BivariatePoly BivariatePoly::without_linear_part() const {
    BivariatePoly r = *this;
    r.terms.erase({0, 0});
    r.terms.erase({1, 0});
    r.terms.erase({0, 1});
    return r;
}

Rational BivariatePoly::eval(const Rational& xv, const Rational& yv) const {
    Rational acc = 0;
    for (const auto& [e, c] : terms) {
        Rational t = c;
        for (int k = 0; k < e.first; ++k) t *= xv;
        for (int k = 0; k < e.second; ++k) t *= yv;
        acc += t;
    }
    return acc;
}

double BivariatePoly::eval(double xv, double yv) const {
    double acc = 0;
    for (const auto& [e, c] : terms) acc += c.get_d() * std::pow(xv, e.first) * std::pow(yv, e.second);
    return acc;
}

std::string BivariatePoly::to_string() const {
    if (terms.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = terms.rbegin(); it != terms.rend(); ++it) {
        const auto& [e, c] = *it;
        Rational mag = abs(c);
        if (first) {
            if (c < 0) os << "-";
        } else {
            os << (c < 0 ? " - " : " + ");
        }
        first = false;
        bool has_var = e.first > 0 || e.second > 0;
        bool need_coeff = !has_var || mag != 1;
        bool wrote = false;
        if (need_coeff) {
            os << mag.get_str();
            wrote = true;
        }
        auto var = [&](char v, int p) {
            if (p == 0) return;
            if (wrote) os << "*";
            os << v;
            if (p > 1) os << "^" << p;
            wrote = true;
        };
        var('x', e.first);
        var('y', e.second);
    }
    return os.str();
}

BivariatePoly operator+(const BivariatePoly& p, const BivariatePoly& q) {
    BivariatePoly r = p;
    for (const auto& [e, c] : q.terms) r.add_term(e.first, e.second, c);
    return r;
}

BivariatePoly operator-(const BivariatePoly& p, const BivariatePoly& q) {
    BivariatePoly r = p;
    for (const auto& [e, c] : q.terms) r.add_term(e.first, e.second, -c);
    return r;
}

BivariatePoly operator-(const BivariatePoly& p) {
    BivariatePoly r;
    for (const auto& [e, c] : p.terms) r.terms.emplace(e, -c);
    return r;
}

BivariatePoly operator*(const BivariatePoly& p, const BivariatePoly& q) {
    BivariatePoly r;
    for (const auto& [e1, c1] : p.terms)
        for (const auto& [e2, c2] : q.terms) r.add_term(e1.first + e2.first, e1.second + e2.second, c1 * c2);
    return r;
}

BivariatePoly operator*(const Rational& c, const BivariatePoly& p) {
    BivariatePoly r;
    if (c == 0) return r;
    for (const auto& [e, v] : p.terms) r.terms.emplace(e, c * v);
    return r;
}

BivariatePoly pow(const BivariatePoly& p, int n) {
    BivariatePoly r = BivariatePoly::constant(1);
    for (int i = 0; i < n; ++i) r = r * p;
    return r;
}

BivariatePoly hessian_determinant(const BivariatePoly& phi) {
    BivariatePoly px = phi.dx(), py = phi.dy();
    BivariatePoly pxx = px.dx(), pyy = py.dy(), pxy = px.dy();
    return pxx * pyy - pxy * pxy;
}

std::optional<BivariatePoly> exact_divide(const BivariatePoly& p, const BivariatePoly& d) {
    if (d.is_zero()) throw std::domain_error("division by zero polynomial");
    BivariatePoly rem = p, quot;
    const auto& [dlead, dc] = *d.terms.rbegin();
    while (!rem.is_zero()) {
        const auto [rlead, rc] = *rem.terms.rbegin();
        int a = rlead.first - dlead.first, b = rlead.second - dlead.second;
        if (a < 0 || b < 0) return std::nullopt;
        Rational f = rc / dc;
        quot.add_term(a, b, f);
        rem = rem - BivariatePoly::monomial(f, a, b) * d;
    }
    return quot;
}

// Grammar: expr := ['+'|'-'] term (('+'|'-') term)* ; term := power ('*' power)* ;
// power := primary ['^' integer] ; primary := integer ['/' integer] | 'x' | 'y' | '(' expr ')'
namespace {

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    BivariatePoly parse() {
        skip();
        if (pos_ >= s_.size()) throw ParseError("empty expression", pos_);
        BivariatePoly r = expr();
        skip();
        if (pos_ < s_.size()) throw ParseError(std::string("unexpected character '") + s_[pos_] + "'", pos_);
        return r;
    }

private:
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool peek(char c) {
        skip();
        return pos_ < s_.size() && s_[pos_] == c;
    }

    std::string integer() {
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) throw ParseError("expected integer", start);
        return s_.substr(start, pos_ - start);
    }

    BivariatePoly expr() {
        BivariatePoly r;
        bool first = true;
        while (true) {
            int sign = 1;
            if (peek('+') || peek('-')) {
                sign = s_[pos_] == '-' ? -1 : 1;
                ++pos_;
            } else if (!first) {
                break;
            }
            first = false;
            BivariatePoly t = term();
            r = sign > 0 ? r + t : r - t;
        }
        return r;
    }

    BivariatePoly term() {
        BivariatePoly r = power();
        while (peek('*')) {
            ++pos_;
            r = r * power();
        }
        return r;
    }

    BivariatePoly power() {
        BivariatePoly base = primary();
        if (peek('^')) {
            ++pos_;
            skip();
            std::size_t at = pos_;
            std::string e = integer();
            if (e.size() > 4) throw ParseError("exponent too large", at);
            return pow(base, std::stoi(e));
        }
        return base;
    }

    BivariatePoly primary() {
        skip();
        if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
        char ch = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(ch))) {
            std::size_t at = pos_;
            Rational v{mpz_class(integer())};
            if (peek('/')) {
                ++pos_;
                mpz_class den(integer());
                if (den == 0) throw ParseError("zero denominator", at);
                v /= Rational(den);
            }
            skip();
            if (pos_ < s_.size() && (s_[pos_] == '.' || s_[pos_] == 'e' || s_[pos_] == 'E'))
                throw ParseError("non-rational coefficient", at);
            return BivariatePoly::constant(v);
        }
        if (ch == 'x' || ch == 'y') {
            ++pos_;
            return ch == 'x' ? BivariatePoly::x() : BivariatePoly::y();
        }
        if (ch == '(') {
            ++pos_;
            BivariatePoly r = expr();
            if (!peek(')')) throw ParseError("expected ')'", pos_);
            ++pos_;
            return r;
        }
        if (ch == '.') throw ParseError("non-rational coefficient", pos_);
        throw ParseError(std::string("unexpected character '") + ch + "'", pos_);
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace

BivariatePoly parse_poly(const std::string& text) { return Parser(text).parse(); }

}  // namespace mhdec
