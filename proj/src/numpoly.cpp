#include "mhdec/numpoly.hpp"

namespace mhdec {

namespace {

const std::vector<std::vector<double>>& binomials() {
    static const std::vector<std::vector<double>> table = [] {
        std::vector<std::vector<double>> t(64);
        for (int n = 0; n < 64; ++n) {
            t[n].assign(n + 1, 1.0);
            for (int k = 1; k < n; ++k) t[n][k] = t[n - 1][k - 1] + t[n - 1][k];
        }
        return t;
    }();
    return table;
}

// Taylor coefficients of p at (cx, cy) in interval arithmetic.
std::vector<Interval> taylor_interval(const NumPoly& p, double cx, double cy) {
    const auto& B = binomials();
    int D = p.deg;
    std::vector<Interval> px(D + 1), py(D + 1);
    px[0] = Interval(1.0);
    py[0] = Interval(1.0);
    for (int i = 1; i <= D; ++i) {
        px[i] = px[i - 1] * Interval(cx);
        py[i] = py[i - 1] * Interval(cy);
    }
    std::vector<Interval> e((D + 1) * (D + 1), Interval(0.0));
    for (int a = 0; a <= D; ++a)
        for (int b = 0; a + b <= D; ++b) {
            double cab = p.at(a, b);
            if (cab == 0) continue;
            for (int i = 0; i <= a; ++i)
                for (int j = 0; j <= b; ++j) {
                    Interval t = Interval(cab) * Interval(B[a][i] * B[b][j]) * px[a - i] * py[b - j];
                    e[i * (D + 1) + j] += t;
                }
        }
    return e;
}

}  // namespace

NumPoly NumPoly::from_exact(const BivariatePoly& p) {
    NumPoly r(std::max(1, p.total_degree()));
    for (const auto& [e, v] : p.terms) r.at(e.first, e.second) = v.get_d();
    return r;
}

double NumPoly::eval(double x, double y) const {
    double acc = 0;
    for (int a = deg; a >= 0; --a) {
        double inner = 0;
        for (int b = deg - a; b >= 0; --b) inner = inner * y + c[a * (deg + 1) + b];
        acc = acc * x + inner;
    }
    return acc;
}

Jet2 NumPoly::jet(double x, double y) const {
    // Horner in x on y-polynomials evaluated with their first two derivatives.
    Jet2 J;
    double v = 0, vx = 0, vxx = 0, vy = 0, vxy = 0, vyy = 0;
    for (int a = deg; a >= 0; --a) {
        double q = 0, qy = 0, qyy = 0;
        for (int b = deg - a; b >= 0; --b) {
            qyy = qyy * y + 2 * qy;
            qy = qy * y + q;
            q = q * y + c[a * (deg + 1) + b];
        }
        vxx = vxx * x + 2 * vx;
        vx = vx * x + v;
        v = v * x + q;
        vxy = vxy * x + vy;
        vy = vy * x + qy;
        vyy = vyy * x + qyy;
    }
    J.v = v;
    J.gx = vx;
    J.gy = vy;
    J.hxx = vxx;
    J.hxy = vxy;
    J.hyy = vyy;
    return J;
}

NumPoly NumPoly::dx() const {
    NumPoly r(deg);
    for (int a = 1; a <= deg; ++a)
        for (int b = 0; a + b <= deg; ++b) r.at(a - 1, b) = a * at(a, b);
    return r;
}

NumPoly NumPoly::dy() const {
    NumPoly r(deg);
    for (int a = 0; a <= deg; ++a)
        for (int b = 1; a + b <= deg; ++b) r.at(a, b - 1) = b * at(a, b);
    return r;
}

NumPoly NumPoly::taylor_at(double x0, double y0) const {
    const auto& B = binomials();
    NumPoly r(deg);
    std::vector<double> px(deg + 1, 1.0), py(deg + 1, 1.0);
    for (int i = 1; i <= deg; ++i) {
        px[i] = px[i - 1] * x0;
        py[i] = py[i - 1] * y0;
    }
    for (int a = 0; a <= deg; ++a)
        for (int b = 0; a + b <= deg; ++b) {
            double cab = at(a, b);
            if (cab == 0) continue;
            for (int i = 0; i <= a; ++i)
                for (int j = 0; j <= b; ++j) r.at(i, j) += cab * B[a][i] * B[b][j] * px[a - i] * py[b - j];
        }
    return r;
}

NumPoly NumPoly::compose_affine(double m11, double m12, double m21, double m22, double b1, double b2) const {
    const auto& B = binomials();
    NumPoly e = taylor_at(b1, b2);
    NumPoly r(deg);
    // (m11 u + m12 v)^i (m21 u + m22 v)^j
    std::vector<double> p11(deg + 1, 1.0), p12(deg + 1, 1.0), p21(deg + 1, 1.0), p22(deg + 1, 1.0);
    for (int i = 1; i <= deg; ++i) {
        p11[i] = p11[i - 1] * m11;
        p12[i] = p12[i - 1] * m12;
        p21[i] = p21[i - 1] * m21;
        p22[i] = p22[i - 1] * m22;
    }
    for (int i = 0; i <= deg; ++i)
        for (int j = 0; i + j <= deg; ++j) {
            double eij = e.at(i, j);
            if (eij == 0) continue;
            for (int k = 0; k <= i; ++k) {
                double fi = eij * B[i][k] * p11[k] * p12[i - k];  // u^k v^(i-k)
                if (fi == 0) continue;
                for (int l = 0; l <= j; ++l) {
                    double f = fi * B[j][l] * p21[l] * p22[j - l];  // u^l v^(j-l)
                    r.at(k + l, (i - k) + (j - l)) += f;
                }
            }
        }
    return r;
}

NumPoly NumPoly::without_linear() const {
    NumPoly r = *this;
    r.at(0, 0) = 0;
    if (deg >= 1) {
        r.at(1, 0) = 0;
        r.at(0, 1) = 0;
    }
    return r;
}

NumPoly NumPoly::scaled(double f) const {
    NumPoly r = *this;
    for (auto& v : r.c) v *= f;
    return r;
}

double NumPoly::max_abs_coeff() const {
    double m = 0;
    for (double v : c) m = std::max(m, std::fabs(v));
    return m;
}

Interval NumPoly::range(const Box& b) const {
    double cx = 0.5 * (b.x0 + b.x1), cy = 0.5 * (b.y0 + b.y1);
    double hx = Interval::up(std::max(Interval::up(b.x1 - cx), Interval::up(cx - b.x0)));
    double hy = Interval::up(std::max(Interval::up(b.y1 - cy), Interval::up(cy - b.y0)));
    auto e = taylor_interval(*this, cx, cy);
    Interval acc(0.0);
    for (int i = 0; i <= deg; ++i)
        for (int j = 0; i + j <= deg; ++j) {
            const Interval& eij = e[i * (deg + 1) + j];
            if (eij.lo == 0 && eij.hi == 0) continue;
            acc += eij * Interval::sym_pow(hx, i) * Interval::sym_pow(hy, j);
        }
    // The natural extension keeps even powers nonnegative; intersect the two enclosures.
    Interval X(b.x0, b.x1), Y(b.y0, b.y1), nat(0.0);
    for (int i = 0; i <= deg; ++i)
        for (int j = 0; i + j <= deg; ++j)
            if (at(i, j) != 0) nat += Interval(at(i, j)) * X.pow(i) * Y.pow(j);
    return {std::max(acc.lo, nat.lo), std::min(acc.hi, nat.hi)};
}

NumPoly::SecondBounds NumPoly::second_derivative_bounds(const Box& b) const {
    SecondRanges r = second_derivative_ranges(b);
    return {r.xx.mag(), r.xy.mag(), r.yy.mag()};
}

NumPoly::SecondRanges NumPoly::second_derivative_ranges(const Box& b) const {
    double cx = 0.5 * (b.x0 + b.x1), cy = 0.5 * (b.y0 + b.y1);
    double hx = Interval::up(std::max(Interval::up(b.x1 - cx), Interval::up(cx - b.x0)));
    double hy = Interval::up(std::max(Interval::up(b.y1 - cy), Interval::up(cy - b.y0)));
    auto e = taylor_interval(*this, cx, cy);
    Interval sxx(0.0), sxy(0.0), syy(0.0);
    for (int i = 0; i <= deg; ++i)
        for (int j = 0; i + j <= deg; ++j) {
            const Interval& eij = e[i * (deg + 1) + j];
            if (eij.lo == 0 && eij.hi == 0) continue;
            if (i >= 2) sxx += eij * Interval(double(i) * (i - 1)) * Interval::sym_pow(hx, i - 2) * Interval::sym_pow(hy, j);
            if (j >= 2) syy += eij * Interval(double(j) * (j - 1)) * Interval::sym_pow(hx, i) * Interval::sym_pow(hy, j - 2);
            if (i >= 1 && j >= 1) sxy += eij * Interval(double(i) * j) * Interval::sym_pow(hx, i - 1) * Interval::sym_pow(hy, j - 1);
        }
    return {sxx, sxy, syy};
}

}  // namespace mhdec
