#pragma once
// Test-side helpers: planted ODE instances, independent root formulas, and a
// small dense Newton used to pin fixture calibrations.  Everything here is
// deliberately separate from the library's solution paths.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include "qes/bethe.hpp"

namespace support {

using Cx = std::complex<double>;

struct Planted {
    qes::bethe::PolyODE ode;
    std::vector<Cx> roots;
};

// Plants a polynomial solution: random distinct roots and P, then Q built so
// the residue condition holds at every root, then W by exact division of
// -(P S'' + Q S') by S.
inline Planted plant(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_int_distribution<int> nd(1, 5);
    const int n = nd(rng);

    std::vector<Cx> roots;
    while (static_cast<int>(roots.size()) < n) {
        double cand = 4.0 * coef(rng);
        bool ok = std::abs(cand) > 0.15;
        for (const Cx& r : roots) ok = ok && std::abs(cand - r.real()) > 0.3;
        if (ok) roots.emplace_back(cand, 0.0);
    }

    // P with comfortable margin from the roots
    std::array<double, 5> p{};
    while (true) {
        for (auto& v : p) v = coef(rng);
        bool ok = true;
        for (const Cx& r : roots) {
            Cx val = 0;
            for (int k = 4; k >= 0; --k) val = val * r + p[k];
            ok = ok && std::abs(val) > 0.25;
        }
        if (ok) break;
    }

    // Q(r_j) = -P(r_j) * sum_{k != j} 2/(r_j - r_k), extended by S * R
    auto evalp = [&](Cx x) {
        Cx val = 0;
        for (int k = 4; k >= 0; --k) val = val * x + p[k];
        return val;
    };
    std::vector<Cx> targets(n);
    for (int j = 0; j < n; ++j) {
        Cx s = 0;
        for (int k = 0; k < n; ++k)
            if (k != j) s += 2.0 / (roots[j] - roots[k]);
        targets[j] = -evalp(roots[j]) * s;
    }
    // Lagrange interpolant through (roots, targets), degree <= n-1
    std::vector<Cx> qc(6, Cx(0));
    for (int j = 0; j < n; ++j) {
        std::vector<Cx> basis{Cx(1)};
        Cx denom = 1;
        for (int k = 0; k < n; ++k) {
            if (k == j) continue;
            std::vector<Cx> nb(basis.size() + 1, Cx(0));
            for (std::size_t i = 0; i < basis.size(); ++i) {
                nb[i] -= roots[k] * basis[i];
                nb[i + 1] += basis[i];
            }
            basis = std::move(nb);
            denom *= roots[j] - roots[k];
        }
        for (std::size_t i = 0; i < basis.size(); ++i) qc[i] += targets[j] * basis[i] / denom;
    }
    // S * R with deg R = 5 - n keeps deg Q = 5 and deg Q > deg W
    std::vector<Cx> S{Cx(1)};
    for (const Cx& r : roots) {
        std::vector<Cx> nb(S.size() + 1, Cx(0));
        for (std::size_t i = 0; i < S.size(); ++i) {
            nb[i] -= r * S[i];
            nb[i + 1] += S[i];
        }
        S = std::move(nb);
    }
    std::vector<double> R(6 - n);
    for (auto& v : R) v = coef(rng);
    R.back() = (R.back() < 0 ? -1.0 : 1.0) * (0.6 + std::abs(R.back()));
    for (std::size_t i = 0; i < S.size(); ++i)
        for (std::size_t j = 0; j < R.size(); ++j) qc[i + j] += S[i] * R[j];

    std::array<double, 6> q{};
    for (int i = 0; i < 6; ++i) q[i] = qc[i].real();

    // W = -(P S'' + Q S') / S, exact division
    auto derive = [](const std::vector<Cx>& c) {
        std::vector<Cx> d(std::max<std::size_t>(c.size() - 1, 1), Cx(0));
        for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = static_cast<double>(k) * c[k];
        return d;
    };
    auto conv = [](const std::vector<Cx>& a, const std::vector<Cx>& b) {
        std::vector<Cx> out(a.size() + b.size() - 1, Cx(0));
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
        return out;
    };
    std::vector<Cx> pc(p.begin(), p.end()), qcv(q.begin(), q.end());
    auto dS = derive(S), ddS = derive(dS);
    auto num = conv(pc, ddS);
    auto t = conv(qcv, dS);
    num.resize(std::max(num.size(), t.size()), Cx(0));
    for (std::size_t i = 0; i < t.size(); ++i) num[i] += t[i];
    for (auto& v : num) v = -v;
    // long division num / S  (S monic)
    std::vector<Cx> quot(num.size() - S.size() + 1, Cx(0));
    for (int i = static_cast<int>(quot.size()) - 1; i >= 0; --i) {
        Cx c = num[i + S.size() - 1];
        quot[i] = c;
        for (std::size_t j = 0; j < S.size(); ++j) num[i + j] -= c * S[j];
    }
    std::array<double, 5> w{};
    for (std::size_t i = 0; i < quot.size() && i < 5; ++i) w[i] = quot[i].real();

    Planted out{qes::bethe::make_poly_ode(p, q, w), roots};
    return out;
}

// Quadratic-formula oracle, both roots.
inline std::vector<double> quadratic_roots(double A, double B, double C) {
    double disc = B * B - 4 * A * C;
    if (disc < 0) return {};
    double sq = std::sqrt(disc);
    // numerically stable split
    double q = -0.5 * (B + (B >= 0 ? sq : -sq));
    std::vector<double> out;
    if (A != 0) out.push_back(q / A);
    if (q != 0) out.push_back(C / q);
    if (out.size() == 2 && out[0] > out[1]) std::swap(out[0], out[1]);
    return out;
}

// Cardano oracle for a z^3 + b z^2 + c z + d = 0, all complex roots.
inline std::vector<Cx> cubic_roots(double a, double b, double c, double d) {
    Cx p = (3.0 * a * c - b * b) / (3.0 * a * a);
    Cx q = (2.0 * b * b * b - 9.0 * a * b * c + 27.0 * a * a * d) / (27.0 * a * a * a);
    Cx disc = q * q / 4.0 + p * p * p / 27.0;
    Cx u = std::pow(-q / 2.0 + std::sqrt(disc), 1.0 / 3.0);
    if (std::abs(u) < 1e-14) u = std::pow(-q / 2.0 - std::sqrt(disc), 1.0 / 3.0);
    std::vector<Cx> out;
    const Cx omega(-0.5, std::sqrt(3.0) / 2.0);
    for (int k = 0; k < 3; ++k) {
        Cx uk = u;
        for (int i = 0; i < k; ++i) uk *= omega;
        Cx t = std::abs(uk) > 1e-14 ? uk - p / (3.0 * uk) : Cx(0);
        out.push_back(t - b / (3.0 * a));
    }
    return out;
}

// Small damped Newton with forward-difference Jacobian, used to pin fixture
// calibrations from hand-written constraint systems.
inline bool newton_solve(const std::function<std::vector<double>(const std::vector<double>&)>& F,
                         std::vector<double>& x, double tol = 1e-13, int iters = 200) {
    const int n = static_cast<int>(x.size());
    for (int it = 0; it < iters; ++it) {
        std::vector<double> f = F(x);
        double fn = 0;
        for (double v : f) fn = std::max(fn, std::abs(v));
        if (fn < tol) return true;
        // Jacobian
        std::vector<std::vector<double>> J(n, std::vector<double>(n));
        for (int j = 0; j < n; ++j) {
            double h = 1e-7 * (1 + std::abs(x[j]));
            std::vector<double> xp = x;
            xp[j] += h;
            std::vector<double> fp = F(xp);
            for (int i = 0; i < n; ++i) J[i][j] = (fp[i] - f[i]) / h;
        }
        // Gaussian elimination with partial pivoting
        std::vector<double> rhs(n);
        for (int i = 0; i < n; ++i) rhs[i] = -f[i];
        for (int col = 0; col < n; ++col) {
            int piv = col;
            for (int r = col + 1; r < n; ++r)
                if (std::abs(J[r][col]) > std::abs(J[piv][col])) piv = r;
            std::swap(J[piv], J[col]);
            std::swap(rhs[piv], rhs[col]);
            if (std::abs(J[col][col]) < 1e-300) return false;
            for (int r = col + 1; r < n; ++r) {
                double m = J[r][col] / J[col][col];
                for (int cc = col; cc < n; ++cc) J[r][cc] -= m * J[col][cc];
                rhs[r] -= m * rhs[col];
            }
        }
        std::vector<double> dx(n);
        for (int i = n - 1; i >= 0; --i) {
            double s = rhs[i];
            for (int j = i + 1; j < n; ++j) s -= J[i][j] * dx[j];
            dx[i] = s / J[i][i];
        }
        double lambda = 1.0;
        bool moved = false;
        for (int back = 0; back < 30; ++back, lambda *= 0.5) {
            std::vector<double> xt = x;
            for (int i = 0; i < n; ++i) xt[i] += lambda * dx[i];
            std::vector<double> ft = F(xt);
            double fnt = 0;
            for (double v : ft) fnt = std::max(fnt, std::abs(v));
            if (fnt < fn) {
                x = xt;
                moved = true;
                break;
            }
        }
        if (!moved) return false;
    }
    std::vector<double> f = F(x);
    double fn = 0;
    for (double v : f) fn = std::max(fn, std::abs(v));
    return fn < tol;
}

} // namespace support
