#include "qes/bethe.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "qes/poly.hpp"

namespace qes::bethe {

namespace {

bool canonical_less(const Cx& a, const Cx& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

double max_abs(const std::vector<Cx>& v) {
    double m = 0.0;
    for (const Cx& x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

Cx PolyODE::P(Cx x) const { return poly::eval(std::span<const double>(p), x); }
Cx PolyODE::Q(Cx x) const { return poly::eval(std::span<const double>(q), x); }
Cx PolyODE::W(Cx x) const { return poly::eval(std::span<const double>(w), x); }

double PolyODE::coefficient_scale() const {
    double s = 1.0;
    for (double v : p) s = std::max(s, std::abs(v));
    for (double v : q) s = std::max(s, std::abs(v));
    for (double v : w) s = std::max(s, std::abs(v));
    return s;
}

PolyODE make_poly_ode(const std::array<double, 5>& p,
                      const std::array<double, 6>& q,
                      const std::array<double, 5>& w) {
    PolyODE ode;
    ode.p = p;
    ode.q = q;
    ode.w = w;
    ode.deg_p = poly::degree(p);
    ode.deg_q = poly::degree(q);
    ode.deg_w = poly::degree(w);
    if (ode.deg_w >= 0 && ode.deg_q <= ode.deg_w)
        throw DegreeViolation("deg Q must exceed deg W when W is nonzero (deg Q = " +
                              std::to_string(ode.deg_q) + ", deg W = " + std::to_string(ode.deg_w) + ")");
    return ode;
}

bool RootSet::all_real(double tol) const {
    for (const Cx& r : roots)
        if (std::abs(r.imag()) > tol * (1.0 + std::abs(r))) return false;
    return true;
}

std::vector<double> RootSet::real_parts() const {
    std::vector<double> out(roots.size());
    for (std::size_t i = 0; i < roots.size(); ++i) out[i] = roots[i].real();
    return out;
}

RootSet make_root_set(int level, std::vector<Cx> roots) {
    RootSet rs;
    rs.level = level;
    std::sort(roots.begin(), roots.end(), canonical_less);
    rs.roots = std::move(roots);
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < rs.roots.size(); ++j)
        for (std::size_t k = j + 1; k < rs.roots.size(); ++k)
            gap = std::min(gap, std::abs(rs.roots[j] - rs.roots[k]));
    rs.distinctness_gap = gap;
    return rs;
}

std::vector<Cx> bethe_residuals(const PolyODE& ode, const RootSet& rs) {
    const auto& r = rs.roots;
    const int n = static_cast<int>(r.size());
    std::vector<Cx> out(n);
    for (int j = 0; j < n; ++j) {
        Cx pj = ode.P(r[j]);
        if (std::abs(pj) < kPoleTol)
            throw SingularRoot("root collides with a zero of P(x)");
        Cx acc = ode.Q(r[j]) / pj;
        for (int k = 0; k < n; ++k)
            if (k != j) acc += 2.0 / (r[j] - r[k]);
        out[j] = acc;
    }
    return out;
}

std::vector<Cx> bethe_jacobian(const PolyODE& ode, const std::vector<Cx>& roots) {
    const int n = static_cast<int>(roots.size());
    const auto dq = poly::derivative(std::span<const double>(ode.q));
    const auto dp = poly::derivative(std::span<const double>(ode.p));
    std::vector<Cx> J(static_cast<std::size_t>(n) * n, Cx(0.0));
    for (int j = 0; j < n; ++j) {
        Cx pj = ode.P(roots[j]);
        Cx qj = ode.Q(roots[j]);
        Cx dpj = poly::eval(std::span<const double>(dp), roots[j]);
        Cx dqj = poly::eval(std::span<const double>(dq), roots[j]);
        Cx diag = (dqj * pj - qj * dpj) / (pj * pj);
        for (int k = 0; k < n; ++k) {
            if (k == j) continue;
            Cx inv2 = 2.0 / ((roots[j] - roots[k]) * (roots[j] - roots[k]));
            diag -= inv2;
            J[static_cast<std::size_t>(j) * n + k] = inv2;
        }
        J[static_cast<std::size_t>(j) * n + j] = diag;
    }
    return J;
}

namespace {

// One damped Newton run from a seed tuple.  Returns true on convergence.
bool newton_run(const PolyODE& ode, std::vector<Cx>& r, int max_iters, double* out_residual) {
    const int n = static_cast<int>(r.size());
    Eigen::MatrixXcd J(n, n);
    Eigen::VectorXcd F(n), step(n);

    auto eval_residual = [&](const std::vector<Cx>& x, Eigen::VectorXcd& f) -> bool {
        for (int j = 0; j < n; ++j) {
            Cx pj = ode.P(x[j]);
            if (std::abs(pj) < kPoleTol) return false;
            Cx acc = ode.Q(x[j]) / pj;
            for (int k = 0; k < n; ++k)
                if (k != j) acc += 2.0 / (x[j] - x[k]);
            f[j] = acc;
        }
        return true;
    };

    auto separate = [&](std::vector<Cx>& x) -> bool {
        // Repulsion step for colliding iterates; give up if they keep merging.
        for (int attempt = 0; attempt < 3; ++attempt) {
            bool ok = true;
            for (int j = 0; j < n && ok; ++j)
                for (int k = j + 1; k < n && ok; ++k) {
                    double sep = std::abs(x[j] - x[k]);
                    double lim = kDistinctTol * (1.0 + std::abs(x[j]));
                    if (sep < lim) {
                        Cx dir = sep > 0 ? (x[j] - x[k]) / sep : Cx(1.0, 0.0);
                        x[j] += 10.0 * lim * dir;
                        x[k] -= 10.0 * lim * dir;
                        ok = false;
                    }
                }
            if (ok) return true;
        }
        return false;
    };

    if (!separate(r)) return false;
    if (!eval_residual(r, F)) return false;
    double fnorm = F.lpNorm<Eigen::Infinity>();

    for (int it = 0; it < max_iters; ++it) {
        if (fnorm < kBetheTol * 0.25) break;
        auto Jflat = bethe_jacobian(ode, r);
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) J(j, k) = Jflat[static_cast<std::size_t>(j) * n + k];
        step = J.partialPivLu().solve(-F);
        if (!step.allFinite()) return false;

        double lambda = 1.0;
        bool accepted = false;
        for (int back = 0; back < 24; ++back, lambda *= 0.5) {
            std::vector<Cx> trial(r);
            for (int j = 0; j < n; ++j) trial[j] += lambda * step[j];
            if (!separate(trial)) continue;
            Eigen::VectorXcd Ft(n);
            if (!eval_residual(trial, Ft)) continue;
            double fn = Ft.lpNorm<Eigen::Infinity>();
            if (fn < (1.0 - 0.25 * lambda) * fnorm || fn < kBetheTol * 0.25) {
                r = std::move(trial);
                F = Ft;
                fnorm = fn;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    if (out_residual) *out_residual = fnorm;
    return fnorm < kBetheTol;
}

} // namespace

std::vector<RootSet> solve_bethe_roots(const PolyODE& ode, int n, const SeedStrategy& strategy) {
    if (n == 0) {
        RootSet empty = make_root_set(0, {});
        empty.max_bethe_residual = 0.0;
        return {empty};
    }
    if (n < 0) throw std::invalid_argument("level must be non-negative");

    double bracket = strategy.bracket;
    if (bracket <= 0.0) {
        // Cauchy-style bound from the coefficient magnitudes of Q (and P).
        double lead = 0.0;
        for (int k = ode.deg_q; k >= 0 && lead == 0.0; --k) lead = std::abs(ode.q[k]);
        double m = 0.0;
        for (double v : ode.q) m = std::max(m, std::abs(v));
        bracket = (lead > 0) ? 1.0 + m / lead : 4.0;
        bracket = std::min(bracket, 64.0);
    }

    // Seed pool: Chebyshev points in the bracket plus the polynomial roots of Q
    // (these are exact for n = 1 and good anchors otherwise).
    std::vector<Cx> pool;
    for (int i = 0; i < strategy.chebyshev; ++i) {
        double x = std::cos(M_PI * (i + 0.5) / strategy.chebyshev);
        pool.emplace_back(bracket * x, 0.0);
    }
    for (const Cx& z : poly::roots(std::span<const double>(ode.q)))
        pool.push_back(z);

    std::mt19937_64 rng(strategy.rng_seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    std::vector<RootSet> found;
    double best_residual = std::numeric_limits<double>::infinity();

    auto try_seed = [&](std::vector<Cx> seed) {
        double res = std::numeric_limits<double>::infinity();
        if (!newton_run(ode, seed, strategy.max_iters, &res)) {
            best_residual = std::min(best_residual, res);
            return;
        }
        // Snap negligible imaginary parts so real solutions stay exactly real.
        for (Cx& z : seed)
            if (std::abs(z.imag()) < 1e-10 * (1.0 + std::abs(z))) z = Cx(z.real(), 0.0);
        RootSet rs = make_root_set(n, std::move(seed));
        if (rs.distinctness_gap <= kDistinctTol) return;
        std::vector<Cx> resv;
        try {
            resv = bethe_residuals(ode, rs);
        } catch (const SingularRoot&) {
            return;
        }
        rs.max_bethe_residual = max_abs(resv);
        if (rs.max_bethe_residual >= kBetheTol) {
            best_residual = std::min(best_residual, rs.max_bethe_residual);
            return;
        }
        for (const RootSet& other : found) {
            bool same = true;
            for (int j = 0; j < n && same; ++j)
                same = std::abs(other.roots[j] - rs.roots[j]) <
                       kRootMatchTol * (1.0 + std::abs(rs.roots[j]));
            if (same) return;
        }
        found.push_back(std::move(rs));
    };

    // Deterministic sweeps: contiguous and strided picks from the pool...
    const int psz = static_cast<int>(pool.size());
    for (int start = 0; start + n <= psz; ++start) {
        std::vector<Cx> seed(pool.begin() + start, pool.begin() + start + n);
        try_seed(std::move(seed));
    }
    for (int stride = 2; stride <= 3; ++stride)
        for (int start = 0; start + stride * (n - 1) < psz; ++start) {
            std::vector<Cx> seed;
            for (int j = 0; j < n; ++j) seed.push_back(pool[start + stride * j]);
            try_seed(std::move(seed));
        }
    // ...plus random restarts with complex jitter so conjugate pairs are reachable.
    for (int t = 0; t < strategy.random_restarts; ++t) {
        std::vector<Cx> seed(n);
        for (int j = 0; j < n; ++j)
            seed[j] = Cx(bracket * unit(rng), 0.3 * bracket * unit(rng));
        try_seed(std::move(seed));
    }

    if (found.empty())
        throw NoConvergence("no seed converged to a root system solution (best residual " +
                                std::to_string(best_residual) + ")",
                            best_residual);

    std::sort(found.begin(), found.end(), [](const RootSet& a, const RootSet& b) {
        return std::lexicographical_compare(a.roots.begin(), a.roots.end(),
                                            b.roots.begin(), b.roots.end(), canonical_less);
    });
    return found;
}

ConstraintReport coefficient_constraints(const PolyODE& ode, const RootSet& rs) {
    const auto& r = rs.roots;
    const double n = static_cast<double>(rs.level);
    Cx s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    for (const Cx& x : r) {
        s1 += x;
        s2 += x * x;
        s3 += x * x * x;
        s4 += x * x * x * x;
    }
    Cx pairsum = 0.5 * (s1 * s1 - s2);

    const auto& p = ode.p;
    const auto& q = ode.q;
    // Required W coefficients from the residue-cancellation expansion.
    Cx w4 = -n * q[5];
    Cx w3 = -q[5] * s1 - n * q[4];
    Cx w2 = -q[5] * s2 - q[4] * s1 - n * (n - 1) * p[4] - n * q[3];
    Cx w1 = -q[5] * s3 - q[4] * s2 - n * (n - 1) * p[3] - n * q[2] -
            (2.0 * (n - 1) * p[4] + q[3]) * s1;
    Cx w0 = -q[5] * s4 - q[4] * s3 - 2.0 * p[4] * pairsum -
            (q[3] + 2.0 * (n - 1) * p[4]) * s2 - n * (n - 1) * p[2] -
            (2.0 * (n - 1) * p[3] + q[2]) * s1 - n * q[1];

    ConstraintReport rep;
    rep.scale = ode.coefficient_scale();
    const Cx req[5] = {w0, w1, w2, w3, w4};
    rep.satisfied = true;
    for (int k = 0; k < 5; ++k) {
        rep.w_residuals[k] = std::abs(Cx(ode.w[k]) - req[k]);
        if (rep.w_residuals[k] >= kConstraintTol * rep.scale) rep.satisfied = false;
    }
    return rep;
}

double verify_polynomial_solution(const PolyODE& ode, const RootSet& rs) {
    using poly::Cx;
    std::vector<Cx> S = poly::from_roots(std::span<const Cx>(rs.roots));
    std::vector<Cx> dS = poly::derivative(std::span<const Cx>(S));
    std::vector<Cx> ddS = poly::derivative(std::span<const Cx>(dS));

    std::vector<Cx> pc(ode.p.begin(), ode.p.end());
    std::vector<Cx> qc(ode.q.begin(), ode.q.end());
    std::vector<Cx> wc(ode.w.begin(), ode.w.end());

    auto acc = poly::convolve(std::span<const Cx>(pc), std::span<const Cx>(ddS));
    auto t1 = poly::convolve(std::span<const Cx>(qc), std::span<const Cx>(dS));
    auto t2 = poly::convolve(std::span<const Cx>(wc), std::span<const Cx>(S));
    std::size_t len = std::max({acc.size(), t1.size(), t2.size()});
    acc.resize(len, Cx(0.0));
    for (std::size_t i = 0; i < t1.size(); ++i) acc[i] += t1[i];
    for (std::size_t i = 0; i < t2.size(); ++i) acc[i] += t2[i];

    double worst = 0.0;
    for (const Cx& c : acc) worst = std::max(worst, std::abs(c));
    return worst;
}

} // namespace qes::bethe
