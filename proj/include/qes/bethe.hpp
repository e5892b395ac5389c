#pragma once
#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "qes/errors.hpp"

namespace qes::bethe {

using Cx = std::complex<double>;

// Tolerances (double precision leaves ~1e-15 headroom; the margins below
// absorb polynomial conditioning).
inline constexpr double kBetheTol      = 1e-10; // absolute residual of the root equations
inline constexpr double kConstraintTol = 1e-9;  // relative to coefficient scale
inline constexpr double kDistinctTol   = 1e-8;  // minimum admissible root separation
inline constexpr double kPoleTol       = 1e-12; // |P(root)| below this is a pole collision
inline constexpr double kRootMatchTol  = 1e-8;  // dedup distance for solution multisets

//! Second-order ODE with polynomial coefficients,
//!     P(x) S'' + Q(x) S' + W(x) S = 0,
//! deg P <= 4, deg Q <= 5, deg W <= 4, and deg Q > deg W whenever W != 0.
struct PolyODE {
    std::array<double, 5> p{};
    std::array<double, 6> q{};
    std::array<double, 5> w{};
    int deg_p = -1;
    int deg_q = -1;
    int deg_w = -1;

    Cx P(Cx x) const;
    Cx Q(Cx x) const;
    Cx W(Cx x) const;
    double coefficient_scale() const; // max(1, |p_k|, |q_k|, |w_k|)
};

PolyODE make_poly_ode(const std::array<double, 5>& p,
                      const std::array<double, 6>& q,
                      const std::array<double, 5>& w);

//! A candidate solution of the root system: n pairwise-distinct values.
struct RootSet {
    int level = 0;                 // n
    std::vector<Cx> roots;         // sorted by (real, imag)
    double max_bethe_residual = 0.0;
    double distinctness_gap = std::numeric_limits<double>::infinity();

    bool all_real(double tol = 1e-9) const;
    std::vector<double> real_parts() const;
};

// Builds a RootSet in canonical order and fills the distinctness gap.
// The residual field is left for the caller (or solve_bethe_roots) to fill.
RootSet make_root_set(int level, std::vector<Cx> roots);

//! Residuals of the root equations: entry j is
//!     Q(r_j)/P(r_j) + sum_{k != j} 2/(r_j - r_k).
//! Throws SingularRoot when a root sits on a zero of P.
std::vector<Cx> bethe_residuals(const PolyODE& ode, const RootSet& rs);

// Analytic Jacobian of the residual map, row-major n x n.
std::vector<Cx> bethe_jacobian(const PolyODE& ode, const std::vector<Cx>& roots);

struct SeedStrategy {
    int chebyshev = 15;          // Chebyshev-spaced seeds in the coefficient bracket
    int random_restarts = 48;    // extra random tuples
    std::uint64_t rng_seed = 0x5eedbea7u; // fixed: results must be reproducible
    double bracket = 0.0;        // 0 -> derive from coefficient magnitudes
    int max_iters = 120;
};

//! All distinct solutions of the root system found by damped-Newton multistart.
//! Results are deduplicated, each sorted canonically, and the list is ordered
//! lexicographically.  Throws NoConvergence when no seed reaches kBetheTol.
std::vector<RootSet> solve_bethe_roots(const PolyODE& ode, int n,
                                       const SeedStrategy& strategy = {});

//! Residuals of the five coefficient relations tying W to the root sums.
struct ConstraintReport {
    std::array<double, 5> w_residuals{}; // |w_k - required(k)|, k = 0..4
    bool satisfied = false;
    double scale = 1.0;
};

ConstraintReport coefficient_constraints(const PolyODE& ode, const RootSet& rs);

//! Expands P S'' + Q S' + W S with S = prod (x - r_j) in the monomial basis
//! and returns the largest coefficient magnitude.  Near zero iff S solves the ODE.
double verify_polynomial_solution(const PolyODE& ode, const RootSet& rs);

} // namespace qes::bethe
