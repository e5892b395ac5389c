#pragma once
#include <functional>
#include <vector>

#include "qes/errors.hpp"
#include "qes/models.hpp"

namespace qes::numeric {

struct RadialGrid {
    double r_min = 1e-2;
    double r_max = 10.0;
    int count = 200;
    enum class Spacing { Log, Uniform } spacing = Spacing::Log;

    std::vector<double> points() const;
    static RadialGrid defaults() { return {}; }
};

struct SpectrumEstimate {
    std::vector<double> eigenvalues;       // ascending epsilon^2 estimates
    std::vector<double> richardson_error;  // per-eigenvalue extrapolation error
    double r_min = 0, r_max = 0;
    int count = 0;
};

//! The radial operator's potential part,
//!   U(r) = m^2/r^2 + r f'(r) + 2(m+1) f(r) + r^2 f(r)^2,
//! so the eigenproblem reads -phi'' - phi'/r + U phi = eps^2 phi.
double effective_potential(const models::PotentialModel& model, double r);

//! Maximum relative residual of the radial equation over the grid, derivatives
//! taken by 5-point central differences with step `step_scale` relative to the
//! local variation scale of the sampler.  Points where |phi| underflows below
//! 1e-30 of the grid maximum are skipped.
double radial_residual(const models::PotentialModel& model,
                       const std::function<double(double)>& sampler, double epsilon_squared,
                       const RadialGrid& grid, double step_scale = 3e-3);

//! Lowest k eigenvalues of the discretized radial operator (symmetric
//! second-order scheme, Dirichlet walls, Richardson extrapolation over two
//! refinements).  Throws NotConfining when the lowest level drifts with the
//! outer wall position.
SpectrumEstimate fd_eigensolve(const models::PotentialModel& model, const RadialGrid& grid, int k);

//! Adaptive Gauss-Kronrod (G7/K15) integration to relative tolerance rel_tol.
//! Throws NoConvergence on subdivision stall or when the integrand fails to
//! decay at the outer end of the window.
double quadrature(const std::function<double(double)>& integrand, double lo, double hi,
                  double rel_tol = 1e-10);

} // namespace qes::numeric
