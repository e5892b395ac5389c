#include "qes/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace qes::numeric {

std::vector<double> RadialGrid::points() const {
    if (count < 16) throw std::invalid_argument("grid needs at least 16 points");
    if (!(r_min < r_max)) throw std::invalid_argument("grid needs r_min < r_max");
    if (spacing == Spacing::Log && !(r_min > 0))
        throw std::invalid_argument("log grid needs r_min > 0");
    std::vector<double> r(count);
    if (spacing == Spacing::Log) {
        double lr = std::log(r_min), step = (std::log(r_max) - lr) / (count - 1);
        for (int i = 0; i < count; ++i) r[i] = std::exp(lr + step * i);
    } else {
        double step = (r_max - r_min) / (count - 1);
        for (int i = 0; i < count; ++i) r[i] = r_min + step * i;
    }
    return r;
}

double effective_potential(const models::PotentialModel& model, double r) {
    const double fr = model.coupling(r);
    const double fp = model.coupling_prime(r);
    const double m = model.m;
    return m * m / (r * r) + r * fp + 2.0 * (m + 1.0) * fr + r * r * fr * fr;
}

double radial_residual(const models::PotentialModel& model,
                       const std::function<double(double)>& sampler, double epsilon_squared,
                       const RadialGrid& grid, double step_scale) {
    auto pts = grid.points();
    std::vector<double> vals(pts.size());
    double maxmag = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        vals[i] = sampler(pts[i]);
        maxmag = std::max(maxmag, std::abs(vals[i]));
    }
    if (maxmag == 0) return 0.0;

    double worst = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double r = pts[i];
        const double v0 = vals[i];
        if (std::abs(v0) < 1e-30 * maxmag) continue; // underflow clip

        // local variation scale, coarse probe of d log|phi| / dr
        const double mu = 1e-3;
        double vp = sampler(r * (1 + mu)), vm = sampler(r * (1 - mu));
        double s = std::abs(vp - vm) / (2 * mu * r * std::max(std::abs(v0), 1e-30 * maxmag));
        double h = step_scale * r / (1.0 + std::min(s * r, 1e4));

        const double f2 = sampler(r + 2 * h), f1 = sampler(r + h);
        const double b1 = sampler(r - h), b2 = sampler(r - 2 * h);
        const double d1 = (b2 - 8 * b1 + 8 * f1 - f2) / (12 * h);
        const double d2 = (-b2 + 16 * b1 - 30 * v0 + 16 * f1 - f2) / (12 * h * h);

        const double U = effective_potential(model, r);
        const double num = -d2 - d1 / r + (U - epsilon_squared) * v0;
        const double den = std::abs(d2) + std::abs(d1 / r) + std::abs(U * v0) +
                           std::abs(epsilon_squared * v0);
        if (den == 0) continue;
        worst = std::max(worst, std::abs(num) / den);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// tridiagonal eigenvalues via Sturm-sequence bisection

namespace {

// number of eigenvalues of the symmetric tridiagonal (diag, off) below x
int sturm_count(const std::vector<double>& diag, const std::vector<double>& off, double x) {
    int count = 0;
    double q = diag[0] - x;
    if (q < 0) ++count;
    for (std::size_t i = 1; i < diag.size(); ++i) {
        double denom = q;
        if (std::abs(denom) < 1e-300) denom = denom < 0 ? -1e-300 : 1e-300;
        q = diag[i] - x - off[i - 1] * off[i - 1] / denom;
        if (q < 0) ++count;
    }
    return count;
}

std::vector<double> lowest_eigenvalues(const std::vector<double>& diag,
                                       const std::vector<double>& off, int k) {
    double lo = diag[0], hi = diag[0];
    for (std::size_t i = 0; i < diag.size(); ++i) {
        double radius = (i > 0 ? std::abs(off[i - 1]) : 0.0) +
                        (i + 1 < diag.size() ? std::abs(off[i]) : 0.0);
        lo = std::min(lo, diag[i] - radius);
        hi = std::max(hi, diag[i] + radius);
    }
    std::vector<double> out;
    for (int j = 0; j < k; ++j) {
        double a = lo, b = hi;
        for (int it = 0; it < 220; ++it) {
            double mid = 0.5 * (a + b);
            if (sturm_count(diag, off, mid) > j)
                b = mid;
            else
                a = mid;
            if (b - a < 1e-13 * (1.0 + std::abs(a)) + 1e-13) break;
        }
        out.push_back(0.5 * (a + b));
    }
    return out;
}

struct Scheme {
    std::vector<double> diag, off;
};

constexpr double kPotentialCap = 1e12;

// exponential inner-tail magnitude of the factored wavefunction for a model
double inner_tail_magnitude(const models::PotentialModel& m, double r) {
    double r2 = r * r;
    switch (m.family) {
        case models::Family::InverseCubic: return std::abs(m.e) / r;
        case models::Family::InverseQuartic: return std::abs(m.e) / (2 * r2);
        case models::Family::InverseQuintic:
            return std::abs(m.e) / r + std::abs(m.f) / (2 * r2) + std::abs(m.g) / (3 * r2 * r);
        case models::Family::InverseSextic:
            return std::abs(m.f) / (2 * r2) + std::abs(m.h) / (4 * r2 * r2);
    }
    return 0;
}

bool has_singular_core(const models::PotentialModel& m) {
    switch (m.family) {
        case models::Family::InverseCubic: return m.e != 0;
        case models::Family::InverseQuartic: return m.e != 0;
        case models::Family::InverseQuintic: return m.e != 0 || m.f != 0 || m.g != 0;
        case models::Family::InverseSextic: return m.f != 0 || m.h != 0;
    }
    return false;
}

// chi = sqrt(r) phi transform; Dirichlet at both walls of [rmin, rmax]
Scheme chi_scheme(const models::PotentialModel& model, double rmin, double rmax, int intervals) {
    Scheme s;
    const double h = (rmax - rmin) / intervals;
    s.diag.resize(intervals - 1);
    s.off.assign(intervals - 2, -1.0 / (h * h));
    for (int i = 1; i < intervals; ++i) {
        double r = rmin + i * h;
        double u = std::min(effective_potential(model, r), kPotentialCap);
        s.diag[i - 1] = 2.0 / (h * h) + u - 0.25 / (r * r);
    }
    return s;
}

// finite-volume symmetrization with the regularity condition phi'(0) = 0
Scheme fv_scheme(const models::PotentialModel& model, double rmax, int intervals) {
    Scheme s;
    const double h = rmax / intervals;
    s.diag.resize(intervals - 1);
    s.off.resize(intervals - 2);
    for (int i = 1; i < intervals; ++i) {
        double r = i * h;
        double rp = r + h / 2, rm = r - h / 2;
        double u = std::min(effective_potential(model, r), kPotentialCap);
        double flux = (i == 1) ? rp / (r * h * h) : (rp + rm) / (r * h * h);
        s.diag[i - 1] = flux + u;
        if (i < intervals - 1) s.off[i - 1] = -rp / (h * h * std::sqrt(r * (r + h)));
    }
    return s;
}

std::vector<double> solve_scheme(const models::PotentialModel& model, double rmin, double rmax,
                                 int intervals, int k, bool core, double nu) {
    Scheme s;
    if (core || nu >= 0.4) {
        s = chi_scheme(model, rmin, rmax, intervals);
    } else {
        s = fv_scheme(model, rmax, intervals);
    }
    return lowest_eigenvalues(s.diag, s.off, k);
}

} // namespace

SpectrumEstimate fd_eigensolve(const models::PotentialModel& model, const RadialGrid& grid, int k) {
    if (k < 1) throw std::invalid_argument("need k >= 1 eigenvalues");
    const bool core = has_singular_core(model);

    double rmin = 0.0;
    if (core) {
        // push the inner wall to where the factored tail has killed the state
        double lo = 1e-8, hi = grid.r_max * 0.5;
        for (int it = 0; it < 200; ++it) {
            double mid = std::sqrt(lo * hi);
            if (inner_tail_magnitude(model, mid) > 34.0)
                lo = mid;
            else
                hi = mid;
        }
        rmin = std::max(lo, grid.r_min);
    }

    // centrifugal index nu of the no-core case (phi ~ r^nu at the origin)
    double nu = std::abs(model.m + model.d);
    if (model.family == models::Family::InverseQuartic) nu = std::abs(model.m + model.b);

    const int base = std::max(grid.count, 512);
    auto e1 = solve_scheme(model, rmin, grid.r_max, base, k, core, nu);
    auto e2 = solve_scheme(model, rmin, grid.r_max, 2 * base, k, core, nu);
    auto e3 = solve_scheme(model, rmin, grid.r_max, 4 * base, k, core, nu);

    SpectrumEstimate est;
    est.r_min = rmin;
    est.r_max = grid.r_max;
    est.count = base;
    for (int j = 0; j < k; ++j) {
        double r1 = (4 * e2[j] - e1[j]) / 3.0;
        double r2 = (4 * e3[j] - e2[j]) / 3.0;
        est.eigenvalues.push_back((16 * r2 - r1) / 15.0);
        est.richardson_error.push_back(std::abs(r2 - r1) / 15.0 + 1e-12 * (1 + std::abs(r2)));
    }

    // confinement check: the lowest level must not drift with the outer wall
    auto drift = solve_scheme(model, rmin, 1.3 * grid.r_max,
                              static_cast<int>(1.3 * base), 1, core, nu);
    double shift = std::abs(drift[0] - e1[0]);
    if (shift > 1e-4 * (1.0 + std::abs(est.eigenvalues[0])) + 10 * est.richardson_error[0])
        throw NotConfining("lowest level drifts with the outer wall (shift " +
                           std::to_string(shift) + ")");
    return est;
}

// ---------------------------------------------------------------------------
// adaptive Gauss-Kronrod quadrature (G7/K15 pair, QUADPACK nodes)

namespace {

const double kXgk[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769,
                        0.741531185599394, 0.586087235467691, 0.405845151377397,
                        0.207784955007898, 0.000000000000000};
const double kWgk[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250,
                        0.140653259715525, 0.169004726639267, 0.190350578064785,
                        0.204432940075298, 0.209482141084728};
const double kWg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                       0.417959183673469};

struct Panel {
    double a, b, integral, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b), half = 0.5 * (b - a);
    double fc = f(c);
    double result_k = kWgk[7] * fc;
    double result_g = kWg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        double x = half * kXgk[j];
        double fsum = f(c - x) + f(c + x);
        result_k += kWgk[j] * fsum;
        if (j % 2 == 1) result_g += kWg[j / 2] * fsum;
    }
    Panel p;
    p.a = a;
    p.b = b;
    p.integral = result_k * half;
    double diff = std::abs((result_k - result_g) * half);
    p.error = diff;
    if (!std::isfinite(p.integral)) p.error = std::numeric_limits<double>::infinity();
    return p;
}

} // namespace

double quadrature(const std::function<double(double)>& integrand, double lo, double hi,
                  double rel_tol) {
    if (!(lo < hi)) throw std::invalid_argument("quadrature needs lo < hi");

    std::priority_queue<Panel> panels;
    double total = 0, err = 0;
    // seed with a few panels so sharp inner structure is seen immediately
    const int seed_panels = 8;
    for (int i = 0; i < seed_panels; ++i) {
        double a = lo + (hi - lo) * i / seed_panels;
        double b = lo + (hi - lo) * (i + 1) / seed_panels;
        Panel p = gk15(integrand, a, b);
        total += p.integral;
        err += p.error;
        panels.push(p);
    }

    int evals = seed_panels;
    const int budget = 40000;
    while (err > rel_tol * std::max(std::abs(total), 1e-300) && !panels.empty()) {
        if (evals >= budget)
            throw NoConvergence("quadrature stalled (error " + std::to_string(err) + " after " +
                                    std::to_string(evals) + " panels)",
                                err);
        Panel worst = panels.top();
        panels.pop();
        if (worst.b - worst.a < 1e-15 * (std::abs(worst.a) + 1))
            throw NoConvergence("quadrature stalled on a vanishing panel", err);
        double mid = 0.5 * (worst.a + worst.b);
        Panel left = gk15(integrand, worst.a, mid);
        Panel right = gk15(integrand, mid, worst.b);
        total += left.integral + right.integral - worst.integral;
        err += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
        evals += 2;
    }

    // the window is expected to capture a decaying integrand
    double tail = std::abs(integrand(hi)) * (hi - lo);
    if (tail > 1e-6 * std::max(std::abs(total), 1e-30))
        throw NoConvergence("integrand does not decay at the window end", tail);
    return total;
}

} // namespace qes::numeric
