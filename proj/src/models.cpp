#include "qes/models.hpp"

#include <algorithm>
#include <cmath>

#include "qes/numeric.hpp"
#include "qes/poly.hpp"

namespace qes::models {

namespace {

bool finite(double x) { return std::isfinite(x); }

double sq(double x) { return x * x; }

Cx power_sum(const std::vector<Cx>& roots, int k) {
    Cx s = 0;
    for (const Cx& r : roots) {
        Cx t = 1.0;
        for (int i = 0; i < k; ++i) t *= r;
        s += t;
    }
    return s;
}

} // namespace

const char* family_name(Family f) {
    switch (f) {
        case Family::InverseCubic: return "cubic";
        case Family::InverseQuartic: return "quartic";
        case Family::InverseQuintic: return "quintic";
        case Family::InverseSextic: return "sextic";
    }
    return "?";
}

const char* case_name(CaseTag c) {
    switch (c) {
        case CaseTag::OscillatorLike: return "oscillator";
        case CaseTag::CoulombLike: return "coulomb";
        case CaseTag::Plain: return "plain";
    }
    return "?";
}

std::vector<char> family_coefficients(Family f) {
    switch (f) {
        case Family::InverseCubic: return {'a', 'b', 'd', 'e'};
        case Family::InverseQuartic: return {'a', 'b', 'e'};
        case Family::InverseQuintic: return {'a', 'b', 'd', 'e', 'f', 'g'};
        case Family::InverseSextic: return {'a', 'd', 'f', 'h'};
    }
    return {};
}

double PotentialModel::coupling(double r) const {
    switch (family) {
        case Family::InverseCubic: return a + b / r + d / (r * r) + e / (r * r * r);
        case Family::InverseQuartic: return a + b / (r * r) + e / (r * r * r * r);
        case Family::InverseQuintic: {
            double r2 = r * r, r3 = r2 * r;
            return a + b / r + d / r2 + e / r3 + f / (r2 * r2) + g / (r2 * r3);
        }
        case Family::InverseSextic: {
            double r2 = r * r;
            return a + d / r2 + f / (r2 * r2) + h / (r2 * r2 * r2);
        }
    }
    return 0;
}

double PotentialModel::coupling_prime(double r) const {
    switch (family) {
        case Family::InverseCubic: {
            double r2 = r * r;
            return -b / r2 - 2 * d / (r2 * r) - 3 * e / (r2 * r2);
        }
        case Family::InverseQuartic: {
            double r3 = r * r * r;
            return -2 * b / r3 - 4 * e / (r3 * r * r);
        }
        case Family::InverseQuintic: {
            double r2 = r * r, r3 = r2 * r;
            return -b / r2 - 2 * d / r3 - 3 * e / (r2 * r2) - 4 * f / (r2 * r3) - 5 * g / (r3 * r3);
        }
        case Family::InverseSextic: {
            double r3 = r * r * r;
            return -2 * d / r3 - 4 * f / (r3 * r * r) - 6 * h / (r3 * r3 * r);
        }
    }
    return 0;
}

PotentialModel make_model(Family family, double a, double b, double d, double e, double f,
                          double g, double h, double M, int m) {
    PotentialModel mm;
    mm.family = family;
    mm.a = a;
    mm.b = b;
    mm.d = d;
    mm.e = e;
    mm.f = f;
    mm.g = g;
    mm.h = h;
    mm.M = M;
    mm.m = m;
    switch (family) {
        case Family::InverseCubic: mm.f = mm.g = mm.h = 0; break;
        case Family::InverseQuartic: mm.d = mm.f = mm.g = mm.h = 0; break;
        case Family::InverseQuintic: mm.h = 0; break;
        case Family::InverseSextic: mm.b = mm.e = mm.g = 0; break;
    }
    for (double v : {mm.a, mm.b, mm.d, mm.e, mm.f, mm.g, mm.h, mm.M})
        if (!finite(v)) throw std::invalid_argument("potential coefficients must be finite");
    if (M <= 0) throw std::invalid_argument("mass must be positive");
    return mm;
}

double TailParams::operator()(double r) const {
    double r2 = r * r;
    return A * r2 + B * r + D / r + F / r2 + G / (r2 * r) + H / (r2 * r2);
}

double TailParams::prime(double r) const {
    double r2 = r * r;
    return 2 * A * r + B - D / r2 - 2 * F / (r2 * r) - 3 * G / (r2 * r2) - 4 * H / (r2 * r2 * r);
}

namespace {

// Tail-decay parameter B for the exponential-tail case, fixed by the linear
// coefficient relation of each family.
double coulomb_B(const PotentialModel& model, int n, const Lambdas& lam) {
    if (model.family == Family::InverseCubic) {
        double alpha = 1.0 - model.m - model.d;
        return lam.l1 * model.b / (1.0 + 2.0 * alpha + 2.0 * n);
    }
    return (1.0 + 2.0 * lam.l3) * model.b / (7.0 + 2.0 * n - 2.0 * lam.l3);
}

} // namespace

ReducedProblem reduce(const PotentialModel& model, CaseTag caze, int n) {
    if (n < 0) throw std::invalid_argument("level must be non-negative");
    const bool two_case_family =
        model.family == Family::InverseCubic || model.family == Family::InverseQuintic;
    if (two_case_family && caze == CaseTag::Plain)
        throw CaseMismatch("this family has oscillator-like and coulomb-like regimes; pick one");
    if (!two_case_family && caze != CaseTag::Plain)
        throw CaseMismatch("quartic/sextic families have a single (plain) regime");
    if (caze == CaseTag::OscillatorLike && model.b != 0.0)
        throw CaseMismatch("the Gaussian-tail regime requires b = 0");
    if (caze == CaseTag::CoulombLike && model.a != 0.0)
        throw CaseMismatch("the exponential-tail regime requires a = 0");

    ReducedProblem red;
    red.case_tag = caze;
    red.level = n;

    Lambdas& lam = red.lambdas;
    lam.l1 = 1.0 + 2.0 * model.m + 2.0 * model.d;
    lam.l2 = 1.0 - model.m - model.b;
    lam.l3 = model.m + model.d;

    std::array<double, 5> p{};
    std::array<double, 6> q{};
    std::array<double, 5> w{};

    switch (model.family) {
        case Family::InverseCubic: {
            const double alpha = 1.0 - model.m - model.d;
            if (alpha <= 0)
                throw ExponentViolation("leading exponent 1 - m - d must be positive");
            red.exponent = alpha;
            red.var = RadialVar::R;
            double B = caze == CaseTag::CoulombLike ? coulomb_B(model, n, lam) : 0.0;
            lam.l4 = B + model.b;
            red.tail = TailParams{model.a / 2, B, model.e, 0, 0, 0};
            double eps2 = caze == CaseTag::OscillatorLike
                              ? -2.0 * model.a * (2.0 * alpha - 1.0 + n)
                              : sq(model.b) - sq(B);
            red.epsilon_squared = eps2;
            p = {0, 0, 1, 0, 0};
            q = {-2 * model.e, 2 * alpha + 1, 2 * B, 2 * model.a, 0, 0};
            w = {2 * alpha - 1 - 2 * model.e * (B + model.b),
                 (2 * alpha + 1) * B - 4 * model.a * model.e - lam.l1 * model.b,
                 sq(B) - sq(model.b) + eps2 + 2 * model.a * (2 * alpha - 1), 0, 0};
            break;
        }
        case Family::InverseQuartic: {
            const double kappa = 2.0 - model.m - model.b;
            if (kappa <= 0)
                throw ExponentViolation("leading exponent 2 - m - b must be positive");
            red.exponent = kappa;
            red.var = RadialVar::RSquared;
            red.tail = TailParams{model.a / 2, 0, 0, model.e / 2, 0, 0};
            double eps2 = -4.0 * model.a * (n + lam.l2);
            red.epsilon_squared = eps2;
            p = {0, 0, 4, 0, 0};
            q = {-4 * model.e, 4 * (2 + lam.l2), 4 * model.a, 0, 0, 0};
            w = {4 * lam.l2 - 4 * model.a * model.e, eps2 + 4 * model.a * lam.l2, 0, 0, 0};
            break;
        }
        case Family::InverseQuintic: {
            const double eta = 3.0 - model.m - model.d;
            if (eta <= 0)
                throw ExponentViolation("leading exponent 3 - m - d must be positive");
            red.exponent = eta;
            red.var = RadialVar::R;
            double B = caze == CaseTag::CoulombLike ? coulomb_B(model, n, lam) : 0.0;
            lam.l4 = B + model.b;
            red.tail = TailParams{model.a / 2, B, model.e, model.f / 2, model.g / 3, 0};
            double eps2 = caze == CaseTag::OscillatorLike
                              ? -2.0 * model.a * (n + 3.0 - 2.0 * lam.l3)
                              : sq(model.b) - sq(B);
            red.epsilon_squared = eps2;
            p = {0, 0, 0, 0, 1};
            q = {-2 * model.g, -2 * model.f, -2 * model.e, 7 - 2 * lam.l3, 2 * B, 2 * model.a};
            w = {-2 * model.f - 2 * model.g * lam.l4,
                 -4 * model.e - 4 * model.a * model.g - 2 * model.f * lam.l4,
                 9 - 6 * lam.l3 - 4 * model.a * model.f - 2 * model.e * lam.l4,
                 7 * B - 2 * lam.l3 * (B + model.b) - model.b - 4 * model.a * model.e,
                 sq(B) - sq(model.b) + eps2 + 2 * model.a * (3.0 - 2.0 * lam.l3)};
            break;
        }
        case Family::InverseSextic: {
            const double beta = 4.0 - model.m - model.d;
            if (beta <= 0)
                throw ExponentViolation("leading exponent 4 - m - d must be positive");
            red.exponent = beta;
            red.var = RadialVar::RSquared;
            red.tail = TailParams{model.a / 2, 0, 0, model.f / 2, 0, model.h / 4};
            double eps2 = -4.0 * model.a * (n + 2.0 - model.m - model.d);
            red.epsilon_squared = eps2;
            p = {0, 0, 0, 4, 0};
            q = {-4 * model.h, -4 * model.f, 4 * (1 + beta), 4 * model.a, 0, 0};
            w = {-4 * (model.f + model.a * model.h),
                 4 * (4 - 2 * model.m - 2 * model.d - model.a * model.f),
                 eps2 + 8 * model.a - 4 * model.a * (model.m + model.d), 0, 0};
            break;
        }
    }

    red.ode = bethe::make_poly_ode(p, q, w);
    return red;
}

double energy_squared(const PotentialModel& model, CaseTag caze, int n,
                      const ReducedProblem& reduced) {
    (void)caze;
    (void)n;
    return sq(model.M) + reduced.epsilon_squared;
}

double energy_squared_printed(const PotentialModel& model, CaseTag caze, int n) {
    const double M2 = sq(model.M);
    switch (model.family) {
        case Family::InverseCubic: {
            double alpha = 1.0 - model.m - model.d;
            if (caze == CaseTag::OscillatorLike) return M2 - 2 * model.a * (2 * alpha - 1 + n);
            double ratio = (3 - 2 * alpha) / (1 + 2 * n + 2 * alpha);
            return M2 + (1 - sq(ratio)) * sq(model.b);
        }
        case Family::InverseQuartic: {
            double l2 = 1.0 - model.m - model.b;
            return M2 - 4 * model.a * (n + l2);
        }
        case Family::InverseQuintic: {
            double l3 = model.m + model.d;
            if (caze == CaseTag::OscillatorLike) return M2 - 2 * model.a * (3 + n - 2 * l3);
            return M2 + sq((6 + 2 * n - 4 * l3) * model.b) / sq(7 + 2 * n - 2 * l3);
        }
        case Family::InverseSextic:
            return M2 - 4 * model.a * (n + 2 - model.m - model.d);
    }
    return M2;
}

std::vector<FamilyResidual> family_constraints(const PotentialModel& model, CaseTag caze, int n,
                                               const bethe::RootSet& roots) {
    std::vector<FamilyResidual> out;
    const auto& r = roots.roots;
    auto S = [&](int k) { return power_sum(r, k); };
    Cx pairs = 0.5 * (S(1) * S(1) - S(2));
    auto push = [&](const std::string& name, Cx v) { out.push_back({name, std::abs(v)}); };

    ReducedProblem red = reduce(model, caze, n);
    const Lambdas& lam = red.lambdas;
    const double a = model.a, b = model.b, e = model.e, f = model.f, g = model.g, h = model.h;
    const double eps2 = red.epsilon_squared;

    switch (model.family) {
        case Family::InverseCubic: {
            double alpha = red.exponent;
            if (caze == CaseTag::OscillatorLike) {
                push("energy", 2 * a * (2 * alpha + n - 1) + eps2);
                push("sum1", 4 * a * e - 2 * a * S(1));
                push("sum2", 2 * a * S(2) + (2 * alpha + n - 1) * (n + 1.0));
            } else {
                double B = red.tail.B;
                push("tailB", (1 + 2 * alpha + 2 * n) * B - lam.l1 * b);
                push("sum1", (2 * alpha + n - 1) * (n + 1.0) + 2 * B * S(1) - 2 * e * (b + B));
            }
            break;
        }
        case Family::InverseQuartic:
            push("sum1", a * S(1) + (n + 1.0) * (n + lam.l2) - a * e);
            break;
        case Family::InverseQuintic: {
            double l3 = lam.l3;
            if (caze == CaseTag::OscillatorLike) {
                push("energy", 2 * a * (n + 3 - 2 * l3) + eps2);
                push("sum1", 2 * a * S(1) - 4 * a * e);
                push("sum2", 2 * a * S(2) + (n + 3.0) * (n + 3 - 2 * l3) - 4 * a * f);
                push("sum3", 2 * a * S(3) + (5 + 2 * n - 2 * l3) * S(1) - 2 * e * (n + 2.0) - 4 * a * g);
                push("sum4", 2 * a * S(4) + (5 + 2 * n - 2 * l3) * S(2) + 2.0 * pairs -
                                 2 * e * S(1) - 2 * f * (1.0 + n));
            } else {
                double B = red.tail.B, l4 = lam.l4;
                push("tailB", (7 + 2 * n - 2 * l3) * B - b * (1 + 2 * l3));
                push("sum1", 2 * B * S(1) + (n + 3.0) * (n + 3 - 2 * l3) - 2 * e * l4);
                push("sum2", 2 * B * S(2) + (5 + 2 * n - 2 * l3) * S(1) -
                                 2 * (n * e + 2 * e + l4 * f));
                push("sum3", 2 * B * S(3) + (5 + 2 * n - 2 * l3) * S(2) + 2.0 * pairs -
                                 2 * (n + 1.0) * f - 2 * g * l4 - 2 * e * S(1));
            }
            break;
        }
        case Family::InverseSextic: {
            double md = model.m + model.d;
            push("sum1", a * S(1) + (n + 2.0) * (n + 2 - md) - a * f);
            push("sum2", a * S(2) + (2 * n + 3 - md) * S(1) - (n + 1.0) * f - a * h);
            break;
        }
    }
    return out;
}

std::vector<QuasiExactSolution> solve_level(const PotentialModel& model, CaseTag caze, int n,
                                            const bethe::SeedStrategy& strategy) {
    ReducedProblem red = reduce(model, caze, n);
    std::vector<bethe::RootSet> sets;
    if (n == 0) {
        sets.push_back(bethe::make_root_set(0, {}));
    } else {
        sets = bethe::solve_bethe_roots(red.ode, n, strategy);
    }

    std::vector<QuasiExactSolution> out;
    for (auto& rs : sets) {
        QuasiExactSolution sol;
        sol.level = n;
        sol.model = model;
        sol.case_tag = caze;
        sol.reduced = red;
        sol.epsilon_squared = red.epsilon_squared;
        sol.energy_squared = sq(model.M) + red.epsilon_squared;
        sol.roots = rs;
        sol.report = bethe::coefficient_constraints(red.ode, rs);
        sol.family_residuals = family_constraints(model, caze, n, rs);
        double worst_family = 0;
        for (const auto& fr : sol.family_residuals) worst_family = std::max(worst_family, fr.value);
        double scale = sol.report.scale;
        sol.valid = rs.max_bethe_residual < bethe::kBetheTol && sol.report.satisfied &&
                    worst_family < bethe::kConstraintTol * scale * 10;
        sol.physical = rs.all_real() && sol.energy_squared >= 0;
        out.push_back(std::move(sol));
    }
    return out;
}

// ---------------------------------------------------------------------------
// wavefunction assembly

RadialSampler::RadialSampler(double exponent, TailParams tail, std::vector<Cx> roots,
                             RadialVar var, double scale)
    : exponent_(exponent), tail_(tail), roots_(std::move(roots)), var_(var), scale_(scale) {}

Cx RadialSampler::assemble(double r) const {
    if (!(r > 0)) throw EvaluationDomain("radial sampler defined for r > 0 only");
    double logmag = exponent_ * std::log(r) + tail_(r);
    Cx phase = 1.0;
    const double x = var_ == RadialVar::R ? r : r * r;
    for (const Cx& root : roots_) {
        Cx factor = x - root;
        double mag = std::abs(factor);
        if (mag == 0.0) return Cx(0.0);
        logmag += std::log(mag);
        phase *= factor / mag;
    }
    if (logmag < -700.0) return Cx(0.0);
    return scale_ * std::exp(logmag) * phase;
}

double RadialSampler::operator()(double r) const { return assemble(r).real(); }

double RadialSampler::log_magnitude(double r) const {
    if (!(r > 0)) throw EvaluationDomain("radial sampler defined for r > 0 only");
    double logmag = exponent_ * std::log(r) + tail_(r);
    const double x = var_ == RadialVar::R ? r : r * r;
    for (const Cx& root : roots_) {
        double mag = std::abs(x - root);
        logmag += std::log(std::max(mag, 1e-300));
    }
    return logmag + std::log(std::abs(scale_));
}

Cx RadialSampler::log_derivative(double r) const {
    if (!(r > 0)) throw EvaluationDomain("radial sampler defined for r > 0 only");
    Cx acc = exponent_ / r + tail_.prime(r);
    const double x = var_ == RadialVar::R ? r : r * r;
    const double dx = var_ == RadialVar::R ? 1.0 : 2.0 * r;
    for (const Cx& root : roots_) acc += dx / (x - root);
    return acc;
}

double RadialSampler::derivative(double r) const {
    return (assemble(r) * log_derivative(r)).real();
}

RadialSampler assemble_wavefunction(const QuasiExactSolution& solution) {
    return RadialSampler(solution.reduced.exponent, solution.reduced.tail, solution.roots.roots,
                         solution.reduced.var);
}

std::array<Cx, 2> assemble_spinor(const QuasiExactSolution& solution, double r, double theta) {
    const double M = solution.model.M;
    if (solution.energy_squared < 0)
        throw EvaluationDomain("negative E^2: no real energy branch to assemble");
    const double E = std::sqrt(solution.energy_squared);
    if (std::abs(E - M) <= kSpinorTolOverM * M)
        throw EnergyDegenerate("E == M at tolerance: the upper component is 1/(E-M)-singular");

    RadialSampler lower = assemble_wavefunction(solution);
    const double R = lower(r);
    const double dR = lower.derivative(r);
    const double fr = solution.model.coupling(r);
    const int m = solution.model.m;

    const Cx phase_lower = std::exp(Cx(0, -m * theta));
    const Cx phase_upper = std::exp(Cx(0, -(m + 1) * theta));
    Cx upper = Cx(0, -1.0) / (E - M) * (dR - (m / r + r * fr) * R) * phase_upper;
    return {upper, R * phase_lower};
}

// ---------------------------------------------------------------------------
// normalization

double closed_form_radial_integral(double nu, double mu1, double mu2, TailKind kind) {
    if (mu1 <= 0) throw NonNormalizable("outer tail does not decay");
    if (mu2 < 0) throw NonNormalizable("inner tail does not decay");
    if (kind == TailKind::Linear) {
        if (mu2 == 0.0) return std::tgamma(nu + 1.0) / std::pow(mu1, nu + 1.0);
        return 2.0 * std::pow(mu2 / mu1, (nu + 1.0) / 2.0) *
               std::cyl_bessel_k(nu + 1.0, 2.0 * std::sqrt(mu1 * mu2));
    }
    if (mu2 == 0.0) return 0.5 * std::tgamma((nu + 1.0) / 2.0) / std::pow(mu1, (nu + 1.0) / 2.0);
    return std::pow(mu2 / mu1, (nu + 1.0) / 4.0) *
           std::cyl_bessel_k((nu + 1.0) / 2.0, 2.0 * std::sqrt(mu1 * mu2));
}

namespace {

// Decay admissibility of the assembled tail on (0, inf).
void require_normalizable(const QuasiExactSolution& sol) {
    const TailParams& t = sol.reduced.tail;
    if (t.A > 0 || (t.A == 0 && t.B > 0)) throw NonNormalizable("outer tail grows");
    if (t.A == 0 && t.B == 0) throw NonNormalizable("no outer decay mechanism");
    // innermost nonzero inverse power must have negative coefficient
    const double inv[4] = {t.D, t.F, t.G, t.H};
    for (int k = 3; k >= 0; --k) {
        if (inv[k] != 0) {
            if (inv[k] > 0) throw NonNormalizable("inner tail grows toward the origin");
            break;
        }
    }
    if (sol.reduced.exponent <= 0) throw NonNormalizable("leading exponent not positive");
}

double quadrature_norm_squared(const QuasiExactSolution& sol) {
    RadialSampler phi = assemble_wavefunction(sol);
    const TailParams& t = sol.reduced.tail;
    // window from the tail exponents: |log phi| ~ 45 beyond the usable range
    double hi = 1.0;
    if (t.A < 0)
        hi = std::sqrt(45.0 / -t.A) + 5.0;
    else if (t.B < 0)
        hi = 45.0 / -t.B + 10.0;
    double lo = 1e-6;
    // push the lower end outward while the integrand is negligible there
    while (lo < 0.5 && phi.log_magnitude(lo) * 2.0 < -80.0) lo *= 2.0;
    lo *= 0.5;
    auto f = [&](double r) {
        double v = phi(r);
        return v * v * r;
    };
    return numeric::quadrature(f, lo, hi, 1e-11);
}

} // namespace

double normalization_constant(const QuasiExactSolution& solution, NormMethod method) {
    require_normalizable(solution);
    if (method == NormMethod::Quadrature)
        return std::sqrt(quadrature_norm_squared(solution));

    const TailParams& t = solution.reduced.tail;
    const bool linear_kind = solution.model.family == Family::InverseCubic &&
                             solution.case_tag == CaseTag::CoulombLike;
    const bool quadratic_kind = solution.model.family == Family::InverseQuartic;
    if ((!linear_kind && !quadratic_kind) || !solution.roots.all_real())
        return std::sqrt(quadrature_norm_squared(solution)); // Meijer-G territory: quadrature

    // |phi|^2 expands into finitely many Bessel-K integrals via the squared
    // polynomial factor.
    std::vector<Cx> poly = poly::from_roots(std::span<const Cx>(solution.roots.roots));
    std::vector<Cx> sqr = poly::convolve(std::span<const Cx>(poly), std::span<const Cx>(poly));

    double total = 0.0;
    for (std::size_t k = 0; k < sqr.size(); ++k) {
        double ck = sqr[k].real();
        if (ck == 0.0) continue;
        double nu;
        double term;
        if (linear_kind) {
            nu = 2.0 * solution.reduced.exponent + 1.0 + static_cast<double>(k);
            term = closed_form_radial_integral(nu, -2.0 * t.B, -2.0 * t.D, TailKind::Linear);
        } else {
            nu = 2.0 * solution.reduced.exponent + 1.0 + 2.0 * static_cast<double>(k);
            term = closed_form_radial_integral(nu, -2.0 * t.A, -2.0 * t.F, TailKind::Quadratic);
        }
        total += ck * term;
    }
    if (!(total > 0)) throw NonNormalizable("closed-form norm not positive");
    return std::sqrt(total);
}

// ---------------------------------------------------------------------------
// calibration

namespace {

double* coefficient_slot(PotentialModel& m, char name) {
    switch (name) {
        case 'a': return &m.a;
        case 'b': return &m.b;
        case 'd': return &m.d;
        case 'e': return &m.e;
        case 'f': return &m.f;
        case 'g': return &m.g;
        case 'h': return &m.h;
        default: return nullptr;
    }
}

struct BranchSample {
    double value = 0;                      // free-coefficient value
    std::vector<double> residuals;         // named family residuals
    QuasiExactSolution solution;
};

double worst_residual(const std::vector<double>& v) {
    double w = 0;
    for (double x : v) w = std::max(w, std::abs(x));
    return w;
}

} // namespace

std::vector<Calibrated> calibrate(const PotentialModel& model_template, char free_coefficient,
                                  CaseTag caze, int n, double lo, double hi, int samples,
                                  const bethe::SeedStrategy& strategy) {
    if (!(std::isfinite(lo) && std::isfinite(hi)) || !(lo < hi) || samples < 2)
        throw FreeParameterUnbounded("calibration scan window must be finite with lo < hi");
    {
        auto allowed = family_coefficients(model_template.family);
        if (std::find(allowed.begin(), allowed.end(), free_coefficient) == allowed.end())
            throw std::invalid_argument(std::string("coefficient '") + free_coefficient +
                                        "' is not part of this family");
    }

    // Signed residual evaluation: the named family constraints as functions of
    // the free coefficient, one list per root-system branch.
    auto eval_at = [&](double c) -> std::vector<BranchSample> {
        PotentialModel m = model_template;
        *coefficient_slot(m, free_coefficient) = c;
        std::vector<BranchSample> out;
        std::vector<QuasiExactSolution> sols;
        try {
            sols = solve_level(m, caze, n, strategy);
        } catch (const NoConvergence&) {
            return out;
        } catch (const ExponentViolation&) {
            return out;
        } catch (const SingularRoot&) {
            return out;
        }
        for (auto& s : sols) {
            if (s.roots.max_bethe_residual >= bethe::kBetheTol) continue;
            BranchSample bs;
            bs.value = c;
            for (const auto& fr : s.family_residuals) bs.residuals.push_back(fr.value);
            bs.solution = std::move(s);
            out.push_back(std::move(bs));
        }
        return out;
    };

    std::vector<Calibrated> found;
    auto accept = [&](const BranchSample& bs) {
        double scale = bs.solution.report.scale;
        if (worst_residual(bs.residuals) >= bethe::kConstraintTol * scale * 10) return;
        for (const auto& c : found) {
            PotentialModel copy = c.model;
            if (std::abs(*coefficient_slot(copy, free_coefficient) - bs.value) <
                1e-7 * (1 + std::abs(bs.value)))
                return;
        }
        PotentialModel m = model_template;
        *coefficient_slot(m, free_coefficient) = bs.value;
        Calibrated cal{m, bs.solution};
        cal.solution.valid = true;
        found.push_back(std::move(cal));
    };

    // Continuation scan: locate minima/zero crossings of the worst residual,
    // then bisection-polish on the dominant component.
    double prev_value = 0;
    std::vector<BranchSample> prev;
    for (int i = 0; i < samples; ++i) {
        double c = lo + (hi - lo) * i / (samples - 1);
        auto cur = eval_at(c);
        for (const auto& bs : cur)
            if (worst_residual(bs.residuals) < bethe::kConstraintTol * bs.solution.report.scale)
                accept(bs);
        // pair branches with the previous scan point by nearest root multiset
        for (const auto& b1 : prev) {
            for (const auto& b2 : cur) {
                if (b1.solution.roots.roots.size() != b2.solution.roots.roots.size()) continue;
                double dist = 0;
                for (std::size_t j = 0; j < b1.solution.roots.roots.size(); ++j)
                    dist = std::max(dist, std::abs(b1.solution.roots.roots[j] -
                                                   b2.solution.roots.roots[j]));
                if (dist > 0.35 * (1.0 + std::abs(c - prev_value)) * std::abs(hi - lo)) continue;
                // bisection on the largest-magnitude component that changes sign
                // is not available (residuals are magnitudes); instead golden-
                // section minimize the worst residual on [prev_value, c].
                double a = prev_value, b = c;
                double fa = worst_residual(b1.residuals), fb = worst_residual(b2.residuals);
                if (std::min(fa, fb) > 0.3 * (fa + fb)) {
                    // no pronounced dip; only pursue if the values head to zero
                    if (std::min(fa, fb) > 1e-2 * std::max(fa, fb) + 1e-6) continue;
                }
                BranchSample best = fa < fb ? b1 : b2;
                for (int it = 0; it < 90; ++it) {
                    double m1 = a + 0.382 * (b - a), m2 = a + 0.618 * (b - a);
                    auto pick = [&](double x, BranchSample& out_bs) -> double {
                        auto cand = eval_at(x);
                        double bestres = std::numeric_limits<double>::infinity();
                        for (auto& bb : cand) {
                            double dd = 0;
                            for (std::size_t j = 0; j < std::min(bb.solution.roots.roots.size(),
                                                                 best.solution.roots.roots.size());
                                 ++j)
                                dd = std::max(dd, std::abs(bb.solution.roots.roots[j] -
                                                           best.solution.roots.roots[j]));
                            if (bb.solution.roots.roots.size() != best.solution.roots.roots.size())
                                continue;
                            double wr = worst_residual(bb.residuals);
                            if (dd < 0.5 * (1 + std::abs(x)) && wr < bestres) {
                                bestres = wr;
                                out_bs = bb;
                            }
                        }
                        return bestres;
                    };
                    BranchSample s1, s2;
                    double f1 = pick(m1, s1), f2 = pick(m2, s2);
                    if (!std::isfinite(f1) && !std::isfinite(f2)) break;
                    if (f1 < f2) {
                        b = m2;
                        if (std::isfinite(f1)) best = s1;
                    } else {
                        a = m1;
                        if (std::isfinite(f2)) best = s2;
                    }
                    if (worst_residual(best.residuals) <
                        0.5 * bethe::kConstraintTol * best.solution.report.scale)
                        break;
                }
                accept(best);
            }
        }
        prev = std::move(cur);
        prev_value = c;
    }

    std::sort(found.begin(), found.end(), [&](const Calibrated& x, const Calibrated& y) {
        PotentialModel mx = x.model, my = y.model;
        return *coefficient_slot(mx, free_coefficient) < *coefficient_slot(my, free_coefficient);
    });
    return found;
}

// ---------------------------------------------------------------------------
// degeneration

DegenerationReport degeneration_check(const PotentialModel& higher, CaseTag caze,
                                      const std::vector<double>& scales,
                                      const std::vector<int>& levels) {
    const bool quintic = higher.family == Family::InverseQuintic;
    const bool sextic = higher.family == Family::InverseSextic;
    if (!quintic && !sextic)
        throw std::invalid_argument("degeneration applies to the quintic and sextic families");
    if (quintic && caze != CaseTag::OscillatorLike)
        throw CaseMismatch("quintic degeneration is defined for the Gaussian-tail regime");

    DegenerationReport rep;
    rep.index_shift = quintic ? 2 : 1;

    // Endpoint: extras removed exactly; closed forms on both sides at matched
    // parameters.  The higher family's level n lines up with the lower
    // family's level n + shift.
    PotentialModel endpoint = higher;
    if (quintic) {
        endpoint.f = endpoint.g = 0;
    } else {
        endpoint.h = 0;
        endpoint.d = 2.0 - endpoint.m; // calibrated n = 0 limit of the shrinking family
        endpoint.f = 0;
    }

    auto lower_formula = [&](int n_low) -> double {
        if (quintic) {
            PotentialModel cub = make_model(Family::InverseCubic, endpoint.a, 0, endpoint.d,
                                            endpoint.e, 0, 0, 0, endpoint.M, endpoint.m);
            return energy_squared_printed(cub, CaseTag::OscillatorLike, n_low);
        }
        PotentialModel quart = make_model(Family::InverseQuartic, endpoint.a, endpoint.d, 0,
                                          endpoint.f, 0, 0, 0, endpoint.M, endpoint.m);
        return energy_squared_printed(quart, CaseTag::Plain, n_low);
    };
    auto higher_formula = [&](const PotentialModel& mm, int n) -> double {
        return energy_squared_printed(mm, quintic ? CaseTag::OscillatorLike : CaseTag::Plain, n);
    };

    rep.endpoint_distance = 0;
    for (int n : levels)
        rep.endpoint_distance = std::max(
            rep.endpoint_distance,
            std::abs(higher_formula(endpoint, n) - lower_formula(n + rep.index_shift)));

    RadialSampler phi_end;
    {
        QuasiExactSolution tmp;
        tmp.reduced = reduce(endpoint, quintic ? CaseTag::OscillatorLike : CaseTag::Plain,
                             levels.empty() ? 0 : levels.front());
        phi_end = RadialSampler(tmp.reduced.exponent, tmp.reduced.tail, {}, tmp.reduced.var);
    }
    numeric::RadialGrid wgrid{0.3, 6.0, 40, numeric::RadialGrid::Spacing::Log};
    auto wpoints = wgrid.points();

    for (double s : scales) {
        DegenerationStep step;
        step.scale = s;

        PotentialModel stepped = endpoint;
        double target_dist = 0;
        if (quintic) {
            stepped.f = higher.f * s;
            stepped.g = higher.g * s;
            if (s == 0.0) {
                for (int n : levels)
                    target_dist = std::max(target_dist, std::abs(higher_formula(stepped, n) -
                                                                 lower_formula(n + 2)));
            } else {
                // the stepped model is no longer a solvable point; its true
                // spectrum comes from the independent grid oracle
                numeric::RadialGrid grid{1e-3, 14.0, 3000, numeric::RadialGrid::Spacing::Uniform};
                auto fd = numeric::fd_eigensolve(stepped, grid, 3);
                for (int n : levels) {
                    double tgt = lower_formula(n + 2) - stepped.M * stepped.M;
                    double best = std::numeric_limits<double>::infinity();
                    for (double ev : fd.eigenvalues) best = std::min(best, std::abs(ev - tgt));
                    target_dist = std::max(target_dist, best);
                }
            }
        } else {
            // sextic: re-solve the n = 0 calibration at each h along the path
            double hset = higher.h * s;
            stepped.h = hset;
            stepped.d = 2.0 - stepped.m + stepped.a * stepped.a * hset / 2.0;
            stepped.f = -stepped.a * hset;
            for (int n : levels)
                target_dist = std::max(target_dist, std::abs(higher_formula(stepped, n) -
                                                             lower_formula(n + 1)));
        }
        step.spectrum_distance = target_dist;

        // pointwise tail-ratio deviation against the endpoint wavefunction
        ReducedProblem sred = reduce(stepped, quintic ? CaseTag::OscillatorLike : CaseTag::Plain,
                                     levels.empty() ? 0 : levels.front());
        RadialSampler phi_s(sred.exponent, sred.tail, {}, sred.var);
        double ref = phi_s(wpoints[wpoints.size() / 2]) / phi_end(wpoints[wpoints.size() / 2]);
        double dev = 0;
        for (double r : wpoints) {
            double ratio = phi_s(r) / phi_end(r) / ref;
            dev = std::max(dev, std::abs(ratio - 1.0));
        }
        step.wavefunction_ratio = dev;
        rep.steps.push_back(step);
    }
    return rep;
}

} // namespace qes::models
