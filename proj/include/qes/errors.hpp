#pragma once
#include <stdexcept>
#include <string>

namespace qes {

// Error taxonomy shared by all components.  Every failure mode that callers
// are expected to branch on gets its own type; plain std::invalid_argument is
// reserved for programmer errors (bad array sizes, null samplers, ...).

struct DegreeViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SingularRoot : std::domain_error {
    using std::domain_error::domain_error;
};

struct NoConvergence : std::runtime_error {
    explicit NoConvergence(const std::string& what, double best = -1.0)
        : std::runtime_error(what), best_residual(best) {}
    double best_residual;
};

struct ExponentViolation : std::domain_error {
    using std::domain_error::domain_error;
};

struct CaseMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct EvaluationDomain : std::domain_error {
    using std::domain_error::domain_error;
};

struct EnergyDegenerate : std::domain_error {
    using std::domain_error::domain_error;
};

struct NonNormalizable : std::domain_error {
    using std::domain_error::domain_error;
};

struct NotConfining : std::domain_error {
    using std::domain_error::domain_error;
};

struct FreeParameterUnbounded : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace qes
