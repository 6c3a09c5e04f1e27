#pragma once

#include <stdexcept>
#include <string>

namespace ddspec {

// Bad input values (non-finite, negative rates, malformed records).
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Evaluation outside a model's domain, e.g. a power law at omega = 0.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Sampling step or summation cutoff too coarse for the requested accuracy.
struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Physically inconsistent setup (overlapping pulses, bad field combinations).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FitFailure : std::runtime_error {
    FitFailure(const std::string& what, double resid)
        : std::runtime_error(what), residual(resid) {}
    double residual;
};

} // namespace ddspec
