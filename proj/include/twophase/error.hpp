#pragma once

#include <stdexcept>
#include <string>

namespace twophase {

/// Invalid arguments, malformed configs, unsupported dimensions.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// [F]^p requested for F < 0 with a non-even-integer exponent.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Derivative requested at a declared non-differentiable point.
class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Divergent or stalled minimization.
class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// NaN or Inf produced inside an iteration.
class NumericFailure : public SolverFailure {
public:
    using SolverFailure::SolverFailure;
};

/// Mask misconfiguration and similar broken internal invariants.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace twophase
