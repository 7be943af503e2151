#pragma once

#include <stdexcept>
#include <string>

namespace ipl {

/// Argument outside the mathematical domain of an operation (x < 0 for I_n, alpha <= 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A documented precondition does not hold, e.g. a Landweber relaxation
/// factor that violates omega < 1/|K|^2.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure: no convergence, singular system, NaN encountered,
/// or a component that cannot be inverted.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ipl
