#pragma once

#include <stdexcept>
#include <string>

namespace tordisc {

/// Precondition on an argument value failed (zero vector, out-of-range parameter).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NotImplementedError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// The requested dimension is outside what the construction supports (d = 3 flows).
class UnsupportedDimension : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Lattice reduction could not be carried out (degenerate or ill-conditioned basis).
class ReductionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Evaluator called with a body or sample point of the wrong kind.
class VariantMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace tordisc
