#pragma once

#include <stdexcept>
#include <string>

namespace qwit {

/// Operand dimensions disagree (state vs channel, config fields, vector lengths).
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A value failed a domain invariant: non-unitary matrix, unnormalized state,
/// non-idempotent projector, out-of-range parameter.
class ValidationError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed text input (matrix files, complex tokens, JSON configs).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Significance requested with zero combined variance and a nonzero margin.
class UndefinedSignificance : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace qwit
