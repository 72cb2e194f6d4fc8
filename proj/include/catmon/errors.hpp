#pragma once

#include <stdexcept>
#include <string>

namespace catmon {

/// Argument outside the mathematical domain of a function (e.g. p > 1 for a quantile).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A probability vector that does not sum to one, has out-of-range or
/// too-small entries, or has too few levels.
class InvalidDistribution : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A shift that moves some level probability out of (0, 1) or does not sum to zero.
class ShiftError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed config, scenario or data file.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Control-limit search could not bracket the target ARL.
class BracketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace catmon
