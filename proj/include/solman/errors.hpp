#pragma once

#include <stdexcept>
#include <string>

namespace solman {

/// Evaluation outside [-r, 0] beyond the clamp tolerance.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Input violates an operation's documented precondition.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to reach its tolerance.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or rejected instance configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace solman
