/// @file errors.hpp
/// @brief Exception types shared by every lmfsi module.
#pragma once

#include <stdexcept>
#include <string>

namespace lmfsi {

/// Argument outside the mathematical domain of an operation (e.g. p < 1 in an Lp norm).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Physically inadmissible state, such as a negative density handed to a pressure law.
class InvalidStateError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent configuration (unknown keys, bad ranges, body outside the domain).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure: blow-up, CFL violation, non-converged linear solve.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A diagnostic cannot be evaluated to the requested quality (e.g. too few snapshots).
class DiagnosticError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace lmfsi
