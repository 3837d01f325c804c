#pragma once

#include <stdexcept>
#include <string>

namespace vtp {

// Invalid configuration or arguments (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition (shape mismatch, out-of-range time, ...).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Malformed or inconsistent input files (CLI exit code 3).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite values during simulation or training (CLI exit code 4).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SimulationError : public NumericError {
public:
    using NumericError::NumericError;
};

class TrainingError : public NumericError {
public:
    using NumericError::NumericError;
};

inline void require(bool condition, const std::string& what) {
    if (!condition) throw ContractViolation(what);
}

}  // namespace vtp
