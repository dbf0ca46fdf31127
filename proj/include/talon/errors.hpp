#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace talon {

// Violated precondition on an API call (bad segment, bad grid index, ...).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// User-facing input that is well-formed but semantically invalid
// (unknown class ids, inconsistent flags).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent file payloads and shape mismatches.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical breakdown: singular systems, divergence.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace talon
