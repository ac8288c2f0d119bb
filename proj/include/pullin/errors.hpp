#pragma once

#include <stdexcept>

namespace pullin {

// Evaluation outside the model domain (u >= b) or invalid problem data.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Evaluation overflowed to a non-finite value. Callers probing u -> b^- treat
// this as +infinity.
class NonFiniteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// No sign change found before the scan cap; usually an invalid model.
class BracketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematically admissible range.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// A documented hypothesis of the operation does not hold for these inputs.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Cross-checked identities disagree beyond tolerance.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed configuration input.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pullin
