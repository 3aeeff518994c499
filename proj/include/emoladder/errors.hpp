#pragma once

#include <stdexcept>
#include <string>

namespace emoladder {

// Shape disagreement between operands (matmul, hadamard, ...).
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Invalid scalar argument (negative variance, bad probability, ...).
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Misuse of stateful protocol (consumed cache, mismatched trace).
struct StateError : std::logic_error {
    using std::logic_error::logic_error;
};

// NaN/Inf reached a place it must not.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structurally valid input that violates a data contract (duplicate ids, ...).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Inconsistent model or run configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace emoladder
