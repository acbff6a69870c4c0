#pragma once

#include <stdexcept>
#include <string>

namespace ebshrink {

/// A parameter lies outside its documented domain (negative threshold,
/// epsilon outside (0,1], malformed signal family, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Vector lengths disagree, or a vector is too short for the estimator.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative solver produced non-finite values.
class NumericalDivergence : public std::runtime_error {
public:
    NumericalDivergence(const std::string& what, int iteration)
        : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
          iteration_(iteration) {}

    int iteration() const noexcept { return iteration_; }

private:
    int iteration_;
};

/// File could not be opened, read or written. The message carries the path.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input (vector or config file).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ebshrink
