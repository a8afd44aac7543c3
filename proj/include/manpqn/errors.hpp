#pragma once

#include <stdexcept>
#include <string>

namespace manpqn {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shapes of matrices passed to an operation disagree.
class DimensionError : public Error {
public:
    using Error::Error;
};

// X + xi is (numerically) rank deficient, so the polar factor is undefined.
class SingularityError : public Error {
public:
    SingularityError(const std::string& what, double smallest_singular_value)
        : Error(what), smallest_singular_value_(smallest_singular_value) {}
    double smallest_singular_value() const noexcept { return smallest_singular_value_; }

private:
    double smallest_singular_value_;
};

// A diagonal metric with a non-positive weight.
class MetricError : public Error {
public:
    using Error::Error;
};

// Raised by the solvers when an internal invariant (feasibility, symmetry) breaks.
class DiagnosticsError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, long line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    long line() const noexcept { return line_; }

private:
    long line_;
};

}  // namespace manpqn
