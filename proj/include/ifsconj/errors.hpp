#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ifsconj {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A mathematical obstruction: the requested object provably does not exist
/// (slopes in different intervals, non-hyperbolic fixed points, ...).
/// The CLI maps this family to exit status 2.
class ObstructionError : public Error {
public:
    using Error::Error;
};

class NonConjugateError : public ObstructionError {
public:
    using ObstructionError::ObstructionError;
};

/// |slope| is 0 or 1, or a fixed point has |f'(p)| = 1.
class NonHyperbolicError : public ObstructionError {
public:
    using ObstructionError::ObstructionError;
};

class ContinuumOfFixedPointsError : public ObstructionError {
public:
    using ObstructionError::ObstructionError;
};

/// Orbit left the common domain of the IFS.
class DomainEscapeError : public Error {
public:
    DomainEscapeError(std::size_t step, double value)
        : Error("orbit left the domain at step " + std::to_string(step) +
                " (value " + std::to_string(value) + ")"),
          step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class UnsupportedMapError : public Error {
public:
    using Error::Error;
};

/// Iteration caps, non-finite intermediate values.
class NumericFailureError : public Error {
public:
    using Error::Error;
};

class ConvergenceFailureError : public NumericFailureError {
public:
    ConvergenceFailureError(const std::string& what, double residual)
        : NumericFailureError(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class RangeError : public Error {
public:
    using Error::Error;
};

/// A construction hypothesis (e.g. |k| + eps < 1) does not hold for the input.
class HypothesisError : public Error {
public:
    using Error::Error;
};

class WrongCaseError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class InvertibilityError : public Error {
public:
    using Error::Error;
};

class GenerationError : public Error {
public:
    using Error::Error;
};

/// Malformed or schema-violating configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace ifsconj
