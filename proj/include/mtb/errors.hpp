#pragma once

#include <stdexcept>
#include <string>

namespace mtb {

/// Base of every numerical failure raised by the library.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularPole : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class TruncationFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SeparationViolation : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class GridTooCoarse : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class QuadratureFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class EigensolverFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NoConvergence : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class LinearSolveStagnation : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class Overflow : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Bad user input (config files, flags). Not a numerical failure.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mtb
