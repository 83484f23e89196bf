#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>

namespace hsodm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Base class of every error raised by the library. The C API maps each
/// subclass onto one status code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameter, unknown identifier or violated precondition on a knob.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation (zero vector, negative value).
class DomainError : public Error {
public:
    using Error::Error;
};

/// An objective callback produced a non-finite value. Carries the offending point.
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& what, Vector x) : Error(what), point_(std::move(x)) {}
    const Vector& point() const noexcept { return point_; }

private:
    Vector point_;
};

/// The problem lacks a derivative capability the caller requires.
class CapabilityError : public Error {
public:
    using Error::Error;
};

/// Eigensolver or root-finder failure.
class NumericalError : public Error {
public:
    using Error::Error;
};

class IOError : public Error {
public:
    using Error::Error;
};

/// Symmetric linear operator v -> A v.
using LinearMap = std::function<Vector(const Vector&)>;

} // namespace hsodm
