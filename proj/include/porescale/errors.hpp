#pragma once

#include <stdexcept>
#include <string>

namespace porescale {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// geometry / meshing
class OverlapError : public Error {
public:
    using Error::Error;
};
class OutOfDomainError : public Error {
public:
    using Error::Error;
};
class MeshQualityError : public Error {
public:
    using Error::Error;
};
class FormatError : public Error {
public:
    using Error::Error;
};

// linear algebra / solvers
class SingularSystemError : public Error {
public:
    using Error::Error;
};
class LinearSolveError : public Error {
public:
    LinearSolveError(const std::string& msg, double residual)
        : Error(msg), achieved_residual(residual) {}
    double achieved_residual;
};
class MeshMismatchError : public Error {
public:
    using Error::Error;
};
class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& msg, int iters, double residual)
        : Error(msg), iterations(iters), last_residual(residual) {}
    int iterations;
    double last_residual;
};

// identification
class GridMismatchError : public Error {
public:
    using Error::Error;
};
class EmptyAdmissibleError : public Error {
public:
    using Error::Error;
};

// orchestration
class ConfigError : public Error {
public:
    using Error::Error;
};
class MissingArtifactError : public Error {
public:
    using Error::Error;
};

} // namespace porescale
