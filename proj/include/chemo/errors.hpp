#pragma once

#include <stdexcept>
#include <string>

namespace chemo {

/// Inputs that do not fit together (grid/value size mismatch, fields on different grids).
class StructuralError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Iterative linear solve did not reach its tolerance within the iteration cap.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double residual_;
    int iterations_;
};

}  // namespace chemo
