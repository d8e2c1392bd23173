#pragma once

#include <stdexcept>
#include <string>

namespace lmmg {

/// Rejected arguments or inconsistent input data (bad mesh files, points
/// outside the domain, dimension mismatches, ...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed configuration (unknown keys, unparsable values, out-of-range
/// parameters).  The command line maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File system problems while reading or writing run outputs.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Base class for numerical failures.  The command line maps these to exit
/// code 3.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative linear solve did not reach its tolerance within the
/// iteration budget.
class NonConvergence : public SolverError {
public:
    NonConvergence(const std::string& what, double final_relative_residual, long iterations)
        : SolverError(what)
        , final_relative_residual(final_relative_residual)
        , iterations(iterations)
    {
    }

    double final_relative_residual;
    long iterations;
};

/// Peak selection could not bracket or locate a maximizer along its ray or
/// half-space.
class PeakSelectionFailure : public SolverError {
public:
    using SolverError::SolverError;
};

/// The maximizer of a half-space peak selection was pinned at the lower
/// bound of the ray coefficient.
class BoundaryDegeneracy : public SolverError {
public:
    using SolverError::SolverError;
};

/// The step size search exhausted its bisection budget without satisfying
/// the energy decrease condition.
class StepFailure : public SolverError {
public:
    using SolverError::SolverError;
};

/// A direction became numerically dependent on the frozen subspace, so
/// projection onto its orthogonal complement vanished.
class DegenerateDirection : public SolverError {
public:
    using SolverError::SolverError;
};

/// An iteration cap was exceeded (for example the per-generation minimax
/// step budget).
class IterationCapExceeded : public SolverError {
public:
    using SolverError::SolverError;
};

} // namespace lmmg
