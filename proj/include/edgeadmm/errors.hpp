#pragma once

#include <stdexcept>
#include <string>

namespace edgeadmm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct RankDeficient : Error {
    using Error::Error;
};

struct SingularSystem : Error {
    using Error::Error;
};

/// An iterative routine hit its iteration cap with the residual still above
/// its acceptance threshold.
struct NotConverged : Error {
    NotConverged(const std::string& what, long iters, double resid)
        : Error(what), iterations(iters), residual(resid) {}
    long iterations;
    double residual;
};

/// Intersection of a convex set with an affine subspace certified empty.
struct EmptySlice : Error {
    using Error::Error;
};

struct Infeasible : Error {
    using Error::Error;
};

struct InfeasibleDemand : Error {
    using Error::Error;
};

struct NonFiniteIterate : Error {
    NonFiniteIterate(const std::string& what, long iter)
        : Error(what), iteration(iter) {}
    long iteration;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace edgeadmm
