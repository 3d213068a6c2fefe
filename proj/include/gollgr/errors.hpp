#pragma once

#include <stdexcept>
#include <string>

namespace gollgr {

/// Raised when an iterative or quadrature routine fails to reach its target
/// accuracy. The message carries the achieved residual and iteration count.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what + " (residual=" + std::to_string(residual) +
                             ", iterations=" + std::to_string(iterations) + ")"),
          residual_(residual),
          iterations_(iterations) {}

    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double residual_;
    int iterations_;
};

/// Shape classification could not be resolved from the located critical
/// points and the boundary limit.
class AmbiguousShapeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A likelihood ratio statistic came out clearly negative: the larger model
/// was not maximized and should be refit.
class RefitAdvisory : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gollgr
