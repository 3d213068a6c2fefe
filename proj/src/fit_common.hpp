#pragma once

#include "gollgr/inference.hpp"
#include "gollgr/optimize.hpp"

#include <vector>

namespace gollgr::detail {

struct MinimizeOutcome {
    std::vector<double> z;            ///< best point
    double value = 0.0;               ///< objective at z
    std::vector<double> covariance;   ///< inverse Hessian at z, row-major; empty if not positive definite
    FitDiagnostics diagnostics;
    bool converged = false;
};

/// Screens every start to the loose tolerance, polishes the best, then
/// checks the scaled gradient and inverts the finite-difference Hessian.
/// `scale` divides the gradient norm (the number of observations).
MinimizeOutcome minimize_multistart(const optim::Objective& f, const std::vector<std::vector<double>>& starts,
                                    const FitOptions& opt, double scale);

/// Start offsets in (log alpha, log beta, ...) applied around a seed.
inline constexpr double kStartOffsets[4][4] = {
    {-1.0, -0.5, 0.3, 0.3},
    {1.0, 0.5, -0.3, -0.3},
    {-1.0, 0.5, -0.3, 0.3},
    {1.0, -0.5, 0.3, -0.3},
};

}  // namespace gollgr::detail
