#pragma once

// Derivative-free minimization and finite-difference derivatives shared by
// the distribution and regression fits.

#include <functional>
#include <vector>

namespace gollgr::optim {

using Objective = std::function<double(const std::vector<double>&)>;

struct NelderMeadOptions {
    double diameter_tol = 1e-8;  ///< largest vertex distance (max-norm) from the best vertex
    double spread_tol = 1e-10;   ///< f(worst) - f(best)
    int max_evals = 20000;
    double initial_step = 0.25;  ///< simplex edge in each coordinate
    int max_restarts = 3;        ///< fresh simplices around a converged point

    void validate() const;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    int iterations = 0;
    int restarts = 0;
    double diameter = 0.0;
    double spread = 0.0;
    bool converged = false;
};

/// Minimizes f from x0. Non-finite objective values are treated as +inf.
/// After convergence the simplex is rebuilt around the best vertex and the
/// search resumed, until a restart no longer improves the value by more than
/// spread_tol or max_restarts is reached. A simplex that collapses to the
/// resolution of double without meeting spread_tol stops as not converged.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opt = {});

/// Central-difference gradient with step h_i = rel_step (1 + |x_i|).
std::vector<double> fd_gradient(const Objective& f, const std::vector<double>& x, double rel_step = 1e-5);

/// Central-difference Hessian with step h_i = rel_step (1 + |x_i|). Row-major
/// n x n, symmetric by construction.
std::vector<double> fd_hessian(const Objective& f, const std::vector<double>& x, double rel_step = 1e-4);

}  // namespace gollgr::optim
