#include "fit_common.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gollgr::detail {

MinimizeOutcome minimize_multistart(const optim::Objective& f, const std::vector<std::vector<double>>& starts,
                                    const FitOptions& opt, double scale) {
    optim::NelderMeadOptions screen = opt.polish;
    screen.diameter_tol = opt.screen_diameter_tol;
    screen.spread_tol = opt.screen_diameter_tol;
    screen.max_restarts = 0;

    MinimizeOutcome out;
    optim::NelderMeadResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (const auto& s : starts) {
        auto r = optim::nelder_mead(f, s, screen);
        out.diagnostics.evaluations += r.evaluations;
        out.diagnostics.iterations += r.iterations;
        if (best.x.empty() || r.value < best.value) best = std::move(r);
    }

    optim::NelderMeadOptions polish = opt.polish;
    polish.initial_step = std::min(polish.initial_step, 10.0 * opt.screen_diameter_tol);
    const auto fin = optim::nelder_mead(f, best.x, polish);
    out.diagnostics.evaluations += fin.evaluations;
    out.diagnostics.iterations += fin.iterations;
    out.diagnostics.simplex_diameter = fin.diameter;
    out.diagnostics.loglik_spread = fin.spread;
    out.z = fin.value <= best.value ? fin.x : best.x;
    out.value = std::min(fin.value, best.value);

    double g2 = 0.0;
    for (double g : optim::fd_gradient(f, out.z)) g2 += g * g;
    out.diagnostics.grad_norm = std::sqrt(g2) / scale;

    const auto k = static_cast<Eigen::Index>(out.z.size());
    const auto H = optim::fd_hessian(f, out.z, 1e-4);
    const bool finite = std::all_of(H.begin(), H.end(), [](double v) { return std::isfinite(v); });
    if (finite) {
        const Eigen::MatrixXd info = Eigen::Map<const Eigen::MatrixXd>(H.data(), k, k);
        Eigen::LLT<Eigen::MatrixXd> llt(info);
        if (llt.info() == Eigen::Success) {
            const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(k, k));
            out.covariance.assign(cov.data(), cov.data() + k * k);
            out.diagnostics.hessian_positive_definite = true;
        }
    }

    if (!fin.converged) {
        out.diagnostics.message = "simplex tolerances not reached: budget exhausted or simplex collapsed";
    } else if (!(out.diagnostics.grad_norm <= opt.grad_tol)) {
        out.diagnostics.message = "gradient norm " + std::to_string(out.diagnostics.grad_norm) + " above tolerance";
    } else {
        out.converged = true;
        out.diagnostics.message = "converged";
    }
    return out;
}

}  // namespace gollgr::detail
