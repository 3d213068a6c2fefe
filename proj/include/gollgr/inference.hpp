#pragma once

// Maximum likelihood for GOLLGR and its nested submodels from complete
// (uncensored) samples.
//
// The search runs in unconstrained coordinates
//   c = (log alpha, log beta, log(delta + 1), log theta),
// starting from a GR fit and four perturbations of it. Each start is run
// to a loose tolerance; the best one is then polished to the final
// tolerance.

#include "gollgr/errors.hpp"
#include "gollgr/gollgr_model.hpp"
#include "gollgr/optimize.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace gollgr {

enum class Submodel { gollgr, ollgr, egr, gr };

std::string_view to_string(Submodel m);

/// Accepts gollgr, ollgr, egr, gr in any letter case.
Submodel parse_submodel(std::string_view name);

/// 4, 3, 3 and 2.
int free_parameter_count(Submodel m);

bool alpha_pinned(Submodel m);
bool beta_pinned(Submodel m);

/// True when `nested` is obtained from `full` by pinning further shapes to 1.
bool is_restriction(Submodel nested, Submodel full);

struct InformationCriteria {
    double aic = 0.0;
    double bic = 0.0;
    double caic = 0.0;
};

/// Criteria from a maximized log-likelihood with k free parameters and n
/// observations.
InformationCriteria information_criteria(double loglik, int k, std::size_t n);

struct FitOptions {
    int starts = 5;                       ///< GR seed plus starts - 1 perturbations (at most 4)
    double screen_diameter_tol = 1e-3;    ///< tolerance of the per-start runs
    optim::NelderMeadOptions polish{};    ///< tolerances of the final run
    double grad_tol = 1e-4;               ///< bound on |grad loglik| / n in internal coordinates

    void validate() const;
};

struct FitDiagnostics {
    int evaluations = 0;
    int iterations = 0;
    double simplex_diameter = 0.0;
    double loglik_spread = 0.0;
    double grad_norm = 0.0;  ///< |grad loglik| / n in internal coordinates
    bool hessian_positive_definite = false;
    std::string message;
};

struct FitResult {
    GollgrParams estimates;
    /// Standard errors of (alpha, beta, delta, theta); pinned parameters get
    /// 0. Empty when the observed information is not positive definite.
    std::optional<std::array<double, 4>> std_errors;
    double loglik = 0.0;
    double aic = 0.0;
    double bic = 0.0;
    double caic = 0.0;
    bool converged = false;
    std::size_t n_obs = 0;
    Submodel submodel = Submodel::gollgr;
    FitDiagnostics diagnostics;
};

/// sum_i log pdf(x_i; p). Returns -inf if any observation has zero density.
/// Throws std::invalid_argument on non-positive or non-finite data.
double loglik(std::span<const double> data, const GollgrParams& p);

/// Profile MLE of the GR parent: theta(delta) = (delta + 1) n / sum x^2,
/// maximized over delta. Returned with alpha = beta = 1.
GollgrParams fit_gr_profile(std::span<const double> data);

/// MLE under `submodel`. Without `init` the starts are the GR fit and its
/// perturbations; with `init` it is tried as an additional start. Pinned
/// shapes are forced to 1 regardless of their values in `init`.
/// Requires n >= 5. Failure to converge is reported through
/// FitResult::converged and the diagnostics, never by exception.
FitResult fit_mle(std::span<const double> data, std::optional<GollgrParams> init = std::nullopt,
                  Submodel submodel = Submodel::gollgr, const FitOptions& opt = {});

/// Requires fit.converged.
InformationCriteria information_criteria(const FitResult& fit);

struct LrTestResult {
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
    std::string hypotheses;
};

/// 2 (loglik_full - loglik_nested) against chi-square(df). Statistics in
/// [-1e-6 (1 + |loglik_full|), 0) are set to 0; below that RefitAdvisory is
/// thrown, since the full model was evidently not maximized.
LrTestResult lr_test(const FitResult& full, const FitResult& nested);

/// Same test from the two maximized log-likelihoods.
LrTestResult lr_test(Submodel full_model, double full_loglik, Submodel nested_model, double nested_loglik);

}  // namespace gollgr
