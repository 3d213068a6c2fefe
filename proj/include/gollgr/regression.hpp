#pragma once

// GOLLGR survival regression with right censoring.
//
// Each row i carries a covariate vector v_i (first entry 1 for the
// intercept) and
//   delta_i = exp(v_i . delta_coef) - 1,   theta_i = exp(v_i . theta_coef),
// while alpha and beta are shared by all rows.

#include "gollgr/gollgr_model.hpp"
#include "gollgr/inference.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gollgr {

struct SurvivalDataset {
    std::vector<double> times;               ///< min(lifetime, censoring time), > 0
    std::vector<int> status;                 ///< 1 failure, 0 censored
    std::size_t n_cols = 1;                  ///< covariate columns including the intercept
    std::vector<double> covariates;          ///< row-major, times.size() x n_cols, column 0 all ones
    std::vector<std::string> covariate_names;  ///< n_cols names, the first is "intercept"

    /// Builds a dataset from raw covariate columns (without intercept);
    /// an intercept column is prepended. Validates the result.
    static SurvivalDataset from_columns(std::vector<double> times, std::vector<int> status,
                                        const std::vector<std::vector<double>>& columns = {},
                                        std::vector<std::string> names = {});

    std::size_t size() const { return times.size(); }
    std::span<const double> row(std::size_t i) const { return {covariates.data() + i * n_cols, n_cols}; }
    std::size_t failures() const;

    /// Throws std::invalid_argument on a non-positive time, an indicator
    /// outside {0, 1}, non-finite covariates or mismatched dimensions.
    void validate() const;

    /// Numerical rank of the covariate matrix.
    std::size_t column_rank() const;
};

struct RegressionCoefficients {
    double alpha = 1.0;
    double beta = 1.0;
    std::vector<double> delta_coef;  ///< delta_i = exp(v_i . delta_coef) - 1
    std::vector<double> theta_coef;  ///< theta_i = exp(v_i . theta_coef)

    void validate() const;
};

/// Row parameters. Throws std::invalid_argument on a dimension mismatch.
GollgrParams link_params(std::span<const double> v, const RegressionCoefficients& c);

double survival(double x, std::span<const double> v, const RegressionCoefficients& c);

/// sum over failures of log pdf plus sum over censored rows of log survival.
/// Returns -inf when any term is -inf.
double censored_loglik(const SurvivalDataset& ds, const RegressionCoefficients& c);

struct RegressionFit {
    RegressionCoefficients coefficients;
    /// Packed as (alpha, beta, delta_coef..., theta_coef...). Pinned shapes
    /// have standard error 0; empty when the observed information is not
    /// positive definite.
    std::vector<double> std_errors;
    /// Two-sided normal p-values for the link coefficients, same packing;
    /// the alpha and beta slots hold NaN.
    std::vector<double> p_values;
    double loglik = 0.0;
    double aic = 0.0;
    double bic = 0.0;
    double caic = 0.0;
    Submodel submodel = Submodel::gollgr;
    bool converged = false;
    std::size_t n_obs = 0;
    FitDiagnostics diagnostics;
    std::vector<std::string> warnings;  ///< rank, conditioning and sample-size advisories
};

int free_parameter_count(Submodel m, std::size_t n_cols);

/// Maximizes censored_loglik. The GR sub-regression is fitted first and
/// seeds the larger model together with four perturbations of its shapes;
/// a supplied init is tried as an extra start. Pinned shapes are forced to 1.
RegressionFit fit_regression(const SurvivalDataset& ds, Submodel submodel,
                             std::optional<RegressionCoefficients> init = std::nullopt, const FitOptions& opt = {});

/// Likelihood ratio test between two regressions on the same dataset; the
/// shape restrictions give the degrees of freedom.
LrTestResult lr_test(const RegressionFit& full, const RegressionFit& nested);

/// Phi^{-1}(cdf(x_i)) for every row, with the cdf clamped to
/// [1e-15, 1 - 1e-15]. Requires fit.converged.
std::vector<double> quantile_residuals(const SurvivalDataset& ds, const RegressionFit& fit);

/// Same, from coefficients alone.
std::vector<double> quantile_residuals(const SurvivalDataset& ds, const RegressionCoefficients& c);

/// Same for a plain sample under one parameter set.
std::vector<double> quantile_residuals(std::span<const double> times, const GollgrParams& p);

}  // namespace gollgr
