#pragma once

// Monte Carlo studies: draw, refit, aggregate AE / bias / MSE per sample
// size.
//
// Replicate r at sample size n uses the stream split_seed(split_seed(seed, n), r),
// so any single cell or replicate can be rerun in isolation. Replicates may
// run on several threads; estimates are stored by replicate index and
// aggregated in index order, so reports do not depend on the thread count.

#include "gollgr/gollgr_model.hpp"
#include "gollgr/inference.hpp"
#include "gollgr/regression.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace gollgr {

enum class StudyKind { distribution, regression };

std::string_view to_string(StudyKind k);

struct StudyConfig {
    StudyKind kind = StudyKind::distribution;
    std::variant<GollgrParams, RegressionCoefficients> truth = GollgrParams{};
    std::vector<std::size_t> sample_sizes;
    std::size_t replicates = 1;
    std::uint64_t seed = 20240101;
    Submodel submodel = Submodel::gollgr;
    FitOptions fit{};
    double covariate_probability = 0.5;  ///< P(v = 1) for the binary regression covariate
    unsigned threads = 0;                ///< 0: hardware concurrency

    /// Throws std::invalid_argument on an inconsistent configuration.
    void validate() const;
};

struct StudyReport {
    StudyKind kind = StudyKind::distribution;
    std::vector<std::string> parameter_names;
    std::vector<double> truth;
    std::vector<std::size_t> sample_sizes;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    /// ae[j][k], bias[j][k], mse[j][k] for parameter j at sample size k,
    /// over converged replicates.
    std::vector<std::vector<double>> ae;
    std::vector<std::vector<double>> bias;
    std::vector<std::vector<double>> mse;
    std::vector<std::size_t> converged;  ///< per sample size
    std::vector<double> convergence_rate;
    /// estimates[k][r]: parameter vector of the r-th converged replicate.
    std::vector<std::vector<std::vector<double>>> estimates;
    double runtime_seconds = 0.0;
};

/// Raised when a cell converges in fewer than half of its replicates. The
/// report covers the cells finished so far, including the failing one.
class StudyAborted : public std::runtime_error {
public:
    StudyAborted(const std::string& what, StudyReport partial)
        : std::runtime_error(what), report_(std::move(partial)) {}
    const StudyReport& report() const noexcept { return report_; }

private:
    StudyReport report_;
};

/// Rows follow the recipe: v ~ Bernoulli(prob), then u ~ U(0, 1), then
/// x = Q(u) under the row's (delta_i, theta_i). No censoring.
SurvivalDataset simulate_regression_dataset(const RegressionCoefficients& truth, std::size_t n, std::uint64_t seed,
                                            double covariate_probability = 0.5);

/// Parameter names in report order for a regression with covariate names.
std::vector<std::string> regression_parameter_names(const std::vector<std::string>& covariate_names);

/// (alpha, beta, delta_coef..., theta_coef...).
std::vector<double> flatten(const RegressionCoefficients& c);

StudyReport run_distribution_study(const StudyConfig& cfg);
StudyReport run_regression_study(const StudyConfig& cfg);

/// Dispatches on cfg.kind.
StudyReport run_study(const StudyConfig& cfg);

/// AE / Bias / MSE table, one block of three columns per sample size.
std::string format_table(const StudyReport& report);

}  // namespace gollgr
