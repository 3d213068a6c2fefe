#include "gollgr/regression.hpp"

#include "fit_common.hpp"

#include "gollgr/errors.hpp"
#include "gollgr/special_functions.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gollgr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLimit = 25.0;  // bound on log-shapes and linear predictors

double dot(std::span<const double> v, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) s += v[j] * b[j];
    return s;
}

class Packing {
public:
    Packing(Submodel m, std::size_t p) : alpha_free_(!alpha_pinned(m)), beta_free_(!beta_pinned(m)), p_(p) {}

    std::size_t size() const { return offset() + 2 * p_; }

    std::vector<double> pack(const RegressionCoefficients& c) const {
        std::vector<double> z;
        if (alpha_free_) z.push_back(std::log(c.alpha));
        if (beta_free_) z.push_back(std::log(c.beta));
        z.insert(z.end(), c.delta_coef.begin(), c.delta_coef.end());
        z.insert(z.end(), c.theta_coef.begin(), c.theta_coef.end());
        return z;
    }

    RegressionCoefficients unpack(const std::vector<double>& z) const {
        RegressionCoefficients c;
        std::size_t k = 0;
        c.alpha = alpha_free_ ? std::exp(z[k++]) : 1.0;
        c.beta = beta_free_ ? std::exp(z[k++]) : 1.0;
        c.delta_coef.assign(z.begin() + static_cast<std::ptrdiff_t>(k), z.begin() + static_cast<std::ptrdiff_t>(k + p_));
        c.theta_coef.assign(z.begin() + static_cast<std::ptrdiff_t>(k + p_), z.end());
        return c;
    }

    std::size_t offset() const { return (alpha_free_ ? 1 : 0) + (beta_free_ ? 1 : 0); }
    bool alpha_free() const { return alpha_free_; }
    bool beta_free() const { return beta_free_; }

private:
    bool alpha_free_;
    bool beta_free_;
    std::size_t p_;
};

double row_loglik(double x, int status, const GollgrParams& p) {
    return status == 1 ? log_pdf(x, p) : log_survival(x, p);
}

class NegLoglik {
public:
    NegLoglik(const SurvivalDataset& ds, Packing pk) : ds_(ds), pk_(pk) {}

    double operator()(const std::vector<double>& z) const {
        for (std::size_t k = 0; k < pk_.offset(); ++k) {
            if (!(std::fabs(z[k]) <= kLimit)) return kInf;
        }
        const auto c = pk_.unpack(z);
        double s = 0.0;
        try {
            for (std::size_t i = 0; i < ds_.size(); ++i) {
                const auto v = ds_.row(i);
                const double ed = dot(v, c.delta_coef);
                const double et = dot(v, c.theta_coef);
                if (!(std::fabs(ed) <= kLimit) || !(std::fabs(et) <= kLimit)) return kInf;
                const GollgrParams p{c.alpha, c.beta, GrParams{std::expm1(ed), std::exp(et)}};
                s += row_loglik(ds_.times[i], ds_.status[i], p);
            }
        } catch (const NumericalError&) {
            return kInf;
        }
        return std::isnan(s) ? kInf : -s;
    }

private:
    const SurvivalDataset& ds_;
    Packing pk_;
};

RegressionCoefficients gr_seed(const SurvivalDataset& ds) {
    const auto pooled = fit_gr_profile(ds.times);
    RegressionCoefficients c;
    c.delta_coef.assign(ds.n_cols, 0.0);
    c.theta_coef.assign(ds.n_cols, 0.0);
    c.delta_coef[0] = std::log1p(pooled.gr.delta);
    c.theta_coef[0] = std::log(pooled.gr.theta);
    return c;
}

std::vector<std::string> dataset_warnings(const SurvivalDataset& ds, int k) {
    std::vector<std::string> w;
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> X(
        ds.covariates.data(), static_cast<Eigen::Index>(ds.size()), static_cast<Eigen::Index>(ds.n_cols));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
    const auto& sv = svd.singularValues();
    const std::size_t rank = ds.column_rank();
    if (rank < ds.n_cols) {
        w.push_back("covariate matrix is rank deficient (rank " + std::to_string(rank) + " of " +
                    std::to_string(ds.n_cols) + ")");
    } else if (sv.size() > 0 && sv(sv.size() - 1) > 0.0 && sv(0) / sv(sv.size() - 1) > 1e8) {
        w.push_back("covariate matrix is ill conditioned (condition number " +
                    std::to_string(sv(0) / sv(sv.size() - 1)) + ")");
    }
    if (ds.size() < static_cast<std::size_t>(10 * k)) {
        w.push_back("fewer than 10 observations per free parameter (" + std::to_string(ds.size()) + " rows, " +
                    std::to_string(k) + " parameters)");
    }
    return w;
}

}  // namespace

SurvivalDataset SurvivalDataset::from_columns(std::vector<double> times, std::vector<int> status,
                                              const std::vector<std::vector<double>>& columns,
                                              std::vector<std::string> names) {
    SurvivalDataset ds;
    const std::size_t n = times.size();
    ds.times = std::move(times);
    ds.status = std::move(status);
    ds.n_cols = columns.size() + 1;
    if (names.empty()) {
        for (std::size_t j = 0; j < columns.size(); ++j) names.push_back("x" + std::to_string(j + 1));
    }
    if (names.size() != columns.size()) throw std::invalid_argument("SurvivalDataset: one name per covariate column");
    ds.covariate_names.push_back("intercept");
    for (auto& nm : names) ds.covariate_names.push_back(std::move(nm));
    for (const auto& col : columns) {
        if (col.size() != n) throw std::invalid_argument("SurvivalDataset: covariate column length differs from times");
    }
    ds.covariates.resize(n * ds.n_cols);
    for (std::size_t i = 0; i < n; ++i) {
        ds.covariates[i * ds.n_cols] = 1.0;
        for (std::size_t j = 0; j < columns.size(); ++j) ds.covariates[i * ds.n_cols + j + 1] = columns[j][i];
    }
    ds.validate();
    return ds;
}

std::size_t SurvivalDataset::failures() const {
    return static_cast<std::size_t>(std::count(status.begin(), status.end(), 1));
}

void SurvivalDataset::validate() const {
    if (n_cols == 0) throw std::invalid_argument("SurvivalDataset: need at least the intercept column");
    if (status.size() != times.size()) throw std::invalid_argument("SurvivalDataset: status length differs from times");
    if (covariates.size() != times.size() * n_cols) {
        throw std::invalid_argument("SurvivalDataset: covariate matrix has the wrong size");
    }
    if (!covariate_names.empty() && covariate_names.size() != n_cols) {
        throw std::invalid_argument("SurvivalDataset: one name per covariate column");
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > 0.0) || !std::isfinite(times[i])) {
            throw std::invalid_argument("SurvivalDataset: row " + std::to_string(i + 1) + " has a non-positive time");
        }
        if (status[i] != 0 && status[i] != 1) {
            throw std::invalid_argument("SurvivalDataset: row " + std::to_string(i + 1) + " has a status other than 0/1");
        }
        for (double v : row(i)) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("SurvivalDataset: row " + std::to_string(i + 1) + " has a non-finite covariate");
            }
        }
    }
}

std::size_t SurvivalDataset::column_rank() const {
    if (times.empty()) return 0;
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> X(
        covariates.data(), static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(n_cols));
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    return static_cast<std::size_t>(qr.rank());
}

void RegressionCoefficients::validate() const {
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
        throw std::invalid_argument("RegressionCoefficients: alpha and beta must be positive and finite");
    }
    if (delta_coef.size() != theta_coef.size() || delta_coef.empty()) {
        throw std::invalid_argument("RegressionCoefficients: coefficient vectors must be nonempty and of equal length");
    }
    for (double v : delta_coef) {
        if (!std::isfinite(v)) throw std::invalid_argument("RegressionCoefficients: non-finite coefficient");
    }
    for (double v : theta_coef) {
        if (!std::isfinite(v)) throw std::invalid_argument("RegressionCoefficients: non-finite coefficient");
    }
}

GollgrParams link_params(std::span<const double> v, const RegressionCoefficients& c) {
    if (v.size() != c.delta_coef.size() || v.size() != c.theta_coef.size()) {
        throw std::invalid_argument("link_params: covariate row and coefficient dimensions differ");
    }
    GollgrParams p{c.alpha, c.beta, GrParams{std::expm1(dot(v, c.delta_coef)), std::exp(dot(v, c.theta_coef))}};
    p.validate();
    return p;
}

double survival(double x, std::span<const double> v, const RegressionCoefficients& c) {
    return survival(x, link_params(v, c));
}

double censored_loglik(const SurvivalDataset& ds, const RegressionCoefficients& c) {
    c.validate();
    if (c.delta_coef.size() != ds.n_cols) throw std::invalid_argument("censored_loglik: coefficient dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double v = row_loglik(ds.times[i], ds.status[i], link_params(ds.row(i), c));
        if (v == -kInf) return -kInf;
        s += v;
    }
    return s;
}

int free_parameter_count(Submodel m, std::size_t n_cols) {
    return free_parameter_count(m) - 2 + 2 * static_cast<int>(n_cols);
}

RegressionFit fit_regression(const SurvivalDataset& ds, Submodel submodel, std::optional<RegressionCoefficients> init,
                             const FitOptions& opt) {
    opt.validate();
    ds.validate();
    if (ds.size() < 5) throw std::invalid_argument("fit_regression: need at least 5 rows");
    if (init) {
        init->validate();
        if (init->delta_coef.size() != ds.n_cols) throw std::invalid_argument("fit_regression: init has wrong dimension");
    }
    const int k = free_parameter_count(submodel, ds.n_cols);

    // GR sub-regression first; it seeds every larger model.
    const Packing gr_pack(Submodel::gr, ds.n_cols);
    const NegLoglik gr_nll(ds, gr_pack);
    std::vector<std::vector<double>> gr_starts{gr_pack.pack(gr_seed(ds))};
    if (init && submodel == Submodel::gr) gr_starts.push_back(gr_pack.pack(*init));
    auto m = detail::minimize_multistart(gr_nll, gr_starts, opt, static_cast<double>(ds.size()));
    int evals = m.diagnostics.evaluations;
    int iters = m.diagnostics.iterations;

    const Packing pk(submodel, ds.n_cols);
    if (submodel != Submodel::gr) {
        const NegLoglik nll(ds, pk);
        const auto base = gr_pack.unpack(m.z);
        std::vector<std::vector<double>> starts{pk.pack(base)};
        for (int s = 0; s + 1 < opt.starts; ++s) {
            auto c = base;
            c.alpha = std::exp(detail::kStartOffsets[s][0]);
            c.beta = std::exp(detail::kStartOffsets[s][1]);
            c.delta_coef[0] += detail::kStartOffsets[s][2];
            c.theta_coef[0] += detail::kStartOffsets[s][3];
            starts.push_back(pk.pack(c));
        }
        if (init) starts.push_back(pk.pack(*init));
        m = detail::minimize_multistart(nll, starts, opt, static_cast<double>(ds.size()));
        evals += m.diagnostics.evaluations;
        iters += m.diagnostics.iterations;
    }

    RegressionFit out;
    out.submodel = submodel;
    out.n_obs = ds.size();
    out.coefficients = pk.unpack(m.z);
    out.loglik = -m.value;
    out.converged = m.converged;
    out.diagnostics = m.diagnostics;
    out.diagnostics.evaluations = evals;
    out.diagnostics.iterations = iters;
    out.warnings = dataset_warnings(ds, k);
    const auto ic = information_criteria(out.loglik, k, ds.size());
    out.aic = ic.aic;
    out.bic = ic.bic;
    out.caic = ic.caic;

    const std::size_t p = ds.n_cols;
    const std::size_t total = 2 + 2 * p;
    if (!m.covariance.empty()) {
        const std::size_t kk = m.z.size();
        auto var = [&](std::size_t j) { return m.covariance[j * kk + j]; };
        out.std_errors.assign(total, 0.0);
        out.p_values.assign(total, std::numeric_limits<double>::quiet_NaN());
        std::size_t j = 0;
        if (pk.alpha_free()) out.std_errors[0] = out.coefficients.alpha * std::sqrt(var(j++));
        if (pk.beta_free()) out.std_errors[1] = out.coefficients.beta * std::sqrt(var(j++));
        for (std::size_t q = 0; q < 2 * p; ++q, ++j) {
            const double est = q < p ? out.coefficients.delta_coef[q] : out.coefficients.theta_coef[q - p];
            const double se = std::sqrt(var(j));
            out.std_errors[2 + q] = se;
            out.p_values[2 + q] = 2.0 * special::std_normal_cdf(-std::fabs(est / se));
        }
    }
    return out;
}

namespace {

double quantile_residual(double x, const GollgrParams& p) {
    return special::std_normal_quantile(std::clamp(cdf(x, p), 1e-15, 1.0 - 1e-15));
}

}  // namespace

std::vector<double> quantile_residuals(const SurvivalDataset& ds, const RegressionCoefficients& c) {
    ds.validate();
    c.validate();
    std::vector<double> r(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) r[i] = quantile_residual(ds.times[i], link_params(ds.row(i), c));
    return r;
}

std::vector<double> quantile_residuals(std::span<const double> times, const GollgrParams& p) {
    p.validate();
    std::vector<double> r(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > 0.0)) throw std::invalid_argument("quantile_residuals: non-positive time");
        r[i] = quantile_residual(times[i], p);
    }
    return r;
}

std::vector<double> quantile_residuals(const SurvivalDataset& ds, const RegressionFit& fit) {
    if (!fit.converged) throw std::invalid_argument("quantile_residuals: fit did not converge");
    return quantile_residuals(ds, fit.coefficients);
}

LrTestResult lr_test(const RegressionFit& full, const RegressionFit& nested) {
    if (full.n_obs != nested.n_obs || full.coefficients.delta_coef.size() != nested.coefficients.delta_coef.size()) {
        throw std::invalid_argument("lr_test: regressions use different data or covariates");
    }
    return lr_test(full.submodel, full.loglik, nested.submodel, nested.loglik);
}

}  // namespace gollgr
