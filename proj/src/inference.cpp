#include "gollgr/inference.hpp"

#include "fit_common.hpp"

#include "gollgr/errors.hpp"
#include "gollgr/special_functions.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gollgr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Internal coordinates beyond this magnitude are treated as infeasible.
constexpr double kCoordLimit = 25.0;

std::array<double, 4> to_internal(const GollgrParams& p) {
    return {std::log(p.alpha), std::log(p.beta), std::log1p(p.gr.delta), std::log(p.gr.theta)};
}

GollgrParams from_internal(const std::array<double, 4>& c) {
    return GollgrParams{std::exp(c[0]), std::exp(c[1]), GrParams{std::expm1(c[2]), std::exp(c[3])}};
}

std::vector<int> free_indices(Submodel m) {
    std::vector<int> idx;
    if (!alpha_pinned(m)) idx.push_back(0);
    if (!beta_pinned(m)) idx.push_back(1);
    idx.push_back(2);
    idx.push_back(3);
    return idx;
}

class Likelihood {
public:
    Likelihood(std::span<const double> data, Submodel m) : data_(data), free_(free_indices(m)) {}

    std::array<double, 4> expand(const std::vector<double>& z) const {
        std::array<double, 4> c{0.0, 0.0, 0.0, 0.0};
        for (std::size_t j = 0; j < free_.size(); ++j) c[free_[j]] = z[j];
        return c;
    }

    std::vector<double> restrict(const std::array<double, 4>& c) const {
        std::vector<double> z;
        for (int i : free_) z.push_back(c[i]);
        return z;
    }

    double operator()(const std::vector<double>& z) const {
        for (double v : z) {
            if (!(std::fabs(v) <= kCoordLimit)) return kInf;
        }
        const auto p = from_internal(expand(z));
        if (!(p.gr.delta > -1.0)) return kInf;
        try {
            double s = 0.0;
            for (double x : data_) s += log_pdf(x, p);
            return std::isnan(s) ? kInf : -s;
        } catch (const NumericalError&) {
            return kInf;
        }
    }

    const std::vector<int>& free() const { return free_; }

private:
    std::span<const double> data_;
    std::vector<int> free_;
};

void check_data(std::span<const double> data) {
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!(data[i] > 0.0) || !std::isfinite(data[i])) {
            throw std::invalid_argument("observation " + std::to_string(i) + " is not a positive finite number");
        }
    }
}

std::string pinned_text(Submodel nested, Submodel full) {
    const bool a = alpha_pinned(nested) && !alpha_pinned(full);
    const bool b = beta_pinned(nested) && !beta_pinned(full);
    if (a && b) return "beta = alpha = 1";
    if (a) return "alpha = 1";
    if (b) return "beta = 1";
    return "no restriction";
}

std::string upper(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

std::string_view to_string(Submodel m) {
    switch (m) {
        case Submodel::gollgr: return "gollgr";
        case Submodel::ollgr: return "ollgr";
        case Submodel::egr: return "egr";
        case Submodel::gr: return "gr";
    }
    return "unknown";
}

Submodel parse_submodel(std::string_view name) {
    std::string lower(name);
    for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (Submodel m : {Submodel::gollgr, Submodel::ollgr, Submodel::egr, Submodel::gr}) {
        if (lower == to_string(m)) return m;
    }
    throw std::invalid_argument("unknown submodel '" + std::string(name) + "'");
}

int free_parameter_count(Submodel m) {
    return 2 + (alpha_pinned(m) ? 0 : 1) + (beta_pinned(m) ? 0 : 1);
}

bool alpha_pinned(Submodel m) { return m == Submodel::egr || m == Submodel::gr; }
bool beta_pinned(Submodel m) { return m == Submodel::ollgr || m == Submodel::gr; }

bool is_restriction(Submodel nested, Submodel full) {
    if (nested == full) return false;
    return (alpha_pinned(full) <= alpha_pinned(nested)) && (beta_pinned(full) <= beta_pinned(nested));
}

InformationCriteria information_criteria(double ll, int k, std::size_t n) {
    if (k < 0 || n == 0) throw std::invalid_argument("information_criteria: need k >= 0 and n >= 1");
    const double logn = std::log(static_cast<double>(n));
    return {-2.0 * ll + 2.0 * k, -2.0 * ll + k * logn, -2.0 * ll + k * (logn + 1.0)};
}

InformationCriteria information_criteria(const FitResult& fit) {
    if (!fit.converged) throw std::invalid_argument("information_criteria: fit did not converge");
    return information_criteria(fit.loglik, free_parameter_count(fit.submodel), fit.n_obs);
}

void FitOptions::validate() const {
    if (starts < 1 || starts > 5) throw std::invalid_argument("FitOptions: starts must lie in [1, 5]");
    if (!(screen_diameter_tol > 0.0)) throw std::invalid_argument("FitOptions: screen_diameter_tol must be positive");
    if (!(grad_tol > 0.0)) throw std::invalid_argument("FitOptions: grad_tol must be positive");
    polish.validate();
}

double loglik(std::span<const double> data, const GollgrParams& p) {
    p.validate();
    check_data(data);
    double s = 0.0;
    for (double x : data) {
        const double v = log_pdf(x, p);
        if (v == -kInf) return -kInf;
        s += v;
    }
    return s;
}

GollgrParams fit_gr_profile(std::span<const double> data) {
    check_data(data);
    if (data.empty()) throw std::invalid_argument("fit_gr_profile: empty sample");
    const double n = static_cast<double>(data.size());
    double s_log = 0.0;
    double s_sq = 0.0;
    for (double x : data) {
        s_log += std::log(x);
        s_sq += x * x;
    }
    // Negative profile log-likelihood in u = log(delta + 1).
    auto neg = [&](double u) {
        const double d1 = std::exp(u);
        const double theta = d1 * n / s_sq;
        return -(n * std::log(2.0) + n * d1 * std::log(theta) + (2.0 * d1 - 1.0) * s_log - n * d1 -
                 n * special::ln_gamma(d1));
    };
    const auto best = boost::math::tools::brent_find_minima(neg, -12.0, 8.0, 52);
    const double d1 = std::exp(best.first);
    return GollgrParams{1.0, 1.0, GrParams{d1 - 1.0, d1 * n / s_sq}};
}

FitResult fit_mle(std::span<const double> data, std::optional<GollgrParams> init, Submodel submodel,
                  const FitOptions& opt) {
    opt.validate();
    check_data(data);
    if (data.size() < 5) throw std::invalid_argument("fit_mle: need at least 5 observations");
    if (init) init->validate();

    const Likelihood nll(data, submodel);

    std::vector<std::vector<double>> starts;
    const auto seed = to_internal(fit_gr_profile(data));
    starts.push_back(nll.restrict(seed));
    for (int k = 0; k + 1 < opt.starts; ++k) {
        auto c = seed;
        for (int i = 0; i < 4; ++i) c[i] += detail::kStartOffsets[k][i];
        starts.push_back(nll.restrict(c));
    }
    if (init) starts.push_back(nll.restrict(to_internal(*init)));

    const auto m = detail::minimize_multistart(nll, starts, opt, static_cast<double>(data.size()));
    const auto c = nll.expand(m.z);

    FitResult out;
    out.submodel = submodel;
    out.n_obs = data.size();
    out.estimates = from_internal(c);
    out.loglik = -m.value;
    out.converged = m.converged;
    out.diagnostics = m.diagnostics;
    const auto ic = information_criteria(out.loglik, free_parameter_count(submodel), data.size());
    out.aic = ic.aic;
    out.bic = ic.bic;
    out.caic = ic.caic;
    if (!m.covariance.empty()) {
        const std::size_t k = m.z.size();
        std::array<double, 4> se{0.0, 0.0, 0.0, 0.0};
        for (std::size_t j = 0; j < k; ++j) {
            const int i = nll.free()[j];
            se[i] = std::exp(c[i]) * std::sqrt(m.covariance[j * k + j]);
        }
        out.std_errors = se;
    }
    return out;
}

LrTestResult lr_test(Submodel full_model, double full_loglik, Submodel nested_model, double nested_loglik) {
    if (!is_restriction(nested_model, full_model)) {
        throw std::invalid_argument("lr_test: " + std::string(to_string(nested_model)) + " is not nested in " +
                                    std::string(to_string(full_model)));
    }
    LrTestResult out;
    out.df = free_parameter_count(full_model) - free_parameter_count(nested_model);
    out.hypotheses = upper(to_string(full_model)) + " vs " + upper(to_string(nested_model)) + ": H0 " +
                     pinned_text(nested_model, full_model);
    const double stat = 2.0 * (full_loglik - nested_loglik);
    const double tol = 1e-6 * (1.0 + std::fabs(full_loglik));
    if (stat < -tol) {
        throw RefitAdvisory("lr_test: statistic " + std::to_string(stat) + " is negative; refit the " +
                            std::string(to_string(full_model)) + " model");
    }
    out.statistic = std::max(stat, 0.0);
    out.p_value = out.statistic == 0.0 ? 1.0 : special::reg_upper_gamma(0.5 * out.df, 0.5 * out.statistic);
    return out;
}

LrTestResult lr_test(const FitResult& full, const FitResult& nested) {
    if (full.n_obs != nested.n_obs) throw std::invalid_argument("lr_test: fits use different sample sizes");
    return lr_test(full.submodel, full.loglik, nested.submodel, nested.loglik);
}

}  // namespace gollgr
