#include "gollgr/gollgr_model.hpp"

#include "gollgr/errors.hpp"
#include "gollgr/rng.hpp"
#include "gollgr/special_functions.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace gollgr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log(1 + e^z) without overflow.
double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double log_sum_exp(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::fabs(a - b)));
}

double log1m_exp(double a) {
    if (a == 0.0) return -kInf;
    return a > -std::numbers::ln2 ? std::log(-std::expm1(a)) : std::log1p(-std::exp(a));
}

}  // namespace

void GollgrParams::validate() const {
    if (!std::isfinite(alpha) || !(alpha > 0.0)) {
        throw std::invalid_argument("GollgrParams: alpha must be finite and positive");
    }
    if (!std::isfinite(beta) || !(beta > 0.0)) {
        throw std::invalid_argument("GollgrParams: beta must be finite and positive");
    }
    gr.validate();
}

std::string_view to_string(ShapeKind kind) {
    switch (kind) {
        case ShapeKind::decreasing: return "decreasing";
        case ShapeKind::decreasing_increasing_decreasing: return "decreasing-increasing-decreasing";
        case ShapeKind::unimodal: return "unimodal";
        case ShapeKind::bimodal: return "bimodal";
    }
    return "unknown";
}

GollgrTerms gollgr_terms(double x, const GollgrParams& p) {
    const double shape = p.gr.delta + 1.0;
    const double z = p.gr.theta * x * x;
    const auto logs = z > 0.0 ? special::log_reg_gamma(shape, z) : special::IncompleteGammaLogs{-kInf, 0.0};
    GollgrTerms t{};
    t.log_parent_pdf = std::numbers::ln2 + shape * std::log(p.gr.theta) - special::ln_gamma(shape) +
                       (2.0 * p.gr.delta + 1.0) * std::log(x) - z;
    t.log_G = logs.log_lower;
    if (z == 0.0) {
        // theta x^2 underflowed: use the leading power-law term of G.
        t.log_G = shape * (std::log(p.gr.theta) + 2.0 * std::log(x)) - special::ln_gamma(shape + 1.0);
    }
    // 1 - G^beta from whichever tail keeps precision.
    if (logs.log_upper < -1.0) {
        t.log_1m_Gb = log1m_exp(p.beta * std::log1p(-std::exp(logs.log_upper)));
        // beta log(1 - Q) can round to 0 for tiny Q; fall back to log(beta Q).
        if (!std::isfinite(t.log_1m_Gb)) t.log_1m_Gb = std::log(p.beta) + logs.log_upper;
    } else {
        t.log_1m_Gb = log1m_exp(p.beta * t.log_G);
    }
    t.log_T = p.beta * t.log_G - t.log_1m_Gb;
    return t;
}

double log_cdf(double x, const GollgrParams& p) {
    p.validate();
    if (!(x >= 0.0)) throw std::domain_error("cdf: x must be nonnegative");
    if (x == 0.0) return -kInf;
    if (std::isinf(p.gr.theta * x * x)) return 0.0;
    const auto t = gollgr_terms(x, p);
    return -softplus(-p.alpha * t.log_T);
}

double log_survival(double x, const GollgrParams& p) {
    p.validate();
    if (!(x >= 0.0)) throw std::domain_error("survival: x must be nonnegative");
    if (x == 0.0) return 0.0;
    if (std::isinf(p.gr.theta * x * x)) return -kInf;
    const auto t = gollgr_terms(x, p);
    return -softplus(p.alpha * t.log_T);
}

double cdf(double x, const GollgrParams& p) { return std::exp(log_cdf(x, p)); }

double survival(double x, const GollgrParams& p) { return std::exp(log_survival(x, p)); }

double log_pdf(double x, const GollgrParams& p) {
    p.validate();
    if (!(x >= 0.0)) throw std::domain_error("pdf: x must be nonnegative");
    if (x == 0.0) return std::log(limit_at_zero(p));
    if (std::isinf(p.gr.theta * x * x)) return -kInf;
    const auto t = gollgr_terms(x, p);
    const double ab = p.alpha * p.beta;
    const double log_denominator = log_sum_exp(ab * t.log_G, p.alpha * t.log_1m_Gb);
    return std::log(ab) + t.log_parent_pdf + (ab - 1.0) * t.log_G + (p.alpha - 1.0) * t.log_1m_Gb -
           2.0 * log_denominator;
}

double pdf(double x, const GollgrParams& p) { return std::exp(log_pdf(x, p)); }

double hrf(double x, const GollgrParams& p) {
    p.validate();
    if (!(x > 0.0)) throw std::domain_error("hrf: x must be positive");
    const double lf = log_pdf(x, p);
    const double ls = log_survival(x, p);
    if (ls == -kInf) return kInf;
    const double lh = lf - ls;
    return lh > std::log(std::numeric_limits<double>::max()) ? kInf : std::exp(lh);
}

double log_pdf_derivative(double x, const GollgrParams& p) {
    p.validate();
    if (!(x > 0.0)) throw std::domain_error("log_pdf_derivative: x must be positive");
    const auto t = gollgr_terms(x, p);
    const double a = p.alpha;
    const double ab = p.alpha * p.beta;
    // g'/g for the parent density: (2 delta + 1 - 2 theta x^2) / x.
    const double parent_score = (2.0 * p.gr.delta + 1.0 - 2.0 * p.gr.theta * x * x) / x;
    const double g_over_G = std::exp(t.log_parent_pdf - t.log_G);
    const double T = std::exp(t.log_T);
    const double F = std::exp(-softplus(-a * t.log_T));
    const double S_times_T = std::exp(-softplus(a * t.log_T) + t.log_T);
    return parent_score + g_over_G * ((ab - 1.0) - (a - 1.0) * p.beta * T - 2.0 * ab * (F - S_times_T));
}

double critical_point_residual(double x, const GollgrParams& p) {
    const auto t = gollgr_terms(x, p);
    const double ab = p.alpha * p.beta;
    const double parent_score = (2.0 * p.gr.delta + 1.0 - 2.0 * p.gr.theta * x * x) / x;
    // (g/G) (T + 1) { (beta + 1) G^beta - alpha beta (T^a - 1)/(T^a + 1) - 1 }
    const double g_over_G = std::exp(t.log_parent_pdf - t.log_G);
    const double T_plus_1 = std::exp(-t.log_1m_Gb);
    const double Gb = std::exp(p.beta * t.log_G);
    const double odds_ratio = std::tanh(0.5 * p.alpha * t.log_T);
    const double second = g_over_G * T_plus_1 * ((p.beta + 1.0) * Gb - ab * odds_ratio - 1.0);
    // Scale by the magnitude of the individual pieces, so cancellation inside
    // either bracket does not inflate the relative residual.
    const double scale = std::fabs(2.0 * p.gr.delta + 1.0) / x + 2.0 * p.gr.theta * x +
                         g_over_G * T_plus_1 * ((p.beta + 1.0) * Gb + ab * std::fabs(odds_ratio) + 1.0);
    return scale == 0.0 ? 0.0 : std::fabs(parent_score + second) / scale;
}

double draw_from_uniform(double u, const GollgrParams& p) {
    // log Y = (1/alpha) log(u / (1 - u)); z = (Y / (1 + Y))^{1/beta}.
    const double log_y = (std::log(u) - std::log1p(-u)) / p.alpha;
    const double log_z = -softplus(-log_y) / p.beta;
    const double log_1mz = log1m_exp(log_z);
    const double w = special::gamma_quantile_log(p.gr.delta + 1.0, log_z, log_1mz);
    return std::sqrt(w / p.gr.theta);
}

double quantile(double u, const GollgrParams& p) {
    p.validate();
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile: u must lie in (0, 1)");
    return draw_from_uniform(u, p);
}

std::vector<double> sample(std::size_t n, std::uint64_t seed, const GollgrParams& p) {
    p.validate();
    if (n == 0) throw std::invalid_argument("sample: n must be at least 1");
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& x : out) x = draw_from_uniform(rng.uniform(), p);
    return out;
}

double odds_transform(double x, const GollgrParams& p) {
    p.validate();
    if (!(x > 0.0)) throw std::domain_error("odds_transform: x must be positive");
    const auto t = gollgr_terms(x, p);
    if (t.log_1m_Gb <= std::log(1e-16)) return kInf;
    return std::exp(t.log_T);
}

double limit_at_zero(const GollgrParams& p) {
    p.validate();
    // Near 0, f(x) ~ alpha beta g G^{alpha beta - 1}, a power of x with
    // exponent 2 (delta + 1) alpha beta - 1.
    const double ab = p.alpha * p.beta;
    const double exponent = 2.0 * (p.gr.delta + 1.0) * ab - 1.0;
    if (std::fabs(exponent) <= 1e-12) {
        return 2.0 * ab * std::sqrt(p.gr.theta) / std::exp(special::ln_gamma(p.gr.delta + 1.0)) *
               std::exp((1.0 - ab) * special::ln_gamma(p.gr.delta + 2.0));
    }
    return exponent > 0.0 ? 0.0 : kInf;
}

CriticalPoints critical_points(const GollgrParams& p, std::optional<double> search_bound) {
    p.validate();
    const double bound = search_bound ? *search_bound : quantile(1.0 - 1e-8, p);
    if (!(bound > 0.0) || !std::isfinite(bound)) {
        throw std::invalid_argument("critical_points: search bound must be positive and finite");
    }
    if (cdf(bound, p) <= 1.0 - 1e-6) {
        throw std::invalid_argument("critical_points: search bound must satisfy cdf(bound) > 1 - 1e-6");
    }

    const double x_lo = std::max(quantile(1e-10, p), bound * 1e-12);
    const double decades = std::log10(bound / x_lo);
    const int n_grid = std::max(2000, static_cast<int>(400.0 * decades));
    const double step = std::log(bound / x_lo) / n_grid;

    auto score = [&](double x) { return log_pdf_derivative(x, p); };

    CriticalPoints result;
    result.search_bound = bound;
    double x_prev = x_lo;
    double s_prev = score(x_prev);
    for (int i = 1; i <= n_grid; ++i) {
        const double x = i == n_grid ? bound : x_lo * std::exp(step * i);
        const double s = score(x);
        if (s == 0.0) {
            result.points.push_back(x);
        } else if (s_prev != 0.0 && std::signbit(s) != std::signbit(s_prev)) {
            std::uintmax_t max_iter = 200;
            const auto root = boost::math::tools::toms748_solve(
                score, x_prev, x, s_prev, s, boost::math::tools::eps_tolerance<double>(52), max_iter);
            result.points.push_back(0.5 * (root.first + root.second));
        }
        x_prev = x;
        s_prev = s;
    }
    result.sign_change_found = !result.points.empty();
    for (double x : result.points) {
        const double r = critical_point_residual(x, p);
        if (r > 1e-6) throw NumericalError("critical_points: root fails the critical-point equation", r, 0);
    }
    return result;
}

ShapeClass classify_shape(const GollgrParams& p) {
    const auto cp = critical_points(p);
    const double lim = limit_at_zero(p);
    const auto n = cp.points.size();
    const bool zero_limit = lim == 0.0;
    ShapeClass out{ShapeKind::decreasing, cp.points};
    if (n == 0 && !zero_limit) {
        out.kind = ShapeKind::decreasing;
    } else if (n == 1 && zero_limit) {
        out.kind = ShapeKind::unimodal;
    } else if (n == 2 && !zero_limit) {
        out.kind = ShapeKind::decreasing_increasing_decreasing;
    } else if (n == 3 && zero_limit) {
        out.kind = ShapeKind::bimodal;
    } else {
        throw AmbiguousShapeError("classify_shape: " + std::to_string(n) +
                                  " critical points with limit at 0+ = " + std::to_string(lim) +
                                  " match no known shape");
    }
    return out;
}

}  // namespace gollgr
