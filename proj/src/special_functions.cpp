#include "gollgr/special_functions.hpp"

#include "gollgr/errors.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gollgr::special {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;

double lgamma_pure(double a) {
#if defined(__GLIBC__)
    int sign = 0;
    return ::lgamma_r(a, &sign);
#else
    return std::lgamma(a);
#endif
}

void check_gamma_args(double p, double x, const char* fn) {
    if (!(p > 0.0) || !std::isfinite(p)) {
        throw std::domain_error(std::string(fn) + ": shape must be positive and finite");
    }
    if (!(x >= 0.0)) {
        throw std::domain_error(std::string(fn) + ": argument must be nonnegative");
    }
}

// log P(p,x) via the power series, valid for x < p + 1.
double log_lower_series(double p, double x, const Accuracy& acc) {
    double ap = p;
    double term = 1.0 / p;
    double sum = term;
    for (int n = 0; n < acc.max_iter; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * acc.rel_tol) {
            return p * std::log(x) - x - lgamma_pure(p) + std::log(sum);
        }
    }
    throw NumericalError("reg_lower_gamma: series did not converge", term / sum, acc.max_iter);
}

// log Q(p,x) via the Legendre continued fraction (modified Lentz), x >= p + 1.
double log_upper_cf(double p, double x, const Accuracy& acc) {
    double b = x + 1.0 - p;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < acc.max_iter; ++i) {
        const double an = -i * (i - p);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) <= acc.rel_tol) {
            return p * std::log(x) - x - lgamma_pure(p) + std::log(h);
        }
    }
    throw NumericalError("reg_upper_gamma: continued fraction did not converge", 0.0, acc.max_iter);
}

// log(1 - exp(a)) for a <= 0.
double log1m_exp(double a) {
    if (a == 0.0) return -kInf;
    return a > -std::numbers::ln2 ? std::log(-std::expm1(a)) : std::log1p(-std::exp(a));
}

// log of the gamma density x^{p-1} e^{-x} / Gamma(p).
double log_gamma_density(double p, double x) {
    return (p - 1.0) * std::log(x) - x - lgamma_pure(p);
}

// Wilson-Hilferty starting value, with a small-u power-law fallback.
double quantile_start(double p, double log_lower, double log_upper) {
    if (log_lower < std::log(0.5)) {
        // P ~ x^p / Gamma(p+1) for small x.
        const double x_small = std::exp((log_lower + lgamma_pure(p + 1.0)) / p);
        if (x_small < 0.5 * p || x_small < 1e-3) return x_small;
    } else if (log_upper < -10.0) {
        // Q ~ x^{p-1} e^{-x} / Gamma(p) for large x; a few fixed-point sweeps.
        double x = std::max(p, -log_upper);
        for (int i = 0; i < 8; ++i) {
            x = -log_upper + (p - 1.0) * std::log(std::max(x, 1e-300)) - lgamma_pure(p);
            x = std::max(x, 1e-3);
        }
        return x;
    }
    const double u = std::exp(log_lower);
    const double z = log_lower < log_upper ? std_normal_quantile(std::clamp(u, 1e-300, 0.5))
                                           : -std_normal_quantile(std::clamp(std::exp(log_upper), 1e-300, 0.5));
    const double c = 1.0 / (9.0 * p);
    const double base = 1.0 - c + z * std::sqrt(c);
    if (base > 0.0) return p * base * base * base;
    return std::exp((log_lower + lgamma_pure(p + 1.0)) / p);
}

}  // namespace

void Accuracy::validate() const {
    if (!(rel_tol > 0.0)) throw std::invalid_argument("Accuracy: rel_tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("Accuracy: max_iter must be at least 1");
}

double ln_gamma(double a) {
    if (!(a > 0.0)) throw std::domain_error("ln_gamma: argument must be positive");
    return lgamma_pure(a);
}

IncompleteGammaLogs log_reg_gamma(double p, double x, const Accuracy& acc) {
    check_gamma_args(p, x, "log_reg_gamma");
    if (x == 0.0) return {-kInf, 0.0};
    if (std::isinf(x)) return {0.0, -kInf};
    if (x < p + 1.0) {
        const double lp = log_lower_series(p, x, acc);
        return {lp, log1m_exp(lp)};
    }
    const double lq = log_upper_cf(p, x, acc);
    return {log1m_exp(lq), lq};
}

double reg_lower_gamma(double p, double x) {
    check_gamma_args(p, x, "reg_lower_gamma");
    if (x == 0.0) return 0.0;
    if (x < p + 1.0) return std::exp(log_lower_series(p, x, Accuracy{}));
    if (std::isinf(x)) return 1.0;
    return -std::expm1(log_upper_cf(p, x, Accuracy{}));
}

double reg_upper_gamma(double p, double x) {
    check_gamma_args(p, x, "reg_upper_gamma");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < p + 1.0) return -std::expm1(log_lower_series(p, x, Accuracy{}));
    return std::exp(log_upper_cf(p, x, Accuracy{}));
}

double gamma_quantile_log(double p, double log_lower, double log_upper) {
    if (!(p > 0.0) || !std::isfinite(p)) {
        throw std::domain_error("gamma_quantile: shape must be positive and finite");
    }
    if (!(log_lower < 0.0) || !(log_upper < 0.0) || (std::isinf(log_lower) && std::isinf(log_upper))) {
        throw std::domain_error("gamma_quantile: probability must lie strictly inside (0, 1)");
    }
    if (std::isinf(log_lower)) return 0.0;
    if (std::isinf(log_upper)) return kInf;

    // Residual in the smaller tail, as a function of t = log x. Both tails
    // are monotone in t, so the sign of the residual brackets the root.
    const bool use_lower = log_lower <= log_upper;
    const double target = use_lower ? log_lower : log_upper;
    auto residual = [&](double t, double& slope) {
        const double x = std::exp(t);
        const auto logs = log_reg_gamma(p, x);
        const double log_tail = use_lower ? logs.log_lower : logs.log_upper;
        // d log(tail) / dt = +-x * density / tail
        const double ratio = std::exp(log_gamma_density(p, x) + t - log_tail);
        slope = use_lower ? ratio : -ratio;
        return log_tail - target;
    };

    double t = std::log(quantile_start(p, log_lower, log_upper));
    if (!std::isfinite(t)) t = std::log(p);

    // Bracket by geometric expansion. residual is increasing in t for the
    // lower tail and decreasing for the upper tail; normalise to increasing.
    const double sgn = use_lower ? 1.0 : -1.0;
    double slope = 0.0;
    double f = sgn * residual(t, slope);
    double lo = t, hi = t;
    double f_lo = f, f_hi = f;
    double step = 0.5;
    for (int i = 0; i < 200 && f_lo > 0.0; ++i) {
        hi = lo; f_hi = f_lo;
        lo -= step; step *= 2.0;
        f_lo = sgn * residual(lo, slope);
    }
    step = 0.5;
    for (int i = 0; i < 200 && f_hi < 0.0; ++i) {
        lo = hi; f_lo = f_hi;
        hi += step; step *= 2.0;
        f_hi = sgn * residual(hi, slope);
    }
    if (f_lo > 0.0 || f_hi < 0.0) {
        throw NumericalError("gamma_quantile: failed to bracket root", std::min(std::fabs(f_lo), std::fabs(f_hi)), 400);
    }
    if (f_lo == 0.0) return std::exp(lo);
    if (f_hi == 0.0) return std::exp(hi);

    // Safeguarded Newton in t.
    t = (f <= 0.0 && t >= lo && t <= hi) ? t : 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        f = sgn * residual(t, slope);
        slope *= sgn;
        if (f == 0.0) return std::exp(t);
        if (f < 0.0) lo = t; else hi = t;
        double next = t - f / slope;
        if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
        const double dt = std::fabs(next - t);
        t = next;
        if (dt <= 4.0 * kEps * std::max(1.0, std::fabs(t)) || hi - lo <= 4.0 * kEps * std::max(1.0, std::fabs(t))) {
            return std::exp(t);
        }
    }
    return std::exp(t);
}

double gamma_quantile(double p, double u) {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("gamma_quantile: u must lie in (0, 1)");
    return gamma_quantile_log(p, std::log(u), std::log1p(-u));
}

double gamma_quantile_upper(double p, double q) {
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("gamma_quantile_upper: q must lie in (0, 1)");
    return gamma_quantile_log(p, std::log1p(-q), std::log(q));
}

double std_normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double std_normal_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("std_normal_quantile: u must lie in (0, 1)");
    if (u > 0.5) return -std_normal_quantile(1.0 - u);
    if (u == 0.5) return 0.0;

    // Acklam's rational approximation for the lower half, then one Halley step.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    double x;
    if (u < 0.02425) {
        const double q = std::sqrt(-2.0 * std::log(u));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = u - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    for (int i = 0; i < 2; ++i) {
        const double e = std_normal_cdf(x) - u;
        const double h = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
        x -= h / (1.0 + 0.5 * x * h);
    }
    return x;
}

double log_parabolic_cylinder_D(double order, double y) {
    if (!(order < 0.0) || !std::isfinite(order) || !std::isfinite(y)) {
        throw std::domain_error("parabolic_cylinder_D: order must be negative and finite");
    }
    constexpr double tol = 1e-12;
    const double nu = -order;
    double err = 0.0;
    double l1 = 0.0;

    if (nu < 1.0) {
        // w^{nu-1} is singular at 0: integrate the subtracted form on (0,1)
        // and add the exact 1/nu, so that nu -> 0 stays well conditioned.
        boost::math::quadrature::tanh_sinh<double> ts;
        auto near = [&](double w) {
            return std::pow(w, nu - 1.0) * std::expm1(-(w * y + 0.5 * w * w));
        };
        double err1 = 0.0;
        const double j1 = ts.integrate(near, 0.0, 1.0, tol, &err1, &l1);
        boost::math::quadrature::exp_sinh<double> es;
        auto far = [&](double w) { return std::pow(w, nu - 1.0) * std::exp(-(w * y + 0.5 * w * w)); };
        double err2 = 0.0;
        const double j2 = es.integrate(far, 1.0, kInf, tol, &err2);
        err = err1 + err2;
        // 1/Gamma(nu) * (1/nu + j1 + j2) = 1/Gamma(nu+1) + (j1 + j2)/Gamma(nu)
        const double value = std::exp(-lgamma_pure(nu + 1.0)) + (j1 + j2) * std::exp(-lgamma_pure(nu));
        const double scale = std::exp(-lgamma_pure(nu + 1.0)) + (std::fabs(j1) + std::fabs(j2)) * std::exp(-lgamma_pure(nu));
        if (err * std::exp(-lgamma_pure(nu)) > 1e-9 * scale) {
            throw NumericalError("parabolic_cylinder_D: quadrature tolerance not met", err, 0);
        }
        if (!(value > 0.0)) throw NumericalError("parabolic_cylinder_D: nonpositive integral", value, 0);
        return -0.25 * y * y + std::log(value);
    }

    // Scale the integrand by its peak so large orders neither overflow nor
    // underflow: log h(w) = (nu-1) log w - w y - w^2/2.
    const double w_peak = nu > 1.0 ? 0.5 * (-y + std::sqrt(y * y + 4.0 * (nu - 1.0))) : 0.0;
    const double log_peak = nu > 1.0 ? (nu - 1.0) * std::log(w_peak) - w_peak * y - 0.5 * w_peak * w_peak : 0.0;
    auto integrand = [&](double w) {
        if (w == 0.0) return nu == 1.0 ? std::exp(-log_peak) : 0.0;
        return std::exp((nu - 1.0) * std::log(w) - w * y - 0.5 * w * w - log_peak);
    };
    double integral = 0.0;
    if (w_peak > 0.0) {
        boost::math::quadrature::tanh_sinh<double> ts;
        boost::math::quadrature::exp_sinh<double> es;
        double e1 = 0.0, e2 = 0.0;
        integral = ts.integrate(integrand, 0.0, w_peak, tol, &e1) + es.integrate(integrand, w_peak, kInf, tol, &e2);
        err = e1 + e2;
    } else {
        boost::math::quadrature::exp_sinh<double> es;
        integral = es.integrate(integrand, 0.0, kInf, tol, &err);
    }
    if (!(integral > 0.0) || err > 1e-9 * integral) {
        throw NumericalError("parabolic_cylinder_D: quadrature tolerance not met", err / std::max(integral, kTiny), 0);
    }
    return -0.25 * y * y - lgamma_pure(nu) + log_peak + std::log(integral);
}

double parabolic_cylinder_D(double order, double y) {
    return std::exp(log_parabolic_cylinder_D(order, y));
}

}  // namespace gollgr::special
