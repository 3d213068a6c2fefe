#pragma once

// Special functions used throughout the library: log-gamma, the regularized
// incomplete gamma ratios and their inverse, the standard normal quantile
// and the negative-order parabolic cylinder function.
//
// Every function here is a pure function of its arguments. Probabilities
// are returned unclamped; callers that feed them into logarithms are
// responsible for clamping.

namespace gollgr::special {

struct Accuracy {
    double rel_tol = 1e-15;
    int max_iter = 100000;

    /// Throws std::invalid_argument unless rel_tol > 0 and max_iter >= 1.
    void validate() const;
};

/// log Gamma(a) for a > 0. Throws std::domain_error otherwise.
double ln_gamma(double a);

/// Regularized lower incomplete gamma ratio P(p, x), p > 0, x >= 0.
double reg_lower_gamma(double p, double x);

/// Regularized upper incomplete gamma ratio Q(p, x) = 1 - P(p, x), computed
/// directly so that it keeps relative accuracy deep in the right tail.
double reg_upper_gamma(double p, double x);

/// Both tails of the incomplete gamma ratio in log space. Whichever tail is
/// evaluated directly is exact to working precision even when it
/// underflows as a plain double; the other is obtained via log1p.
struct IncompleteGammaLogs {
    double log_lower;
    double log_upper;
};

IncompleteGammaLogs log_reg_gamma(double p, double x, const Accuracy& acc = {});

/// Inverse of reg_lower_gamma in x: returns z with P(p, z) = u, 0 < u < 1.
double gamma_quantile(double p, double u);

/// Inverse of reg_upper_gamma in x: returns z with Q(p, z) = q, 0 < q < 1.
double gamma_quantile_upper(double p, double q);

/// Inverse given both tail probabilities in log space
/// (log_lower = log u, log_upper = log(1 - u)). The smaller tail drives the
/// solve, so targets like u = 1e-400 or 1 - u = 1e-30 are representable.
double gamma_quantile_log(double p, double log_lower, double log_upper);

/// Standard normal cdf.
double std_normal_cdf(double x);

/// Standard normal quantile, 0 < u < 1. Throws std::domain_error at the
/// boundary. Antisymmetric: the upper half is the negated lower half.
double std_normal_quantile(double u);

/// Parabolic cylinder function D_order(y) for order < 0 from its integral
/// representation
///   D_p(y) = exp(-y^2/4) / Gamma(-p) * int_0^inf exp(-(w y + w^2/2)) w^{-(p+1)} dw.
/// Throws std::domain_error for order >= 0 and gollgr::NumericalError if the
/// quadrature misses its tolerance.
double parabolic_cylinder_D(double order, double y);

/// log D_order(y), order < 0. D is positive on this branch; the log form
/// stays finite when D itself under- or overflows.
double log_parabolic_cylinder_D(double order, double y);

}  // namespace gollgr::special
