#pragma once

namespace gollgr {

/// Generalized Rayleigh parameters: cdf P(delta + 1, theta x^2).
struct GrParams {
    double delta = 0.0;  ///< shape, > -1
    double theta = 1.0;  ///< rate in inverse squared time units, > 0

    /// Throws std::invalid_argument unless delta > -1, theta > 0, both finite.
    void validate() const;
};

double gr_cdf(double x, const GrParams& p);
double gr_survival(double x, const GrParams& p);

/// Density. At x = 0 returns the continuous limit: 0 when 2 delta + 1 > 0,
/// 2 sqrt(theta / pi) when delta = -1/2 and +inf when delta < -1/2.
double gr_pdf(double x, const GrParams& p);
double gr_log_pdf(double x, const GrParams& p);

/// Inverse cdf, 0 < z < 1.
double gr_quantile(double z, const GrParams& p);

/// Ordinary moment E[Z^s], s > 0.
double gr_moment(double s, const GrParams& p);

}  // namespace gollgr
