#include "gollgr/gr_model.hpp"

#include "gollgr/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace gollgr {

void GrParams::validate() const {
    if (!std::isfinite(delta) || !(delta > -1.0)) {
        throw std::invalid_argument("GrParams: delta must be finite and greater than -1");
    }
    if (!std::isfinite(theta) || !(theta > 0.0)) {
        throw std::invalid_argument("GrParams: theta must be finite and positive");
    }
}

double gr_cdf(double x, const GrParams& p) {
    p.validate();
    if (!(x >= 0.0)) throw std::domain_error("gr_cdf: x must be nonnegative");
    return special::reg_lower_gamma(p.delta + 1.0, p.theta * x * x);
}

double gr_survival(double x, const GrParams& p) {
    p.validate();
    if (!(x >= 0.0)) throw std::domain_error("gr_survival: x must be nonnegative");
    return special::reg_upper_gamma(p.delta + 1.0, p.theta * x * x);
}

double gr_log_pdf(double x, const GrParams& p) {
    p.validate();
    if (!(x >= 0.0)) throw std::domain_error("gr_pdf: x must be nonnegative");
    const double shape = 2.0 * p.delta + 1.0;
    if (x == 0.0) {
        if (shape > 0.0) return -std::numeric_limits<double>::infinity();
        if (shape < 0.0) return std::numeric_limits<double>::infinity();
        return std::log(2.0 * std::sqrt(p.theta / std::numbers::pi));
    }
    return std::numbers::ln2 + (p.delta + 1.0) * std::log(p.theta) - special::ln_gamma(p.delta + 1.0) +
           shape * std::log(x) - p.theta * x * x;
}

double gr_pdf(double x, const GrParams& p) {
    return std::exp(gr_log_pdf(x, p));
}

double gr_quantile(double z, const GrParams& p) {
    p.validate();
    if (!(z > 0.0 && z < 1.0)) throw std::domain_error("gr_quantile: z must lie in (0, 1)");
    return std::sqrt(special::gamma_quantile(p.delta + 1.0, z) / p.theta);
}

double gr_moment(double s, const GrParams& p) {
    p.validate();
    if (!(s > 0.0)) throw std::domain_error("gr_moment: order must be positive");
    return std::exp(special::ln_gamma(0.5 * s + p.delta + 1.0) - special::ln_gamma(p.delta + 1.0) -
                    0.5 * s * std::log(p.theta));
}

}  // namespace gollgr
