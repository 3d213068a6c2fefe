#pragma once

#include "gollgr/gr_model.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace gollgr {

/// The four GOLLGR parameters. alpha and beta are the two odd log-logistic
/// shapes; gr holds the generalized Rayleigh parent (delta, theta).
struct GollgrParams {
    double alpha = 1.0;
    double beta = 1.0;
    GrParams gr{};

    double delta() const noexcept { return gr.delta; }
    double theta() const noexcept { return gr.theta; }

    void validate() const;
};

enum class ShapeKind { decreasing, decreasing_increasing_decreasing, unimodal, bimodal };

std::string_view to_string(ShapeKind kind);

struct ShapeClass {
    ShapeKind kind;
    std::vector<double> critical_points;  ///< strictly increasing
};

/// Log-space building blocks shared by every evaluation at a point x > 0.
/// G is the parent cdf, T = G^beta / (1 - G^beta) the odds transform.
struct GollgrTerms {
    double log_parent_pdf;  ///< log g(x)
    double log_G;           ///< log G(x)
    double log_1m_Gb;       ///< log(1 - G(x)^beta)
    double log_T;           ///< beta log G - log(1 - G^beta)
};

GollgrTerms gollgr_terms(double x, const GollgrParams& p);

double cdf(double x, const GollgrParams& p);
double survival(double x, const GollgrParams& p);
double log_cdf(double x, const GollgrParams& p);
double log_survival(double x, const GollgrParams& p);

/// Density for x > 0; at x = 0 returns limit_at_zero(p).
double pdf(double x, const GollgrParams& p);
double log_pdf(double x, const GollgrParams& p);

/// Hazard rate pdf / survival. Returns +inf once the survival underflows
/// past double range.
double hrf(double x, const GollgrParams& p);

/// d/dx log f(x), the score in x used for critical-point location.
double log_pdf_derivative(double x, const GollgrParams& p);

double quantile(double u, const GollgrParams& p);

/// Quantile at a uniform draw: the stochastic representation with
/// Y = (u / (1 - u))^{1/alpha} ~ LL(1, alpha).
double draw_from_uniform(double u, const GollgrParams& p);

/// n exact draws by inversion from an mt19937_64 stream seeded with seed.
std::vector<double> sample(std::size_t n, std::uint64_t seed, const GollgrParams& p);

/// T(x) = G^beta / (1 - G^beta). Returns +inf once G^beta >= 1 - 1e-16.
double odds_transform(double x, const GollgrParams& p);

/// lim_{x->0+} f(x): 0, a finite positive value, or +inf.
double limit_at_zero(const GollgrParams& p);

struct CriticalPoints {
    std::vector<double> points;  ///< sign changes of f', strictly increasing
    double search_bound = 0.0;
    bool sign_change_found = false;  ///< false: f is monotone on the scanned range
};

/// Locates every sign change of f' on (0, search_bound]. Default bound is
/// quantile(1 - 1e-8). Each returned root is validated against the
/// critical-point equation written in terms of T; a residual above 1e-6
/// raises NumericalError.
CriticalPoints critical_points(const GollgrParams& p, std::optional<double> search_bound = std::nullopt);

/// Relative residual of the critical-point equation at x (0 at an exact root).
double critical_point_residual(double x, const GollgrParams& p);

/// Combines the critical-point count with the limit at 0+. Throws
/// AmbiguousShapeError when the pair does not match a known pattern.
ShapeClass classify_shape(const GollgrParams& p);

}  // namespace gollgr
