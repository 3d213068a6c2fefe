#pragma once

// Power-series and GR-mixture representations of the GOLLGR law.
//
//   G^{ab} + (1 - G^b)^a = sum_k c_k G^k,   F = sum_k d_k G^k,
//   f(x) = sum_{l,m} w_{l,m} g_GR(x; theta, delta*_{l,m}),
//   delta*_{l,m} = l (delta + 1) + m + delta.
//
// These are analytical devices, not the default evaluation path. The power
// series in G exists only when a b and b are integers; for other shapes
// the generalized-binomial sums behind a_k and c_k do not converge, and
// every routine here reports that through its convergence flag instead of
// returning a silently wrong number. Within the valid domain the G-series
// has radius 1, so agreement with the direct cdf is checked for G <= 0.9.

#include "gollgr/gollgr_model.hpp"

#include <vector>

namespace gollgr::series {

struct SeriesControl {
    double tol = 1e-12;        ///< relative tolerance for inner generalized-binomial sums
    int max_terms = 2000;      ///< cap on inner sum length
    int max_order = 200;       ///< cap on K, L and M
    double change_tol = 1e-8;  ///< stop growing an order once the grid changes by less

    void validate() const;
};

struct SeriesValue {
    double value = 0.0;
    bool converged = false;
    double tail_bound = 0.0;  ///< bound on |value - limit|; +inf when the sum diverges
    int terms = 0;
};

/// C(r, j) for real r and integer j >= 0, via log-gamma with sign tracking.
double generalized_binomial(double r, int j);

/// a_k(r) = sum_{j>=k} (-1)^{j+k} C(r, j) C(j, k).
SeriesValue coeff_a(int k, double power, const SeriesControl& ctl = {});

/// c_k(alpha, beta) = a_k(alpha beta) + sum_i (-1)^i C(alpha, i) a_k(i beta).
SeriesValue coeff_c(int k, double alpha, double beta, const SeriesControl& ctl = {});

struct CoefficientArray {
    std::vector<double> values;
    bool converged = false;
    double tail_bound = 0.0;  ///< largest tail bound among the inputs
};

/// d_0..d_K from a_k = sum_{r=0}^k c_r d_{k-r}. Throws std::domain_error if c_0 = 0.
CoefficientArray coeff_d(int K, double alpha, double beta, const SeriesControl& ctl = {});

/// e_m^(l) for l = 0..L, m = 0..M: coefficients of the l-th power of
/// sum_m q_m y^m, q_m = (-1)^m theta^m / ((delta + 1 + m) m!).
std::vector<std::vector<double>> coeff_e(int L, int M, const GrParams& gr);

/// sum_{k<=K} d_k G(x)^k.
double cdf_series(double x, const GollgrParams& p, const std::vector<double>& d);

/// Smallest K (capped at ctl.max_order) for which the G-series on the
/// reference grid changes by less than ctl.change_tol when K grows by 10.
int choose_cdf_order(const GollgrParams& p, const SeriesControl& ctl = {});

/// Reference points x_j = Q_GR(z_j), z_j = 0.05, 0.10, ..., 0.90.
std::vector<double> reference_grid(const GollgrParams& p);

struct ExpansionTable {
    GollgrParams params;
    std::vector<double> d;                   ///< d_0..d_{L+2}
    std::vector<std::vector<double>> e;      ///< e[l][m]
    std::vector<std::vector<double>> w;      ///< w[l][m]
    std::vector<std::vector<double>> log_abs_w;
    std::vector<std::vector<int>> sign_w;
    int K_max = 0;
    int L_max = 0;
    int M_max = 0;
    /// Relative error bound of the truncated mixture on the reference grid:
    /// truncation estimate plus accumulated rounding.
    double tail_bound = 0.0;
    bool converged = false;
};

double delta_star(const GrParams& gr, int l, int m);

/// Builds the mixture with l <= L, m <= M.
ExpansionTable mixture_weights(const GollgrParams& p, int L, int M, const SeriesControl& ctl = {});

/// Chooses L and M by the adaptive policy of SeriesControl, then builds.
ExpansionTable build_expansion(const GollgrParams& p, const SeriesControl& ctl = {});

struct SeriesResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = false;
};

/// Truncated mixture density at x with its own error estimate.
SeriesResult mixture_pdf(double x, const ExpansionTable& tbl);

/// E[X^s] from the mixture. The inner m-sums alternate with growing terms
/// and are summed with the Levin u-transform.
SeriesResult moment(double s, const GollgrParams& p, const ExpansionTable& tbl);

/// int_0^x t^s f(t) dt from the mixture.
SeriesResult incomplete_moment(double s, double x, const GollgrParams& p, const ExpansionTable& tbl);

/// Largest |t| for which mgf is validated: |t| / sqrt(2 theta) <= 4.
double mgf_t_max(const GollgrParams& p);

/// E[e^{tX}] through parabolic cylinder functions. mgf(0) is exactly 1.
/// Outside |t| <= mgf_t_max the result carries converged = false.
SeriesResult mgf(double t, const GollgrParams& p, const ExpansionTable& tbl);

}  // namespace gollgr::series
