#include "gollgr/series_expansion.hpp"

#include "gollgr/special_functions.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sum.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace gollgr::series {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

double lgamma_signed(double a, int& sign) {
#if defined(__GLIBC__)
    return ::lgamma_r(a, &sign);
#else
    const double v = std::lgamma(a);
    sign = (a > 0.0 || static_cast<long long>(std::floor(a)) % 2 == 0) ? 1 : -1;
    return v;
#endif
}

bool is_integer(double r) {
    return std::fabs(r - std::round(r)) <= 1e-9 * std::max(1.0, std::fabs(r));
}

struct Accelerated {
    double sum;
    double abserr;
};

// Sum of a series from its leading terms: plain summation when the terms
// have died out, the Levin u-transform otherwise.
Accelerated accelerate(std::vector<double> terms) {
    static std::once_flag gsl_quiet;
    std::call_once(gsl_quiet, [] { gsl_set_error_handler_off(); });

    while (!terms.empty() && terms.back() == 0.0) terms.pop_back();
    double plain = 0.0;
    double abs_sum = 0.0;
    for (double t : terms) {
        plain += t;
        abs_sum += std::fabs(t);
    }
    const std::size_t n = terms.size();
    if (n == 0) return {0.0, 0.0};
    const double rounding = kEps * abs_sum * std::sqrt(static_cast<double>(n));
    const double last = std::fabs(terms.back());
    const double prev = n > 1 ? std::fabs(terms[n - 2]) : 0.0;
    if (n <= 2 || std::max(last, prev) <= kEps * std::fabs(plain)) {
        return {plain, rounding + (n <= 2 ? 0.0 : last)};
    }
    for (double t : terms) {
        if (t == 0.0 || !std::isfinite(t)) return {plain, rounding + last + prev};
    }
    // The u-transform degrades when fed too many rapidly growing terms; keep
    // the prefix length with the smallest error estimate.
    double best_sum = plain;
    double best_err = kInf;
    gsl_sum_levin_u_workspace* ws = gsl_sum_levin_u_alloc(n);
    for (std::size_t len = std::min<std::size_t>(n, 8); len <= n; len += 4) {
        double sum = 0.0;
        double abserr = 0.0;
        const int status = gsl_sum_levin_u_accel(terms.data(), len, ws, &sum, &abserr);
        double prefix_abs = 0.0;
        for (std::size_t i = 0; i < len; ++i) prefix_abs += std::fabs(terms[i]);
        abserr += kEps * prefix_abs * std::sqrt(static_cast<double>(len));
        if (status == GSL_SUCCESS && std::isfinite(sum) && abserr < best_err) {
            best_sum = sum;
            best_err = abserr;
        }
        if (len < n && len + 4 > n) len = n - 4;
    }
    gsl_sum_levin_u_free(ws);
    return {best_sum, best_err};
}

double log_gr_pdf_at(double x, double theta, double ds) {
    return std::numbers::ln2 + (ds + 1.0) * std::log(theta) - std::lgamma(ds + 1.0) +
           (2.0 * ds + 1.0) * std::log(x) - theta * x * x;
}

// Bound on the first omitted l-term: (L+2) d_{L+2} times an upper bound of
// the parent-law integral, using n g G^{n-1} <= n g.
double next_l_bound(const ExpansionTable& tbl, double parent_integral) {
    const int n = tbl.L_max + 2;
    if (n >= static_cast<int>(tbl.d.size())) return 0.0;
    return std::fabs(tbl.d[n]) * n * parent_integral;
}

void check_table(const GollgrParams& p, const ExpansionTable& tbl) {
    const auto& q = tbl.params;
    if (p.alpha != q.alpha || p.beta != q.beta || p.gr.delta != q.gr.delta || p.gr.theta != q.gr.theta) {
        throw std::invalid_argument("series: expansion table was built for different parameters");
    }
}

// Finite-order table construction shared by mixture_weights and build_expansion.
ExpansionTable assemble(const GollgrParams& p, int L, int M, const SeriesControl& ctl) {
    p.validate();
    ctl.validate();
    if (L < 0 || M < 0) throw std::invalid_argument("mixture_weights: L and M must be nonnegative");
    ExpansionTable tbl;
    tbl.params = p;
    tbl.L_max = L;
    tbl.M_max = M;
    tbl.K_max = L + 2;
    const auto d = coeff_d(L + 2, p.alpha, p.beta, ctl);
    tbl.d = d.values;
    tbl.e = coeff_e(L, M, p.gr);
    // The theta^m in e_m^(l) cancels against the theta^m in w, so the weights
    // are built from the theta = 1 coefficients.
    const auto e_hat = coeff_e(L, M, GrParams{p.gr.delta, 1.0});
    const double lg_base = std::lgamma(p.gr.delta + 1.0);
    bool finite = true;
    tbl.w.assign(L + 1, std::vector<double>(M + 1, 0.0));
    tbl.log_abs_w.assign(L + 1, std::vector<double>(M + 1, -kInf));
    tbl.sign_w.assign(L + 1, std::vector<int>(M + 1, 0));
    for (int l = 0; l <= L; ++l) {
        const double dl = tbl.d[l + 1];
        for (int m = 0; m <= M; ++m) {
            const double em = e_hat[l][m];
            if (dl == 0.0 || em == 0.0) continue;
            const double ds = delta_star(p.gr, l, m);
            const double lw = std::log(l + 1.0) + std::log(std::fabs(dl)) + std::log(std::fabs(em)) +
                              std::lgamma(ds + 1.0) - (l + 1.0) * lg_base;
            const int sgn = (dl > 0.0) == (em > 0.0) ? 1 : -1;
            tbl.log_abs_w[l][m] = lw;
            tbl.sign_w[l][m] = sgn;
            tbl.w[l][m] = sgn * std::exp(lw);
            if (!std::isfinite(tbl.w[l][m])) finite = false;
        }
    }
    tbl.converged = d.converged && finite;

    double worst = 0.0;
    for (double x : reference_grid(p)) {
        const auto r = mixture_pdf(x, tbl);
        const double rel = r.value != 0.0 ? r.error_estimate / std::fabs(r.value) : kInf;
        worst = std::max(worst, std::isnan(rel) ? kInf : rel);
    }
    tbl.tail_bound = worst;
    return tbl;
}

}  // namespace

void SeriesControl::validate() const {
    if (!(tol > 0.0)) throw std::invalid_argument("SeriesControl: tol must be positive");
    if (max_terms < 1) throw std::invalid_argument("SeriesControl: max_terms must be at least 1");
    if (max_order < 1 || max_order > 200) throw std::invalid_argument("SeriesControl: max_order must lie in [1, 200]");
    if (!(change_tol > 0.0)) throw std::invalid_argument("SeriesControl: change_tol must be positive");
}

double generalized_binomial(double r, int j) {
    if (j < 0) return 0.0;
    if (j == 0) return 1.0;
    if (is_integer(r) && r >= 0.0 && j > std::round(r)) return 0.0;
    if (r < 0.0) {
        // C(r, j) = (-1)^j C(j - r - 1, j)
        const double v = generalized_binomial(j - r - 1.0, j);
        return j % 2 == 0 ? v : -v;
    }
    int s1 = 1, s2 = 1, s3 = 1;
    const double lg = lgamma_signed(r + 1.0, s1) - lgamma_signed(j + 1.0, s2) - lgamma_signed(r - j + 1.0, s3);
    return s1 * s2 * s3 * std::exp(lg);
}

SeriesValue coeff_a(int k, double power, const SeriesControl& ctl) {
    if (k < 0) throw std::invalid_argument("coeff_a: k must be nonnegative");
    ctl.validate();
    SeriesValue out;
    if (is_integer(power)) {
        // The sum is finite and collapses to the Kronecker delta.
        const long n = std::lround(power);
        out.value = k == n ? 1.0 : 0.0;
        out.converged = true;
        out.terms = k <= n ? static_cast<int>(n - k + 1) : 0;
        return out;
    }
    // sum_{j>=k} (-1)^{j+k} C(r,j) C(j,k) = C(r,k) sum_i (-1)^i C(r-k, i).
    const double prefactor = generalized_binomial(power, k);
    const double s = power - k;
    double term = 1.0;
    double sum = 0.0;
    int i = 0;
    for (; i < ctl.max_terms; ++i) {
        sum += term;
        term *= (i - s) / (i + 1.0);
    }
    out.value = prefactor * sum;
    out.terms = i;
    if (s > 0.0) {
        // sum_{i<=n} (-1)^i C(s,i) = (-1)^n C(s-1,n) and the limit is 0, so the
        // partial sum is exactly the remainder.
        out.tail_bound = std::fabs(out.value);
        out.converged = out.tail_bound <= ctl.tol * std::max(1.0, std::fabs(prefactor));
    } else {
        // Same-sign terms decaying no faster than 1/i: divergent.
        out.tail_bound = kInf;
        out.converged = false;
    }
    return out;
}

SeriesValue coeff_c(int k, double alpha, double beta, const SeriesControl& ctl) {
    if (k < 0) throw std::invalid_argument("coeff_c: k must be nonnegative");
    if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("coeff_c: alpha and beta must be positive");
    const auto head = coeff_a(k, alpha * beta, ctl);
    SeriesValue out = head;
    const bool alpha_int = is_integer(alpha);
    const bool beta_int = is_integer(beta);
    const int i_cap = alpha_int ? static_cast<int>(std::lround(alpha)) : ctl.max_order;
    double last = 0.0;
    int i = 0;
    for (; i <= i_cap; ++i) {
        if (beta_int && i * std::round(beta) > k) break;  // remaining a_k(i beta) vanish
        const double cb = generalized_binomial(alpha, i);
        const auto a = coeff_a(k, i * beta, ctl);
        last = (i % 2 == 0 ? 1.0 : -1.0) * cb * a.value;
        out.value += last;
        out.terms += a.terms;
        out.converged = out.converged && a.converged;
        out.tail_bound += std::fabs(cb) * a.tail_bound;
    }
    if (!(alpha_int || beta_int)) {
        // Outer sum truncated: its last term stands in for the remainder.
        out.tail_bound += std::fabs(last);
        out.converged = out.converged && std::fabs(last) <= ctl.tol;
    }
    return out;
}

CoefficientArray coeff_d(int K, double alpha, double beta, const SeriesControl& ctl) {
    if (K < 0) throw std::invalid_argument("coeff_d: K must be nonnegative");
    std::vector<double> a(K + 1), c(K + 1);
    CoefficientArray out;
    out.converged = true;
    for (int k = 0; k <= K; ++k) {
        const auto ak = coeff_a(k, alpha * beta, ctl);
        const auto ck = coeff_c(k, alpha, beta, ctl);
        a[k] = ak.value;
        c[k] = ck.value;
        out.converged = out.converged && ak.converged && ck.converged;
        out.tail_bound = std::max({out.tail_bound, ak.tail_bound, ck.tail_bound});
    }
    if (std::fabs(c[0]) < 1e-300) throw std::domain_error("coeff_d: c_0 vanishes");
    out.values.assign(K + 1, 0.0);
    for (int k = 0; k <= K; ++k) {
        double acc = a[k];
        for (int r = 1; r <= k; ++r) acc -= c[r] * out.values[k - r];
        out.values[k] = acc / c[0];
        if (!std::isfinite(out.values[k])) out.converged = false;
    }
    return out;
}

std::vector<std::vector<double>> coeff_e(int L, int M, const GrParams& gr) {
    gr.validate();
    if (L < 0 || M < 0) throw std::invalid_argument("coeff_e: L and M must be nonnegative");
    std::vector<double> q(M + 1);
    for (int m = 0; m <= M; ++m) {
        const double mag = std::exp(m * std::log(gr.theta) - std::lgamma(m + 1.0)) / (gr.delta + 1.0 + m);
        q[m] = m % 2 == 0 ? mag : -mag;
    }
    std::vector<std::vector<double>> e(L + 1, std::vector<double>(M + 1, 0.0));
    e[0][0] = 1.0;
    // Direct Cauchy products: sign(q_i) = (-1)^i, so every term of e_m^(l)
    // shares the sign (-1)^m and nothing cancels.
    for (int l = 1; l <= L; ++l) {
        for (int m = 0; m <= M; ++m) {
            double acc = 0.0;
            for (int i = 0; i <= m; ++i) acc += q[i] * e[l - 1][m - i];
            e[l][m] = acc;
        }
    }
    return e;
}

double cdf_series(double x, const GollgrParams& p, const std::vector<double>& d) {
    const double G = gr_cdf(x, p.gr);
    double sum = 0.0;
    double Gk = 1.0;
    for (double dk : d) {
        sum += dk * Gk;
        Gk *= G;
    }
    return sum;
}

std::vector<double> reference_grid(const GollgrParams& p) {
    std::vector<double> xs;
    for (int j = 1; j <= 18; ++j) xs.push_back(gr_quantile(0.05 * j, p.gr));
    return xs;
}

int choose_cdf_order(const GollgrParams& p, const SeriesControl& ctl) {
    p.validate();
    ctl.validate();
    const auto d = coeff_d(ctl.max_order, p.alpha, p.beta, ctl).values;
    const auto grid = reference_grid(p);
    auto eval = [&](int K) {
        std::vector<double> out;
        const std::vector<double> dk(d.begin(), d.begin() + K + 1);
        for (double x : grid) out.push_back(cdf_series(x, p, dk));
        return out;
    };
    auto prev = eval(std::min(10, ctl.max_order));
    for (int K = 20; K <= ctl.max_order; K += 10) {
        const auto cur = eval(K);
        double change = 0.0;
        for (std::size_t j = 0; j < cur.size(); ++j) change = std::max(change, std::fabs(cur[j] - prev[j]));
        if (change < ctl.change_tol) return K - 10;
        prev = cur;
    }
    return ctl.max_order;
}

double delta_star(const GrParams& gr, int l, int m) { return l * (gr.delta + 1.0) + m + gr.delta; }

ExpansionTable mixture_weights(const GollgrParams& p, int L, int M, const SeriesControl& ctl) {
    return assemble(p, L, M, ctl);
}

ExpansionTable build_expansion(const GollgrParams& p, const SeriesControl& ctl) {
    const int K = choose_cdf_order(p, ctl);
    const int L = std::max(0, std::min(K - 1, ctl.max_order - 2));
    const int M_cap = ctl.max_order;
    const auto full = assemble(p, L, M_cap, ctl);

    // Smallest M whose grid values agree with M + 10 to change_tol.
    const auto grid = reference_grid(p);
    auto eval = [&](int M) {
        std::vector<double> out;
        for (double x : grid) {
            double sum = 0.0;
            for (int l = 0; l <= L; ++l) {
                for (int m = 0; m <= M; ++m) {
                    if (full.sign_w[l][m] == 0) continue;
                    sum += full.sign_w[l][m] * std::exp(full.log_abs_w[l][m] + log_gr_pdf_at(x, p.gr.theta, delta_star(p.gr, l, m)));
                }
            }
            out.push_back(sum);
        }
        return out;
    };
    int M = M_cap;
    auto prev = eval(10);
    for (int cand = 20; cand <= M_cap; cand += 10) {
        const auto cur = eval(cand);
        double change = 0.0;
        for (std::size_t j = 0; j < cur.size(); ++j) {
            change = std::max(change, std::fabs(cur[j] - prev[j]) / std::max(std::fabs(cur[j]), 1e-300));
        }
        if (change < ctl.change_tol) {
            M = cand;
            break;
        }
        prev = cur;
    }
    return M == M_cap ? full : assemble(p, L, M, ctl);
}

SeriesResult mixture_pdf(double x, const ExpansionTable& tbl) {
    if (!(x > 0.0)) throw std::domain_error("mixture_pdf: x must be positive");
    const auto& p = tbl.params;
    SeriesResult out;
    double abs_sum = 0.0;
    double trunc = 0.0;
    for (int l = 0; l <= tbl.L_max; ++l) {
        for (int m = 0; m <= tbl.M_max; ++m) {
            if (tbl.sign_w[l][m] == 0) continue;
            const double term =
                tbl.sign_w[l][m] * std::exp(tbl.log_abs_w[l][m] + log_gr_pdf_at(x, p.gr.theta, delta_star(p.gr, l, m)));
            out.value += term;
            abs_sum += std::fabs(term);
            // The two highest computed orders stand in for the m-remainder.
            if (m + 2 > tbl.M_max && tbl.M_max > 0) trunc += std::fabs(term);
        }
    }
    // Next l would contribute (L+2) d_{L+2} g G^{L+1}.
    const int Ln = tbl.L_max + 1;
    if (Ln + 1 < static_cast<int>(tbl.d.size())) {
        const double G = gr_cdf(x, p.gr);
        trunc += std::fabs((Ln + 1.0) * tbl.d[Ln + 1] * gr_pdf(x, p.gr) * std::pow(G, Ln));
    }
    out.error_estimate = trunc + kEps * abs_sum * (tbl.M_max + 1.0);
    out.converged = tbl.converged && std::isfinite(out.value);
    return out;
}

SeriesResult moment(double s, const GollgrParams& p, const ExpansionTable& tbl) {
    if (!(s > 0.0)) throw std::domain_error("moment: s must be positive");
    check_table(p, tbl);
    SeriesResult out;
    for (int l = 0; l <= tbl.L_max; ++l) {
        std::vector<double> terms;
        for (int m = 0; m <= tbl.M_max; ++m) {
            if (tbl.sign_w[l][m] == 0) {
                terms.push_back(0.0);
                continue;
            }
            const double ds = delta_star(p.gr, l, m);
            const double lt = tbl.log_abs_w[l][m] + std::lgamma(0.5 * s + ds + 1.0) - std::lgamma(ds + 1.0) -
                              0.5 * s * std::log(p.gr.theta);
            terms.push_back(tbl.sign_w[l][m] * std::exp(lt));
        }
        const auto acc = accelerate(terms);
        out.value += acc.sum;
        out.error_estimate += acc.abserr;
    }
    out.error_estimate += next_l_bound(tbl, gr_moment(s, p.gr));
    out.converged = tbl.converged && std::isfinite(out.value) && std::isfinite(out.error_estimate);
    return out;
}

SeriesResult incomplete_moment(double s, double x, const GollgrParams& p, const ExpansionTable& tbl) {
    if (!(s > 0.0)) throw std::domain_error("incomplete_moment: s must be positive");
    if (!(x >= 0.0)) throw std::domain_error("incomplete_moment: x must be nonnegative");
    check_table(p, tbl);
    SeriesResult out;
    out.converged = tbl.converged;
    if (x == 0.0) return out;
    const double z = p.gr.theta * x * x;
    for (int l = 0; l <= tbl.L_max; ++l) {
        std::vector<double> terms;
        for (int m = 0; m <= tbl.M_max; ++m) {
            if (tbl.sign_w[l][m] == 0) {
                terms.push_back(0.0);
                continue;
            }
            const double ds = delta_star(p.gr, l, m);
            const auto logs = special::log_reg_gamma(ds + 0.5 * s + 1.0, z);
            const double lt = tbl.log_abs_w[l][m] + std::lgamma(0.5 * s + ds + 1.0) - std::lgamma(ds + 1.0) -
                              0.5 * s * std::log(p.gr.theta) + logs.log_lower;
            terms.push_back(tbl.sign_w[l][m] * std::exp(lt));
        }
        const auto acc = accelerate(terms);
        out.value += acc.sum;
        out.error_estimate += acc.abserr;
    }
    out.error_estimate += next_l_bound(tbl, gr_moment(s, p.gr));
    out.converged = out.converged && std::isfinite(out.value) && std::isfinite(out.error_estimate);
    return out;
}

double mgf_t_max(const GollgrParams& p) {
    p.validate();
    return 4.0 * std::sqrt(2.0 * p.gr.theta);
}

SeriesResult mgf(double t, const GollgrParams& p, const ExpansionTable& tbl) {
    check_table(p, tbl);
    if (t == 0.0) return {1.0, 0.0, true};
    SeriesResult out;
    const double y = -t / std::sqrt(2.0 * p.gr.theta);
    const double shift = t * t / (8.0 * p.gr.theta);
    for (int l = 0; l <= tbl.L_max; ++l) {
        std::vector<double> terms;
        for (int m = 0; m <= tbl.M_max; ++m) {
            if (tbl.sign_w[l][m] == 0) {
                terms.push_back(0.0);
                continue;
            }
            const double ds = delta_star(p.gr, l, m);
            const double nu = 2.0 * (ds + 1.0);
            const double lt = tbl.log_abs_w[l][m] - ds * std::numbers::ln2 + std::lgamma(nu) - std::lgamma(ds + 1.0) +
                              shift + special::log_parabolic_cylinder_D(-nu, y);
            terms.push_back(tbl.sign_w[l][m] * std::exp(lt));
        }
        const auto acc = accelerate(terms);
        out.value += acc.sum;
        out.error_estimate += acc.abserr;
    }
    const double parent_mgf =
        t < 0.0 ? 1.0
                : std::exp(-p.gr.delta * std::numbers::ln2 + std::lgamma(2.0 * p.gr.delta + 2.0) -
                           std::lgamma(p.gr.delta + 1.0) + shift +
                           special::log_parabolic_cylinder_D(-2.0 * (p.gr.delta + 1.0), y));
    out.error_estimate += next_l_bound(tbl, parent_mgf);
    out.converged = tbl.converged && std::fabs(t) <= mgf_t_max(p) && std::isfinite(out.value) &&
                    std::isfinite(out.error_estimate);
    return out;
}

}  // namespace gollgr::series
