// Tests for the GOLLGR distribution. Oracles: a plain-arithmetic cdf built
// on boost::math::gamma_p, quadrature of that oracle's density, bisection,
// and closed forms of the submodels.

#include "gollgr/errors.hpp"
#include "gollgr/gollgr_model.hpp"
#include "gollgr/gr_model.hpp"
#include "param_grid.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

using namespace gollgr;
using gollgr::testing::make;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double rel_err(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

struct OracleLogs {
    double log_g;
    double log_G;
    double log_1m_Gb;
};

// Parent terms from boost's incomplete gamma, taking 1 - G from the upper
// ratio so the right tail keeps its precision.
OracleLogs oracle_logs(double x, const GollgrParams& p) {
    const double d = p.gr.delta;
    const double th = p.gr.theta;
    const double z = th * x * x;
    const double P = boost::math::gamma_p(d + 1.0, z);
    const double Q = boost::math::gamma_q(d + 1.0, z);
    OracleLogs o{};
    o.log_g = std::log(2.0) + (d + 1.0) * std::log(th) - std::lgamma(d + 1.0) + (2.0 * d + 1.0) * std::log(x) - z;
    o.log_G = P < 0.5 ? std::log(P) : std::log1p(-Q);
    o.log_1m_Gb = std::log(-std::expm1(p.beta * o.log_G));
    return o;
}

double oracle_cdf(double x, const GollgrParams& p) {
    const auto o = oracle_logs(x, p);
    const double num = std::exp(p.alpha * p.beta * o.log_G);
    return num / (num + std::exp(p.alpha * o.log_1m_Gb));
}

double oracle_pdf(double x, const GollgrParams& p) {
    if (x <= 1e-150 || !std::isfinite(x)) return 0.0;
    const auto o = oracle_logs(x, p);
    const double a = p.alpha;
    const double ab = p.alpha * p.beta;
    if (!std::isfinite(o.log_1m_Gb)) return 0.0;
    const double den = std::exp(ab * o.log_G) + std::exp(a * o.log_1m_Gb);
    return std::exp(std::log(ab) + o.log_g + (ab - 1.0) * o.log_G + (a - 1.0) * o.log_1m_Gb) / (den * den);
}

double bisect(auto f, double lo, double hi) {
    for (int i = 0; i < 300; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Five-point central difference of the cdf.
double fd_pdf(double x, const GollgrParams& p) {
    const double h = 1e-3 * x;
    return (-cdf(x + 2 * h, p) + 8 * cdf(x + h, p) - 8 * cdf(x - h, p) + cdf(x - 2 * h, p)) / (12.0 * h);
}

// Integral of pdf over (0, inf) in t = log x.
double total_mass(const GollgrParams& p) {
    const double t_mid = std::log(quantile(0.5, p));
    auto integrand = [&](double s, double sign) {
        const double t = t_mid + sign * s;
        const double x = std::exp(t);
        if (x == 0.0 || !std::isfinite(x)) return 0.0;
        return std::exp(log_pdf(x, p) + t);
    };
    boost::math::quadrature::exp_sinh<double> es;
    const double right = es.integrate([&](double s) { return integrand(s, 1.0); }, 0.0, kInf, 1e-12);
    const double left = es.integrate([&](double s) { return integrand(s, -1.0); }, 0.0, kInf, 1e-12);
    return left + right;
}

}  // namespace

TEST(GollgrParams, Validation) {
    EXPECT_NO_THROW(make(0.35, 0.55, -0.55, 0.11).validate());
    EXPECT_THROW(make(0.0, 1.0, 0.0, 1.0).validate(), std::invalid_argument);
    EXPECT_THROW(make(1.0, -1.0, 0.0, 1.0).validate(), std::invalid_argument);
    EXPECT_THROW(make(1.0, 1.0, -1.0, 1.0).validate(), std::invalid_argument);
    EXPECT_THROW(make(1.0, 1.0, 0.0, 0.0).validate(), std::invalid_argument);
    EXPECT_THROW(make(kInf, 1.0, 0.0, 1.0).validate(), std::invalid_argument);
}

TEST(Cdf, ReferenceValue) {
    const auto p = gollgr::testing::table1_truth();
    // Integrate in s = -log x; the density has an integrable pole at 0.
    boost::math::quadrature::exp_sinh<double> es;
    const double oracle =
        es.integrate([&](double s) { return oracle_pdf(std::exp(-s), p) * std::exp(-s); }, 0.0, kInf, 1e-13);
    EXPECT_LE(rel_err(oracle, 0.538234963670047653), 1e-9);
    EXPECT_LE(rel_err(cdf(1.0, p), 0.538234963670047653), 1e-13);
    EXPECT_LE(rel_err(cdf(1.0, p), oracle_cdf(1.0, p)), 1e-13);
}

TEST(Cdf, BoundaryValues) {
    const auto p = make(0.3, 2.0, 1.5, 15.0);
    EXPECT_EQ(cdf(0.0, p), 0.0);
    EXPECT_EQ(survival(0.0, p), 1.0);
    EXPECT_EQ(cdf(kInf, p), 1.0);
    EXPECT_NEAR(cdf(50.0, p), 1.0, 1e-15);
    EXPECT_THROW(cdf(-1.0, p), std::domain_error);
}

TEST(Cdf, MonotoneAndComplementary) {
    for (const auto& [label, p] : gollgr::testing::distribution_grid()) {
        double prev = 0.0;
        for (double u = 0.01; u < 0.995; u += 0.01) {
            const double x = quantile(u, p);
            const double F = cdf(x, p);
            EXPECT_GE(F, prev) << label;
            EXPECT_NEAR(F + survival(x, p), 1.0, 1e-12) << label;
            prev = F;
        }
    }
}

TEST(Cdf, SubmodelIdentities) {
    for (double delta : {-0.55, 0.0, 1.5}) {
        for (double theta : {0.11, 1.0, 15.0}) {
            const GrParams gr{delta, theta};
            for (double z : {0.02, 0.3, 0.7, 0.98}) {
                const double x = gr_quantile(z, gr);
                const double G = gr_cdf(x, gr);
                EXPECT_NEAR(cdf(x, GollgrParams{1.0, 1.0, gr}), G, 1e-12);
                EXPECT_NEAR(pdf(x, GollgrParams{1.0, 1.0, gr}), gr_pdf(x, gr), 1e-12 * gr_pdf(x, gr));
                for (double beta : {0.4, 2.0, 5.0}) {
                    EXPECT_NEAR(cdf(x, GollgrParams{1.0, beta, gr}), std::pow(G, beta), 1e-12);
                }
                for (double alpha : {0.3, 2.0}) {
                    // beta = 1: the odd log-logistic form G^a / (G^a + (1-G)^a).
                    const double ga = std::pow(G, alpha);
                    const double ref = ga / (ga + std::pow(1.0 - G, alpha));
                    EXPECT_NEAR(cdf(x, GollgrParams{alpha, 1.0, gr}), ref, 1e-12);
                }
            }
        }
    }
}

TEST(Cdf, ScalingLaw) {
    for (const auto& [label, p] : gollgr::testing::distribution_grid()) {
        for (double k : {0.1, 0.7, 3.0, 40.0}) {
            GollgrParams scaled = p;
            scaled.gr.theta = p.gr.theta / (k * k);
            for (double u : {0.05, 0.5, 0.95}) {
                const double x = quantile(u, p);
                EXPECT_NEAR(cdf(x, p), cdf(k * x, scaled), 1e-12) << label << " k=" << k;
            }
        }
    }
}

TEST(Pdf, FiniteLimitAtZero) {
    const auto p = make(2.0, 0.5, -0.5, std::numbers::pi / 4.0);
    EXPECT_NEAR(limit_at_zero(p), 1.0, 1e-15);
    EXPECT_NEAR(pdf(0.0, p), 1.0, 1e-15);
    EXPECT_NEAR(pdf(1e-14, p), 1.0, 1e-6);
}

TEST(Pdf, LimitCases) {
    // Exponent 2 (delta + 1) alpha beta - 1 decides the limit.
    EXPECT_EQ(limit_at_zero(make(2.0, 1.0, 0.5, 1.0)), 0.0);
    EXPECT_EQ(limit_at_zero(make(0.3, 0.5, -0.7, 1.0)), kInf);
    EXPECT_EQ(limit_at_zero(make(1.0, 1.0, 0.0, 1.0)), 0.0);
    EXPECT_EQ(limit_at_zero(make(0.35, 0.55, -0.55, 0.11)), kInf);
    // alpha beta > 1 yet 2 (delta + 1) alpha beta < 1.
    EXPECT_EQ(limit_at_zero(make(1.2, 1.0, -0.9, 1.0)), kInf);
    // Boundary exponent with alpha beta != 1: 2 alpha beta sqrt(theta) / Gamma(delta+1) * Gamma(delta+2)^(1 - alpha beta).
    const auto q = make(0.5, 0.5, 1.0, 2.0);
    const double ref = 0.5 * std::sqrt(2.0) / 1.0 * std::pow(2.0, 0.75);
    EXPECT_LE(rel_err(limit_at_zero(q), ref), 1e-13);
    EXPECT_LE(rel_err(pdf(1e-9, q), ref), 1e-6);
}

TEST(Pdf, ReferenceValueAndFiniteDifference) {
    const auto p = make(0.3, 2.0, 1.5, 15.0);
    const double x = 0.5;
    const double h = 1e-4;
    const double fd = (oracle_cdf(x + h, p) - oracle_cdf(x - h, p)) / (2.0 * h);
    EXPECT_LE(rel_err(fd, 1.04166351086717974), 1e-6);
    EXPECT_LE(rel_err(pdf(x, p), 1.04166351086717974), 1e-12);
    EXPECT_LE(rel_err(pdf(x, p), oracle_pdf(x, p)), 1e-12);
}

TEST(Pdf, MatchesFiniteDifferenceAcrossGrid) {
    for (const auto& [label, p] : gollgr::testing::distribution_grid()) {
        for (double u = 0.05; u < 0.96; u += 0.05) {
            const double x = quantile(u, p);
            EXPECT_LE(rel_err(pdf(x, p), fd_pdf(x, p)), 1e-6) << label << " u=" << u;
        }
    }
}

TEST(Pdf, Normalization) {
    for (const auto& [label, p] : gollgr::testing::distribution_grid()) {
        EXPECT_NEAR(total_mass(p), 1.0, 1e-6) << label;
    }
}

TEST(Hrf, RayleighHazard) {
    EXPECT_NEAR(hrf(1.0, make(1.0, 1.0, 0.0, 1.0)), 2.0, 1e-14);
    EXPECT_NEAR(hrf(0.3, make(1.0, 1.0, 0.0, 2.5)), 2.0 * 2.5 * 0.3, 1e-14);
}

TEST(Hrf, ReferenceValue) {
    const auto p = make(0.1, 2.5, 1.0, 1.0);
    boost::math::quadrature::exp_sinh<double> es;
    const double tail = es.integrate([&](double x) { return oracle_pdf(x, p); }, 2.0, kInf, 1e-12);
    const double oracle = oracle_pdf(2.0, p) / tail;
    EXPECT_LE(rel_err(oracle, 0.201204616160144888), 1e-8);
    EXPECT_LE(rel_err(hrf(2.0, p), 0.201204616160144888), 1e-12);
}

TEST(Hrf, RatioSmallXAndGrowth) {
    for (const auto& [label, p] : gollgr::testing::distribution_grid()) {
        for (double u : {0.1, 0.5, 0.9}) {
            const double x = quantile(u, p);
            EXPECT_LE(rel_err(hrf(x, p), pdf(x, p) / survival(x, p)), 1e-9) << label;
        }
        const double x0 = quantile(1e-6, p);
        EXPECT_LE(rel_err(hrf(x0, p), pdf(x0, p)), 1e-5) << label;
        // Eventual growth.
        const double x1 = quantile(0.999, p);
        EXPECT_LT(hrf(x1, p), hrf(2.0 * x1, p)) << label;
        EXPECT_LT(hrf(2.0 * x1, p), hrf(4.0 * x1, p)) << label;
    }
    EXPECT_NEAR(hrf(1e3, make(1.0, 1.0, 0.0, 1.0)), 2e3, 2e3 * 1e-9);
    EXPECT_EQ(hrf(1e200, make(1.0, 1.0, 0.0, 1.0)), kInf);
}

TEST(Quantile, TrivialCases) {
    EXPECT_NEAR(quantile(0.5, make(1.0, 1.0, 0.0, 1.0)), std::sqrt(std::log(2.0)), 1e-15);
    for (double alpha : {0.1, 0.35, 4.0}) {
        EXPECT_NEAR(quantile(0.5, make(alpha, 1.0, 1.5, 15.0)), gr_quantile(0.5, GrParams{1.5, 15.0}), 1e-15);
    }
    EXPECT_THROW(quantile(0.0, make(1.0, 1.0, 0.0, 1.0)), std::domain_error);
    EXPECT_THROW(quantile(1.0, make(1.0, 1.0, 0.0, 1.0)), std::domain_error);
}

TEST(Quantile, ReferenceValue) {
    const auto p = gollgr::testing::table1_truth();
    const double oracle = bisect([&](double x) { return oracle_cdf(x, p) - 0.9; }, 1.0, 30.0);
    EXPECT_LE(rel_err(oracle, 6.12029528478894415), 1e-10);
    EXPECT_LE(rel_err(quantile(0.9, p), 6.12029528478894415), 1e-12);
}

TEST(Quantile, RoundtripGrid) {
    for (const auto& [label, p] : gollgr::testing::distribution_grid()) {
        for (int i = 1; i <= 99; ++i) {
            const double u = i / 100.0;
            EXPECT_NEAR(cdf(quantile(u, p), p), u, 1e-9) << label << " u=" << u;
        }
    }
}

TEST(Sample, DeterministicPath) {
    const auto p = make(0.35, 2.0, 1.5, 15.0);
    const double z = std::pow(0.5, 1.0 / p.beta);
    EXPECT_NEAR(draw_from_uniform(0.5, p), gr_quantile(z, p.gr), 1e-15);
    EXPECT_EQ(sample(50, 99, p), sample(50, 99, p));
    EXPECT_NE(sample(50, 99, p), sample(50, 100, p));
    EXPECT_THROW(sample(0, 1, p), std::invalid_argument);
}

TEST(Sample, KolmogorovSmirnov) {
    const std::size_t n = 100000;
    const double crit = 1.627 / std::sqrt(static_cast<double>(n));
    std::uint64_t seed = 20240601;
    for (const auto& [label, p] : gollgr::testing::sampler_sets()) {
        auto xs = sample(n, seed++, p);
        std::sort(xs.begin(), xs.end());
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double F = cdf(xs[i], p);
            d = std::max({d, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
        }
        EXPECT_LT(d, crit) << label;
    }
}

TEST(OddsTransform, Values) {
    const auto p = make(1.0, 2.0, 0.0, 1.0);
    const double G = -std::expm1(-1.0);
    EXPECT_LE(rel_err(odds_transform(1.0, p), 0.665490832619663637), 1e-14);
    EXPECT_LE(rel_err(odds_transform(1.0, p), G * G / (1.0 - G * G)), 1e-14);
    const auto q = make(0.7, 1.0, 1.5, 15.0);
    EXPECT_NEAR(odds_transform(gr_quantile(0.5, q.gr), q), 1.0, 1e-14);
    EXPECT_EQ(odds_transform(100.0, q), kInf);
}

TEST(OddsTransform, ScalingAndConsistency) {
    for (const auto& [label, p] : gollgr::testing::distribution_grid()) {
        for (double k : {0.5, 2.0, 7.0}) {
            GollgrParams scaled = p;
            scaled.gr.theta = p.gr.theta / (k * k);
            const double x = quantile(0.4, p);
            EXPECT_LE(rel_err(odds_transform(x / k, p), odds_transform(x, scaled)), 1e-12) << label;
        }
        double prev = 0.0;
        for (double u : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const double x = quantile(u, p);
            const double T = odds_transform(x, p);
            EXPECT_GE(T, prev);
            const double Ta = std::pow(T, p.alpha);
            EXPECT_NEAR(cdf(x, p), Ta / (1.0 + Ta), 1e-10) << label;
            prev = T;
        }
    }
}

TEST(CriticalPoints, RayleighMode) {
    const auto cp = critical_points(make(1.0, 1.0, 0.0, 1.0));
    ASSERT_EQ(cp.points.size(), 1u);
    EXPECT_NEAR(cp.points[0], 1.0 / std::sqrt(2.0), 1e-8);
    EXPECT_TRUE(cp.sign_change_found);
}

TEST(CriticalPoints, GrModeClosedForm) {
    for (double delta : {0.5, 1.0, 3.0, 12.0}) {
        for (double theta : {0.2, 1.0, 15.0}) {
            const auto cp = critical_points(make(1.0, 1.0, delta, theta));
            ASSERT_EQ(cp.points.size(), 1u);
            const double mode = std::sqrt((2.0 * delta + 1.0) / (2.0 * theta));
            EXPECT_LE(rel_err(cp.points[0], mode), 1e-8);
        }
    }
}

TEST(CriticalPoints, ScoreMatchesFiniteDifference) {
    for (const auto& [label, p] : gollgr::testing::distribution_grid()) {
        for (double u : {0.1, 0.4, 0.8}) {
            const double x = quantile(u, p);
            const double h = 1e-4 * x;
            const double fd = (log_pdf(x + h, p) - log_pdf(x - h, p)) / (2.0 * h);
            EXPECT_NEAR(log_pdf_derivative(x, p), fd, 1e-5 * (std::fabs(fd) + 1.0 / x)) << label;
        }
    }
}

TEST(CriticalPoints, BimodalFamilyMember) {
    const auto p = gollgr::testing::bimodal_params();
    const auto cp = critical_points(p);
    ASSERT_EQ(cp.points.size(), 3u);
    EXPECT_TRUE(std::is_sorted(cp.points.begin(), cp.points.end()));

    // Dense grid scan of the density: two local maxima and one interior minimum.
    const double lo = quantile(1e-6, p);
    const double hi = quantile(1.0 - 1e-6, p);
    int maxima = 0;
    int minima = 0;
    const int n = 200000;
    double f0 = pdf(lo, p);
    double f1 = pdf(lo + (hi - lo) / n, p);
    for (int i = 2; i <= n; ++i) {
        const double f2 = pdf(lo + (hi - lo) * i / n, p);
        if (f1 > f0 && f1 > f2) ++maxima;
        if (f1 < f0 && f1 < f2) ++minima;
        f0 = f1;
        f1 = f2;
    }
    EXPECT_EQ(maxima, 2);
    EXPECT_EQ(minima, 1);
    for (double x : cp.points) EXPECT_LT(critical_point_residual(x, p), 1e-6);
}

TEST(CriticalPoints, SearchBoundPrecondition) {
    const auto p = make(1.0, 1.0, 0.0, 1.0);
    EXPECT_THROW(critical_points(p, 0.5), std::invalid_argument);
    EXPECT_THROW(critical_points(p, -1.0), std::invalid_argument);
    const auto cp = critical_points(p, 10.0);
    EXPECT_EQ(cp.search_bound, 10.0);
}

TEST(CriticalPoints, MonotoneDensityHasNoSignChange) {
    const auto cp = critical_points(make(0.35, 0.55, -0.55, 0.11));
    EXPECT_TRUE(cp.points.empty());
    EXPECT_FALSE(cp.sign_change_found);
}

TEST(ClassifyShape, KnownShapes) {
    EXPECT_EQ(classify_shape(make(1.0, 1.0, 1.0, 1.0)).kind, ShapeKind::unimodal);
    EXPECT_EQ(classify_shape(make(1.0, 1.0, 0.5, 3.0)).kind, ShapeKind::unimodal);
    EXPECT_EQ(classify_shape(make(2.0, 1.5, 0.5, 1.0)).kind, ShapeKind::unimodal);
    EXPECT_EQ(classify_shape(make(0.35, 0.55, -0.55, 0.11)).kind, ShapeKind::decreasing);
    const auto bi = classify_shape(gollgr::testing::bimodal_params());
    EXPECT_EQ(bi.kind, ShapeKind::bimodal);
    EXPECT_EQ(bi.critical_points.size(), 3u);
    EXPECT_EQ(to_string(ShapeKind::bimodal), "bimodal");
}

TEST(TailBehaviour, SubExponential) {
    // e^{-x} / (1 - F(x)) strictly increasing on x = 5..15.
    for (const auto& p : {make(2.0, 1.3, 0.5, 1.0), make(1.0, 1.0, 0.0, 1.0), make(0.7, 0.8, 0.5, 1.0),
                          make(0.4, 0.5, 2.0, 1.0)}) {
        double prev = -kInf;
        for (int x = 5; x <= 15; ++x) {
            const double log_ratio = -x - log_survival(x, p);
            EXPECT_GT(log_ratio, prev) << "alpha=" << p.alpha << " x=" << x;
            prev = log_ratio;
        }
    }
}
