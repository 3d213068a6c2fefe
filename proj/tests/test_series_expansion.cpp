// Series and mixture representations. The power series in G exists only for
// integer alpha*beta and beta; the tests pin both the valid cases and the
// divergence reporting outside them.

#include "gollgr/gollgr_model.hpp"
#include "gollgr/gr_model.hpp"
#include "gollgr/series_expansion.hpp"
#include "param_grid.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

using namespace gollgr;
using namespace gollgr::series;
using gollgr::testing::make;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double rel_err(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

double quad_moment(double s, const GollgrParams& p) {
    boost::math::quadrature::exp_sinh<double> es;
    return es.integrate(
        [&](double x) {
            if (x == 0.0 || !std::isfinite(x)) return 0.0;
            return std::exp(s * std::log(x) + log_pdf(x, p));
        },
        0.0, kInf, 1e-12);
}

double quad_mgf(double t, const GollgrParams& p) {
    boost::math::quadrature::exp_sinh<double> es;
    return es.integrate(
        [&](double x) {
            if (x == 0.0 || !std::isfinite(x)) return 0.0;
            return std::exp(t * x + log_pdf(x, p));
        },
        0.0, kInf, 1e-12);
}

// Shapes for which F is a power series in G with radius 1.
std::vector<GollgrParams> valid_shapes() {
    return {make(1.0, 1.0, 0.0, 1.0), make(1.0, 2.0, 0.0, 1.0), make(1.0, 3.0, 0.5, 2.0),
            make(1.0 / 3.0, 3.0, 0.5, 1.0), make(0.2, 5.0, 1.5, 15.0)};
}

}  // namespace

TEST(GeneralizedBinomial, Values) {
    for (int n = 0; n <= 30; ++n) {
        for (int j = 0; j <= n + 2; ++j) {
            const double ref = j <= n ? boost::math::binomial_coefficient<double>(n, j) : 0.0;
            EXPECT_LE(std::fabs(generalized_binomial(n, j) - ref), 1e-12 * std::max(1.0, ref)) << n << " " << j;
        }
    }
    EXPECT_NEAR(generalized_binomial(0.5, 3), 0.0625, 1e-15);
    EXPECT_NEAR(generalized_binomial(-1.0, 7), -1.0, 1e-14);
    EXPECT_NEAR(generalized_binomial(-2.5, 2), 4.375, 1e-14);
    // Product-form cross-check far out, where naive products drift.
    double prod = 1.0;
    for (int i = 1; i <= 60; ++i) prod *= (0.35 - i + 1.0) / i;
    EXPECT_LE(rel_err(generalized_binomial(0.35, 60), prod), 1e-11);
    EXPECT_EQ(generalized_binomial(2.0, -1), 0.0);
}

TEST(CoeffA, IntegerPowers) {
    for (int k = 0; k <= 5; ++k) {
        const auto a2 = coeff_a(k, 2.0);
        EXPECT_TRUE(a2.converged);
        EXPECT_EQ(a2.value, k == 2 ? 1.0 : 0.0);
        EXPECT_EQ(coeff_a(k, 1.0).value, k == 1 ? 1.0 : 0.0);
    }
    EXPECT_THROW(coeff_a(-1, 2.0), std::invalid_argument);
}

TEST(CoeffA, NonIntegerPowerHasNoPowerSeries) {
    // For non-integer r the sum is C(r,k) (1 - 1)^{r-k}: it tends to 0 for
    // k < r and diverges for k > r, so y^r has no power series at y = 0.
    const double r = 1.65;
    // k < r: partial sums decay to 0 only algebraically, like n^{-(r-k)}.
    for (int k = 0; k <= 1; ++k) {
        const auto a = coeff_a(k, r);
        EXPECT_GE(a.tail_bound, std::fabs(a.value)) << k;
        EXPECT_LT(std::fabs(a.value), 0.05) << k;
    }
    EXPECT_FALSE(coeff_a(1, r).converged);
    const auto small = coeff_a(1, r, SeriesControl{1e-12, 100, 200, 1e-8});
    EXPECT_GT(std::fabs(small.value), std::fabs(coeff_a(1, r).value));
    for (int k = 2; k <= 5; ++k) {
        const auto a = coeff_a(k, r);
        EXPECT_FALSE(a.converged) << k;
        EXPECT_EQ(a.tail_bound, kInf) << k;
    }
    // Hence sum_k a_k y^k cannot reproduce y^r.
    double partial = 0.0;
    for (int k = 0; k <= 1; ++k) partial += coeff_a(k, r).value * std::pow(0.5, k);
    EXPECT_GT(std::fabs(partial - std::pow(0.5, r)), 0.1);
}

TEST(CoeffC, Submodels) {
    // alpha = beta = 1: y + 1 - y = 1.
    EXPECT_NEAR(coeff_c(0, 1.0, 1.0).value, 1.0, 1e-15);
    for (int k = 1; k <= 6; ++k) EXPECT_NEAR(coeff_c(k, 1.0, 1.0).value, 0.0, 1e-15);
    // alpha = 1, beta = 2: y^2 + 1 - y^2 = 1.
    EXPECT_NEAR(coeff_c(0, 1.0, 2.0).value, 1.0, 1e-15);
    for (int k = 1; k <= 6; ++k) EXPECT_NEAR(coeff_c(k, 1.0, 2.0).value, 0.0, 1e-15);
    EXPECT_TRUE(coeff_c(3, 1.0, 2.0).converged);
}

TEST(CoeffC, MatchesDirectEvaluationInValidDomain) {
    // alpha = 1/3, beta = 3: y + (1 - y^3)^{1/3}.
    const double alpha = 1.0 / 3.0;
    std::vector<double> c;
    for (int k = 0; k <= 150; ++k) {
        const auto ck = coeff_c(k, alpha, 3.0);
        ASSERT_TRUE(ck.converged) << k;
        c.push_back(ck.value);
    }
    for (double y : {0.1, 0.4, 0.7}) {
        double sum = 0.0;
        for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k) sum = sum * y + c[k];
        EXPECT_NEAR(sum, y + std::cbrt(1.0 - y * y * y), 1e-12) << y;
    }
}

TEST(CoeffC, OutsideValidDomainIsFlagged) {
    const auto c = coeff_c(3, 0.35, 0.55);
    EXPECT_FALSE(c.converged);
    EXPECT_GT(c.tail_bound, 1e-6);
}

TEST(CoeffD, Submodels) {
    const auto d1 = coeff_d(6, 1.0, 1.0);
    ASSERT_TRUE(d1.converged);
    for (int k = 0; k <= 6; ++k) EXPECT_NEAR(d1.values[k], k == 1 ? 1.0 : 0.0, 1e-15);
    const auto d2 = coeff_d(6, 1.0, 2.0);
    for (int k = 0; k <= 6; ++k) EXPECT_NEAR(d2.values[k], k == 2 ? 1.0 : 0.0, 1e-15);
}

TEST(CoeffD, RatioIdentity) {
    const double alpha = 0.2;
    const double beta = 5.0;
    const auto d = coeff_d(60, alpha, beta);
    for (int k = 0; k <= 60; ++k) {
        double conv = 0.0;
        for (int r = 0; r <= k; ++r) conv += coeff_c(r, alpha, beta).value * d.values[k - r];
        EXPECT_NEAR(conv, coeff_a(k, alpha * beta).value, 1e-12) << k;
    }
}

TEST(CoeffE, LowOrders) {
    const GrParams gr{0.5, 1.0};
    const auto e = coeff_e(2, 6, gr);
    EXPECT_EQ(e[0][0], 1.0);
    for (int m = 1; m <= 6; ++m) EXPECT_EQ(e[0][m], 0.0);
    double fact = 1.0;
    for (int m = 0; m <= 6; ++m) {
        if (m > 0) fact *= m;
        const double q = (m % 2 == 0 ? 1.0 : -1.0) / ((gr.delta + 1.0 + m) * fact);
        EXPECT_NEAR(e[1][m], q, 1e-15);
    }
    // Squaring by direct convolution, frozen at 20 digits.
    const double sq[] = {0.44444444444444444444, -0.53333333333333333333, 0.35047619047619047619,
                         -0.16366843033509700176, 0.060138802995945853089, -0.018352018352018352018,
                         0.004808798882872956947};
    for (int m = 0; m <= 6; ++m) {
        double conv = 0.0;
        for (int i = 0; i <= m; ++i) conv += e[1][i] * e[1][m - i];
        EXPECT_NEAR(conv, sq[m], 1e-15);
        EXPECT_NEAR(e[2][m], sq[m], 1e-14);
    }
}

TEST(CoeffE, ThetaScaling) {
    const auto e1 = coeff_e(3, 8, GrParams{1.5, 1.0});
    const auto e2 = coeff_e(3, 8, GrParams{1.5, 2.5});
    for (int l = 0; l <= 3; ++l) {
        for (int m = 0; m <= 8; ++m) {
            EXPECT_NEAR(e2[l][m], e1[l][m] * std::pow(2.5, m), 1e-12 * std::max(1.0, std::fabs(e2[l][m])));
        }
    }
}

TEST(CdfSeries, MatchesDirectCdfOnGridInValidDomain) {
    for (const auto& p : valid_shapes()) {
        const int K = choose_cdf_order(p);
        const auto d = coeff_d(K, p.alpha, p.beta);
        ASSERT_TRUE(d.converged);
        for (double x : reference_grid(p)) {
            ASSERT_LE(gr_cdf(x, p.gr), 0.9 + 1e-12);
            EXPECT_NEAR(cdf_series(x, p, d.values), cdf(x, p), 1e-6) << p.alpha << " " << p.beta << " x=" << x;
        }
    }
}

TEST(CdfSeries, PartialSumsOfDApproachOne) {
    for (const auto& p : {make(1.0, 1.0, 0.0, 1.0), make(1.0, 2.0, 0.0, 1.0), make(1.0, 3.0, 0.5, 2.0)}) {
        const auto d = coeff_d(40, p.alpha, p.beta).values;
        double sum = 0.0;
        for (double dk : d) sum += dk;
        EXPECT_NEAR(sum, 1.0, 1e-14);
    }
}

TEST(Mixture, ParentLawHasSingleWeight) {
    const auto p = make(1.0, 1.0, 0.7, 2.0);
    const auto tbl = mixture_weights(p, 3, 5);
    EXPECT_TRUE(tbl.converged);
    for (int l = 0; l <= 3; ++l) {
        for (int m = 0; m <= 5; ++m) EXPECT_NEAR(tbl.w[l][m], l == 0 && m == 0 ? 1.0 : 0.0, 1e-15);
    }
    for (double x : {0.2, 0.6, 1.4}) EXPECT_LE(rel_err(mixture_pdf(x, tbl).value, gr_pdf(x, p.gr)), 1e-14);
}

TEST(Mixture, ExponentiatedRayleigh) {
    // F = G^2: the weights are w_{1,m} = 2 (-1)^m and f = 2 G g.
    const auto p = make(1.0, 2.0, 0.0, 1.0);
    const auto tbl = build_expansion(p);
    ASSERT_TRUE(tbl.converged);
    for (int m = 0; m <= tbl.M_max; ++m) EXPECT_NEAR(tbl.w[1][m], m % 2 == 0 ? 2.0 : -2.0, 1e-12);
    for (double x : {0.1, 0.5, 1.0, 1.5}) {
        const double ref = 2.0 * gr_cdf(x, p.gr) * gr_pdf(x, p.gr);
        EXPECT_LE(rel_err(mixture_pdf(x, tbl).value, ref), 1e-10) << x;
    }
}

TEST(Mixture, MatchesPdfWithinReportedBound) {
    for (const auto& p : valid_shapes()) {
        const auto tbl = build_expansion(p);
        EXPECT_GE(tbl.tail_bound, 0.0);
        for (double x : reference_grid(p)) {
            const auto r = mixture_pdf(x, tbl);
            EXPECT_LE(std::fabs(r.value - pdf(x, p)), tbl.tail_bound * std::fabs(r.value) + 1e-300)
                << p.alpha << " " << p.beta << " x=" << x;
        }
    }
}

TEST(Mixture, WeightsFiniteForIntegerShapes) {
    for (const auto& p : {make(1.0, 2.0, 0.0, 1.0), make(1.0, 3.0, 0.5, 2.0)}) {
        const auto tbl = build_expansion(p);
        for (const auto& row : tbl.w) {
            for (double w : row) EXPECT_TRUE(std::isfinite(w));
        }
    }
}

TEST(Mixture, DivergentShapesAreReported) {
    const auto tbl = build_expansion(gollgr::testing::table1_truth());
    EXPECT_FALSE(tbl.converged);
    EXPECT_FALSE(moment(1.0, tbl.params, tbl).converged);
}

TEST(Moment, ReducesToParentMoment) {
    const auto p = make(1.0, 1.0, 0.0, 1.0);
    const auto tbl = build_expansion(p);
    EXPECT_NEAR(moment(2.0, p, tbl).value, 1.0, 1e-14);
}

TEST(Moment, MatchesQuadrature) {
    for (const auto& p : {make(1.0, 2.0, 0.0, 1.0), make(1.0, 3.0, 0.5, 2.0), make(1.0, 2.0, 1.5, 15.0)}) {
        const auto tbl = build_expansion(p);
        for (double s : {1.0, 2.0}) {
            const auto m = moment(s, p, tbl);
            EXPECT_TRUE(m.converged);
            const double q = quad_moment(s, p);
            EXPECT_LE(std::fabs(m.value - q), std::max(1e-6, m.error_estimate)) << p.beta << " s=" << s;
            EXPECT_LE(rel_err(m.value, q), 1e-5) << p.beta << " s=" << s;
        }
    }
    // E[X^2] of the G^2 law with unit Rayleigh parent.
    const auto p = make(1.0, 2.0, 0.0, 1.0);
    EXPECT_NEAR(moment(2.0, p, build_expansion(p)).value, 1.5, 1e-10);
}

TEST(Moment, RejectsForeignTable) {
    const auto tbl = build_expansion(make(1.0, 2.0, 0.0, 1.0));
    EXPECT_THROW(moment(1.0, make(1.0, 2.0, 0.0, 2.0), tbl), std::invalid_argument);
}

TEST(IncompleteMoment, LimitsAndMonotonicity) {
    const auto p = make(1.0, 2.0, 0.0, 1.0);
    const auto tbl = build_expansion(p);
    EXPECT_EQ(incomplete_moment(1.0, 0.0, p, tbl).value, 0.0);
    EXPECT_NEAR(incomplete_moment(1.0, 1e-4, p, tbl).value, 0.0, 1e-12);
    const double full = moment(1.0, p, tbl).value;
    EXPECT_NEAR(incomplete_moment(1.0, quantile(1.0 - 1e-10, p), p, tbl).value, full, 1e-5);
    double prev = 0.0;
    for (double u = 0.05; u < 1.0; u += 0.1) {
        const double v = incomplete_moment(1.0, quantile(u, p), p, tbl).value;
        EXPECT_GE(v, prev);
        EXPECT_LE(v, full + 1e-9);
        prev = v;
    }
}

TEST(IncompleteMoment, ValueAtMedian) {
    const auto p = make(1.0, 2.0, 0.0, 1.0);
    const auto tbl = build_expansion(p);
    const double med = quantile(0.5, p);
    EXPECT_NEAR(med, 1.10812778022190008, 1e-13);
    boost::math::quadrature::tanh_sinh<double> ts;
    const double oracle = ts.integrate([&](double x) { return x * pdf(x, p); }, 0.0, med, 1e-14);
    EXPECT_LE(rel_err(oracle, 0.400921537565496874), 1e-12);
    EXPECT_LE(rel_err(incomplete_moment(1.0, med, p, tbl).value, oracle), 1e-10);
}

TEST(Mgf, ZeroIsExactlyOne) {
    const auto p = make(1.0, 3.0, 0.5, 2.0);
    const auto tbl = build_expansion(p);
    EXPECT_EQ(mgf(0.0, p, tbl).value, 1.0);
}

TEST(Mgf, DerivativeAtZeroIsTheMean) {
    for (const auto& p : {make(1.0, 2.0, 0.0, 1.0), make(1.0, 3.0, 0.5, 2.0)}) {
        const auto tbl = build_expansion(p);
        const double h = 1e-3;
        const double deriv = (mgf(h, p, tbl).value - mgf(-h, p, tbl).value) / (2.0 * h);
        EXPECT_NEAR(deriv, moment(1.0, p, tbl).value, 1e-4);
    }
}

TEST(Mgf, MatchesQuadrature) {
    const auto p = make(1.0, 1.0, 0.0, 1.0);
    const auto tbl = build_expansion(p);
    const double q = quad_mgf(0.5, p);
    EXPECT_LE(rel_err(q, 1.60203272522387801), 1e-12);
    EXPECT_LE(rel_err(mgf(0.5, p, tbl).value, q), 1e-5);
    const auto egr = make(1.0, 2.0, 0.0, 1.0);
    const auto tbl2 = build_expansion(egr);
    for (double t : {-1.0, 0.5, 2.0}) {
        const auto m = mgf(t, egr, tbl2);
        EXPECT_TRUE(m.converged);
        EXPECT_LE(rel_err(m.value, quad_mgf(t, egr)), 1e-5) << t;
    }
}

TEST(Mgf, OutsideValidatedRangeIsFlagged) {
    const auto p = make(1.0, 1.0, 0.0, 1.0);
    const auto tbl = build_expansion(p);
    EXPECT_FALSE(mgf(1.5 * mgf_t_max(p), p, tbl).converged);
}

TEST(SeriesControl, Validation) {
    EXPECT_THROW((SeriesControl{0.0, 10, 10, 1e-8}.validate()), std::invalid_argument);
    EXPECT_THROW((SeriesControl{1e-12, 10, 201, 1e-8}.validate()), std::invalid_argument);
    EXPECT_NO_THROW(SeriesControl{}.validate());
}
