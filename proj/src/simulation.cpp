#include "gollgr/simulation.hpp"

#include "gollgr/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

namespace gollgr {

namespace {

// Neumaier summation.
class Accumulator {
public:
    void add(double v) {
        const double t = sum_ + v;
        comp_ += std::fabs(sum_) >= std::fabs(v) ? (sum_ - t) + v : (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

std::vector<double> flatten(const GollgrParams& p) { return {p.alpha, p.beta, p.gr.delta, p.gr.theta}; }

// Runs job(r) for r in [0, count) on up to `threads` threads. Exceptions are
// rethrown after all workers stop.
template <typename Job>
void parallel_for(std::size_t count, unsigned threads, Job job) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t r = 0; r < count; ++r) job(r);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t r = next++; r < count; r = next++) {
                try {
                    job(r);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!error) error = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// One replicate's outcome: its estimate vector, or nothing if the fit did
// not converge.
using Outcome = std::optional<std::vector<double>>;

template <typename Fit>
StudyReport run_cells(const StudyConfig& cfg, std::vector<std::string> names, std::vector<double> truth, Fit fit) {
    const auto t0 = std::chrono::steady_clock::now();
    StudyReport rep;
    rep.kind = cfg.kind;
    rep.parameter_names = std::move(names);
    rep.truth = std::move(truth);
    rep.replicates = cfg.replicates;
    rep.seed = cfg.seed;
    const std::size_t np = rep.truth.size();
    rep.ae.assign(np, {});
    rep.bias.assign(np, {});
    rep.mse.assign(np, {});
    for (std::size_t n : cfg.sample_sizes) {
        std::vector<Outcome> out(cfg.replicates);
        const std::uint64_t cell_seed = split_seed(cfg.seed, n);
        parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) { out[r] = fit(n, split_seed(cell_seed, r)); });

        std::vector<std::vector<double>> kept;
        for (auto& o : out) {
            if (o) kept.push_back(std::move(*o));
        }
        rep.sample_sizes.push_back(n);
        rep.converged.push_back(kept.size());
        const double rate = static_cast<double>(kept.size()) / static_cast<double>(cfg.replicates);
        rep.convergence_rate.push_back(rate);
        for (std::size_t j = 0; j < np; ++j) {
            Accumulator s;
            Accumulator s2;
            for (const auto& e : kept) {
                const double d = e[j] - rep.truth[j];
                s.add(e[j]);
                s2.add(d * d);
            }
            const double m = kept.empty() ? std::nan("") : static_cast<double>(kept.size());
            rep.ae[j].push_back(s.value() / m);
            rep.bias[j].push_back(s.value() / m - rep.truth[j]);
            rep.mse[j].push_back(s2.value() / m);
        }
        rep.estimates.push_back(std::move(kept));
        if (rate < 0.5) {
            rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            throw StudyAborted("study aborted: convergence rate " + std::to_string(rate) + " at n = " +
                                   std::to_string(n),
                               rep);
        }
    }
    rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace

std::string_view to_string(StudyKind k) { return k == StudyKind::distribution ? "distribution" : "regression"; }

void StudyConfig::validate() const {
    if (replicates < 1) throw std::invalid_argument("StudyConfig: replicates must be at least 1");
    if (sample_sizes.empty()) throw std::invalid_argument("StudyConfig: no sample sizes");
    for (std::size_t n : sample_sizes) {
        if (n < 5) throw std::invalid_argument("StudyConfig: sample sizes must be at least 5");
    }
    if (kind == StudyKind::distribution) {
        if (!std::holds_alternative<GollgrParams>(truth)) throw std::invalid_argument("StudyConfig: distribution study needs GollgrParams truth");
        std::get<GollgrParams>(truth).validate();
    } else {
        if (!std::holds_alternative<RegressionCoefficients>(truth)) {
            throw std::invalid_argument("StudyConfig: regression study needs RegressionCoefficients truth");
        }
        const auto& c = std::get<RegressionCoefficients>(truth);
        c.validate();
        if (c.delta_coef.size() != 2) throw std::invalid_argument("StudyConfig: regression truth needs intercept and one slope per link");
        if (!(covariate_probability >= 0.0 && covariate_probability <= 1.0)) {
            throw std::invalid_argument("StudyConfig: covariate_probability must lie in [0, 1]");
        }
    }
    fit.validate();
}

SurvivalDataset simulate_regression_dataset(const RegressionCoefficients& truth, std::size_t n, std::uint64_t seed,
                                            double covariate_probability) {
    truth.validate();
    if (truth.delta_coef.size() != 2) throw std::invalid_argument("simulate_regression_dataset: need 2 coefficients per link");
    Rng rng(seed);
    std::vector<double> times(n);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = rng.bernoulli(covariate_probability) ? 1.0 : 0.0;
        const double row[2] = {1.0, v[i]};
        times[i] = draw_from_uniform(rng.uniform(), link_params(row, truth));
    }
    return SurvivalDataset::from_columns(std::move(times), std::vector<int>(n, 1), {v}, {"v1"});
}

std::vector<std::string> regression_parameter_names(const std::vector<std::string>& covariate_names) {
    std::vector<std::string> names{"alpha", "beta"};
    for (const auto& c : covariate_names) names.push_back("delta:" + c);
    for (const auto& c : covariate_names) names.push_back("theta:" + c);
    return names;
}

std::vector<double> flatten(const RegressionCoefficients& c) {
    std::vector<double> v{c.alpha, c.beta};
    v.insert(v.end(), c.delta_coef.begin(), c.delta_coef.end());
    v.insert(v.end(), c.theta_coef.begin(), c.theta_coef.end());
    return v;
}

StudyReport run_distribution_study(const StudyConfig& cfg) {
    cfg.validate();
    if (cfg.kind != StudyKind::distribution) throw std::invalid_argument("run_distribution_study: wrong study kind");
    const auto truth = std::get<GollgrParams>(cfg.truth);
    return run_cells(cfg, {"alpha", "beta", "delta", "theta"}, flatten(truth),
                     [&](std::size_t n, std::uint64_t s) -> Outcome {
                         const auto xs = sample(n, s, truth);
                         const auto f = fit_mle(xs, std::nullopt, cfg.submodel, cfg.fit);
                         if (!f.converged) return std::nullopt;
                         return flatten(f.estimates);
                     });
}

StudyReport run_regression_study(const StudyConfig& cfg) {
    cfg.validate();
    if (cfg.kind != StudyKind::regression) throw std::invalid_argument("run_regression_study: wrong study kind");
    const auto truth = std::get<RegressionCoefficients>(cfg.truth);
    return run_cells(cfg, regression_parameter_names({"intercept", "v1"}), flatten(truth),
                     [&](std::size_t n, std::uint64_t s) -> Outcome {
                         const auto ds = simulate_regression_dataset(truth, n, s, cfg.covariate_probability);
                         const auto f = fit_regression(ds, cfg.submodel, std::nullopt, cfg.fit);
                         if (!f.converged) return std::nullopt;
                         return flatten(f.coefficients);
                     });
}

StudyReport run_study(const StudyConfig& cfg) {
    return cfg.kind == StudyKind::distribution ? run_distribution_study(cfg) : run_regression_study(cfg);
}

std::string format_table(const StudyReport& report) {
    std::ostringstream os;
    char buf[64];
    os << "parameter      ";
    for (std::size_t n : report.sample_sizes) {
        std::snprintf(buf, sizeof buf, "| n=%-6zu AE       Bias     MSE     ", n);
        os << buf;
    }
    os << "\n";
    for (std::size_t j = 0; j < report.parameter_names.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%-15s", report.parameter_names[j].c_str());
        os << buf;
        for (std::size_t k = 0; k < report.sample_sizes.size(); ++k) {
            std::snprintf(buf, sizeof buf, "| %9.4f %8.4f %8.4f ", report.ae[j][k], report.bias[j][k],
                          report.mse[j][k]);
            os << buf;
        }
        os << "\n";
    }
    os << "converged      ";
    for (std::size_t k = 0; k < report.sample_sizes.size(); ++k) {
        std::snprintf(buf, sizeof buf, "| %zu/%zu (%.1f%%)", report.converged[k], report.replicates,
                      100.0 * report.convergence_rate[k]);
        os << buf;
        std::string pad(std::max<int>(0, 36 - static_cast<int>(std::string(buf).size())), ' ');
        os << pad;
    }
    os << "\n";
    return os.str();
}

}  // namespace gollgr
