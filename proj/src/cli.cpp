#include "gollgr/cli.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace gollgr::cli {

namespace {

std::string upper(std::string_view s) {
    std::string u(s);
    std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return u;
}

bool plain_sample(const SurvivalDataset& ds) { return ds.n_cols == 1 && ds.failures() == ds.size(); }

ModelSummary summarize(Submodel m, int k, double ll, bool converged, std::size_t n, const std::string& message) {
    const auto ic = information_criteria(ll, k, n);
    return {m, k, ll, ic.aic, ic.caic, ic.bic, converged, message};
}

void require_file(const std::string& path) {
    if (!std::filesystem::is_regular_file(path)) throw CliError(io_error, "input file '" + path + "' does not exist");
}

Json read_json_file(const std::string& path) {
    require_file(path);
    std::ifstream in(path);
    if (!in) throw CliError(io_error, "cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw CliError(parse_error, "'" + path + "': " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CliError(io_error, "cannot write '" + path + "'");
    out << text;
    out.flush();
    if (!out) throw CliError(io_error, "cannot write '" + path + "'");
}

void write_report(const std::string& path, const Json& j) {
    if (!path.empty()) write_text(path, j.dump(2) + "\n");
}

std::string fixed(double v, int width = 12, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%*.*f", width, prec, v);
    return buf;
}

std::string fit_table(const FitResult& f) {
    std::ostringstream os;
    const char* names[4] = {"alpha", "beta", "delta", "theta"};
    const double est[4] = {f.estimates.alpha, f.estimates.beta, f.estimates.gr.delta, f.estimates.gr.theta};
    os << upper(to_string(f.submodel)) << " fit, n = " << f.n_obs << "\n";
    os << "parameter           MLE           SE\n";
    for (int j = 0; j < 4; ++j) {
        os << std::string(names[j]) + std::string(10 - std::string(names[j]).size(), ' ') << fixed(est[j], 12, 6)
           << (f.std_errors ? fixed((*f.std_errors)[j], 13, 6) : std::string("           --")) << "\n";
    }
    os << "loglik " << fixed(f.loglik) << "  AIC " << fixed(f.aic) << "  CAIC " << fixed(f.caic) << "  BIC "
       << fixed(f.bic) << "\n";
    os << "status: " << f.diagnostics.message << "\n";
    return os.str();
}

std::string regression_table(const RegressionFit& f, const std::vector<std::string>& names) {
    std::ostringstream os;
    os << upper(to_string(f.submodel)) << " regression, n = " << f.n_obs << "\n";
    os << "coefficient                 MLE           SE      p-value\n";
    const auto est = flatten(f.coefficients);
    std::vector<std::string> labels = regression_parameter_names(names);
    for (std::size_t j = 0; j < est.size(); ++j) {
        std::string l = labels[j];
        l.resize(std::max<std::size_t>(l.size(), 20), ' ');
        os << l << fixed(est[j], 12, 6);
        if (!f.std_errors.empty()) {
            os << fixed(f.std_errors[j], 13, 6);
            os << (std::isnan(f.p_values[j]) ? std::string("           --") : fixed(f.p_values[j], 13, 4));
        }
        os << "\n";
    }
    os << "loglik " << fixed(f.loglik) << "  AIC " << fixed(f.aic) << "  CAIC " << fixed(f.caic) << "  BIC "
       << fixed(f.bic) << "\n";
    for (const auto& w : f.warnings) os << "warning: " << w << "\n";
    os << "status: " << f.diagnostics.message << "\n";
    return os.str();
}

std::string comparison_table(const Comparison& c) {
    std::ostringstream os;
    os << "Model        k       loglik          AIC         CAIC          BIC  converged\n";
    for (const auto& m : c.models) {
        std::string name = upper(to_string(m.submodel));
        name.resize(8, ' ');
        os << name << std::string(4, ' ') << m.parameters << fixed(m.loglik, 13) << fixed(m.aic, 13) << fixed(m.caic, 13)
           << fixed(m.bic, 13) << (m.converged ? "  yes" : "  no") << "\n";
    }
    os << "\nHypotheses                                    LR statistic  df      p-value\n";
    for (const auto& r : c.lr_tests) {
        std::string h = r.hypotheses;
        h.resize(std::max<std::size_t>(h.size(), 44), ' ');
        os << h;
        if (r.result) {
            os << fixed(r.result->statistic, 14) << "   " << r.result->df << fixed(r.result->p_value, 13);
        } else {
            os << "  not available";
        }
        if (!r.note.empty()) os << "  (" << r.note << ")";
        os << "\n";
    }
    if (c.best_by_aic) os << "\nbest by AIC: " << upper(to_string(*c.best_by_aic)) << "\n";
    return os.str();
}

struct Summary {
    double mean = 0.0;
    double variance = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t beyond_3 = 0;
};

Summary summarize(const std::vector<double>& r) {
    Summary s;
    const double n = static_cast<double>(r.size());
    s.mean = std::accumulate(r.begin(), r.end(), 0.0) / n;
    for (double q : r) {
        s.variance += (q - s.mean) * (q - s.mean);
        s.beyond_3 += std::fabs(q) > 3.0;
    }
    s.variance = r.size() > 1 ? s.variance / (n - 1.0) : 0.0;
    s.min = *std::min_element(r.begin(), r.end());
    s.max = *std::max_element(r.begin(), r.end());
    return s;
}

struct Options {
    std::string input;
    std::string output;
    std::string fit_report;
    std::string submodel = "gollgr";
    std::uint64_t seed = kDefaultSeed;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::size_t> reps;
    std::vector<std::size_t> sizes;
    std::optional<double> tol;
    std::optional<int> starts;
    std::optional<unsigned> threads;
    std::size_t n = 0;
    double alpha = 1.0;
    double beta = 1.0;
    double delta = 0.0;
    double theta = 1.0;
};

FitOptions fit_options(const Options& o) {
    FitOptions f;
    if (o.tol) f.grad_tol = *o.tol;
    if (o.starts) f.starts = *o.starts;
    try {
        f.validate();
    } catch (const std::invalid_argument& e) {
        throw CliError(usage_error, e.what());
    }
    return f;
}

Submodel submodel_flag(const Options& o) {
    try {
        return parse_submodel(o.submodel);
    } catch (const std::invalid_argument& e) {
        throw CliError(usage_error, e.what());
    }
}

SurvivalDataset load_dataset(const std::string& path) {
    require_file(path);
    return read_csv_file(path);
}

int cmd_fit(const Options& o, std::ostream& out) {
    const auto ds = load_dataset(o.input);
    if (ds.n_cols != 1 || ds.failures() != ds.size()) {
        throw CliError(parse_error, "fit takes uncensored times without covariates; use regress for this file");
    }
    const auto f = fit_mle(ds.times, std::nullopt, submodel_flag(o), fit_options(o));
    write_report(o.output, to_json(f));
    out << fit_table(f);
    return f.converged ? ok : not_converged;
}

int cmd_regress(const Options& o, std::ostream& out) {
    const auto ds = load_dataset(o.input);
    const auto f = fit_regression(ds, submodel_flag(o), std::nullopt, fit_options(o));
    write_report(o.output, to_json(f, ds.covariate_names));
    out << regression_table(f, ds.covariate_names);
    return f.converged ? ok : not_converged;
}

int cmd_sample(const Options& o, std::ostream& out) {
    if (o.n == 0) throw CliError(usage_error, "--n must be positive");
    const GollgrParams p{o.alpha, o.beta, {o.delta, o.theta}};
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw CliError(usage_error, e.what());
    }
    const auto xs = sample(o.n, o.seed, p);
    std::ostringstream os;
    write_sample_csv(os, xs);
    if (o.output.empty()) {
        out << os.str();
    } else {
        write_text(o.output, os.str());
    }
    return ok;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
    auto cfg = study_config_from_json(read_json_file(o.input));
    if (o.reps) cfg.replicates = *o.reps;
    if (!o.sizes.empty()) cfg.sample_sizes = o.sizes;
    if (o.seed_override) cfg.seed = *o.seed_override;
    if (o.threads) cfg.threads = *o.threads;
    if (o.tol) cfg.fit.grad_tol = *o.tol;
    if (o.starts) cfg.fit.starts = *o.starts;
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw CliError(usage_error, e.what());
    }
    try {
        const auto rep = run_study(cfg);
        write_report(o.output, to_json(rep, false));
        out << format_table(rep);
        err << "runtime " << fixed(rep.runtime_seconds, 0, 1) << " s\n";
        return ok;
    } catch (const StudyAborted& e) {
        write_report(o.output, to_json(e.report(), true));
        out << format_table(e.report());
        err << e.what() << "\n";
        return not_converged;
    }
}

int cmd_residuals(const Options& o, std::ostream& out) {
    const auto ds = load_dataset(o.input);
    std::vector<double> r;
    std::string source;
    if (!o.fit_report.empty()) {
        const auto saved = saved_fit_from_json(read_json_file(o.fit_report));
        if (!saved.converged) throw CliError(not_converged, "the fit in '" + o.fit_report + "' did not converge");
        if (saved.regression) {
            if (saved.covariate_names != ds.covariate_names) {
                throw CliError(parse_error, "covariates in '" + o.input + "' do not match the regress report");
            }
            r = quantile_residuals(ds, saved.coefficients);
        } else {
            if (ds.n_cols != 1) throw CliError(parse_error, "a fit report has no covariates but '" + o.input + "' does");
            r = quantile_residuals(ds.times, saved.params);
        }
        source = "report";
    } else if (plain_sample(ds)) {
        const auto f = fit_mle(ds.times, std::nullopt, submodel_flag(o), fit_options(o));
        if (!f.converged) throw CliError(not_converged, "fit did not converge: " + f.diagnostics.message);
        r = quantile_residuals(ds.times, f.estimates);
        source = "refit";
    } else {
        const auto f = fit_regression(ds, submodel_flag(o), std::nullopt, fit_options(o));
        if (!f.converged) throw CliError(not_converged, "fit did not converge: " + f.diagnostics.message);
        r = quantile_residuals(ds, f);
        source = "refit";
    }
    const auto s = summarize(r);
    Json j;
    j["report"] = "residuals";
    j["source"] = source;
    j["n_obs"] = r.size();
    j["summary"] = {{"mean", s.mean}, {"variance", s.variance}, {"min", s.min}, {"max", s.max}, {"beyond_3", s.beyond_3}};
    j["residuals"] = r;
    write_report(o.output, j);
    out << "quantile residuals, n = " << r.size() << "\n"
        << "mean " << fixed(s.mean, 0, 6) << "  variance " << fixed(s.variance, 0, 6) << "  min " << fixed(s.min, 0, 4)
        << "  max " << fixed(s.max, 0, 4) << "  |r| > 3: " << s.beyond_3 << "\n";
    return ok;
}

int cmd_compare(const Options& o, std::ostream& out) {
    const auto ds = load_dataset(o.input);
    const auto c = compare_models(ds, fit_options(o));
    write_report(o.output, to_json(c));
    out << comparison_table(c);
    return c.models.front().converged ? ok : not_converged;
}

}  // namespace

Comparison compare_models(const SurvivalDataset& ds, const FitOptions& opt) {
    Comparison c;
    c.regression = !plain_sample(ds);
    const std::size_t n = ds.size();
    std::vector<ModelSummary> nested;
    if (!c.regression) {
        std::optional<FitResult> best;
        for (Submodel m : {Submodel::gr, Submodel::egr, Submodel::ollgr}) {
            auto f = fit_mle(ds.times, std::nullopt, m, opt);
            nested.push_back(summarize(m, free_parameter_count(m), f.loglik, f.converged, n, f.diagnostics.message));
            if (!best || f.loglik > best->loglik) best = std::move(f);
        }
        const auto full = fit_mle(ds.times, best->estimates, Submodel::gollgr, opt);
        c.models.push_back(summarize(Submodel::gollgr, 4, full.loglik, full.converged, n, full.diagnostics.message));
    } else {
        std::optional<RegressionFit> best;
        for (Submodel m : {Submodel::gr, Submodel::egr, Submodel::ollgr}) {
            auto f = fit_regression(ds, m, std::nullopt, opt);
            nested.push_back(summarize(m, free_parameter_count(m, ds.n_cols), f.loglik, f.converged, n,
                                       f.diagnostics.message));
            if (!best || f.loglik > best->loglik) best = std::move(f);
        }
        const auto full = fit_regression(ds, Submodel::gollgr, best->coefficients, opt);
        c.models.push_back(summarize(Submodel::gollgr, free_parameter_count(Submodel::gollgr, ds.n_cols), full.loglik,
                                     full.converged, n, full.diagnostics.message));
    }
    c.models.push_back(nested[2]);
    c.models.push_back(nested[1]);
    c.models.push_back(nested[0]);

    const auto& full = c.models.front();
    for (std::size_t i = 1; i < c.models.size(); ++i) {
        const auto& m = c.models[i];
        LrRow row;
        row.hypotheses = lr_test(Submodel::gollgr, 0.0, m.submodel, 0.0).hypotheses;
        if (!full.converged) {
            row.note = "GOLLGR fit did not converge";
        } else {
            try {
                row.result = lr_test(Submodel::gollgr, full.loglik, m.submodel, m.loglik);
                if (!m.converged) row.note = upper(to_string(m.submodel)) + " fit did not converge";
            } catch (const RefitAdvisory& e) {
                row.note = e.what();
            }
        }
        c.lr_tests.push_back(std::move(row));
    }
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < c.models.size(); ++i) {
        if (c.models[i].converged && (!best || c.models[i].aic < c.models[*best].aic)) best = i;
    }
    if (best) c.best_by_aic = c.models[*best].submodel;
    return c;
}

Json to_json(const Comparison& c) {
    auto number = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
    Json j;
    j["report"] = "compare";
    j["model"] = c.regression ? "regression" : "distribution";
    Json models = Json::array();
    for (const auto& m : c.models) {
        models.push_back({{"submodel", upper(to_string(m.submodel))},
                          {"parameters", m.parameters},
                          {"loglik", number(m.loglik)},
                          {"aic", number(m.aic)},
                          {"caic", number(m.caic)},
                          {"bic", number(m.bic)},
                          {"converged", m.converged},
                          {"message", m.message}});
    }
    j["models"] = std::move(models);
    Json tests = Json::array();
    for (const auto& r : c.lr_tests) {
        Json t;
        t["hypotheses"] = r.hypotheses;
        if (r.result) {
            t["statistic"] = number(r.result->statistic);
            t["df"] = r.result->df;
            t["p_value"] = number(r.result->p_value);
        } else {
            t["statistic"] = nullptr;
            t["df"] = nullptr;
            t["p_value"] = nullptr;
        }
        t["note"] = r.note;
        tests.push_back(std::move(t));
    }
    j["lr_tests"] = std::move(tests);
    j["best_by_aic"] = c.best_by_aic ? Json(upper(to_string(*c.best_by_aic))) : Json(nullptr);
    return j;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"GOLLGR distribution: fitting, survival regression, simulation and model comparison"};
    app.name(args.empty() ? "gollgr" : args.front());
    app.require_subcommand(1);
    Options o;

    auto add_fit_flags = [&](CLI::App* sub) {
        sub->add_option("--submodel", o.submodel, "gollgr, ollgr, egr or gr")->capture_default_str();
        sub->add_option("--tol", o.tol, "gradient tolerance per observation");
        sub->add_option("--starts", o.starts, "start points, 1 to 5");
    };

    auto* fit = app.add_subcommand("fit", "fit the distribution to a sample");
    fit->add_option("-i,--input", o.input, "CSV with a time column")->required();
    fit->add_option("-o,--output", o.output, "JSON report");
    add_fit_flags(fit);

    auto* regress = app.add_subcommand("regress", "fit the censored regression");
    regress->add_option("-i,--input", o.input, "CSV with time, status/cens and covariate columns")->required();
    regress->add_option("-o,--output", o.output, "JSON report");
    add_fit_flags(regress);

    auto* smp = app.add_subcommand("sample", "draw a seeded sample by inversion");
    smp->add_option("-n,--n", o.n, "sample size")->required();
    smp->add_option("--alpha", o.alpha)->required();
    smp->add_option("--beta", o.beta)->required();
    smp->add_option("--delta", o.delta)->required();
    smp->add_option("--theta", o.theta)->required();
    smp->add_option("--seed", o.seed)->capture_default_str();
    smp->add_option("-o,--output", o.output, "CSV file; standard output if absent");

    auto* sim = app.add_subcommand("simulate", "run a Monte Carlo study from a JSON config");
    sim->add_option("-i,--input,--config", o.input, "study config")->required();
    sim->add_option("-o,--output", o.output, "JSON report");
    sim->add_option("--reps", o.reps, "replicates per sample size");
    sim->add_option("--sizes", o.sizes, "sample sizes")->delimiter(',');
    sim->add_option("--seed", o.seed_override, "master seed");
    sim->add_option("--threads", o.threads, "worker threads, 0 for all cores");
    sim->add_option("--tol", o.tol, "gradient tolerance per observation");
    sim->add_option("--starts", o.starts, "start points, 1 to 5");

    auto* res = app.add_subcommand("residuals", "quantile residuals from a report or a fresh fit");
    res->add_option("-i,--input", o.input, "CSV dataset")->required();
    res->add_option("--fit", o.fit_report, "fit or regress report to reuse");
    res->add_option("-o,--output", o.output, "JSON report");
    add_fit_flags(res);

    auto* cmp = app.add_subcommand("compare", "fit GOLLGR, OLLGR, EGR and GR and test the restrictions");
    cmp->add_option("-i,--input", o.input, "CSV dataset")->required();
    cmp->add_option("-o,--output", o.output, "JSON report");
    cmp->add_option("--tol", o.tol, "gradient tolerance per observation");
    cmp->add_option("--starts", o.starts, "start points, 1 to 5");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    if (argv.empty()) argv.push_back("gollgr");
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return usage_error;
    }

    try {
        if (fit->parsed()) return cmd_fit(o, out);
        if (regress->parsed()) return cmd_regress(o, out);
        if (smp->parsed()) return cmd_sample(o, out);
        if (sim->parsed()) return cmd_simulate(o, out, err);
        if (res->parsed()) return cmd_residuals(o, out);
        return cmd_compare(o, out);
    } catch (const CliError& e) {
        err << "error: " << e.what() << "\n";
        return e.code();
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return parse_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return usage_error;
    }
}

}  // namespace gollgr::cli
