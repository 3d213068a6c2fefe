#include "gollgr/cli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

namespace gollgr::cli {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.emplace_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string where(std::size_t row, const std::string& column) {
    return "data row " + std::to_string(row) + ", column '" + column + "'";
}

double parse_number(const std::string& field, std::size_t row, const std::string& column) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = first + field.size();
    if (!field.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw CsvError(CsvErrorKind::malformed_field, where(row, column) + ": '" + field + "' is not a finite number");
    }
    return v;
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double read_number(const Json& j) {
    if (j.is_null()) return std::nan("");
    return j.get<double>();
}

Json diagnostics_json(const FitDiagnostics& d) {
    Json j;
    j["message"] = d.message;
    j["evaluations"] = d.evaluations;
    j["iterations"] = d.iterations;
    j["simplex_diameter"] = number(d.simplex_diameter);
    j["loglik_spread"] = number(d.loglik_spread);
    j["grad_norm"] = number(d.grad_norm);
    j["hessian_positive_definite"] = d.hessian_positive_definite;
    return j;
}

Json vector_json(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

}  // namespace

SurvivalDataset read_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto next = [&](std::string& out) {
        while (std::getline(in, out)) {
            ++line_no;
            if (line_no == 1 && out.rfind("\xEF\xBB\xBF", 0) == 0) out.erase(0, 3);
            if (!out.empty() && out.back() == '\r') out.pop_back();
            if (!blank(out)) return true;
        }
        return false;
    };
    if (!next(line)) throw CsvError(CsvErrorKind::empty_file, "empty file: no header row");

    const auto header = split(line);
    std::optional<std::size_t> time_col;
    std::optional<std::size_t> status_col;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j].empty()) throw CsvError(CsvErrorKind::malformed_field, "header: column " + std::to_string(j + 1) + " has no name");
        for (std::size_t k = 0; k < j; ++k) {
            if (lower(header[k]) == lower(header[j])) {
                throw CsvError(CsvErrorKind::malformed_field, "header: duplicate column '" + header[j] + "'");
            }
        }
        const auto name = lower(header[j]);
        if (name == "time") {
            time_col = j;
        } else if (name == "status" || name == "cens") {
            if (status_col) throw CsvError(CsvErrorKind::malformed_field, "header: both 'status' and 'cens' present");
            status_col = j;
        }
    }
    if (!time_col) throw CsvError(CsvErrorKind::missing_column, "missing required column 'time'");

    std::vector<std::size_t> cov_cols;
    std::vector<std::string> names;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j != *time_col && j != status_col) {
            cov_cols.push_back(j);
            names.push_back(header[j]);
        }
    }

    std::vector<double> times;
    std::vector<int> status;
    std::vector<std::vector<double>> columns(cov_cols.size());
    std::size_t row = 0;
    while (next(line)) {
        ++row;
        const auto fields = split(line);
        if (fields.size() != header.size()) {
            throw CsvError(CsvErrorKind::malformed_field, "data row " + std::to_string(row) + ": expected " +
                                                              std::to_string(header.size()) + " fields, found " +
                                                              std::to_string(fields.size()));
        }
        const double t = parse_number(fields[*time_col], row, header[*time_col]);
        if (!(t > 0.0)) throw CsvError(CsvErrorKind::invalid_value, where(row, header[*time_col]) + ": time must be positive");
        times.push_back(t);
        if (status_col) {
            const double s = parse_number(fields[*status_col], row, header[*status_col]);
            if (s != 0.0 && s != 1.0) {
                throw CsvError(CsvErrorKind::invalid_value, where(row, header[*status_col]) + ": status must be 0 or 1");
            }
            status.push_back(static_cast<int>(s));
        } else {
            status.push_back(1);
        }
        for (std::size_t k = 0; k < cov_cols.size(); ++k) {
            columns[k].push_back(parse_number(fields[cov_cols[k]], row, header[cov_cols[k]]));
        }
    }
    if (times.empty()) throw CsvError(CsvErrorKind::empty_file, "empty file: header but no data rows");
    return SurvivalDataset::from_columns(std::move(times), std::move(status), columns, names);
}

SurvivalDataset read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError(CsvErrorKind::io, "cannot open '" + path + "'");
    return read_csv(in);
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_sample_csv(std::ostream& out, const std::vector<double>& xs) {
    out << "time\n";
    for (double x : xs) out << format_double(x) << '\n';
}

Json to_json(const FitResult& fit) {
    Json j;
    j["report"] = "fit";
    j["submodel"] = std::string(to_string(fit.submodel));
    j["n_obs"] = fit.n_obs;
    j["converged"] = fit.converged;
    j["estimates"] = {{"alpha", fit.estimates.alpha},
                      {"beta", fit.estimates.beta},
                      {"delta", fit.estimates.gr.delta},
                      {"theta", fit.estimates.gr.theta}};
    if (fit.std_errors) {
        const auto& s = *fit.std_errors;
        j["std_errors"] = {{"alpha", number(s[0])}, {"beta", number(s[1])}, {"delta", number(s[2])}, {"theta", number(s[3])}};
    } else {
        j["std_errors"] = nullptr;
    }
    j["loglik"] = number(fit.loglik);
    j["aic"] = number(fit.aic);
    j["caic"] = number(fit.caic);
    j["bic"] = number(fit.bic);
    j["diagnostics"] = diagnostics_json(fit.diagnostics);
    return j;
}

Json to_json(const RegressionFit& fit, const std::vector<std::string>& covariate_names) {
    const std::size_t p = fit.coefficients.delta_coef.size();
    auto block = [&](const std::vector<double>& packed) {
        Json b;
        b["alpha"] = number(packed[0]);
        b["beta"] = number(packed[1]);
        b["delta_coef"] = vector_json({packed.begin() + 2, packed.begin() + 2 + static_cast<std::ptrdiff_t>(p)});
        b["theta_coef"] = vector_json({packed.begin() + 2 + static_cast<std::ptrdiff_t>(p), packed.end()});
        return b;
    };
    Json j;
    j["report"] = "regress";
    j["submodel"] = std::string(to_string(fit.submodel));
    j["n_obs"] = fit.n_obs;
    j["converged"] = fit.converged;
    j["covariates"] = covariate_names;
    j["coefficients"] = {{"alpha", fit.coefficients.alpha},
                         {"beta", fit.coefficients.beta},
                         {"delta_coef", vector_json(fit.coefficients.delta_coef)},
                         {"theta_coef", vector_json(fit.coefficients.theta_coef)}};
    j["std_errors"] = fit.std_errors.empty() ? Json(nullptr) : block(fit.std_errors);
    j["p_values"] = fit.p_values.empty() ? Json(nullptr) : block(fit.p_values);
    j["loglik"] = number(fit.loglik);
    j["aic"] = number(fit.aic);
    j["caic"] = number(fit.caic);
    j["bic"] = number(fit.bic);
    j["warnings"] = fit.warnings;
    j["diagnostics"] = diagnostics_json(fit.diagnostics);
    return j;
}

Json to_json(const StudyReport& report, bool aborted) {
    Json j;
    j["report"] = "simulate";
    j["status"] = aborted ? "aborted" : "complete";
    j["kind"] = std::string(to_string(report.kind));
    j["seed"] = report.seed;
    j["replicates"] = report.replicates;
    j["parameters"] = report.parameter_names;
    j["truth"] = vector_json(report.truth);
    Json cells = Json::array();
    for (std::size_t k = 0; k < report.sample_sizes.size(); ++k) {
        Json c;
        c["n"] = report.sample_sizes[k];
        c["converged"] = report.converged[k];
        c["convergence_rate"] = report.convergence_rate[k];
        std::vector<double> ae;
        std::vector<double> bias;
        std::vector<double> mse;
        for (std::size_t p = 0; p < report.parameter_names.size(); ++p) {
            ae.push_back(report.ae[p][k]);
            bias.push_back(report.bias[p][k]);
            mse.push_back(report.mse[p][k]);
        }
        c["ae"] = vector_json(ae);
        c["bias"] = vector_json(bias);
        c["mse"] = vector_json(mse);
        cells.push_back(std::move(c));
    }
    j["cells"] = std::move(cells);
    return j;
}

SavedFit saved_fit_from_json(const Json& j) {
    try {
        SavedFit s;
        const auto kind = j.at("report").get<std::string>();
        s.submodel = parse_submodel(j.at("submodel").get<std::string>());
        s.converged = j.at("converged").get<bool>();
        if (kind == "fit") {
            const auto& e = j.at("estimates");
            s.params = GollgrParams{e.at("alpha").get<double>(), e.at("beta").get<double>(),
                                    {e.at("delta").get<double>(), e.at("theta").get<double>()}};
            s.params.validate();
        } else if (kind == "regress") {
            s.regression = true;
            const auto& c = j.at("coefficients");
            s.coefficients.alpha = c.at("alpha").get<double>();
            s.coefficients.beta = c.at("beta").get<double>();
            for (const auto& v : c.at("delta_coef")) s.coefficients.delta_coef.push_back(read_number(v));
            for (const auto& v : c.at("theta_coef")) s.coefficients.theta_coef.push_back(read_number(v));
            s.coefficients.validate();
            s.covariate_names = j.at("covariates").get<std::vector<std::string>>();
            if (s.covariate_names.size() != s.coefficients.delta_coef.size()) {
                throw CliError(parse_error, "report: covariate names and coefficients differ in length");
            }
        } else {
            throw CliError(parse_error, "report: expected a fit or regress report, found '" + kind + "'");
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw CliError(parse_error, std::string("report: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw CliError(parse_error, std::string("report: ") + e.what());
    }
}

StudyConfig study_config_from_json(const Json& j) {
    try {
        StudyConfig c;
        const auto kind = j.at("kind").get<std::string>();
        const auto& t = j.at("truth");
        if (kind == "distribution") {
            c.kind = StudyKind::distribution;
            c.truth = GollgrParams{t.at("alpha").get<double>(), t.at("beta").get<double>(),
                                   {t.at("delta").get<double>(), t.at("theta").get<double>()}};
        } else if (kind == "regression") {
            c.kind = StudyKind::regression;
            RegressionCoefficients r;
            r.alpha = t.at("alpha").get<double>();
            r.beta = t.at("beta").get<double>();
            r.delta_coef = t.at("delta_coef").get<std::vector<double>>();
            r.theta_coef = t.at("theta_coef").get<std::vector<double>>();
            c.truth = r;
        } else {
            throw CliError(parse_error, "config: kind must be 'distribution' or 'regression'");
        }
        c.sample_sizes = j.at("sample_sizes").get<std::vector<std::size_t>>();
        c.replicates = j.at("replicates").get<std::size_t>();
        c.seed = j.value("seed", kDefaultSeed);
        if (j.contains("submodel")) c.submodel = parse_submodel(j.at("submodel").get<std::string>());
        c.threads = j.value("threads", 0u);
        c.covariate_probability = j.value("covariate_probability", 0.5);
        if (j.contains("starts")) c.fit.starts = j.at("starts").get<int>();
        if (j.contains("grad_tol")) c.fit.grad_tol = j.at("grad_tol").get<double>();
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw CliError(parse_error, std::string("config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw CliError(parse_error, std::string("config: ") + e.what());
    }
}

}  // namespace gollgr::cli
