#pragma once

// Command-line surface: CSV ingestion, JSON reports and the six commands
// fit, regress, sample, simulate, residuals and compare.

#include "gollgr/inference.hpp"
#include "gollgr/regression.hpp"
#include "gollgr/simulation.hpp"

#include "json.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gollgr::cli {

enum ExitCode : int { ok = 0, usage_error = 1, io_error = 2, parse_error = 3, not_converged = 4 };

inline constexpr std::uint64_t kDefaultSeed = 20240101;

/// Reports keep their keys in insertion order.
using Json = nlohmann::ordered_json;

/// Failure carrying the exit code of its class.
class CliError : public std::runtime_error {
public:
    CliError(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

enum class CsvErrorKind { io, empty_file, missing_column, malformed_field, invalid_value };

class CsvError : public CliError {
public:
    CsvError(CsvErrorKind kind, const std::string& what)
        : CliError(kind == CsvErrorKind::io ? io_error : parse_error, what), kind_(kind) {}
    CsvErrorKind kind() const noexcept { return kind_; }

private:
    CsvErrorKind kind_;
};

/// Reads a comma-separated file with a header row. A column named "time"
/// is required; a column named "status" or "cens" (1 failure, 0 censored)
/// is optional and defaults to all failures; every other column is a
/// numeric covariate. Data rows are numbered from 1 in error messages.
SurvivalDataset read_csv(std::istream& in);
SurvivalDataset read_csv_file(const std::string& path);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

/// Writes one "time" column.
void write_sample_csv(std::ostream& out, const std::vector<double>& xs);

Json to_json(const FitResult& fit);
Json to_json(const RegressionFit& fit, const std::vector<std::string>& covariate_names);
Json to_json(const StudyReport& report, bool aborted);

/// A fit or regress report read back from disk.
struct SavedFit {
    bool regression = false;
    Submodel submodel = Submodel::gollgr;
    bool converged = false;
    GollgrParams params;                    ///< fit reports
    RegressionCoefficients coefficients;    ///< regress reports
    std::vector<std::string> covariate_names;
};

/// Throws CliError(parse_error) when the object is not a fit or regress
/// report.
SavedFit saved_fit_from_json(const Json& j);

/// Builds a study configuration from a JSON object with keys kind, truth,
/// sample_sizes, replicates and optionally seed, submodel, threads and
/// covariate_probability. Throws CliError(parse_error) on bad content.
StudyConfig study_config_from_json(const Json& j);

/// One row of a model comparison.
struct ModelSummary {
    Submodel submodel = Submodel::gollgr;
    int parameters = 0;
    double loglik = 0.0;
    double aic = 0.0;
    double caic = 0.0;
    double bic = 0.0;
    bool converged = false;
    std::string message;
};

struct LrRow {
    std::string hypotheses;
    std::optional<LrTestResult> result;  ///< empty when the test could not be formed
    std::string note;
};

struct Comparison {
    bool regression = false;  ///< false: plain distribution fits
    std::vector<ModelSummary> models;  ///< GOLLGR, OLLGR, EGR, GR
    std::vector<LrRow> lr_tests;       ///< GOLLGR against OLLGR, EGR and GR
    std::optional<Submodel> best_by_aic;  ///< among converged fits
};

/// Fits the four nested models and tests each restriction against GOLLGR.
/// An uncensored dataset without covariates is fitted as a plain sample,
/// anything else as a regression.
Comparison compare_models(const SurvivalDataset& ds, const FitOptions& opt = {});

Json to_json(const Comparison& c);

/// Entry point behind the executable. Reports go to --output, tables to
/// `out`, diagnostics to `err`. Returns an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gollgr::cli
