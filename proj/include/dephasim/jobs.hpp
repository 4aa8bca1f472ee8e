#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dephasim/continuum.hpp"
#include "dephasim/finite_bath.hpp"
#include "dephasim/model.hpp"
#include "dephasim/oracle.hpp"

// Job descriptors, JSON config ingestion and CSV/JSON emission behind the
// `dephasim <job> --config <path>` command line.

namespace dephasim::jobs {

enum class OutputFormat { Csv, Json };

struct Tolerances {
    double rational_tol = kDefaultRationalTol;
    std::int64_t max_den = kDefaultMaxDenominator;
    QuadratureConfig quadrature;
    double leak_tol = 1e-8;
    OracleBudget budget;
    DensityTolerances density;
    // Samples with t below this are excluded from the summary minimum.
    double burn_in = 1.0;

    bool operator==(const Tolerances&) const = default;
};

struct FiniteJob {
    SystemSpec system;
    FiniteBath bath;
    Temperature temperature;

    bool operator==(const FiniteJob&) const = default;
};

struct ContinuumJob {
    OhmicSpectralDensity spectral_density;
    Temperature temperature;

    bool operator==(const ContinuumJob&) const = default;
};

struct ClosedFormJob {
    OhmicSpectralDensity spectral_density;
    Temperature temperature;

    bool operator==(const ClosedFormJob&) const = default;
};

struct EvolveJob {
    DensityMatrix rho0;
    std::variant<FiniteJob, ContinuumJob, ClosedFormJob> rate;

    bool operator==(const EvolveJob&) const = default;
};

struct OracleJob {
    SystemSpec system;
    FiniteBath bath;
    std::vector<std::size_t> cutoffs;
    Temperature temperature;
    DensityMatrix rho0;

    bool operator==(const OracleJob&) const = default;
};

struct PeriodicityJob {
    std::optional<SystemSpec> system;
    FiniteBath bath;

    bool operator==(const PeriodicityJob&) const = default;
};

// Either an inline scenario (oracle and finite-sum Gamma are both computed),
// or paths to the JSON outputs of earlier `oracle` and `finite` runs.
struct CompareJob {
    std::optional<OracleJob> scenario;
    std::string oracle_result;
    std::string gamma_series;

    bool operator==(const CompareJob&) const = default;
};

using Job = std::variant<FiniteJob, ContinuumJob, ClosedFormJob, EvolveJob, OracleJob, PeriodicityJob, CompareJob>;

struct RunConfig {
    Job job;
    std::optional<GridSpec> grid;
    OutputFormat format = OutputFormat::Csv;
    std::string output;
    Tolerances tolerances;

    bool operator==(const RunConfig&) const = default;
};

const char* job_name(const Job& job) noexcept;
std::vector<std::string> job_names();

// Throws Error(ConfigError) for malformed JSON, unknown keys or a job/section mismatch,
// and validation errors for out-of-range values. `job_hint`, when nonempty, must agree
// with the config's "job" field and supplies it when absent.
RunConfig parse_config(std::string_view json_text, std::string_view job_hint = {});

// Canonical JSON of the full config with every default made explicit.
std::string emit_config(const RunConfig& config);

struct SeriesSummary {
    std::size_t samples = 0;
    double mean = 0.0;
    std::optional<double> min_after_burn_in;
    double max = 0.0;
    double fraction_in_band = 0.0;
    double burn_in = 1.0;
    double band_low = 5.0;
    double band_high = 15.0;
};

// Throws EmptySeries on an empty series.
SeriesSummary summarize(const GammaSeries& series, double burn_in = 1.0, double band_low = 5.0,
                        double band_high = 15.0);

// (t, gamma) table with a summary block, plus the parameter echo `echo_json`.
std::string emit_figure_data(const GammaSeries& series, const SeriesSummary& summary, OutputFormat format,
                             std::string_view echo_json = {});

// Executes the job and returns the artifact text.
std::string run(const RunConfig& config);

// Writes through a sibling temporary file and rename().
void write_atomic(const std::string& path, std::string_view contents);

std::string read_file(const std::string& path);

// Reads `config_path`, applies overrides, runs and writes the artifact.
// Returns the text when no output path is configured (nothing is written then).
std::optional<std::string> run_file(std::string_view job, const std::string& config_path,
                                    const std::optional<std::string>& out_override,
                                    const std::optional<OutputFormat>& format_override);

std::optional<OutputFormat> parse_format(std::string_view name);

}  // namespace dephasim::jobs
