#include "dephasim/jobs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "json.hpp"

#include "dephasim/evolution.hpp"

namespace dephasim::jobs {

using Json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Parsing helpers

[[noreturn]] void config_error(const std::string& message) { throw Error(ErrorCode::ConfigError, message); }

void require_object(const Json& j, const std::string& where) {
    if (!j.is_object()) config_error(where + " must be a JSON object");
}

void reject_unknown(const Json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            config_error("unknown key '" + it.key() + "' in " + where);
    }
}

const Json& member(const Json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) config_error(where + " is missing '" + key + "'");
    return *it;
}

double as_double(const Json& j, const std::string& where) {
    if (!j.is_number()) config_error(where + " must be a number");
    return j.get<double>();
}

double number(const Json& j, const char* key, const std::string& where, double fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    return as_double(*it, where + "." + key);
}

double number(const Json& j, const char* key, const std::string& where) {
    return as_double(member(j, key, where), where + "." + key);
}

std::uint64_t as_count(const Json& j, const std::string& where) {
    if (!j.is_number_integer() || (j.is_number_integer() && j.get<std::int64_t>() < 0 && !j.is_number_unsigned()))
        config_error(where + " must be a nonnegative integer");
    return j.get<std::uint64_t>();
}

std::uint64_t count(const Json& j, const char* key, const std::string& where, std::uint64_t fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    return as_count(*it, where + "." + key);
}

std::uint64_t count(const Json& j, const char* key, const std::string& where) {
    return as_count(member(j, key, where), where + "." + key);
}

bool boolean(const Json& j, const char* key, const std::string& where, bool fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_boolean()) config_error(where + "." + key + " must be true or false");
    return it->get<bool>();
}

std::string text(const Json& j, const char* key, const std::string& where, const std::string& fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_string()) config_error(where + "." + key + " must be a string");
    return it->get<std::string>();
}

SystemSpec parse_system(const Json& j, const std::string& where) {
    require_object(j, where);
    reject_unknown(j, {"omega0", "dim"}, where);
    return SystemSpec{number(j, "omega0", where, 1.0), static_cast<std::size_t>(count(j, "dim", where, 2))};
}

FiniteBath parse_bath(const Json& j, const std::string& where) {
    require_object(j, where);
    reject_unknown(j, {"modes"}, where);
    const Json& modes = member(j, "modes", where);
    if (!modes.is_array()) config_error(where + ".modes must be an array");
    FiniteBath bath;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const std::string w = where + ".modes[" + std::to_string(i) + "]";
        require_object(modes[i], w);
        reject_unknown(modes[i], {"lambda", "omega"}, w);
        bath.modes.push_back({number(modes[i], "lambda", w), number(modes[i], "omega", w)});
    }
    return bath;
}

Temperature parse_temperature(const Json* j, const std::string& where) {
    if (j == nullptr) return Temperature{};
    require_object(*j, where);
    reject_unknown(*j, {"kT"}, where);
    return Temperature{number(*j, "kT", where, 0.0)};
}

const Json* optional_member(const Json& j, const char* key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

OhmicSpectralDensity parse_spectral_density(const Json& j, const std::string& where) {
    require_object(j, where);
    reject_unknown(j, {"coupling_c", "cutoff_upper", "cutoff_lower"}, where);
    return OhmicSpectralDensity{number(j, "coupling_c", where), number(j, "cutoff_upper", where),
                                number(j, "cutoff_lower", where, 0.0)};
}

std::vector<std::vector<double>> parse_rows(const Json& j, const std::string& where) {
    if (!j.is_array()) config_error(where + " must be an array of rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array()) config_error(where + " must be an array of rows");
        std::vector<double> row;
        for (std::size_t c = 0; c < j[r].size(); ++c)
            row.push_back(as_double(j[r][c], where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]"));
        rows.push_back(std::move(row));
    }
    return rows;
}

DensityMatrix parse_density(const Json& j, const std::string& where) {
    require_object(j, where);
    reject_unknown(j, {"re", "im", "state"}, where);
    if (auto s = optional_member(j, "state")) {
        if (j.contains("re") || j.contains("im")) config_error(where + ": give either 'state' or 're'/'im'");
        ComplexVector psi;
        if (s->is_array()) {
            psi.resize(static_cast<Eigen::Index>(s->size()));
            for (std::size_t k = 0; k < s->size(); ++k)
                psi(static_cast<Eigen::Index>(k)) = as_double((*s)[k], where + ".state");
        } else {
            require_object(*s, where + ".state");
            reject_unknown(*s, {"re", "im"}, where + ".state");
            const Json& re = member(*s, "re", where + ".state");
            if (!re.is_array()) config_error(where + ".state.re must be an array");
            psi.resize(static_cast<Eigen::Index>(re.size()));
            for (std::size_t k = 0; k < re.size(); ++k)
                psi(static_cast<Eigen::Index>(k)) = as_double(re[k], where + ".state.re");
            if (auto im = optional_member(*s, "im")) {
                if (!im->is_array() || im->size() != re.size()) config_error(where + ".state.im must match re");
                for (std::size_t k = 0; k < im->size(); ++k)
                    psi(static_cast<Eigen::Index>(k)) += Complex(0.0, as_double((*im)[k], where + ".state.im"));
            }
        }
        if (psi.size() == 0) config_error(where + ".state is empty");
        return DensityMatrix::from_pure_state(psi);
    }
    const auto re = parse_rows(member(j, "re", where), where + ".re");
    const std::size_t n = re.size();
    if (n == 0) config_error(where + ".re is empty");
    std::vector<std::vector<double>> im(n, std::vector<double>(n, 0.0));
    if (auto imj = optional_member(j, "im")) im = parse_rows(*imj, where + ".im");
    if (im.size() != n) config_error(where + ": 're' and 'im' differ in shape");
    ComplexMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        if (re[r].size() != n || im[r].size() != n) config_error(where + " must be square");
        for (std::size_t c = 0; c < n; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = Complex(re[r][c], im[r][c]);
    }
    return DensityMatrix{m};
}

GridSpec parse_grid(const Json& j) {
    const std::string where = "grid";
    require_object(j, where);
    reject_unknown(j, {"start", "stop", "count", "spacing"}, where);
    GridSpec g;
    g.start = number(j, "start", where, 0.0);
    g.stop = number(j, "stop", where);
    g.count = static_cast<std::size_t>(count(j, "count", where));
    const std::string spacing = text(j, "spacing", where, "linear");
    if (spacing == "linear")
        g.spacing = GridSpacing::Linear;
    else if (spacing == "log")
        g.spacing = GridSpacing::Log;
    else
        config_error("grid.spacing must be 'linear' or 'log'");
    return g;
}

Tolerances parse_tolerances(const Json* j) {
    Tolerances t;
    if (j == nullptr) return t;
    const std::string where = "tolerances";
    require_object(*j, where);
    reject_unknown(*j,
                   {"rational_tol", "max_den", "quadrature", "leak_tol", "budget_pure", "budget_mixed", "density",
                    "burn_in"},
                   where);
    t.rational_tol = number(*j, "rational_tol", where, t.rational_tol);
    t.max_den = static_cast<std::int64_t>(count(*j, "max_den", where, static_cast<std::uint64_t>(t.max_den)));
    t.leak_tol = number(*j, "leak_tol", where, t.leak_tol);
    t.budget.pure = static_cast<std::size_t>(count(*j, "budget_pure", where, t.budget.pure));
    t.budget.mixed = static_cast<std::size_t>(count(*j, "budget_mixed", where, t.budget.mixed));
    t.burn_in = number(*j, "burn_in", where, t.burn_in);
    if (auto q = optional_member(*j, "quadrature")) {
        const std::string w = where + ".quadrature";
        require_object(*q, w);
        reject_unknown(*q, {"abs_tol", "rel_tol", "max_subdivisions", "oscillation_split", "tail_epsilon", "strict"}, w);
        auto& c = t.quadrature;
        c.abs_tol = number(*q, "abs_tol", w, c.abs_tol);
        c.rel_tol = number(*q, "rel_tol", w, c.rel_tol);
        c.max_subdivisions = static_cast<std::size_t>(count(*q, "max_subdivisions", w, c.max_subdivisions));
        c.oscillation_split = boolean(*q, "oscillation_split", w, c.oscillation_split);
        c.tail_epsilon = number(*q, "tail_epsilon", w, c.tail_epsilon);
        c.strict = boolean(*q, "strict", w, c.strict);
    }
    if (auto d = optional_member(*j, "density")) {
        const std::string w = where + ".density";
        require_object(*d, w);
        reject_unknown(*d, {"hermiticity", "trace", "eigenvalue_floor"}, w);
        t.density.hermiticity = number(*d, "hermiticity", w, t.density.hermiticity);
        t.density.trace = number(*d, "trace", w, t.density.trace);
        t.density.eigenvalue_floor = number(*d, "eigenvalue_floor", w, t.density.eigenvalue_floor);
    }
    ValidationReport r = check(t.quadrature);
    if (!(t.rational_tol >= 0.0)) r.push_back({ErrorCode::InvalidArgument, "rational_tol must be >= 0"});
    if (t.max_den < 1) r.push_back({ErrorCode::InvalidArgument, "max_den must be >= 1"});
    if (!(t.leak_tol > 0.0)) r.push_back({ErrorCode::InvalidArgument, "leak_tol must be > 0"});
    if (!r.empty()) throw Error(std::move(r));
    return t;
}

FiniteJob parse_finite(const Json& j, const std::string& where) {
    require_object(j, where);
    reject_unknown(j, {"system", "bath", "temperature"}, where);
    FiniteJob f;
    if (auto s = optional_member(j, "system")) f.system = parse_system(*s, where + ".system");
    f.bath = parse_bath(member(j, "bath", where), where + ".bath");
    f.temperature = parse_temperature(optional_member(j, "temperature"), where + ".temperature");
    return f;
}

template <class T>
T parse_sd_job(const Json& j, const std::string& where) {
    require_object(j, where);
    reject_unknown(j, {"spectral_density", "temperature"}, where);
    T out;
    out.spectral_density = parse_spectral_density(member(j, "spectral_density", where), where + ".spectral_density");
    out.temperature = parse_temperature(optional_member(j, "temperature"), where + ".temperature");
    return out;
}

OracleJob parse_oracle(const Json& j, const std::string& where) {
    require_object(j, where);
    reject_unknown(j, {"system", "bath", "cutoffs", "temperature", "rho0"}, where);
    OracleJob o;
    if (auto s = optional_member(j, "system")) o.system = parse_system(*s, where + ".system");
    o.bath = parse_bath(member(j, "bath", where), where + ".bath");
    const Json& cuts = member(j, "cutoffs", where);
    if (!cuts.is_array()) config_error(where + ".cutoffs must be an array");
    for (const auto& c : cuts) o.cutoffs.push_back(static_cast<std::size_t>(as_count(c, where + ".cutoffs")));
    o.temperature = parse_temperature(optional_member(j, "temperature"), where + ".temperature");
    o.rho0 = parse_density(member(j, "rho0", where), where + ".rho0");
    return o;
}

// ---------------------------------------------------------------------------
// Emission helpers

Json system_json(const SystemSpec& s) { return Json{{"omega0", s.omega0}, {"dim", s.dim}}; }

Json bath_json(const FiniteBath& b) {
    Json modes = Json::array();
    for (const auto& m : b.modes) modes.push_back(Json{{"lambda", m.lambda}, {"omega", m.omega}});
    return Json{{"modes", modes}};
}

Json temperature_json(Temperature t) { return Json{{"kT", t.kT}}; }

Json sd_json(const OhmicSpectralDensity& sd) {
    return Json{{"coupling_c", sd.coupling_c}, {"cutoff_upper", sd.cutoff_upper}, {"cutoff_lower", sd.cutoff_lower}};
}

Json density_json(const DensityMatrix& rho) {
    Json re = Json::array();
    Json im = Json::array();
    for (Eigen::Index r = 0; r < rho.entries.rows(); ++r) {
        Json rr = Json::array();
        Json ii = Json::array();
        for (Eigen::Index c = 0; c < rho.entries.cols(); ++c) {
            rr.push_back(rho.entries(r, c).real());
            ii.push_back(rho.entries(r, c).imag());
        }
        re.push_back(rr);
        im.push_back(ii);
    }
    return Json{{"re", re}, {"im", im}};
}

Json finite_json(const FiniteJob& f) {
    return Json{{"system", system_json(f.system)}, {"bath", bath_json(f.bath)},
                {"temperature", temperature_json(f.temperature)}};
}

template <class T>
Json sd_job_json(const T& j) {
    return Json{{"spectral_density", sd_json(j.spectral_density)}, {"temperature", temperature_json(j.temperature)}};
}

Json oracle_json(const OracleJob& o) {
    return Json{{"system", system_json(o.system)},
                {"bath", bath_json(o.bath)},
                {"cutoffs", o.cutoffs},
                {"temperature", temperature_json(o.temperature)},
                {"rho0", density_json(o.rho0)}};
}

Json tolerances_json(const Tolerances& t) {
    const auto& q = t.quadrature;
    return Json{{"rational_tol", t.rational_tol},
                {"max_den", t.max_den},
                {"quadrature",
                 {{"abs_tol", q.abs_tol},
                  {"rel_tol", q.rel_tol},
                  {"max_subdivisions", q.max_subdivisions},
                  {"oscillation_split", q.oscillation_split},
                  {"tail_epsilon", q.tail_epsilon},
                  {"strict", q.strict}}},
                {"leak_tol", t.leak_tol},
                {"budget_pure", t.budget.pure},
                {"budget_mixed", t.budget.mixed},
                {"density",
                 {{"hermiticity", t.density.hermiticity},
                  {"trace", t.density.trace},
                  {"eigenvalue_floor", t.density.eigenvalue_floor}}},
                {"burn_in", t.burn_in}};
}

Json config_json(const RunConfig& c) {
    Json j;
    j["job"] = job_name(c.job);
    std::visit(
        [&](const auto& job) {
            using T = std::decay_t<decltype(job)>;
            if constexpr (std::is_same_v<T, FiniteJob>) {
                j["finite"] = finite_json(job);
            } else if constexpr (std::is_same_v<T, ContinuumJob>) {
                j["continuum"] = sd_job_json(job);
            } else if constexpr (std::is_same_v<T, ClosedFormJob>) {
                j["closed_form"] = sd_job_json(job);
            } else if constexpr (std::is_same_v<T, EvolveJob>) {
                Json rate;
                std::visit(
                    [&](const auto& r) {
                        using R = std::decay_t<decltype(r)>;
                        if constexpr (std::is_same_v<R, FiniteJob>) rate["finite"] = finite_json(r);
                        if constexpr (std::is_same_v<R, ContinuumJob>) rate["continuum"] = sd_job_json(r);
                        if constexpr (std::is_same_v<R, ClosedFormJob>) rate["closed_form"] = sd_job_json(r);
                    },
                    job.rate);
                j["evolve"] = Json{{"rho0", density_json(job.rho0)}, {"rate", rate}};
            } else if constexpr (std::is_same_v<T, OracleJob>) {
                j["oracle"] = oracle_json(job);
            } else if constexpr (std::is_same_v<T, PeriodicityJob>) {
                Json p;
                if (job.system) p["system"] = system_json(*job.system);
                p["bath"] = bath_json(job.bath);
                j["periodicity"] = p;
            } else if constexpr (std::is_same_v<T, CompareJob>) {
                Json p = Json::object();
                if (job.scenario) p["scenario"] = oracle_json(*job.scenario);
                if (!job.oracle_result.empty()) p["oracle_result"] = job.oracle_result;
                if (!job.gamma_series.empty()) p["gamma_series"] = job.gamma_series;
                j["compare"] = p;
            }
        },
        c.job);
    if (c.grid) {
        j["grid"] = Json{{"start", c.grid->start},
                         {"stop", c.grid->stop},
                         {"count", c.grid->count},
                         {"spacing", c.grid->spacing == GridSpacing::Linear ? "linear" : "log"}};
    }
    j["format"] = c.format == OutputFormat::Csv ? "csv" : "json";
    j["output"] = c.output;
    j["tolerances"] = tolerances_json(c.tolerances);
    return j;
}

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Json big_json(const BigInt& v) {
    if (v <= BigInt(std::numeric_limits<std::int64_t>::max())) return v.convert_to<std::int64_t>();
    return v.str();
}

std::string header_lines(std::string_view job, std::string_view echo) {
    std::string out = "# dephasim ";
    out += version();
    out += "\n# job: ";
    out += job;
    out += "\n";
    if (!echo.empty()) {
        out += "# config: ";
        out += echo;
        out += "\n";
    }
    return out;
}

Json envelope(const RunConfig& config) {
    Json j;
    j["dephasim_version"] = version();
    j["job"] = job_name(config.job);
    j["config"] = config_json(config);
    return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

const std::vector<double>& require_times(const RunConfig& config, std::vector<double>& storage) {
    if (!config.grid) config_error(std::string("job '") + job_name(config.job) + "' needs a 'grid'");
    storage = make_grid(*config.grid);
    return storage;
}

OracleScenario make_scenario(const OracleJob& o, std::vector<double> times) {
    OracleScenario s;
    s.system = o.system;
    s.bath = o.bath;
    s.bath_cutoffs = o.cutoffs;
    s.temp = o.temperature;
    s.rho_s0 = o.rho0;
    s.times = std::move(times);
    return s;
}

OracleOptions oracle_options(const Tolerances& t) {
    OracleOptions opts;
    opts.budget = t.budget;
    opts.leak_tol = t.leak_tol;
    return opts;
}

Json series_summary_json(const SeriesSummary& s) {
    Json j;
    j["samples"] = s.samples;
    j["mean"] = s.mean;
    j["min_after_burn_in"] = s.min_after_burn_in ? Json(*s.min_after_burn_in) : Json(nullptr);
    j["max"] = s.max;
    j["fraction_in_band"] = s.fraction_in_band;
    j["burn_in"] = s.burn_in;
    j["band"] = Json::array({s.band_low, s.band_high});
    return j;
}

// ---------------------------------------------------------------------------
// Jobs

std::string run_finite(const RunConfig& config, const FiniteJob& job) {
    std::vector<double> times;
    require_times(config, times);
    const auto series = gamma_finite_series(job.bath, job.system, job.temperature, times);
    const auto summary = summarize(series, config.tolerances.burn_in);
    if (config.format == OutputFormat::Csv) return emit_figure_data(series, summary, config.format, emit_config(config));
    Json j = envelope(config);
    j["method"] = series.method;
    j["summary"] = series_summary_json(summary);
    j["times"] = series.times;
    j["gamma"] = series.values;
    return dump(j);
}

std::string run_continuum(const RunConfig& config, const ContinuumJob& job) {
    std::vector<double> times;
    require_times(config, times);
    std::vector<double> values;
    std::vector<double> errors;
    std::vector<bool> converged;
    for (double t : times) {
        const auto r = gamma_quadrature(job.spectral_density, job.temperature, t, config.tolerances.quadrature);
        values.push_back(r.value);
        errors.push_back(r.error_estimate);
        converged.push_back(r.converged);
    }
    if (config.format == OutputFormat::Csv) {
        std::string out = header_lines("continuum", emit_config(config));
        out += "t,gamma,error_estimate,converged\n";
        for (std::size_t k = 0; k < times.size(); ++k)
            out += num(times[k]) + "," + num(values[k]) + "," + num(errors[k]) + "," + (converged[k] ? "1" : "0") + "\n";
        return out;
    }
    Json j = envelope(config);
    j["method"] = "gauss-kronrod-21";
    j["times"] = times;
    j["gamma"] = values;
    j["error_estimate"] = errors;
    j["converged"] = converged;
    return dump(j);
}

std::string run_closed_form(const RunConfig& config, const ClosedFormJob& job) {
    std::vector<double> times;
    require_times(config, times);
    const auto& sd = job.spectral_density;
    const auto temp = job.temperature;
    struct Row {
        double t;
        Decomposition d;
        ClosedForm short_time;
        ClosedForm high_t;
    };
    std::vector<Row> rows;
    for (double t : times)
        rows.push_back({t, gamma_decomposition(sd, temp, t), gamma_short_time(sd, temp, t),
                        gamma_high_temperature(sd, temp, t)});
    if (config.format == OutputFormat::Csv) {
        std::string out = header_lines("closed_form", emit_config(config));
        out += "# thermal term: approximation valid for kT << Lambda\n";
        out += "t,gamma_vac,gamma_therm,gamma_total,gamma_short_time,gamma_high_temperature,"
               "therm_in_regime,short_time_in_regime,high_temperature_in_regime\n";
        for (const auto& r : rows) {
            out += num(r.t) + "," + num(r.d.vacuum) + "," + num(r.d.thermal) + "," + num(r.d.total) + "," +
                   num(r.short_time.value) + "," + num(r.high_t.value) + "," + (r.d.in_regime ? "1" : "0") + "," +
                   (r.short_time.in_regime ? "1" : "0") + "," + (r.high_t.in_regime ? "1" : "0") + "\n";
        }
        return out;
    }
    Json j = envelope(config);
    j["note"] = "thermal term: approximation valid for kT << Lambda";
    Json cols = Json::object();
    for (const char* key : {"times", "gamma_vac", "gamma_therm", "gamma_total", "gamma_short_time",
                            "gamma_high_temperature", "therm_in_regime", "short_time_in_regime",
                            "high_temperature_in_regime"})
        cols[key] = Json::array();
    for (const auto& r : rows) {
        cols["times"].push_back(r.t);
        cols["gamma_vac"].push_back(r.d.vacuum);
        cols["gamma_therm"].push_back(r.d.thermal);
        cols["gamma_total"].push_back(r.d.total);
        cols["gamma_short_time"].push_back(r.short_time.value);
        cols["gamma_high_temperature"].push_back(r.high_t.value);
        cols["therm_in_regime"].push_back(r.d.in_regime);
        cols["short_time_in_regime"].push_back(r.short_time.in_regime);
        cols["high_temperature_in_regime"].push_back(r.high_t.in_regime);
    }
    for (auto it = cols.begin(); it != cols.end(); ++it) j[it.key()] = it.value();
    return dump(j);
}

std::string run_evolve(const RunConfig& config, const EvolveJob& job) {
    std::vector<double> times;
    require_times(config, times);
    validate(job.rho0, config.tolerances.density);
    std::string source;
    std::vector<double> gammas;
    for (double t : times) {
        double g = 0.0;
        std::visit(
            [&](const auto& r) {
                using R = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<R, FiniteJob>) {
                    source = "finite";
                    g = gamma_finite(r.bath, r.system, r.temperature, t);
                } else if constexpr (std::is_same_v<R, ContinuumJob>) {
                    source = "continuum";
                    g = gamma_quadrature(r.spectral_density, r.temperature, t, config.tolerances.quadrature).value;
                } else {
                    source = "closed-form";
                    g = gamma_decomposition(r.spectral_density, r.temperature, t).total;
                }
            },
            job.rate);
        gammas.push_back(g);
    }
    std::vector<DensityMatrix> states;
    std::vector<double> coherence;
    for (double g : gammas) {
        states.push_back(dephase(job.rho0, DephasingMap{g, source}));
        coherence.push_back(coherence_l1(states.back()));
    }
    const std::size_t dim = job.rho0.dim();
    if (config.format == OutputFormat::Csv) {
        std::string out = header_lines("evolve", emit_config(config));
        out += "# rate source: " + source + "\n";
        out += "t,gamma,coherence_l1";
        for (std::size_t n = 0; n < dim; ++n)
            for (std::size_t m = 0; m < dim; ++m)
                out += ",re_" + std::to_string(n) + "_" + std::to_string(m) + ",im_" + std::to_string(n) + "_" +
                       std::to_string(m);
        out += "\n";
        for (std::size_t k = 0; k < times.size(); ++k) {
            out += num(times[k]) + "," + num(gammas[k]) + "," + num(coherence[k]);
            for (std::size_t n = 0; n < dim; ++n)
                for (std::size_t m = 0; m < dim; ++m)
                    out += "," + num(states[k](n, m).real()) + "," + num(states[k](n, m).imag());
            out += "\n";
        }
        return out;
    }
    Json j = envelope(config);
    j["source"] = source;
    j["times"] = times;
    j["gamma"] = gammas;
    j["coherence_l1"] = coherence;
    Json rho = Json::array();
    for (const auto& s : states) rho.push_back(density_json(s));
    j["rho"] = rho;
    return dump(j);
}

Json oracle_result_json(const OracleResult& r) {
    Json j;
    j["times"] = r.times;
    j["rho0"] = density_json(r.rho_s0);
    Json reduced = Json::array();
    for (const auto& s : r.reduced) reduced.push_back(density_json(s));
    j["reduced"] = reduced;
    Json diag;
    Json norm = Json::array();
    Json top = Json::array();
    for (const auto& d : r.diagnostics) {
        norm.push_back(d.norm_defect);
        top.push_back(d.top_population);
    }
    diag["norm_defect"] = norm;
    diag["top_population"] = top;
    diag["max_top_population"] = r.max_top_population;
    diag["pure_propagation"] = r.pure_propagation;
    diag["eigen_residual"] = r.propagator.eigen_residual;
    diag["unitarity_defect"] = r.propagator.unitarity_defect;
    j["diagnostics"] = diag;
    return j;
}

std::string comparison_csv(const Comparison& c) {
    std::string out = "# max_deviation: " + num(c.max_deviation) + "\n";
    out += "t,n,m,oracle_abs,analytic_abs\n";
    for (const auto& row : c.table)
        out += num(row.t) + "," + std::to_string(row.n) + "," + std::to_string(row.m) + "," + num(row.oracle) + "," +
               num(row.analytic) + "\n";
    return out;
}

std::string run_oracle(const RunConfig& config, const OracleJob& job) {
    std::vector<double> times;
    require_times(config, times);
    validate(job.rho0, config.tolerances.density);
    const auto scn = make_scenario(job, times);
    const auto result = evolve_exact(scn, oracle_options(config.tolerances));
    const auto gamma = gamma_finite_series(job.bath, job.system, job.temperature, times);
    const auto cmp = compare(result, gamma);
    if (config.format == OutputFormat::Csv) {
        std::string out = header_lines("oracle", emit_config(config));
        out += "# max_top_population: " + num(result.max_top_population) + "\n";
        return out + comparison_csv(cmp);
    }
    Json j = envelope(config);
    const Json body = oracle_result_json(result);
    for (auto [key, value] : body.items()) j[key] = value;
    j["max_deviation_vs_finite"] = cmp.max_deviation;
    return dump(j);
}

std::string run_periodicity(const RunConfig& config, const PeriodicityJob& job) {
    const auto& tol = config.tolerances;
    const auto report = detect_periodicity(job.bath, tol.rational_tol, tol.max_den);
    std::optional<double> residual;
    if (report.periodic) residual = verify_recurrence(job.bath, job.system.value_or(SystemSpec{}), report);

    Json r;
    r["periodic"] = report.periodic;
    r["period"] = report.period ? Json(*report.period) : Json(nullptr);
    r["base_multiple"] = report.periodic ? big_json(report.base_multiple) : Json(nullptr);
    r["witness"] = report.witness ? Json::array({report.witness->first, report.witness->second}) : Json(nullptr);
    Json rats = Json::array();
    for (const auto& f : report.rationalizations)
        rats.push_back(Json{{"numerator", f.numerator}, {"denominator", f.denominator}, {"scale", f.scale}});
    r["rationalizations"] = rats;
    Json mult = Json::array();
    for (const auto& n : report.mode_multiples) mult.push_back(big_json(n));
    r["mode_multiples"] = mult;
    r["recurrence_residual"] = residual ? Json(*residual) : Json(nullptr);

    if (config.format == OutputFormat::Csv) {
        std::string out = header_lines("periodicity", emit_config(config));
        out += "key,value\n";
        out += std::string("periodic,") + (report.periodic ? "true" : "false") + "\n";
        out += "period," + (report.period ? num(*report.period) : std::string()) + "\n";
        out += "base_multiple," + (report.periodic ? report.base_multiple.str() : std::string()) + "\n";
        out += "witness," +
               (report.witness ? std::to_string(report.witness->first) + " " + std::to_string(report.witness->second)
                               : std::string()) +
               "\n";
        out += "recurrence_residual," + (residual ? num(*residual) : std::string()) + "\n";
        return out;
    }
    Json j = envelope(config);
    for (auto [key, value] : r.items()) j[key] = value;
    return dump(j);
}

Json load_json_file(const std::string& path, const char* what) {
    const std::string contents = read_file(path);
    try {
        return Json::parse(contents);
    } catch (const Json::parse_error& e) {
        config_error(std::string(what) + " '" + path + "' is not a JSON artifact: " + e.what());
    }
}

std::vector<double> number_array(const Json& j, const char* key, const std::string& where) {
    const Json& arr = member(j, key, where);
    if (!arr.is_array()) config_error(where + "." + key + " must be an array");
    std::vector<double> out;
    for (const auto& v : arr) out.push_back(as_double(v, where + "." + key));
    return out;
}

std::string run_compare(const RunConfig& config, const CompareJob& job) {
    OracleResult result;
    GammaSeries gamma;
    if (job.scenario) {
        std::vector<double> times;
        require_times(config, times);
        validate(job.scenario->rho0, config.tolerances.density);
        result = evolve_exact(make_scenario(*job.scenario, times), oracle_options(config.tolerances));
        gamma = gamma_finite_series(job.scenario->bath, job.scenario->system, job.scenario->temperature, times);
    } else {
        const Json oj = load_json_file(job.oracle_result, "oracle_result");
        result.times = number_array(oj, "times", "oracle_result");
        result.rho_s0 = parse_density(member(oj, "rho0", "oracle_result"), "oracle_result.rho0");
        const Json& reduced = member(oj, "reduced", "oracle_result");
        if (!reduced.is_array()) config_error("oracle_result.reduced must be an array");
        for (std::size_t k = 0; k < reduced.size(); ++k)
            result.reduced.push_back(parse_density(reduced[k], "oracle_result.reduced[" + std::to_string(k) + "]"));
        const Json gj = load_json_file(job.gamma_series, "gamma_series");
        gamma.times = number_array(gj, "times", "gamma_series");
        gamma.values = number_array(gj, "gamma", "gamma_series");
    }
    const auto cmp = compare(result, gamma);
    if (config.format == OutputFormat::Csv) return header_lines("compare", emit_config(config)) + comparison_csv(cmp);
    Json j = envelope(config);
    j["max_deviation"] = cmp.max_deviation;
    j["samples"] = result.times.size();
    Json rows = Json::array();
    for (const auto& row : cmp.table)
        rows.push_back(Json{{"t", row.t}, {"n", row.n}, {"m", row.m}, {"oracle", row.oracle}, {"analytic", row.analytic}});
    j["table"] = rows;
    return dump(j);
}

}  // namespace

// ---------------------------------------------------------------------------

const char* job_name(const Job& job) noexcept {
    static constexpr const char* names[] = {"finite", "continuum", "closed_form", "evolve",
                                            "oracle", "periodicity", "compare"};
    return names[job.index()];
}

std::vector<std::string> job_names() {
    return {"finite", "continuum", "closed_form", "evolve", "oracle", "periodicity", "compare"};
}

std::optional<OutputFormat> parse_format(std::string_view name) {
    if (name == "csv") return OutputFormat::Csv;
    if (name == "json") return OutputFormat::Json;
    return std::nullopt;
}

RunConfig parse_config(std::string_view json_text, std::string_view job_hint) {
    Json j;
    try {
        j = Json::parse(json_text);
    } catch (const Json::parse_error& e) {
        config_error(std::string("config is not valid JSON: ") + e.what());
    }
    require_object(j, "config");
    reject_unknown(j,
                   {"$schema", "job", "finite", "continuum", "closed_form", "evolve", "oracle", "periodicity",
                    "compare", "grid", "format", "output", "tolerances"},
                   "config");

    std::string job = text(j, "job", "config", std::string(job_hint));
    if (job.empty()) config_error("config names no job");
    if (!job_hint.empty() && job != job_hint)
        config_error("command-line job '" + std::string(job_hint) + "' disagrees with config job '" + job + "'");
    const auto names = job_names();
    if (std::find(names.begin(), names.end(), job) == names.end()) config_error("unknown job '" + job + "'");

    // Exactly one job section, and it must match the job name.
    int sections = 0;
    for (const auto& n : names) sections += j.contains(n) ? 1 : 0;
    if (sections != 1 || !j.contains(job))
        config_error("config must contain exactly one job section, named '" + job + "'");

    RunConfig c;
    c.tolerances = parse_tolerances(optional_member(j, "tolerances"));
    if (auto g = optional_member(j, "grid")) c.grid = parse_grid(*g);
    const auto fmt = parse_format(text(j, "format", "config", "csv"));
    if (!fmt) config_error("format must be 'csv' or 'json'");
    c.format = *fmt;
    c.output = text(j, "output", "config", "");

    const Json& body = j[job];
    if (job == "finite") {
        c.job = parse_finite(body, "finite");
    } else if (job == "continuum") {
        c.job = parse_sd_job<ContinuumJob>(body, "continuum");
    } else if (job == "closed_form") {
        c.job = parse_sd_job<ClosedFormJob>(body, "closed_form");
    } else if (job == "evolve") {
        require_object(body, "evolve");
        reject_unknown(body, {"rho0", "rate"}, "evolve");
        EvolveJob e;
        e.rho0 = parse_density(member(body, "rho0", "evolve"), "evolve.rho0");
        const Json& rate = member(body, "rate", "evolve");
        require_object(rate, "evolve.rate");
        reject_unknown(rate, {"finite", "continuum", "closed_form"}, "evolve.rate");
        if (rate.size() != 1) config_error("evolve.rate must hold exactly one of finite, continuum, closed_form");
        if (rate.contains("finite"))
            e.rate = parse_finite(rate["finite"], "evolve.rate.finite");
        else if (rate.contains("continuum"))
            e.rate = parse_sd_job<ContinuumJob>(rate["continuum"], "evolve.rate.continuum");
        else
            e.rate = parse_sd_job<ClosedFormJob>(rate["closed_form"], "evolve.rate.closed_form");
        c.job = std::move(e);
    } else if (job == "oracle") {
        c.job = parse_oracle(body, "oracle");
    } else if (job == "periodicity") {
        require_object(body, "periodicity");
        reject_unknown(body, {"system", "bath"}, "periodicity");
        PeriodicityJob p;
        if (auto s = optional_member(body, "system")) p.system = parse_system(*s, "periodicity.system");
        p.bath = parse_bath(member(body, "bath", "periodicity"), "periodicity.bath");
        c.job = std::move(p);
    } else {
        require_object(body, "compare");
        reject_unknown(body, {"scenario", "oracle_result", "gamma_series"}, "compare");
        CompareJob cj;
        if (auto s = optional_member(body, "scenario")) cj.scenario = parse_oracle(*s, "compare.scenario");
        cj.oracle_result = text(body, "oracle_result", "compare", "");
        cj.gamma_series = text(body, "gamma_series", "compare", "");
        const bool files = !cj.oracle_result.empty() || !cj.gamma_series.empty();
        if (cj.scenario.has_value() == files)
            config_error("compare needs either 'scenario' or both 'oracle_result' and 'gamma_series'");
        if (files && (cj.oracle_result.empty() || cj.gamma_series.empty()))
            config_error("compare needs both 'oracle_result' and 'gamma_series'");
        for (const auto& p : {cj.oracle_result, cj.gamma_series})
            if (!p.empty() && !std::filesystem::exists(p)) config_error("referenced file '" + p + "' does not exist");
        c.job = std::move(cj);
    }

    // Value-level validation of every embedded model type.
    ValidationReport r;
    auto add = [&](ValidationReport&& more) {
        for (auto& v : more) r.push_back(std::move(v));
    };
    auto check_finite = [&](const FiniteJob& f) {
        add(check(f.system));
        add(check(f.bath));
        add(check(f.temperature));
    };
    auto check_sd = [&](const OhmicSpectralDensity& sd, Temperature t) {
        add(check(sd));
        add(check(t));
    };
    auto check_oracle = [&](const OracleJob& o) {
        OracleScenario s = make_scenario(o, {0.0});
        add(check(s));
        add(check(o.rho0, c.tolerances.density));
    };
    std::visit(
        [&](const auto& jb) {
            using T = std::decay_t<decltype(jb)>;
            if constexpr (std::is_same_v<T, FiniteJob>) check_finite(jb);
            if constexpr (std::is_same_v<T, ContinuumJob> || std::is_same_v<T, ClosedFormJob>)
                check_sd(jb.spectral_density, jb.temperature);
            if constexpr (std::is_same_v<T, EvolveJob>) {
                add(check(jb.rho0, c.tolerances.density));
                std::visit(
                    [&](const auto& rate) {
                        using R = std::decay_t<decltype(rate)>;
                        if constexpr (std::is_same_v<R, FiniteJob>)
                            check_finite(rate);
                        else
                            check_sd(rate.spectral_density, rate.temperature);
                    },
                    jb.rate);
            }
            if constexpr (std::is_same_v<T, OracleJob>) check_oracle(jb);
            if constexpr (std::is_same_v<T, PeriodicityJob>) {
                if (jb.system) add(check(*jb.system));
                add(check(jb.bath));
            }
            if constexpr (std::is_same_v<T, CompareJob>) {
                if (jb.scenario) check_oracle(*jb.scenario);
            }
        },
        c.job);
    if (c.grid) add(check(*c.grid));
    const bool needs_grid = !std::holds_alternative<PeriodicityJob>(c.job) &&
                            !(std::holds_alternative<CompareJob>(c.job) && !std::get<CompareJob>(c.job).scenario);
    if (needs_grid && !c.grid) r.push_back({ErrorCode::ConfigError, std::string("job '") + job + "' needs a 'grid'"});
    if (!r.empty()) throw Error(std::move(r));
    return c;
}

std::string emit_config(const RunConfig& config) { return config_json(config).dump(); }

SeriesSummary summarize(const GammaSeries& series, double burn_in, double band_low, double band_high) {
    if (series.values.empty()) throw Error(ErrorCode::EmptySeries, "cannot summarize an empty series");
    if (series.values.size() != series.times.size()) throw Error(ErrorCode::GridMismatch, "series times/values differ");
    SeriesSummary s;
    s.samples = series.values.size();
    s.burn_in = burn_in;
    s.band_low = band_low;
    s.band_high = band_high;
    double sum = 0.0;
    std::size_t in_band = 0;
    s.max = series.values.front();
    for (std::size_t k = 0; k < series.values.size(); ++k) {
        const double g = series.values[k];
        sum += g;
        s.max = std::max(s.max, g);
        if (g >= band_low && g <= band_high) ++in_band;
        if (series.times[k] >= burn_in) s.min_after_burn_in = s.min_after_burn_in ? std::min(*s.min_after_burn_in, g) : g;
    }
    s.mean = sum / static_cast<double>(s.samples);
    s.fraction_in_band = static_cast<double>(in_band) / static_cast<double>(s.samples);
    return s;
}

std::string emit_figure_data(const GammaSeries& series, const SeriesSummary& summary, OutputFormat format,
                             std::string_view echo_json) {
    if (series.values.empty()) throw Error(ErrorCode::EmptySeries, "cannot emit an empty series");
    if (format == OutputFormat::Json) {
        Json j;
        j["dephasim_version"] = version();
        if (!echo_json.empty()) j["config"] = Json::parse(echo_json);
        j["method"] = series.method;
        j["summary"] = series_summary_json(summary);
        j["times"] = series.times;
        j["gamma"] = series.values;
        return dump(j);
    }
    std::string out = header_lines("finite", echo_json);
    out += "# method: " + series.method + "\n";
    out += "# summary: samples=" + std::to_string(summary.samples) + " mean=" + num(summary.mean) +
           " min_after_burn_in=" + (summary.min_after_burn_in ? num(*summary.min_after_burn_in) : std::string("none")) +
           " max=" + num(summary.max) + " fraction_in_band=" + num(summary.fraction_in_band) +
           " burn_in=" + num(summary.burn_in) + " band=[" + num(summary.band_low) + "," + num(summary.band_high) +
           "]\n";
    out += "t,gamma\n";
    for (std::size_t k = 0; k < series.values.size(); ++k) out += num(series.times[k]) + "," + num(series.values[k]) + "\n";
    return out;
}

std::string run(const RunConfig& config) {
    return std::visit(
        [&](const auto& job) -> std::string {
            using T = std::decay_t<decltype(job)>;
            if constexpr (std::is_same_v<T, FiniteJob>) return run_finite(config, job);
            if constexpr (std::is_same_v<T, ContinuumJob>) return run_continuum(config, job);
            if constexpr (std::is_same_v<T, ClosedFormJob>) return run_closed_form(config, job);
            if constexpr (std::is_same_v<T, EvolveJob>) return run_evolve(config, job);
            if constexpr (std::is_same_v<T, OracleJob>) return run_oracle(config, job);
            if constexpr (std::is_same_v<T, PeriodicityJob>) return run_periodicity(config, job);
            if constexpr (std::is_same_v<T, CompareJob>) return run_compare(config, job);
        },
        config.job);
}

void write_atomic(const std::string& path, std::string_view contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot open '" + tmp.string() + "' for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) throw Error(ErrorCode::IoError, "write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorCode::IoError, "cannot move output into '" + path + "'");
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::optional<std::string> run_file(std::string_view job, const std::string& config_path,
                                    const std::optional<std::string>& out_override,
                                    const std::optional<OutputFormat>& format_override) {
    RunConfig config = parse_config(read_file(config_path), job);
    if (out_override) config.output = *out_override;
    if (format_override) config.format = *format_override;

    if (!config.output.empty()) {
        namespace fs = std::filesystem;
        const auto same = [](const std::string& a, const std::string& b) {
            std::error_code ec;
            return fs::weakly_canonical(a, ec) == fs::weakly_canonical(b, ec);
        };
        std::vector<std::string> inputs{config_path};
        if (const auto* cj = std::get_if<CompareJob>(&config.job)) {
            inputs.push_back(cj->oracle_result);
            inputs.push_back(cj->gamma_series);
        }
        for (const auto& in : inputs)
            if (!in.empty() && same(config.output, in))
                config_error("output path '" + config.output + "' would overwrite input '" + in + "'");
    }

    std::string artifact = run(config);
    if (config.output.empty()) return artifact;
    write_atomic(config.output, artifact);
    return std::nullopt;
}

}  // namespace dephasim::jobs
