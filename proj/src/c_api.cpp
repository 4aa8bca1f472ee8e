#include "dephasim/dephasim.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "dephasim/continuum.hpp"
#include "dephasim/evolution.hpp"
#include "dephasim/finite_bath.hpp"
#include "dephasim/jobs.hpp"
#include "dephasim/oracle.hpp"

struct dphs_bath {
    dephasim::FiniteBath bath;
};

struct dphs_density {
    dephasim::DensityMatrix rho;
};

struct dphs_periodicity {
    dephasim::PeriodicityReport report;
};

namespace {

thread_local std::string last_error;

dphs_status to_status(dephasim::ErrorCode code) {
    using dephasim::ErrorCode;
    switch (code) {
        case ErrorCode::InvalidArgument: return DPHS_ERR_INVALID_ARGUMENT;
        case ErrorCode::NonPositiveFrequency: return DPHS_ERR_NON_POSITIVE_FREQUENCY;
        case ErrorCode::NegativeTemperature: return DPHS_ERR_NEGATIVE_TEMPERATURE;
        case ErrorCode::CutoffOrderViolation: return DPHS_ERR_CUTOFF_ORDER;
        case ErrorCode::NonHermitian: return DPHS_ERR_NON_HERMITIAN;
        case ErrorCode::TraceNotOne: return DPHS_ERR_TRACE_NOT_ONE;
        case ErrorCode::NotPositiveSemidefinite: return DPHS_ERR_NOT_POSITIVE_SEMIDEFINITE;
        case ErrorCode::EmptyGrid: return DPHS_ERR_EMPTY_GRID;
        case ErrorCode::NonMonotonicGrid: return DPHS_ERR_NON_MONOTONIC_GRID;
        case ErrorCode::NonPositiveRatio: return DPHS_ERR_NON_POSITIVE_RATIO;
        case ErrorCode::NotPeriodicReport: return DPHS_ERR_NOT_PERIODIC;
        case ErrorCode::ToleranceNotMet: return DPHS_ERR_TOLERANCE_NOT_MET;
        case ErrorCode::DimensionBudgetExceeded: return DPHS_ERR_DIMENSION_BUDGET;
        case ErrorCode::TruncationInadequate: return DPHS_ERR_TRUNCATION_INADEQUATE;
        case ErrorCode::NoOffDiagonalSupport: return DPHS_ERR_NO_OFF_DIAGONAL_SUPPORT;
        case ErrorCode::GridMismatch: return DPHS_ERR_GRID_MISMATCH;
        case ErrorCode::EmptySeries: return DPHS_ERR_EMPTY_SERIES;
        case ErrorCode::ConfigError: return DPHS_ERR_CONFIG;
        case ErrorCode::IoError: return DPHS_ERR_IO;
    }
    return DPHS_ERR_INTERNAL;
}

// Runs `body`, translating exceptions into a status and the thread-local message.
template <class Body>
dphs_status guarded(Body&& body) noexcept {
    try {
        last_error.clear();
        body();
        return DPHS_OK;
    } catch (const dephasim::Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return DPHS_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return DPHS_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return DPHS_ERR_INTERNAL;
    }
}

void require(bool ok, const char* what) {
    if (!ok) throw dephasim::Error(dephasim::ErrorCode::InvalidArgument, what);
}

char* duplicate(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

dephasim::SystemSpec system_for(double omega0) {
    // dim is irrelevant to Gamma; the smallest valid value keeps validation happy.
    return dephasim::SystemSpec{omega0, 2};
}

std::optional<dephasim::jobs::OutputFormat> format_arg(const char* format) {
    if (format == nullptr) return std::nullopt;
    auto f = dephasim::jobs::parse_format(format);
    if (!f) throw dephasim::Error(dephasim::ErrorCode::ConfigError, std::string("unknown format '") + format + "'");
    return f;
}

dephasim::ClosedForm closed(int which, double c, double up, double low, double kT, double t) {
    const dephasim::OhmicSpectralDensity sd{c, up, low};
    const dephasim::Temperature temp{kT};
    if (which == 0) return dephasim::gamma_therm_closed(sd, temp, t);
    if (which == 1) return dephasim::gamma_short_time(sd, temp, t);
    return dephasim::gamma_high_temperature(sd, temp, t);
}

}  // namespace

extern "C" {

const char* dphs_version(void) { return dephasim::version(); }

const char* dphs_last_error(void) { return last_error.c_str(); }

const char* dphs_status_name(dphs_status status) {
    switch (status) {
        case DPHS_OK: return "OK";
        case DPHS_ERR_INTERNAL: return "Internal";
        default: break;
    }
    for (int c = 0; c <= static_cast<int>(dephasim::ErrorCode::IoError); ++c) {
        const auto code = static_cast<dephasim::ErrorCode>(c);
        if (to_status(code) == status) return dephasim::to_string(code);
    }
    return "Unknown";
}

int dphs_exit_code(dphs_status status) {
    if (status == DPHS_OK) return 0;
    if (status == DPHS_ERR_TOLERANCE_NOT_MET || status == DPHS_ERR_TRUNCATION_INADEQUATE) return 2;
    if (status == DPHS_ERR_INTERNAL) return 2;
    return 1;
}

void dphs_string_free(char* text) { std::free(text); }

dphs_status dphs_bath_create(const double* lambdas, const double* omegas, size_t modes, dphs_bath** out) {
    return guarded([&] {
        require(out != nullptr && (modes == 0 || (lambdas != nullptr && omegas != nullptr)), "null argument");
        dephasim::FiniteBath bath;
        for (size_t i = 0; i < modes; ++i) bath.modes.push_back({lambdas[i], omegas[i]});
        dephasim::validate(bath);
        *out = new dphs_bath{std::move(bath)};
    });
}

void dphs_bath_destroy(dphs_bath* bath) { delete bath; }

size_t dphs_bath_size(const dphs_bath* bath) { return bath == nullptr ? 0 : bath->bath.modes.size(); }

dphs_status dphs_gamma_finite(const dphs_bath* bath, double omega0, double kT, double t, double* out) {
    return guarded([&] {
        require(bath != nullptr && out != nullptr, "null argument");
        *out = dephasim::gamma_finite(bath->bath, system_for(omega0), dephasim::Temperature{kT}, t);
    });
}

dphs_status dphs_gamma_finite_series(const dphs_bath* bath, double omega0, double kT, const double* times,
                                     size_t count, double* values_out) {
    return guarded([&] {
        require(bath != nullptr && (count == 0 || (times != nullptr && values_out != nullptr)), "null argument");
        const auto series = dephasim::gamma_finite_series(bath->bath, system_for(omega0), dephasim::Temperature{kT},
                                                          std::span<const double>(times, count));
        std::copy(series.values.begin(), series.values.end(), values_out);
    });
}

dphs_status dphs_rationalize(double ratio, double tol, int64_t max_den, int* is_rational, int64_t* p, int64_t* q) {
    return guarded([&] {
        require(is_rational != nullptr && p != nullptr && q != nullptr, "null argument");
        const auto f = dephasim::rationalize(ratio, tol, max_den);
        *is_rational = f ? 1 : 0;
        if (f) {
            *p = f->numerator;
            *q = f->denominator;
        }
    });
}

dphs_status dphs_detect_periodicity(const dphs_bath* bath, double tol, int64_t max_den, dphs_periodicity** out) {
    return guarded([&] {
        require(bath != nullptr && out != nullptr, "null argument");
        *out = new dphs_periodicity{dephasim::detect_periodicity(bath->bath, tol, max_den)};
    });
}

void dphs_periodicity_destroy(dphs_periodicity* report) { delete report; }

int dphs_periodicity_is_periodic(const dphs_periodicity* report) {
    return report != nullptr && report->report.periodic ? 1 : 0;
}

dphs_status dphs_periodicity_period(const dphs_periodicity* report, double* period) {
    return guarded([&] {
        require(report != nullptr && period != nullptr, "null argument");
        if (!report->report.period)
            throw dephasim::Error(dephasim::ErrorCode::NotPeriodicReport, "report is aperiodic");
        *period = *report->report.period;
    });
}

dphs_status dphs_periodicity_witness(const dphs_periodicity* report, size_t* i, size_t* j) {
    return guarded([&] {
        require(report != nullptr && i != nullptr && j != nullptr, "null argument");
        if (!report->report.witness) throw dephasim::Error(dephasim::ErrorCode::InvalidArgument, "report is periodic");
        *i = report->report.witness->first;
        *j = report->report.witness->second;
    });
}

dphs_status dphs_periodicity_mode_multiple(const dphs_periodicity* report, size_t mode, char** text) {
    return guarded([&] {
        require(report != nullptr && text != nullptr, "null argument");
        if (!report->report.periodic)
            throw dephasim::Error(dephasim::ErrorCode::NotPeriodicReport, "report is aperiodic");
        require(mode < report->report.mode_multiples.size(), "mode index out of range");
        *text = duplicate(report->report.mode_multiples[mode].str());
    });
}

dphs_status dphs_verify_recurrence(const dphs_bath* bath, double omega0, const dphs_periodicity* report,
                                   double* residual) {
    return guarded([&] {
        require(bath != nullptr && report != nullptr && residual != nullptr, "null argument");
        *residual = dephasim::verify_recurrence(bath->bath, system_for(omega0), report->report);
    });
}

dphs_quadrature_config dphs_quadrature_defaults(void) {
    const dephasim::QuadratureConfig d;
    return dphs_quadrature_config{d.abs_tol, d.rel_tol, d.max_subdivisions, d.oscillation_split ? 1 : 0,
                                  d.tail_epsilon};
}

dphs_status dphs_gamma_quadrature(double coupling_c, double cutoff_upper, double cutoff_lower, double kT, double t,
                                  const dphs_quadrature_config* config, double* value, double* error_estimate) {
    return guarded([&] {
        require(value != nullptr, "null argument");
        dephasim::QuadratureConfig cfg;
        if (config != nullptr) {
            cfg.abs_tol = config->abs_tol;
            cfg.rel_tol = config->rel_tol;
            cfg.max_subdivisions = config->max_subdivisions;
            cfg.oscillation_split = config->oscillation_split != 0;
            cfg.tail_epsilon = config->tail_epsilon;
        }
        const auto r = dephasim::gamma_quadrature({coupling_c, cutoff_upper, cutoff_lower}, {kT}, t, cfg);
        *value = r.value;
        if (error_estimate != nullptr) *error_estimate = r.error_estimate;
    });
}

dphs_status dphs_gamma_vac_closed(double coupling_c, double cutoff_upper, double t, double* value) {
    return guarded([&] {
        require(value != nullptr, "null argument");
        *value = dephasim::gamma_vac_closed({coupling_c, cutoff_upper, 0.0}, t);
    });
}

dphs_status dphs_gamma_therm_closed(double coupling_c, double cutoff_upper, double cutoff_lower, double kT, double t,
                                    double* value, int* in_regime) {
    return guarded([&] {
        require(value != nullptr, "null argument");
        const auto r = closed(0, coupling_c, cutoff_upper, cutoff_lower, kT, t);
        *value = r.value;
        if (in_regime != nullptr) *in_regime = r.in_regime ? 1 : 0;
    });
}

dphs_status dphs_gamma_short_time(double coupling_c, double cutoff_upper, double cutoff_lower, double kT, double t,
                                  double* value, int* in_regime) {
    return guarded([&] {
        require(value != nullptr, "null argument");
        const auto r = closed(1, coupling_c, cutoff_upper, cutoff_lower, kT, t);
        *value = r.value;
        if (in_regime != nullptr) *in_regime = r.in_regime ? 1 : 0;
    });
}

dphs_status dphs_gamma_high_temperature(double coupling_c, double cutoff_upper, double cutoff_lower, double kT,
                                        double t, double* value, int* in_regime) {
    return guarded([&] {
        require(value != nullptr, "null argument");
        const auto r = closed(2, coupling_c, cutoff_upper, cutoff_lower, kT, t);
        *value = r.value;
        if (in_regime != nullptr) *in_regime = r.in_regime ? 1 : 0;
    });
}

dphs_status dphs_density_create(size_t dim, const double* re, const double* im, dphs_density** out) {
    return guarded([&] {
        require(out != nullptr && re != nullptr && dim > 0, "null argument or zero dimension");
        const auto n = static_cast<Eigen::Index>(dim);
        dephasim::ComplexMatrix m(n, n);
        for (Eigen::Index r = 0; r < n; ++r)
            for (Eigen::Index c = 0; c < n; ++c) {
                const auto k = static_cast<size_t>(r) * dim + static_cast<size_t>(c);
                m(r, c) = dephasim::Complex(re[k], im != nullptr ? im[k] : 0.0);
            }
        dephasim::DensityMatrix rho{m};
        dephasim::validate(rho);
        *out = new dphs_density{std::move(rho)};
    });
}

void dphs_density_destroy(dphs_density* rho) { delete rho; }

size_t dphs_density_dim(const dphs_density* rho) { return rho == nullptr ? 0 : rho->rho.dim(); }

dphs_status dphs_density_entry(const dphs_density* rho, size_t n, size_t m, double* re, double* im) {
    return guarded([&] {
        require(rho != nullptr && re != nullptr && im != nullptr, "null argument");
        require(n < rho->rho.dim() && m < rho->rho.dim(), "index out of range");
        *re = rho->rho(n, m).real();
        *im = rho->rho(n, m).imag();
    });
}

dphs_status dphs_dephase(const dphs_density* rho, double gamma, dphs_density** out) {
    return guarded([&] {
        require(rho != nullptr && out != nullptr, "null argument");
        *out = new dphs_density{dephasim::dephase(rho->rho, dephasim::DephasingMap{gamma, "c-api"})};
    });
}

dphs_status dphs_coherence_l1(const dphs_density* rho, double* out) {
    return guarded([&] {
        require(rho != nullptr && out != nullptr, "null argument");
        *out = dephasim::coherence_l1(rho->rho);
    });
}

dphs_status dphs_oracle_max_deviation(const dphs_bath* bath, const size_t* cutoffs, double omega0, double kT,
                                      const dphs_density* rho0, const double* times, size_t count,
                                      double* max_deviation) {
    return guarded([&] {
        require(bath != nullptr && cutoffs != nullptr && rho0 != nullptr && times != nullptr &&
                    max_deviation != nullptr,
                "null argument");
        dephasim::OracleScenario scn;
        scn.system = dephasim::SystemSpec{omega0, rho0->rho.dim()};
        scn.bath = bath->bath;
        scn.bath_cutoffs.assign(cutoffs, cutoffs + bath->bath.modes.size());
        scn.temp = dephasim::Temperature{kT};
        scn.rho_s0 = rho0->rho;
        scn.times.assign(times, times + count);
        const auto result = dephasim::evolve_exact(scn);
        const auto gamma = dephasim::gamma_finite_series(scn.bath, scn.system, scn.temp, scn.times);
        *max_deviation = dephasim::compare(result, gamma).max_deviation;
    });
}

dphs_status dphs_run_config_text(const char* job, const char* config_json, const char* format, char** output) {
    return guarded([&] {
        require(config_json != nullptr && output != nullptr, "null argument");
        auto config = dephasim::jobs::parse_config(config_json, job != nullptr ? job : "");
        if (auto f = format_arg(format)) config.format = *f;
        *output = duplicate(dephasim::jobs::run(config));
    });
}

dphs_status dphs_run_config_file(const char* job, const char* config_path, const char* out_path, const char* format,
                                 char** output) {
    return guarded([&] {
        require(config_path != nullptr, "null config path");
        if (output != nullptr) *output = nullptr;
        std::optional<std::string> out_override;
        if (out_path != nullptr) out_override = out_path;
        auto text = dephasim::jobs::run_file(job != nullptr ? job : "", config_path, out_override, format_arg(format));
        if (text && output != nullptr) *output = duplicate(*text);
    });
}

}  // extern "C"
