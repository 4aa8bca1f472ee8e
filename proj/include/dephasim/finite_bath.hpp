#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "dephasim/model.hpp"

namespace dephasim {

using BigInt = boost::multiprecision::cpp_int;

inline constexpr double kDefaultRationalTol = 1e-14;
inline constexpr std::int64_t kDefaultMaxDenominator = 1'000'000;

// coth(omega / 2kT); exactly 1 at kT = 0 and once the argument exceeds 40.
double thermal_weight(double omega, Temperature temp) noexcept;

// Gamma(t) = omega0^2 sum_i (lambda_i / omega_i)^2 (1 - cos omega_i t) coth(omega_i / 2kT)
double gamma_finite(const FiniteBath& bath, const SystemSpec& system, Temperature temp, double t);

GammaSeries gamma_finite_series(const FiniteBath& bath, const SystemSpec& system, Temperature temp,
                                std::span<const double> times);

// Sup of Gamma over t: twice the prefactor sum.
double gamma_finite_bound(const FiniteBath& bath, const SystemSpec& system, Temperature temp);

struct Fraction {
    std::int64_t numerator = 1;
    std::int64_t denominator = 1;
};

// omega = (numerator / denominator) * scale, in lowest terms.
struct RationalFrequency {
    std::int64_t numerator = 1;
    std::int64_t denominator = 1;
    double scale = 1.0;
};

/// First continued-fraction convergent p/q of `ratio` with q <= max_den and
/// |ratio - p/q| <= tol * ratio, or nullopt when no convergent qualifies.
/// Throws NonPositiveRatio for ratio <= 0.
std::optional<Fraction> rationalize(double ratio, double tol = kDefaultRationalTol,
                                    std::int64_t max_den = kDefaultMaxDenominator);

struct PeriodicityReport {
    bool periodic = false;
    // Present iff periodic.
    std::optional<double> period;
    // period = 2 pi * base_multiple / scale, exactly.
    BigInt base_multiple = 0;
    // Aperiodic only: the first pair whose frequency ratio failed rationalization.
    std::optional<std::pair<std::size_t, std::size_t>> witness;
    // Periodic only: omega_i relative to modes[0], and n_i with period = n_i * 2 pi / omega_i.
    std::vector<RationalFrequency> rationalizations;
    std::vector<BigInt> mode_multiples;
};

PeriodicityReport detect_periodicity(const FiniteBath& bath, double tol = kDefaultRationalTol,
                                     std::int64_t max_den = kDefaultMaxDenominator);

// Gamma(period) at kT = 0. Throws NotPeriodicReport for aperiodic reports.
double verify_recurrence(const FiniteBath& bath, const SystemSpec& system, const PeriodicityReport& report);

}  // namespace dephasim
