#pragma once

#include <cstddef>
#include <string>

#include "dephasim/model.hpp"

namespace dephasim {

struct QuadratureConfig {
    double abs_tol = 1e-13;
    double rel_tol = 1e-10;
    // Bisections allowed on top of the initial panels.
    std::size_t max_subdivisions = 200000;
    // Split [w_L, w_max] at the zeros 2 pi k / t of (1 - cos w t) before adapting.
    bool oscillation_split = true;
    // Upper limit w_max = Lambda * ln(1 / tail_epsilon).
    double tail_epsilon = 1e-16;
    // Throw ToleranceNotMet instead of returning an unconverged result.
    bool strict = true;

    bool operator==(const QuadratureConfig&) const = default;
};

ValidationReport check(const QuadratureConfig& cfg);

struct QuadratureResult {
    double value = 0.0;
    // Kronrod error estimate summed over panels, plus the analytic tail bound.
    double error_estimate = 0.0;
    double tail_bound = 0.0;
    std::size_t panels = 0;
    bool converged = true;
};

/// (1/pi) * integral_{w_L}^{inf} J(w) (1 - cos w t) / w^2 coth(w / 2kT) dw
/// for the ohmic density, by globally adaptive Gauss-Kronrod (21 points).
QuadratureResult gamma_quadrature(const OhmicSpectralDensity& sd, Temperature temp, double t,
                                  const QuadratureConfig& cfg = {});

// The integrand itself, including the 1/pi prefactor. Continuous at w -> 0.
double gamma_integrand(const OhmicSpectralDensity& sd, Temperature temp, double t, double omega) noexcept;

// Closed-form value together with whether the inputs sit inside the regime
// the formula was derived for.
struct ClosedForm {
    double value = 0.0;
    bool in_regime = true;
    std::string note;
};

// (C / 2 pi) ln(1 + Lambda^2 t^2). Exact at kT = 0 for w_L = 0; ignores w_L.
double gamma_vac_closed(const OhmicSpectralDensity& sd, double t);

// (C / pi) ln[sinh(pi kT t) / (pi kT t)] - (C / pi) kT w_L t^2, valid for kT << Lambda.
// Zero at kT = 0.
ClosedForm gamma_therm_closed(const OhmicSpectralDensity& sd, Temperature temp, double t);

// (C / pi) kT (pi^2 kT / 6 - w_L) t^2, for kT t << 1.
ClosedForm gamma_short_time(const OhmicSpectralDensity& sd, Temperature temp, double t);

// C kT t, for Lambda >> kT >> 1/t >> w_L.
ClosedForm gamma_high_temperature(const OhmicSpectralDensity& sd, Temperature temp, double t);

struct Decomposition {
    double vacuum = 0.0;
    double thermal = 0.0;
    double total = 0.0;
    bool in_regime = true;
};

Decomposition gamma_decomposition(const OhmicSpectralDensity& sd, Temperature temp, double t);

// ln(sinh(x) / x) for x >= 0, accurate near 0 and without overflow for large x.
double log_sinhc(double x) noexcept;

}  // namespace dephasim
