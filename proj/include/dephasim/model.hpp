#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dephasim/error.hpp"

// Units: hbar = k_B = 1. Frequencies, temperatures and inverse times share one unit.

namespace dephasim {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

const char* version() noexcept;

// Harmonic-oscillator system: H_S = omega0 * a^dagger a, truncated to levels 0..dim-1.
struct SystemSpec {
    double omega0 = 1.0;
    std::size_t dim = 2;

    bool operator==(const SystemSpec&) const = default;
};

// One bath oscillator, coupled through lambda * H_S * (a_i^dagger + a_i).
struct BathMode {
    double lambda = 0.0;
    double omega = 1.0;

    bool operator==(const BathMode&) const = default;
};

struct FiniteBath {
    std::vector<BathMode> modes;

    bool operator==(const FiniteBath&) const = default;
};

struct Temperature {
    double kT = 0.0;

    bool operator==(const Temperature&) const = default;
};

// J(w) = C w exp(-w / cutoff_upper) theta(w - cutoff_lower)
struct OhmicSpectralDensity {
    double coupling_c = 0.0;
    double cutoff_upper = 1.0;
    double cutoff_lower = 0.0;

    double operator()(double omega) const noexcept;
    bool operator==(const OhmicSpectralDensity&) const = default;
};

struct DensityTolerances {
    double hermiticity = 1e-12;
    double trace = 1e-12;
    double eigenvalue_floor = -1e-10;

    bool operator==(const DensityTolerances&) const = default;
};

// System density matrix in the energy (Fock) basis.
struct DensityMatrix {
    ComplexMatrix entries;

    std::size_t dim() const noexcept { return static_cast<std::size_t>(entries.rows()); }
    Complex operator()(std::size_t n, std::size_t m) const { return entries(n, m); }

    static DensityMatrix from_pure_state(const ComplexVector& amplitudes);
    // Equal-weight superposition of the listed Fock levels.
    static DensityMatrix superposition(std::size_t dim, const std::vector<std::size_t>& levels);

    friend bool operator==(const DensityMatrix& a, const DensityMatrix& b) {
        return a.entries.rows() == b.entries.rows() && a.entries.cols() == b.entries.cols() &&
               (a.entries.array() == b.entries.array()).all();
    }
};

struct GammaSeries {
    std::vector<double> times;
    std::vector<double> values;
    std::string method;
    std::vector<std::pair<std::string, double>> parameters;

    bool operator==(const GammaSeries&) const = default;
};

enum class GridSpacing { Linear, Log };

struct GridSpec {
    double start = 0.0;
    double stop = 1.0;
    std::size_t count = 1;
    GridSpacing spacing = GridSpacing::Linear;

    bool operator==(const GridSpec&) const = default;
};

std::vector<double> make_grid(const GridSpec& spec);

// Each check lists every violated invariant; an empty report means valid.
ValidationReport check(const SystemSpec& s);
ValidationReport check(const BathMode& m);
ValidationReport check(const FiniteBath& b);
ValidationReport check(const Temperature& t);
ValidationReport check(const OhmicSpectralDensity& sd);
ValidationReport check(const DensityMatrix& rho, const DensityTolerances& tol = {});
ValidationReport check(const GammaSeries& series);
ValidationReport check(const GridSpec& grid);
ValidationReport check_time_grid(const std::vector<double>& times);

// Returns the argument unchanged or throws Error carrying the full report.
template <class T>
const T& validate(const T& value) {
    if (auto report = check(value); !report.empty()) throw Error(std::move(report));
    return value;
}

inline const DensityMatrix& validate(const DensityMatrix& rho, const DensityTolerances& tol) {
    if (auto report = check(rho, tol); !report.empty()) throw Error(std::move(report));
    return rho;
}

}  // namespace dephasim
