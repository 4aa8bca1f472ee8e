#pragma once

#include <cstddef>
#include <vector>

#include "dephasim/model.hpp"

namespace dephasim {

// Brute-force check of the dephasing law: propagate system + truncated bath
// exactly, trace out the bath and compare |rho^{nm}(t)| with the analytic form.
//
// Product basis ordering: system index slowest, then bath modes in declaration
// order; each Fock index runs fastest within its own factor.

struct OracleBudget {
    std::size_t pure = 4096;
    std::size_t mixed = 256;

    bool operator==(const OracleBudget&) const = default;
};

struct OracleOptions {
    OracleBudget budget;
    // Largest top-level population tolerated for any mode at any sampled time.
    double leak_tol = 1e-8;
    // Throw TruncationInadequate when leak_tol is exceeded.
    bool enforce_leak = true;
    // 0 = DEPHASIM_THREADS or hardware concurrency.
    std::size_t threads = 0;
};

struct OracleScenario {
    SystemSpec system;
    FiniteBath bath;
    std::vector<std::size_t> bath_cutoffs;
    Temperature temp;
    DensityMatrix rho_s0;
    std::vector<double> times;
};

ValidationReport check(const OracleScenario& scn);

std::size_t total_dimension(const OracleScenario& scn);

struct TimeDiagnostics {
    // |Tr rho_U(t) - 1|
    double norm_defect = 0.0;
    // Population of the top Fock level d_i - 1, per mode.
    std::vector<double> top_population;
};

struct PropagatorDiagnostics {
    // max |H V - V D| and max |V^dagger V - 1| of the eigendecomposition behind exp(-iHt).
    double eigen_residual = 0.0;
    double unitarity_defect = 0.0;
    double spectral_norm_bound = 0.0;
};

struct OracleResult {
    std::vector<double> times;
    std::vector<DensityMatrix> reduced;
    std::vector<TimeDiagnostics> diagnostics;
    PropagatorDiagnostics propagator;
    DensityMatrix rho_s0;
    bool pure_propagation = false;
    double max_top_population = 0.0;
};

/// H = w0 N_s (x) 1 + w0 N_s (x) sum_i lambda_i (a_i^dagger + a_i) + 1 (x) sum_i w_i a_i^dagger a_i
/// with a|k> = sqrt(k)|k-1> clipped at the top level.
ComplexMatrix build_hamiltonian(const OracleScenario& scn, const OracleBudget& budget = {});

// Boltzmann populations normalized over the d retained levels; ground state at kT = 0.
Eigen::MatrixXd thermal_mode_state(double omega, Temperature temp, std::size_t d);

OracleResult evolve_exact(const OracleScenario& scn, const OracleOptions& options = {});

struct ComparisonRow {
    double t = 0.0;
    std::size_t n = 0;
    std::size_t m = 0;
    double oracle = 0.0;
    double analytic = 0.0;
};

struct Comparison {
    double max_deviation = 0.0;
    std::vector<ComparisonRow> table;
};

// max over t and n != m of | |rho^{nm}(t)| - |rho^{nm}(0)| exp(-(n-m)^2 Gamma(t)) |.
// Throws GridMismatch unless the series samples the same times.
Comparison compare(const OracleResult& result, const GammaSeries& gamma);

}  // namespace dephasim
