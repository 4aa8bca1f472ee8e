// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "dephasim/continuum.hpp"
#include "dephasim/evolution.hpp"
#include "dephasim/finite_bath.hpp"
#include "dephasim/jobs.hpp"
#include "dephasim/oracle.hpp"

using namespace dephasim;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::vector<double> linspace(double a, double b, int n) {
    return make_grid(GridSpec{a, b, static_cast<std::size_t>(n), GridSpacing::Linear});
}

std::vector<double> logspace(double a, double b, int n) {
    return make_grid(GridSpec{a, b, static_cast<std::size_t>(n), GridSpacing::Log});
}

FiniteBath unit_weight_bath(std::vector<double> omegas) {
    FiniteBath b;
    for (double w : omegas) b.modes.push_back({w, w});
    return b;
}

Outcome cube_root_bath() {
    std::vector<double> w;
    for (int n = 1; n <= 10; ++n) w.push_back(std::cbrt(static_cast<double>(n)));
    const auto times = linspace(0.0, 1000.0, 10000);
    const auto series = gamma_finite_series(unit_weight_bath(w), {1.0, 2}, {0.0}, times);
    const auto s = jobs::summarize(series);
    const bool ok = std::abs(s.mean - 10.0) <= 0.5 && s.min_after_burn_in && *s.min_after_burn_in >= 1.0 &&
                    s.fraction_in_band > 0.8 && series.values[0] == 0.0;
    return {ok, fmt("mean=%.4f", s.mean) + fmt(" min(t>=1)=%.4f", s.min_after_burn_in.value_or(NAN)) +
                    fmt(" in[5,15]=%.4f", s.fraction_in_band) + fmt(" gamma(0)=%g", series.values[0])};
}

Outcome recurrence() {
    const SystemSpec sys{1.0, 2};
    double worst = 0.0;
    bool ok = true;

    const auto b1 = unit_weight_bath({1.0, 2.0, 3.0});
    const auto r1 = detect_periodicity(b1);
    ok = ok && r1.periodic && std::abs(*r1.period - 2 * kPi) < 1e-12;
    for (int k = 1; k <= 3 && r1.periodic; ++k) worst = std::max(worst, gamma_finite(b1, sys, {0.0}, k * *r1.period));

    const auto b2 = unit_weight_bath({2.0 / 3.0, 0.5});
    const auto r2 = detect_periodicity(b2);
    ok = ok && r2.periodic && std::abs(*r2.period - 12 * kPi) < 1e-11;
    for (int k = 1; k <= 3 && r2.periodic; ++k) worst = std::max(worst, gamma_finite(b2, sys, {0.0}, k * *r2.period));

    const auto r3 = detect_periodicity(unit_weight_bath({1.0, std::sqrt(2.0)}));
    ok = ok && !r3.periodic && worst < 1e-10;
    return {ok, fmt("T1/pi=%.12g", r1.period.value_or(NAN) / kPi) + fmt(" T2/pi=%.12g", r2.period.value_or(NAN) / kPi) +
                    fmt(" max residual=%.3g", worst) + (r3.periodic ? " sqrt2: periodic" : " sqrt2: aperiodic")};
}

struct OracleCheck {
    double deviation = 0.0;
    double diagonal_drift = 0.0;
};

OracleCheck run_oracle(const OracleScenario& s) {
    const auto r = evolve_exact(s);
    const auto g = gamma_finite_series(s.bath, s.system, s.temp, s.times);
    OracleCheck out;
    out.deviation = compare(r, g).max_deviation;
    for (const auto& rho : r.reduced)
        for (int n = 0; n < rho.dim(); ++n) out.diagonal_drift = std::max(out.diagonal_drift, std::abs(rho(n, n) - s.rho_s0(n, n)));
    return out;
}

Outcome oracle_zero_temperature() {
    OracleScenario s;
    s.system = {1.0, 3};
    s.bath = FiniteBath{{{0.05, 1.0}, {0.04, std::sqrt(2.0)}}};
    s.bath_cutoffs = {12, 12};
    s.temp = {0.0};
    s.rho_s0 = DensityMatrix::superposition(3, {0, 1, 2});
    s.times = linspace(0.0, 10.0, 50);
    const auto c = run_oracle(s);
    return {c.deviation < 1e-5 && c.diagonal_drift < 1e-10,
            fmt("max deviation=%.3g", c.deviation) + fmt(" diagonal drift=%.3g", c.diagonal_drift)};
}

Outcome oracle_finite_temperature() {
    OracleScenario s;
    s.system = {1.0, 2};
    s.bath = FiniteBath{{{0.05, 1.0}}};
    s.bath_cutoffs = {20};
    s.temp = {1.0};
    s.rho_s0 = DensityMatrix::superposition(2, {0, 1});
    s.times = linspace(0.0, 10.0, 50);
    const auto c = run_oracle(s);
    return {c.deviation < 1e-4, fmt("max deviation=%.3g", c.deviation)};
}

Outcome vacuum_closed_form() {
    double worst = 0.0;  // ratio of error to allowance
    for (double C : {0.1, 1.0})
        for (double L : {1.0, 100.0}) {
            const OhmicSpectralDensity sd{C, L, 0.0};
            for (double t : logspace(1e-3 / L, 1e3 / L, 61)) {
                const double q = gamma_quadrature(sd, {0.0}, t).value;
                const double c = gamma_vac_closed(sd, t);
                worst = std::max(worst, std::abs(q - c) / std::max(1e-10, 1e-8 * c));
            }
        }
    return {worst < 1.0, fmt("worst error / allowance=%.3g", worst)};
}

Outcome thermal_closed_form() {
    double worst = 0.0;
    for (double C : {0.1, 1.0})
        for (double L : {10.0, 100.0, 1000.0})
            for (double kT : {L / 1e4, L / 1e3, L / 100})
                for (double wl : {0.0, kT / 1e3, kT / 100})
                    for (double x : logspace(0.1, 5.0, 12)) {
                        const OhmicSpectralDensity sd{C, L, wl};
                        const double t = x / kT;
                        const double q = gamma_quadrature(sd, {kT}, t).value;
                        const double c = gamma_decomposition(sd, {kT}, t).total;
                        worst = std::max(worst, std::abs(q - c) / q);
                    }
    return {worst < 0.02, fmt("worst relative deviation=%.4f", worst)};
}

Outcome born_markov() {
    double worst = 0.0;
    double worst_t = 0.0;
    const double C = 0.5;
    const OhmicSpectralDensity sd{C, 1e3, 1e-6};
    for (double t : linspace(1.0, 5.0, 9)) {
        const double q = gamma_quadrature(sd, {10.0}, t).value;
        const double bm = C * 10.0 * t;
        const double rel = std::abs(q - bm) / q;
        if (rel > worst) {
            worst = rel;
            worst_t = t;
        }
    }
    return {worst < 0.05, fmt("worst relative deviation=%.4f", worst) + fmt(" at t=%g", worst_t)};
}

Outcome short_time() {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const double C = std::exp(std::log(1e-2) + u(rng) * std::log(1e4));
        const double kT = std::exp(std::log(1e-3) + u(rng) * std::log(1e6));
        const double wl = kT * u(rng) * 0.999;
        const double t = 0.01 / kT;
        const OhmicSpectralDensity sd{C, 1e6 * kT, wl};
        const double s = gamma_short_time(sd, {kT}, t).value;
        const double c = gamma_therm_closed(sd, {kT}, t).value;
        worst = std::max(worst, std::abs(s - c) / c);
    }
    return {worst < 1e-3, fmt("worst relative deviation=%.3g", worst)};
}

Outcome properties() {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto random_density = [&](int dim) {
        ComplexMatrix g(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) g(i, j) = Complex(n01(rng), n01(rng));
        ComplexMatrix rho = g * g.adjoint();
        rho /= rho.trace().real();
        return DensityMatrix{(rho + rho.adjoint()) / 2.0};
    };

    double semigroup = 0.0, min_eig = INFINITY, exponent = 0.0;
    int monotone_violations = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto rho = random_density(2 + trial % 7);
        const double a = 2 * u(rng), b = 2 * u(rng);
        const auto twice = dephase(dephase(rho, {a, ""}), {b, ""});
        const auto once = dephase(rho, {a + b, ""});
        for (int i = 0; i < rho.dim(); ++i)
            for (int j = 0; j < rho.dim(); ++j)
                if (i != j) semigroup = std::max(semigroup, std::abs(twice(i, j) - once(i, j)) / std::abs(once(i, j)));
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(dephase(rho, {5 * u(rng), ""}).entries, Eigen::EigenvaluesOnly);
        min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
        if (rho.dim() >= 3) exponent = std::max(exponent, exponent_scaling_check(rho, {u(rng), ""}).max_deviation);

        FiniteBath bath;
        const int modes = 1 + trial % 8;
        for (int m = 0; m < modes; ++m) bath.modes.push_back({2 * u(rng), 0.05 + 20 * u(rng)});
        const double t = 100 * u(rng);
        double prev = gamma_finite(bath, {1.0, 2}, {0.0}, t);
        for (double kT : {0.01, 0.1, 1.0, 10.0}) {
            const double v = gamma_finite(bath, {1.0, 2}, {kT}, t);
            if (v < prev * (1 - 1e-14)) ++monotone_violations;
            prev = v;
        }
    }

    double discretization = 0.0;
    for (double L : {1.0, 10.0}) {
        const OhmicSpectralDensity sd{0.5, L, 0.0};
        const int N = 10000;
        const double dw = 40.0 * L / N;
        FiniteBath bath;
        for (int i = 0; i < N; ++i) {
            const double w = (i + 0.5) * dw;
            bath.modes.push_back({std::sqrt(sd(w) * dw / kPi), w});
        }
        for (double tL : logspace(0.01, 10.0, 12)) {
            const double fin = gamma_finite(bath, {1.0, 2}, {0.0}, tL / L);
            const double cont = gamma_quadrature(sd, {0.0}, tL / L).value;
            discretization = std::max(discretization, std::abs(fin - cont) / cont);
        }
    }

    const bool ok = semigroup < 1e-13 && min_eig >= -1e-12 && monotone_violations == 0 && discretization < 0.02 &&
                    exponent < 1e-10;
    return {ok, fmt("semigroup=%.2g", semigroup) + fmt(" min eig=%.2g", min_eig) +
                    " T-monotone violations=" + std::to_string(monotone_violations) +
                    fmt(" discretization=%.2g", discretization) + fmt(" exponent=%.2g", exponent)};
}

struct Criterion {
    int id;
    const char* name;
    double time_limit;  // seconds, 0 = none
    std::function<Outcome()> body;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "cube-root bath statistics", 1.0, cube_root_bath},
        {2, "rational-bath recurrence", 0.1, recurrence},
        {3, "oracle equivalence, kT=0", 60.0, oracle_zero_temperature},
        {4, "oracle equivalence, kT=1", 60.0, oracle_finite_temperature},
        {5, "vacuum closed form", 0.0, vacuum_closed_form},
        {6, "thermal closed form regime", 0.0, thermal_closed_form},
        {7, "Born-Markov linear law", 0.0, born_markov},
        {8, "short-time law", 0.0, short_time},
        {9, "property suites", 0.0, properties},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool pass = o.pass;
        if (c.time_limit > 0 && secs >= c.time_limit) {
            pass = false;
            o.detail += fmt(" (over time limit %gs)", c.time_limit);
        }
        if (!pass) ++failures;
        std::printf("%s criterion %d: %s | %s | %.3fs\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
