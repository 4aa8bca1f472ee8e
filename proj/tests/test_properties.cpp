// Randomized invariants. Each case draws from a fixed seed so failures replay.

#include "doctest.h"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "dephasim/continuum.hpp"
#include "dephasim/evolution.hpp"
#include "dephasim/finite_bath.hpp"

using namespace dephasim;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}

    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
    double log_uniform(double a, double b) { return std::exp(uniform(std::log(a), std::log(b))); }
    int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }

    FiniteBath bath(int max_modes = 8) {
        FiniteBath b;
        const int n = integer(1, max_modes);
        for (int i = 0; i < n; ++i) b.modes.push_back({uniform(0.0, 2.0), log_uniform(0.05, 20.0)});
        return b;
    }

    // Random mixed state: normalized G G^dagger.
    DensityMatrix density(int dim) {
        ComplexMatrix g(dim, dim);
        std::normal_distribution<double> n;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) g(i, j) = Complex(n(rng), n(rng));
        ComplexMatrix rho = g * g.adjoint();
        rho /= rho.trace().real();
        return DensityMatrix{(rho + rho.adjoint()) / 2.0};
    }
};

double min_eigenvalue(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho.entries, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("finite gamma is nonnegative and below its bound") {
    Gen g(1);
    for (int trial = 0; trial < 200; ++trial) {
        const auto bath = g.bath();
        const SystemSpec sys{g.log_uniform(0.1, 5.0), 2};
        const Temperature T{g.uniform(0.0, 1.0) < 0.3 ? 0.0 : g.log_uniform(0.01, 10.0)};
        const double bound = gamma_finite_bound(bath, sys, T);
        for (int k = 0; k < 20; ++k) {
            const double v = gamma_finite(bath, sys, T, g.uniform(0.0, 1e3));
            CHECK(v >= 0.0);
            CHECK(v <= bound * (1 + 1e-14));
        }
    }
}

TEST_CASE("finite gamma grows with temperature") {
    Gen g(2);
    for (int trial = 0; trial < 100; ++trial) {
        const auto bath = g.bath();
        const SystemSpec sys{1.0, 2};
        const double t = g.uniform(0.0, 100.0);
        const double kT1 = g.log_uniform(1e-3, 10.0);
        const double kT2 = kT1 * g.uniform(1.0, 5.0);
        const double a = gamma_finite(bath, sys, {0.0}, t);
        const double b = gamma_finite(bath, sys, {kT1}, t);
        const double c = gamma_finite(bath, sys, {kT2}, t);
        CHECK(a <= b * (1 + 1e-14));
        CHECK(b <= c * (1 + 1e-14));
    }
}

TEST_CASE("finite gamma scaling covariance") {
    // Gamma is quadratic in omega0 and invariant under (w, lambda, kT, t) -> (s w, s lambda, s kT, t / s).
    Gen g(3);
    for (int trial = 0; trial < 100; ++trial) {
        const auto bath = g.bath();
        const double w0 = g.log_uniform(0.1, 5.0);
        const double kT = g.log_uniform(0.01, 5.0);
        const double t = g.uniform(0.0, 50.0);
        const double s = g.log_uniform(0.1, 10.0);
        const double base = gamma_finite(bath, {w0, 2}, {kT}, t);
        CHECK(gamma_finite(bath, {s * w0, 2}, {kT}, t) == doctest::Approx(s * s * base).epsilon(1e-12));

        FiniteBath scaled = bath;
        for (auto& m : scaled.modes) {
            m.lambda *= s;
            m.omega *= s;
        }
        CHECK(gamma_finite(scaled, {w0, 2}, {s * kT}, t / s) == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("dephasing composes additively in gamma") {
    Gen g(4);
    for (int trial = 0; trial < 100; ++trial) {
        const auto rho = g.density(g.integer(2, 8));
        const double a = g.uniform(0.0, 2.0);
        const double b = g.uniform(0.0, 2.0);
        const auto twice = dephase(dephase(rho, {a, ""}), {b, ""});
        const auto once = dephase(rho, {a + b, ""});
        for (int n = 0; n < rho.dim(); ++n)
            for (int m = 0; m < rho.dim(); ++m) CHECK(std::abs(twice(n, m) - once(n, m)) <= 1e-14 * std::abs(rho(n, m)) + 1e-300);
    }
}

TEST_CASE("dephasing preserves positivity, trace and populations") {
    Gen g(5);
    for (int trial = 0; trial < 100; ++trial) {
        const auto rho = g.density(g.integer(2, 8));
        const auto out = dephase(rho, {g.log_uniform(1e-4, 10.0), ""});
        CHECK(min_eigenvalue(out) >= -1e-12);
        CHECK(std::abs(out.entries.trace() - Complex(1.0, 0.0)) < 1e-13);
        for (int n = 0; n < rho.dim(); ++n) CHECK(out(n, n) == rho(n, n));
        CHECK(check(out).empty());
    }
}

TEST_CASE("coherence decreases as gamma grows") {
    Gen g(6);
    for (int trial = 0; trial < 100; ++trial) {
        const auto rho = g.density(g.integer(2, 6));
        const double a = g.uniform(0.0, 3.0);
        const double b = a + g.uniform(0.0, 3.0);
        const double ca = coherence_l1(dephase(rho, {a, ""}));
        const double cb = coherence_l1(dephase(rho, {b, ""}));
        CHECK(cb <= ca * (1 + 1e-14));
        CHECK(ca <= coherence_l1(rho) * (1 + 1e-14));
    }
}

TEST_CASE("a periodic verdict is always a true recurrence") {
    Gen g(7);
    for (int trial = 0; trial < 100; ++trial) {
        FiniteBath b;
        const int n = g.integer(1, 5);
        for (int i = 0; i < n; ++i)
            b.modes.push_back({g.uniform(0.0, 1.0), static_cast<double>(g.integer(1, 12)) / g.integer(1, 12)});
        const auto r = detect_periodicity(b);
        REQUIRE(r.periodic);
        const double bound = gamma_finite_bound(b, {1.0, 2}, {0.0});
        CHECK(verify_recurrence(b, {1.0, 2}, r) <= 1e-9 * std::max(1.0, bound));
        for (std::size_t i = 0; i < b.modes.size(); ++i) {
            // T omega_i / 2 pi equals the reported integer multiple.
            const double cycles = *r.period * b.modes[i].omega / (2 * kPi);
            CHECK(cycles == doctest::Approx(r.mode_multiples[i].convert_to<double>()).epsilon(1e-12));
        }
    }
}

TEST_CASE("quadrature grows with temperature and shrinks with the lower cutoff") {
    Gen g(8);
    for (int trial = 0; trial < 20; ++trial) {
        const double C = g.log_uniform(0.1, 2.0);
        const double L = g.log_uniform(1.0, 100.0);
        const double t = g.log_uniform(0.01, 20.0);
        const double kT = g.log_uniform(0.01, 5.0);
        const double wl = g.log_uniform(1e-4, 0.1);
        const double v0 = gamma_quadrature({C, L, wl}, {kT}, t).value;
        const double v1 = gamma_quadrature({C, L, wl}, {2 * kT}, t).value;
        const double v2 = gamma_quadrature({C, L, 2 * wl}, {kT}, t).value;
        CHECK(v1 >= v0);
        CHECK(v2 <= v0);
    }
}

TEST_CASE("tightening the quadrature tolerance stays within the reported error") {
    Gen g(9);
    for (int trial = 0; trial < 20; ++trial) {
        const OhmicSpectralDensity sd{g.log_uniform(0.1, 2.0), g.log_uniform(1.0, 100.0), 0.0};
        const Temperature T{g.uniform(0.0, 1.0) < 0.3 ? 0.0 : g.log_uniform(0.01, 5.0)};
        const double t = g.log_uniform(0.01, 50.0);
        QuadratureConfig loose;
        loose.rel_tol = 1e-8;
        QuadratureConfig tight = loose;
        tight.rel_tol = loose.rel_tol / 2;
        const auto a = gamma_quadrature(sd, T, t, loose);
        const auto b = gamma_quadrature(sd, T, t, tight);
        CHECK(std::abs(a.value - b.value) <= a.error_estimate + b.error_estimate + 1e-15);
    }
}

TEST_CASE("validation is idempotent and side-effect free") {
    Gen g(10);
    for (int trial = 0; trial < 100; ++trial) {
        const auto bath = g.bath();
        CHECK(check(bath) == check(bath));
        const auto& v = validate(validate(bath));
        CHECK(v == bath);
        FiniteBath bad = bath;
        bad.modes[0].omega = -g.uniform(0.0, 1.0);
        CHECK(check(bad).size() == check(bad).size());
        CHECK_THROWS_AS(validate(bad), Error);
        CHECK(bad.modes[0].omega <= 0.0);
    }
}

TEST_CASE("a dense finite bath converges to the continuum") {
    // Midpoint modes w_i with lambda_i^2 = J(w_i) dw / (pi w0^2) turn the finite sum into a midpoint rule.
    Gen g(11);
    for (int trial = 0; trial < 10; ++trial) {
        const double w0 = g.log_uniform(0.5, 2.0);
        const OhmicSpectralDensity sd{g.log_uniform(0.1, 1.0), g.log_uniform(1.0, 50.0), 0.0};
        const int N = 10000;
        const double w_max = 40.0 * sd.cutoff_upper;
        const double dw = w_max / N;
        FiniteBath bath;
        for (int i = 0; i < N; ++i) {
            const double w = (i + 0.5) * dw;
            bath.modes.push_back({std::sqrt(sd(w) * dw / kPi) / w0, w});
        }
        for (double tL : {0.1, 1.0, 5.0, 10.0}) {
            const double t = tL / sd.cutoff_upper;
            const double fin = gamma_finite(bath, {w0, 2}, {0.0}, t);
            const double cont = gamma_quadrature(sd, {0.0}, t).value;
            CHECK(std::abs(fin - cont) / cont < 0.02);
        }
    }
}
