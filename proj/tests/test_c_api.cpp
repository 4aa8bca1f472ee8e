#include "doctest.h"

#include <cmath>
#include <cstring>
#include <string>

#include "dephasim/dephasim.h"

TEST_CASE("version and status helpers") {
    CHECK(std::strlen(dphs_version()) > 0);
    CHECK(std::string(dphs_status_name(DPHS_OK)) == "OK");
    CHECK(dphs_exit_code(DPHS_OK) == 0);
    CHECK(dphs_exit_code(DPHS_ERR_NON_POSITIVE_FREQUENCY) == 1);
    CHECK(dphs_exit_code(DPHS_ERR_CONFIG) == 1);
    CHECK(dphs_exit_code(DPHS_ERR_TOLERANCE_NOT_MET) == 2);
    CHECK(dphs_exit_code(DPHS_ERR_TRUNCATION_INADEQUATE) == 2);
}

TEST_CASE("bath handle and finite gamma") {
    const double lambdas[] = {1.0, 1.0};
    const double omegas[] = {1.0, 2.0};
    dphs_bath* bath = nullptr;
    REQUIRE(dphs_bath_create(lambdas, omegas, 2, &bath) == DPHS_OK);
    CHECK(dphs_bath_size(bath) == 2);

    double v = -1;
    CHECK(dphs_gamma_finite(bath, 1.0, 0.0, 0.0, &v) == DPHS_OK);
    CHECK(v == 0.0);

    const double times[] = {0.0, 1.0, 2.0};
    double values[3];
    CHECK(dphs_gamma_finite_series(bath, 1.0, 0.0, times, 3, values) == DPHS_OK);
    CHECK(dphs_gamma_finite(bath, 1.0, 0.0, 2.0, &v) == DPHS_OK);
    CHECK(values[2] == v);

    const double bad_times[] = {1.0, 0.5};
    CHECK(dphs_gamma_finite_series(bath, 1.0, 0.0, bad_times, 2, values) == DPHS_ERR_NON_MONOTONIC_GRID);
    CHECK(std::strlen(dphs_last_error()) > 0);
    CHECK(dphs_gamma_finite(bath, 1.0, -1.0, 1.0, &v) == DPHS_ERR_NEGATIVE_TEMPERATURE);
    CHECK(dphs_gamma_finite(nullptr, 1.0, 0.0, 1.0, &v) == DPHS_ERR_INVALID_ARGUMENT);
    dphs_bath_destroy(bath);
    dphs_bath_destroy(nullptr);

    const double neg[] = {-1.0};
    dphs_bath* b2 = nullptr;
    CHECK(dphs_bath_create(lambdas, neg, 1, &b2) == DPHS_ERR_NON_POSITIVE_FREQUENCY);
    CHECK(b2 == nullptr);
}

TEST_CASE("rationalize and periodicity") {
    int ok = -1;
    int64_t p = 0, q = 0;
    CHECK(dphs_rationalize(1.5, 1e-12, 1000000, &ok, &p, &q) == DPHS_OK);
    CHECK(ok == 1);
    CHECK(p == 3);
    CHECK(q == 2);
    CHECK(dphs_rationalize(std::sqrt(2.0), 1e-12, 1000000, &ok, &p, &q) == DPHS_OK);
    CHECK(ok == 0);
    CHECK(dphs_rationalize(-1.0, 1e-12, 1000000, &ok, &p, &q) == DPHS_ERR_NON_POSITIVE_RATIO);

    const double lambdas[] = {1.0, 1.0, 1.0};
    const double omegas[] = {1.0, 2.0, 3.0};
    dphs_bath* bath = nullptr;
    REQUIRE(dphs_bath_create(lambdas, omegas, 3, &bath) == DPHS_OK);
    dphs_periodicity* rep = nullptr;
    REQUIRE(dphs_detect_periodicity(bath, 1e-14, 1000000, &rep) == DPHS_OK);
    CHECK(dphs_periodicity_is_periodic(rep) == 1);
    double T = 0;
    CHECK(dphs_periodicity_period(rep, &T) == DPHS_OK);
    CHECK(T == doctest::Approx(2 * 3.14159265358979323846));
    char* text = nullptr;
    CHECK(dphs_periodicity_mode_multiple(rep, 2, &text) == DPHS_OK);
    CHECK(std::string(text) == "3");
    dphs_string_free(text);
    CHECK(dphs_periodicity_mode_multiple(rep, 7, &text) == DPHS_ERR_INVALID_ARGUMENT);
    double residual = 1;
    CHECK(dphs_verify_recurrence(bath, 1.0, rep, &residual) == DPHS_OK);
    CHECK(residual < 1e-10);
    size_t i = 0, j = 0;
    CHECK(dphs_periodicity_witness(rep, &i, &j) != DPHS_OK);
    dphs_periodicity_destroy(rep);
    dphs_bath_destroy(bath);

    const double irr[] = {1.0, std::sqrt(2.0)};
    REQUIRE(dphs_bath_create(lambdas, irr, 2, &bath) == DPHS_OK);
    REQUIRE(dphs_detect_periodicity(bath, 1e-14, 1000000, &rep) == DPHS_OK);
    CHECK(dphs_periodicity_is_periodic(rep) == 0);
    CHECK(dphs_periodicity_witness(rep, &i, &j) == DPHS_OK);
    CHECK(i == 0);
    CHECK(j == 1);
    CHECK(dphs_periodicity_period(rep, &T) == DPHS_ERR_NOT_PERIODIC);
    CHECK(dphs_verify_recurrence(bath, 1.0, rep, &residual) == DPHS_ERR_NOT_PERIODIC);
    dphs_periodicity_destroy(rep);
    dphs_bath_destroy(bath);
}

TEST_CASE("continuum functions") {
    dphs_quadrature_config cfg = dphs_quadrature_defaults();
    double v = 0, err = 0;
    CHECK(dphs_gamma_quadrature(1.0, 1.0, 0.0, 0.0, 1.0, &cfg, &v, &err) == DPHS_OK);
    CHECK(v == doctest::Approx(std::log(2.0) / (2 * 3.14159265358979323846)).epsilon(1e-10));
    CHECK(dphs_gamma_quadrature(1.0, 1.0, 0.0, 0.0, 1.0, nullptr, &v, nullptr) == DPHS_OK);
    CHECK(dphs_gamma_quadrature(1.0, 1.0, 2.0, 0.0, 1.0, &cfg, &v, &err) == DPHS_ERR_CUTOFF_ORDER);

    CHECK(dphs_gamma_vac_closed(1.0, 100.0, 1.0, &v) == DPHS_OK);
    CHECK(v == doctest::Approx(1.465887112457443));
    int in_regime = -1;
    CHECK(dphs_gamma_therm_closed(3.14159265358979323846, 1e4, 0.0, 1.0, 1.0, &v, &in_regime) == DPHS_OK);
    CHECK(v == doctest::Approx(1.301846398603713));
    CHECK(in_regime == 1);
    CHECK(dphs_gamma_short_time(1.0, 100.0, 0.0, 1.0, 0.01, &v, nullptr) == DPHS_OK);
    CHECK(dphs_gamma_high_temperature(0.5, 1e3, 1e-6, 10.0, 2.0, &v, &in_regime) == DPHS_OK);
    CHECK(v == doctest::Approx(10.0));
}

TEST_CASE("density handles") {
    const double re[] = {0.5, 0.5, 0.5, 0.5};
    dphs_density* rho = nullptr;
    REQUIRE(dphs_density_create(2, re, nullptr, &rho) == DPHS_OK);
    CHECK(dphs_density_dim(rho) == 2);
    dphs_density* out = nullptr;
    REQUIRE(dphs_dephase(rho, std::log(2.0), &out) == DPHS_OK);
    double r = 0, im = 0;
    CHECK(dphs_density_entry(out, 0, 1, &r, &im) == DPHS_OK);
    CHECK(r == doctest::Approx(0.25));
    CHECK(dphs_density_entry(out, 0, 0, &r, &im) == DPHS_OK);
    CHECK(r == 0.5);
    CHECK(dphs_density_entry(out, 2, 0, &r, &im) == DPHS_ERR_INVALID_ARGUMENT);
    double c = 0;
    CHECK(dphs_coherence_l1(out, &c) == DPHS_OK);
    CHECK(c == doctest::Approx(0.5));
    CHECK(dphs_dephase(rho, -1.0, &out) != DPHS_OK);
    dphs_density_destroy(out);

    const double bad_re[] = {0.5, 0.9, 0.9, 0.5};
    dphs_density* bad = nullptr;
    CHECK(dphs_density_create(2, bad_re, nullptr, &bad) == DPHS_ERR_NOT_POSITIVE_SEMIDEFINITE);

    const double lambdas[] = {0.05};
    const double omegas[] = {1.0};
    dphs_bath* bath = nullptr;
    REQUIRE(dphs_bath_create(lambdas, omegas, 1, &bath) == DPHS_OK);
    const size_t cutoffs[] = {12};
    const double times[] = {0.0, 1.0, 2.0, 3.0};
    double dev = 1;
    CHECK(dphs_oracle_max_deviation(bath, cutoffs, 1.0, 0.0, rho, times, 4, &dev) == DPHS_OK);
    CHECK(dev < 1e-6);
    const size_t tiny[] = {2};
    const double lam_big[] = {1.0};
    dphs_bath* strong = nullptr;
    REQUIRE(dphs_bath_create(lam_big, omegas, 1, &strong) == DPHS_OK);
    CHECK(dphs_oracle_max_deviation(strong, tiny, 1.0, 0.0, rho, times, 4, &dev) == DPHS_ERR_TRUNCATION_INADEQUATE);
    dphs_bath_destroy(strong);
    dphs_bath_destroy(bath);
    dphs_density_destroy(rho);
}

TEST_CASE("run config text") {
    const char* cfg = R"({"job": "periodicity", "periodicity": {"bath": {"modes":
        [{"lambda": 1, "omega": 2}, {"lambda": 1, "omega": 3}]}}, "format": "json"})";
    char* out = nullptr;
    REQUIRE(dphs_run_config_text(nullptr, cfg, nullptr, &out) == DPHS_OK);
    const std::string text(out);
    dphs_string_free(out);
    CHECK(text.find("\"periodic\": true") != std::string::npos);

    REQUIRE(dphs_run_config_text("periodicity", cfg, "csv", &out) == DPHS_OK);
    CHECK(std::string(out).find("periodic,true") != std::string::npos);
    dphs_string_free(out);

    CHECK(dphs_run_config_text("finite", cfg, nullptr, &out) == DPHS_ERR_CONFIG);
    CHECK(dphs_run_config_text(nullptr, "{", nullptr, &out) == DPHS_ERR_CONFIG);
    CHECK(dphs_run_config_text(nullptr, cfg, "xml", &out) == DPHS_ERR_CONFIG);
    CHECK(dphs_run_config_file(nullptr, "/nonexistent/cfg.json", nullptr, nullptr, &out) == DPHS_ERR_IO);
}
