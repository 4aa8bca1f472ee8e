#include "dephasim/finite_bath.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace dephasim {

namespace {

constexpr double kCothClamp = 40.0;

// 1 - cos(x) without cancellation near x = 0.
double one_minus_cos(double x) noexcept {
    const double s = std::sin(0.5 * x);
    return 2.0 * s * s;
}

void require_time(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
        std::ostringstream os;
        os << "time " << t << " must be finite and >= 0";
        throw Error(ErrorCode::InvalidArgument, os.str());
    }
}

}  // namespace

double thermal_weight(double omega, Temperature temp) noexcept {
    if (temp.kT == 0.0) return 1.0;
    const double x = omega / (2.0 * temp.kT);
    if (x > kCothClamp) return 1.0;
    return 1.0 / std::tanh(x);
}

double gamma_finite(const FiniteBath& bath, const SystemSpec& system, Temperature temp, double t) {
    validate(bath);
    validate(system);
    validate(temp);
    require_time(t);
    if (t == 0.0) return 0.0;
    const double w0sq = system.omega0 * system.omega0;
    double sum = 0.0;
    for (const auto& m : bath.modes) {
        const double r = m.lambda / m.omega;
        sum += r * r * one_minus_cos(m.omega * t) * thermal_weight(m.omega, temp);
    }
    return w0sq * sum;
}

GammaSeries gamma_finite_series(const FiniteBath& bath, const SystemSpec& system, Temperature temp,
                                std::span<const double> times) {
    validate(bath);
    validate(system);
    validate(temp);
    std::vector<double> grid(times.begin(), times.end());
    if (auto report = check_time_grid(grid); !report.empty()) throw Error(std::move(report));

    // Per-mode prefactors hoisted out of the time loop; same arithmetic order as gamma_finite.
    std::vector<double> weight(bath.modes.size());
    for (std::size_t i = 0; i < bath.modes.size(); ++i) {
        const auto& m = bath.modes[i];
        const double r = m.lambda / m.omega;
        weight[i] = r * r;
    }
    const double w0sq = system.omega0 * system.omega0;

    GammaSeries out;
    out.times = std::move(grid);
    out.values.resize(out.times.size());
    for (std::size_t k = 0; k < out.times.size(); ++k) {
        const double t = out.times[k];
        if (t == 0.0) {
            out.values[k] = 0.0;
            continue;
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < bath.modes.size(); ++i) {
            const double w = bath.modes[i].omega;
            sum += weight[i] * one_minus_cos(w * t) * thermal_weight(w, temp);
        }
        out.values[k] = w0sq * sum;
    }
    out.method = "finite-sum";
    out.parameters = {{"omega0", system.omega0},
                      {"kT", temp.kT},
                      {"modes", static_cast<double>(bath.modes.size())}};
    return out;
}

double gamma_finite_bound(const FiniteBath& bath, const SystemSpec& system, Temperature temp) {
    validate(bath);
    validate(system);
    validate(temp);
    double sum = 0.0;
    for (const auto& m : bath.modes) {
        const double r = m.lambda / m.omega;
        sum += r * r * thermal_weight(m.omega, temp);
    }
    return 2.0 * system.omega0 * system.omega0 * sum;
}

std::optional<Fraction> rationalize(double ratio, double tol, std::int64_t max_den) {
    if (!(ratio > 0.0) || !std::isfinite(ratio)) {
        std::ostringstream os;
        os << "ratio " << ratio << " must be finite and > 0";
        throw Error(ErrorCode::NonPositiveRatio, os.str());
    }
    if (!(tol >= 0.0) || max_den < 1) throw Error(ErrorCode::InvalidArgument, "need tol >= 0 and max_den >= 1");

    // Convergents h/k of the continued fraction; numerators capped well below int64 overflow.
    constexpr long double kLimit = 4.0e18L;
    const long double x = ratio;
    long double y = x;
    long double h_older = 0, h_old = 1;  // h_{-2}, h_{-1}
    long double k_older = 1, k_old = 0;  // k_{-2}, k_{-1}
    for (int iter = 0; iter < 128; ++iter) {
        const long double a = std::floor(y);
        const long double h = a * h_old + h_older;
        const long double k = a * k_old + k_older;
        if (k > static_cast<long double>(max_den) || h > kLimit) break;
        if (std::fabs(x * k - h) <= static_cast<long double>(tol) * x * k)
            return Fraction{static_cast<std::int64_t>(h), static_cast<std::int64_t>(k)};
        h_older = h_old;
        h_old = h;
        k_older = k_old;
        k_old = k;
        const long double frac = y - a;
        if (frac == 0.0L) break;
        y = 1.0L / frac;
    }
    return std::nullopt;
}

PeriodicityReport detect_periodicity(const FiniteBath& bath, double tol, std::int64_t max_den) {
    validate(bath);
    PeriodicityReport report;
    const double scale = bath.modes.front().omega;

    std::vector<Fraction> ratios;
    ratios.reserve(bath.modes.size());
    for (std::size_t j = 0; j < bath.modes.size(); ++j) {
        if (j == 0) {
            ratios.push_back({1, 1});
            continue;
        }
        auto f = rationalize(bath.modes[j].omega / scale, tol, max_den);
        if (!f) {
            report.witness = std::make_pair(std::size_t{0}, j);
            return report;
        }
        ratios.push_back(*f);
    }

    // Smallest L with L * p_i / q_i integral for all i: lcm(q_i) / gcd(p_i).
    BigInt lcm_q = 1;
    BigInt gcd_p = 0;
    for (const auto& f : ratios) {
        const BigInt q = f.denominator;
        lcm_q = lcm_q / boost::multiprecision::gcd(lcm_q, q) * q;
        gcd_p = boost::multiprecision::gcd(gcd_p, BigInt(f.numerator));
    }
    // gcd_p is 1 because modes[0] rationalizes to 1/1.
    report.periodic = true;
    report.base_multiple = lcm_q / gcd_p;
    report.period = 2.0 * std::numbers::pi * report.base_multiple.convert_to<double>() / scale;
    for (const auto& f : ratios) {
        report.rationalizations.push_back({f.numerator, f.denominator, scale});
        report.mode_multiples.push_back(report.base_multiple * f.numerator / f.denominator);
    }
    return report;
}

double verify_recurrence(const FiniteBath& bath, const SystemSpec& system, const PeriodicityReport& report) {
    if (!report.periodic || !report.period)
        throw Error(ErrorCode::NotPeriodicReport, "recurrence check needs a periodic report");
    return gamma_finite(bath, system, Temperature{0.0}, *report.period);
}

}  // namespace dephasim
