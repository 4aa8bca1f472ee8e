#include "dephasim/continuum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <algorithm>
#include <sstream>
#include <vector>

namespace dephasim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCothClamp = 40.0;
constexpr std::size_t kMaxInitialPanels = std::size_t{1} << 17;

// Kronrod 21-point abscissae and weights on [-1, 1]; odd entries are the Gauss 10-point nodes.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208980491855, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651146};

struct Panel {
    double a;
    double b;
    double value;
    double error;
    bool frozen = false;
};

// Max-heap on error; frozen panels sink below every live one.
struct ByError {
    bool operator()(const Panel& x, const Panel& y) const noexcept {
        if (x.frozen != y.frozen) return x.frozen;
        return x.error < y.error;
    }
};

template <class F>
Panel kronrod21(const F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    std::array<double, 21> fv{};
    fv[20] = f(center);
    for (std::size_t j = 0; j < 10; ++j) {
        const double dx = half * kXgk[j];
        fv[2 * j] = f(center - dx);
        fv[2 * j + 1] = f(center + dx);
    }
    double resk = kWgk[10] * fv[20];
    double resg = 0.0;
    double resabs = std::abs(resk);
    for (std::size_t j = 0; j < 10; ++j) {
        const double pair = fv[2 * j] + fv[2 * j + 1];
        resk += kWgk[j] * pair;
        resabs += kWgk[j] * (std::abs(fv[2 * j]) + std::abs(fv[2 * j + 1]));
        if (j % 2 == 1) resg += kWg[j / 2] * pair;
    }
    const double mean = 0.5 * resk;
    double resasc = kWgk[10] * std::abs(fv[20] - mean);
    for (std::size_t j = 0; j < 10; ++j)
        resasc += kWgk[j] * (std::abs(fv[2 * j] - mean) + std::abs(fv[2 * j + 1] - mean));

    const double scale = std::abs(half);
    double err = std::abs((resk - resg) * half);
    resasc *= scale;
    resabs *= scale;
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
    return Panel{a, b, resk * half, err};
}

// Neumaier-compensated sum.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) noexcept {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            carry += (sum - t) + x;
        else
            carry += (x - t) + sum;
        sum = t;
    }
    double value() const noexcept { return sum + carry; }
};

void require_time(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
        std::ostringstream os;
        os << "time " << t << " must be finite and >= 0";
        throw Error(ErrorCode::InvalidArgument, os.str());
    }
}

void validate_inputs(const OhmicSpectralDensity& sd, Temperature temp, double t) {
    ValidationReport r = check(sd);
    for (auto& v : check(temp)) r.push_back(std::move(v));
    if (!r.empty()) throw Error(std::move(r));
    require_time(t);
}

}  // namespace

ValidationReport check(const QuadratureConfig& cfg) {
    ValidationReport r;
    if (!(cfg.abs_tol > 0.0 || cfg.rel_tol > 0.0) || cfg.abs_tol < 0.0 || cfg.rel_tol < 0.0)
        r.push_back({ErrorCode::InvalidArgument, "need abs_tol > 0 or rel_tol > 0, both nonnegative"});
    if (cfg.max_subdivisions < 1) r.push_back({ErrorCode::InvalidArgument, "max_subdivisions must be >= 1"});
    if (!(cfg.tail_epsilon > 0.0 && cfg.tail_epsilon < 1.0))
        r.push_back({ErrorCode::InvalidArgument, "tail_epsilon must lie in (0, 1)"});
    return r;
}

double gamma_integrand(const OhmicSpectralDensity& sd, Temperature temp, double t, double omega) noexcept {
    const double prefactor = sd.coupling_c / kPi;
    if (omega < sd.cutoff_lower) return 0.0;
    if (omega <= 0.0) return temp.kT > 0.0 ? prefactor * temp.kT * t * t : 0.0;
    const double s = std::sin(0.5 * omega * t);
    const double envelope = prefactor * std::exp(-omega / sd.cutoff_upper);
    if (temp.kT == 0.0) return envelope * 2.0 * s * (s / omega);
    const double x = omega / (2.0 * temp.kT);
    if (x > kCothClamp) return envelope * 2.0 * s * (s / omega);
    return envelope * 2.0 * (s / omega) * (s / std::tanh(x));
}

QuadratureResult gamma_quadrature(const OhmicSpectralDensity& sd, Temperature temp, double t,
                                  const QuadratureConfig& cfg) {
    validate_inputs(sd, temp, t);
    validate(cfg);

    QuadratureResult out;
    if (t == 0.0 || sd.coupling_c == 0.0) return out;

    const double lambda = sd.cutoff_upper;
    const double upper = lambda * std::log(1.0 / cfg.tail_epsilon);
    const double lower = sd.cutoff_lower;

    // Tail beyond max(upper, lower): (1 - cos) <= 2, coth decreasing, 1/w <= 1/start.
    const double tail_start = std::max(upper, lower);
    {
        double coth = 1.0;
        if (temp.kT > 0.0) {
            const double x = tail_start / (2.0 * temp.kT);
            coth = x > kCothClamp ? 1.0 : 1.0 / std::tanh(x);
        }
        out.tail_bound = sd.coupling_c / kPi * 2.0 * coth * (lambda / tail_start) * std::exp(-tail_start / lambda);
    }
    if (lower >= upper) {
        out.error_estimate = out.tail_bound;
        return out;
    }

    auto f = [&](double w) { return gamma_integrand(sd, temp, t, w); };

    std::vector<double> cuts{lower};
    const double period = 2.0 * kPi / t;
    if (cfg.oscillation_split && t * (upper - lower) > 2.0 * kPi) {
        const double periods = (upper - lower) / period;
        const double stride = std::ceil(periods / static_cast<double>(kMaxInitialPanels));
        double k = std::floor(lower / period) + 1.0;
        for (;; k += stride) {
            const double w = k * period;
            if (w >= upper) break;
            if (w > cuts.back()) cuts.push_back(w);
        }
    }
    cuts.push_back(upper);

    std::vector<Panel> storage;
    storage.reserve(cuts.size() + 16);
    double running_value = 0.0;
    double running_error = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        storage.push_back(kronrod21(f, cuts[i], cuts[i + 1]));
        running_value += storage.back().value;
        running_error += storage.back().error;
    }
    std::vector<Panel> heap = std::move(storage);
    std::make_heap(heap.begin(), heap.end(), ByError{});

    std::size_t bisections = 0;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    auto target = [&] { return std::max(cfg.abs_tol, cfg.rel_tol * std::abs(running_value)) - out.tail_bound; };
    // The running totals drift under repeated add/subtract, so they are
    // re-summed exactly whenever they claim convergence.
    for (;;) {
        while (running_error > target() && bisections < cfg.max_subdivisions) {
            std::pop_heap(heap.begin(), heap.end(), ByError{});
            Panel worst = heap.back();
            heap.pop_back();
            if (worst.error == 0.0) {
                heap.push_back(worst);
                std::push_heap(heap.begin(), heap.end(), ByError{});
                break;
            }
            const double mid = 0.5 * (worst.a + worst.b);
            if (!(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 64.0 * eps * std::abs(mid)) {
                // Too narrow to bisect: keep its error but stop selecting it.
                worst.frozen = true;
                heap.push_back(worst);
                std::push_heap(heap.begin(), heap.end(), ByError{});
                if (heap.front().frozen) break;
                continue;
            }
            const Panel left = kronrod21(f, worst.a, mid);
            const Panel right = kronrod21(f, mid, worst.b);
            running_value += left.value + right.value - worst.value;
            running_error += left.error + right.error - worst.error;
            heap.push_back(left);
            std::push_heap(heap.begin(), heap.end(), ByError{});
            heap.push_back(right);
            std::push_heap(heap.begin(), heap.end(), ByError{});
            ++bisections;
        }
        CompensatedSum v;
        CompensatedSum e;
        for (const auto& p : heap) {
            v.add(p.value);
            e.add(p.error);
        }
        const double exact_error = e.value();
        const bool stalled = bisections >= cfg.max_subdivisions || heap.front().frozen || heap.front().error == 0.0;
        running_value = v.value();
        running_error = exact_error;
        if (stalled || running_error <= target()) break;
    }

    // Final totals recomputed from the panels in a fixed order.
    std::vector<Panel> panels = std::move(heap);
    std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    CompensatedSum value;
    CompensatedSum error;
    for (const auto& p : panels) {
        value.add(p.value);
        error.add(p.error);
    }
    out.value = std::max(0.0, value.value());
    out.error_estimate = error.value() + out.tail_bound;
    out.panels = panels.size();
    const double tolerance = std::max(cfg.abs_tol, cfg.rel_tol * out.value);
    out.converged = out.error_estimate <= tolerance;
    if (!out.converged && cfg.strict) {
        std::ostringstream os;
        os.precision(6);
        os << "quadrature error estimate " << out.error_estimate << " exceeds tolerance " << tolerance << " after "
           << bisections << " bisections (t = " << t << ")";
        throw Error(ErrorCode::ToleranceNotMet, os.str());
    }
    return out;
}

double log_sinhc(double x) noexcept {
    x = std::abs(x);
    if (x < 0.1) {
        const double x2 = x * x;
        // ln(sinh x / x) = x^2/6 - x^4/180 + x^6/2835 - x^8/37800 + x^10/467775 - ...
        return x2 * (1.0 / 6.0 + x2 * (-1.0 / 180.0 + x2 * (1.0 / 2835.0 + x2 * (-1.0 / 37800.0 + x2 / 467775.0))));
    }
    if (x < 20.0) return std::log(std::sinh(x) / x);
    return x - std::numbers::ln2 + std::log1p(-std::exp(-2.0 * x)) - std::log(x);
}

double gamma_vac_closed(const OhmicSpectralDensity& sd, double t) {
    validate(sd);
    require_time(t);
    const double lt = sd.cutoff_upper * t;
    return sd.coupling_c / (2.0 * kPi) * std::log1p(lt * lt);
}

ClosedForm gamma_therm_closed(const OhmicSpectralDensity& sd, Temperature temp, double t) {
    validate_inputs(sd, temp, t);
    ClosedForm out;
    out.note = "approximation valid for kT << Lambda";
    if (temp.kT == 0.0 || t == 0.0) return out;
    const double c_pi = sd.coupling_c / kPi;
    out.value = c_pi * log_sinhc(kPi * temp.kT * t) - c_pi * temp.kT * sd.cutoff_lower * t * t;
    if (temp.kT > sd.cutoff_upper / 10.0) {
        out.in_regime = false;
        out.note += "; kT exceeds Lambda/10";
    }
    return out;
}

ClosedForm gamma_short_time(const OhmicSpectralDensity& sd, Temperature temp, double t) {
    validate_inputs(sd, temp, t);
    ClosedForm out;
    out.note = "short-time expansion valid for kT t << 1";
    const double kT = temp.kT;
    out.value = sd.coupling_c / kPi * kT * (kPi * kPi / 6.0 * kT - sd.cutoff_lower) * t * t;
    if (kT * t > 0.1) {
        out.in_regime = false;
        out.note += "; kT t exceeds 0.1";
    }
    return out;
}

ClosedForm gamma_high_temperature(const OhmicSpectralDensity& sd, Temperature temp, double t) {
    validate_inputs(sd, temp, t);
    ClosedForm out;
    out.note = "high-temperature long-time limit valid for Lambda >> kT >> 1/t >> w_L";
    out.value = sd.coupling_c * temp.kT * t;
    // ">>" read as a factor of at least 10 at every step.
    const double kT = temp.kT;
    const bool ok = sd.cutoff_upper >= 10.0 * kT && t > 0.0 && kT * t >= 10.0 &&
                    (sd.cutoff_lower == 0.0 || 1.0 / t >= 10.0 * sd.cutoff_lower);
    if (!ok) {
        out.in_regime = false;
        out.note += "; inputs outside that ordering";
    }
    return out;
}

Decomposition gamma_decomposition(const OhmicSpectralDensity& sd, Temperature temp, double t) {
    Decomposition out;
    out.vacuum = gamma_vac_closed(sd, t);
    const auto thermal = gamma_therm_closed(sd, temp, t);
    out.thermal = thermal.value;
    out.in_regime = thermal.in_regime;
    out.total = out.vacuum + out.thermal;
    return out;
}

}  // namespace dephasim
