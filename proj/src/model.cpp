#include "dephasim/model.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#ifndef DEPHASIM_VERSION
#define DEPHASIM_VERSION "0.0.0"
#endif

namespace dephasim {

const char* version() noexcept { return DEPHASIM_VERSION; }

namespace {

template <class... Args>
std::string fmt(Args&&... args) {
    std::ostringstream os;
    os.precision(17);
    (os << ... << args);
    return os.str();
}

void append(ValidationReport& into, ValidationReport&& from, const std::string& prefix) {
    for (auto& v : from) into.push_back({v.code, prefix + v.message});
}

}  // namespace

double OhmicSpectralDensity::operator()(double omega) const noexcept {
    if (omega < cutoff_lower || omega <= 0.0) return 0.0;
    return coupling_c * omega * std::exp(-omega / cutoff_upper);
}

DensityMatrix DensityMatrix::from_pure_state(const ComplexVector& amplitudes) {
    const double norm = amplitudes.norm();
    if (!(norm > 0.0)) throw Error(ErrorCode::InvalidArgument, "pure state has zero norm");
    ComplexVector psi = amplitudes / norm;
    return DensityMatrix{psi * psi.adjoint()};
}

DensityMatrix DensityMatrix::superposition(std::size_t dim, const std::vector<std::size_t>& levels) {
    ComplexVector psi = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
    for (auto n : levels) {
        if (n >= dim) throw Error(ErrorCode::InvalidArgument, fmt("level ", n, " outside dim ", dim));
        psi(static_cast<Eigen::Index>(n)) = 1.0;
    }
    return from_pure_state(psi);
}

std::vector<double> make_grid(const GridSpec& spec) {
    validate(spec);
    std::vector<double> out(spec.count);
    if (spec.count == 1) {
        out[0] = spec.start;
        return out;
    }
    const double steps = static_cast<double>(spec.count - 1);
    for (std::size_t k = 0; k < spec.count; ++k) {
        const double f = static_cast<double>(k) / steps;
        if (spec.spacing == GridSpacing::Linear) {
            out[k] = spec.start + (spec.stop - spec.start) * f;
        } else {
            out[k] = spec.start * std::pow(spec.stop / spec.start, f);
        }
    }
    out.back() = spec.stop;
    return out;
}

ValidationReport check(const SystemSpec& s) {
    ValidationReport r;
    if (!(s.omega0 > 0.0) || !std::isfinite(s.omega0))
        r.push_back({ErrorCode::NonPositiveFrequency, fmt("omega0 = ", s.omega0, " must be > 0")});
    if (s.dim < 2) r.push_back({ErrorCode::InvalidArgument, fmt("system dim = ", s.dim, " must be >= 2")});
    return r;
}

ValidationReport check(const BathMode& m) {
    ValidationReport r;
    if (!(m.omega > 0.0) || !std::isfinite(m.omega))
        r.push_back({ErrorCode::NonPositiveFrequency, fmt("mode omega = ", m.omega, " must be > 0")});
    if (!std::isfinite(m.lambda))
        r.push_back({ErrorCode::InvalidArgument, fmt("mode lambda = ", m.lambda, " must be finite")});
    return r;
}

ValidationReport check(const FiniteBath& b) {
    ValidationReport r;
    if (b.modes.empty()) r.push_back({ErrorCode::InvalidArgument, "bath has no modes"});
    for (std::size_t i = 0; i < b.modes.size(); ++i) append(r, check(b.modes[i]), fmt("modes[", i, "]: "));
    return r;
}

ValidationReport check(const Temperature& t) {
    ValidationReport r;
    if (!(t.kT >= 0.0) || !std::isfinite(t.kT))
        r.push_back({ErrorCode::NegativeTemperature, fmt("kT = ", t.kT, " must be >= 0")});
    return r;
}

ValidationReport check(const OhmicSpectralDensity& sd) {
    ValidationReport r;
    if (!(sd.coupling_c >= 0.0) || !std::isfinite(sd.coupling_c))
        r.push_back({ErrorCode::InvalidArgument, fmt("coupling C = ", sd.coupling_c, " must be >= 0")});
    if (!(sd.cutoff_upper > 0.0) || !std::isfinite(sd.cutoff_upper))
        r.push_back({ErrorCode::NonPositiveFrequency, fmt("upper cutoff = ", sd.cutoff_upper, " must be > 0")});
    if (!(sd.cutoff_lower >= 0.0))
        r.push_back({ErrorCode::CutoffOrderViolation, fmt("lower cutoff = ", sd.cutoff_lower, " must be >= 0")});
    else if (!(sd.cutoff_lower < sd.cutoff_upper))
        r.push_back({ErrorCode::CutoffOrderViolation,
                     fmt("lower cutoff ", sd.cutoff_lower, " must be below upper cutoff ", sd.cutoff_upper)});
    return r;
}

ValidationReport check(const DensityMatrix& rho, const DensityTolerances& tol) {
    ValidationReport r;
    const auto& m = rho.entries;
    if (m.rows() != m.cols() || m.rows() == 0) {
        r.push_back({ErrorCode::InvalidArgument, fmt("density matrix must be square and nonempty, got ",
                                                     m.rows(), "x", m.cols())});
        return r;
    }
    if (!m.allFinite()) {
        r.push_back({ErrorCode::InvalidArgument, "density matrix has non-finite entries"});
        return r;
    }
    const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (herm > tol.hermiticity)
        r.push_back({ErrorCode::NonHermitian, fmt("max |rho - rho^dagger| = ", herm)});
    const Complex tr = m.trace();
    if (std::abs(tr - 1.0) > tol.trace) r.push_back({ErrorCode::TraceNotOne, fmt("trace = ", tr.real(), "+", tr.imag(), "i")});
    if (herm <= tol.hermiticity) {
        ComplexMatrix h = 0.5 * (m + m.adjoint());
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
        const double lowest = es.eigenvalues().minCoeff();
        if (lowest < tol.eigenvalue_floor)
            r.push_back({ErrorCode::NotPositiveSemidefinite, fmt("smallest eigenvalue = ", lowest)});
    }
    return r;
}

ValidationReport check_time_grid(const std::vector<double>& times) {
    ValidationReport r;
    if (times.empty()) {
        r.push_back({ErrorCode::EmptyGrid, "time grid is empty"});
        return r;
    }
    if (!(times.front() >= 0.0)) r.push_back({ErrorCode::NonMonotonicGrid, fmt("first time ", times.front(), " < 0")});
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (!(times[k] > times[k - 1])) {
            r.push_back({ErrorCode::NonMonotonicGrid, fmt("times[", k, "] = ", times[k], " not above times[", k - 1,
                                                         "] = ", times[k - 1])});
            break;
        }
    }
    return r;
}

ValidationReport check(const GammaSeries& series) {
    ValidationReport r = check_time_grid(series.times);
    if (series.values.size() != series.times.size())
        r.push_back({ErrorCode::GridMismatch, fmt(series.values.size(), " values for ", series.times.size(), " times")});
    const std::size_t n = std::min(series.values.size(), series.times.size());
    for (std::size_t k = 0; k < n; ++k) {
        if (!(series.values[k] >= 0.0)) {
            r.push_back({ErrorCode::InvalidArgument, fmt("gamma[", k, "] = ", series.values[k], " is negative")});
            break;
        }
        if (series.times[k] == 0.0 && series.values[k] != 0.0)
            r.push_back({ErrorCode::InvalidArgument, fmt("gamma(0) = ", series.values[k], ", expected 0")});
    }
    return r;
}

ValidationReport check(const GridSpec& grid) {
    ValidationReport r;
    if (grid.count < 1) r.push_back({ErrorCode::EmptyGrid, "grid count must be >= 1"});
    if (!std::isfinite(grid.start) || !std::isfinite(grid.stop) || grid.start < 0.0)
        r.push_back({ErrorCode::InvalidArgument, fmt("grid bounds [", grid.start, ", ", grid.stop, "] invalid")});
    if (grid.count > 1 && !(grid.stop > grid.start))
        r.push_back({ErrorCode::NonMonotonicGrid, fmt("grid stop ", grid.stop, " must exceed start ", grid.start)});
    if (grid.spacing == GridSpacing::Log && !(grid.start > 0.0))
        r.push_back({ErrorCode::InvalidArgument, "log grid needs start > 0"});
    return r;
}

}  // namespace dephasim
