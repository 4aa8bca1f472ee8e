#include "dephasim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>

namespace dephasim {

namespace {

constexpr double kPurityTol = 1e-12;

template <class... Args>
std::string fmt(Args&&... args) {
    std::ostringstream os;
    os.precision(12);
    (os << ... << args);
    return os.str();
}

std::size_t bath_dimension(const OracleScenario& scn) {
    std::size_t d = 1;
    for (auto c : scn.bath_cutoffs) d *= c;
    return d;
}

// Pure-state propagation applies at kT = 0 with a rank-one initial system state.
bool qualifies_pure(const OracleScenario& scn) {
    if (scn.temp.kT != 0.0) return false;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(scn.rho_s0.entries);
    return std::abs(es.eigenvalues().maxCoeff() - 1.0) <= kPurityTol;
}

void require_budget(const OracleScenario& scn, const OracleBudget& budget) {
    const bool pure = qualifies_pure(scn);
    const std::size_t limit = pure ? budget.pure : budget.mixed;
    const std::size_t dim = total_dimension(scn);
    if (dim > limit)
        throw Error(ErrorCode::DimensionBudgetExceeded,
                    fmt("total dimension ", dim, " exceeds the ", pure ? "pure" : "mixed", "-state budget ", limit));
}

std::size_t worker_count(std::size_t requested, std::size_t jobs) {
    std::size_t n = requested;
    if (n == 0) {
        if (const char* env = std::getenv("DEPHASIM_THREADS")) n = static_cast<std::size_t>(std::strtoul(env, nullptr, 10));
    }
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return std::max<std::size_t>(1, std::min(n, jobs));
}

// Runs body(k) for k in [0, count); each index writes only its own slot.
template <class Body>
void parallel_for(std::size_t count, std::size_t threads, const Body& body) {
    const std::size_t workers = worker_count(threads, count);
    if (workers <= 1) {
        for (std::size_t k = 0; k < count; ++k) body(k);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t k = w; k < count; k += workers) body(k);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

DensityMatrix partial_trace(const ComplexMatrix& rho_u, std::size_t dim, std::size_t bath_dim) {
    ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    const auto db = static_cast<Eigen::Index>(bath_dim);
    for (Eigen::Index n = 0; n < out.rows(); ++n)
        for (Eigen::Index m = 0; m < out.cols(); ++m) out(n, m) = rho_u.block(n * db, m * db, db, db).trace();
    return DensityMatrix{out};
}

// Top-level population of each mode from the diagonal of rho_U.
std::vector<double> top_populations(const OracleScenario& scn, const Eigen::VectorXd& diag) {
    const std::size_t modes = scn.bath_cutoffs.size();
    std::vector<std::size_t> stride(modes, 1);
    for (std::size_t i = modes; i-- > 1;) stride[i - 1] = stride[i] * scn.bath_cutoffs[i];
    const std::size_t bath_dim = bath_dimension(scn);
    std::vector<double> out(modes, 0.0);
    for (Eigen::Index idx = 0; idx < diag.size(); ++idx) {
        const std::size_t b = static_cast<std::size_t>(idx) % bath_dim;
        for (std::size_t i = 0; i < modes; ++i) {
            const std::size_t k = (b / stride[i]) % scn.bath_cutoffs[i];
            if (k + 1 == scn.bath_cutoffs[i]) out[i] += diag(idx);
        }
    }
    return out;
}

}  // namespace

std::size_t total_dimension(const OracleScenario& scn) { return scn.system.dim * bath_dimension(scn); }

ValidationReport check(const OracleScenario& scn) {
    ValidationReport r = check(scn.system);
    for (auto& v : check(scn.bath)) r.push_back(std::move(v));
    for (auto& v : check(scn.temp)) r.push_back(std::move(v));
    for (auto& v : check(scn.rho_s0)) r.push_back(std::move(v));
    for (auto& v : check_time_grid(scn.times)) r.push_back(std::move(v));
    if (scn.bath_cutoffs.size() != scn.bath.modes.size())
        r.push_back({ErrorCode::InvalidArgument,
                     fmt(scn.bath_cutoffs.size(), " cutoffs given for ", scn.bath.modes.size(), " bath modes")});
    for (std::size_t i = 0; i < scn.bath_cutoffs.size(); ++i)
        if (scn.bath_cutoffs[i] < 2) r.push_back({ErrorCode::InvalidArgument, fmt("cutoff d_", i, " must be >= 2")});
    if (scn.rho_s0.dim() != scn.system.dim)
        r.push_back({ErrorCode::InvalidArgument,
                     fmt("initial state has dim ", scn.rho_s0.dim(), ", system dim is ", scn.system.dim)});
    return r;
}

ComplexMatrix build_hamiltonian(const OracleScenario& scn, const OracleBudget& budget) {
    validate(scn);
    require_budget(scn, budget);

    const std::size_t modes = scn.bath.modes.size();
    const std::size_t bath_dim = bath_dimension(scn);
    const auto total = static_cast<Eigen::Index>(total_dimension(scn));
    std::vector<std::size_t> stride(modes, 1);
    for (std::size_t i = modes; i-- > 1;) stride[i - 1] = stride[i] * scn.bath_cutoffs[i];

    const double w0 = scn.system.omega0;
    ComplexMatrix h = ComplexMatrix::Zero(total, total);
    for (Eigen::Index idx = 0; idx < total; ++idx) {
        const std::size_t u = static_cast<std::size_t>(idx);
        const auto n = static_cast<double>(u / bath_dim);
        const std::size_t b = u % bath_dim;
        double diag = w0 * n;
        for (std::size_t i = 0; i < modes; ++i) {
            const std::size_t k = (b / stride[i]) % scn.bath_cutoffs[i];
            const auto& mode = scn.bath.modes[i];
            diag += mode.omega * static_cast<double>(k);
            // <k+1| a^dagger |k> = sqrt(k+1); absent at the top level.
            if (k + 1 < scn.bath_cutoffs[i]) {
                const auto up = static_cast<Eigen::Index>(u + stride[i]);
                const double amp = w0 * n * mode.lambda * std::sqrt(static_cast<double>(k + 1));
                h(up, idx) = amp;
                h(idx, up) = amp;
            }
        }
        h(idx, idx) = diag;
    }
    return h;
}

Eigen::MatrixXd thermal_mode_state(double omega, Temperature temp, std::size_t d) {
    if (d < 2) throw Error(ErrorCode::InvalidArgument, "mode cutoff must be >= 2");
    validate(BathMode{0.0, omega});
    validate(temp);
    Eigen::VectorXd pop = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    if (temp.kT == 0.0) {
        pop(0) = 1.0;
    } else {
        for (std::size_t k = 0; k < d; ++k) pop(static_cast<Eigen::Index>(k)) = std::exp(-static_cast<double>(k) * omega / temp.kT);
        pop /= pop.sum();
    }
    return pop.asDiagonal();
}

OracleResult evolve_exact(const OracleScenario& scn, const OracleOptions& options) {
    const ComplexMatrix h = build_hamiltonian(scn, options.budget);
    const bool pure = qualifies_pure(scn);
    const std::size_t dim = scn.system.dim;
    const std::size_t bath_dim = bath_dimension(scn);
    const auto total = h.rows();

    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::ToleranceNotMet, "Hamiltonian eigendecomposition failed");
    const ComplexMatrix& v = es.eigenvectors();
    const Eigen::VectorXd& energies = es.eigenvalues();

    OracleResult result;
    result.times = scn.times;
    result.rho_s0 = scn.rho_s0;
    result.pure_propagation = pure;
    result.propagator.spectral_norm_bound = energies.cwiseAbs().maxCoeff();
    result.propagator.eigen_residual = (h * v - v * energies.asDiagonal()).cwiseAbs().maxCoeff();
    result.propagator.unitarity_defect =
        (v.adjoint() * v - ComplexMatrix::Identity(total, total)).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, result.propagator.spectral_norm_bound);
    if (result.propagator.eigen_residual > 1e-12 * scale * static_cast<double>(total) ||
        result.propagator.unitarity_defect > 1e-12 * static_cast<double>(total))
        throw Error(ErrorCode::ToleranceNotMet,
                    fmt("propagator accuracy: residual ", result.propagator.eigen_residual, ", unitarity defect ",
                        result.propagator.unitarity_defect));

    const std::size_t steps = scn.times.size();
    result.reduced.resize(steps);
    result.diagnostics.resize(steps);

    if (pure) {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> sys(scn.rho_s0.entries);
        const Eigen::Index top = static_cast<Eigen::Index>(dim) - 1;  // eigenvalues ascending
        const ComplexVector phi = sys.eigenvectors().col(top);
        ComplexVector psi0 = ComplexVector::Zero(total);
        for (std::size_t n = 0; n < dim; ++n)
            psi0(static_cast<Eigen::Index>(n * bath_dim)) = phi(static_cast<Eigen::Index>(n));
        const ComplexVector coeff = v.adjoint() * psi0;

        parallel_for(steps, options.threads, [&](std::size_t k) {
            const double t = scn.times[k];
            ComplexVector rotated(total);
            for (Eigen::Index j = 0; j < total; ++j) rotated(j) = coeff(j) * std::polar(1.0, -energies(j) * t);
            const ComplexVector psi = v * rotated;
            const Eigen::Map<const ComplexMatrix> amplitudes(psi.data(), static_cast<Eigen::Index>(bath_dim),
                                                             static_cast<Eigen::Index>(dim));
            // Column n holds the bath amplitudes of system level n: rho_S = A^T conj(A).
            ComplexMatrix reduced = amplitudes.transpose() * amplitudes.conjugate();
            auto& diag = result.diagnostics[k];
            diag.norm_defect = std::abs(psi.squaredNorm() - 1.0);
            diag.top_population = top_populations(scn, psi.cwiseAbs2());
            result.reduced[k] = DensityMatrix{std::move(reduced)};
        });
    } else {
        Eigen::MatrixXd bath_state = Eigen::MatrixXd::Ones(1, 1);
        for (std::size_t i = 0; i < scn.bath.modes.size(); ++i)
            bath_state = kron(bath_state, thermal_mode_state(scn.bath.modes[i].omega, scn.temp, scn.bath_cutoffs[i]));
        ComplexMatrix rho_u0(total, total);
        const auto db = static_cast<Eigen::Index>(bath_dim);
        for (Eigen::Index n = 0; n < static_cast<Eigen::Index>(dim); ++n)
            for (Eigen::Index m = 0; m < static_cast<Eigen::Index>(dim); ++m)
                rho_u0.block(n * db, m * db, db, db) = scn.rho_s0.entries(n, m) * bath_state.cast<Complex>();
        const ComplexMatrix rho_eig = v.adjoint() * rho_u0 * v;

        parallel_for(steps, options.threads, [&](std::size_t k) {
            const double t = scn.times[k];
            ComplexVector phase(total);
            for (Eigen::Index j = 0; j < total; ++j) phase(j) = std::polar(1.0, -energies(j) * t);
            const ComplexMatrix rotated = phase.asDiagonal() * rho_eig * phase.conjugate().asDiagonal();
            const ComplexMatrix rho_u = v * rotated * v.adjoint();
            auto& diag = result.diagnostics[k];
            diag.norm_defect = std::abs(rho_u.trace() - 1.0);
            diag.top_population = top_populations(scn, rho_u.diagonal().real());
            result.reduced[k] = partial_trace(rho_u, dim, bath_dim);
        });
    }

    for (std::size_t k = 0; k < steps; ++k)
        for (double p : result.diagnostics[k].top_population)
            result.max_top_population = std::max(result.max_top_population, p);
    if (options.enforce_leak && result.max_top_population > options.leak_tol)
        throw Error(ErrorCode::TruncationInadequate,
                    fmt("top Fock level population ", result.max_top_population, " exceeds leak tolerance ",
                        options.leak_tol, "; raise the bath cutoffs"));
    return result;
}

Comparison compare(const OracleResult& result, const GammaSeries& gamma) {
    if (result.times.size() != gamma.times.size() || result.reduced.size() != result.times.size() ||
        gamma.values.size() != gamma.times.size())
        throw Error(ErrorCode::GridMismatch,
                    fmt("oracle has ", result.times.size(), " times, gamma series has ", gamma.times.size()));
    for (std::size_t k = 0; k < result.times.size(); ++k) {
        const double a = result.times[k];
        const double b = gamma.times[k];
        if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
            throw Error(ErrorCode::GridMismatch, fmt("time ", k, ": oracle ", a, " vs gamma ", b));
    }
    Comparison out;
    const std::size_t dim = result.rho_s0.dim();
    for (std::size_t k = 0; k < result.times.size(); ++k) {
        if (result.reduced[k].dim() != dim) throw Error(ErrorCode::GridMismatch, "reduced state dimension changed");
        for (std::size_t n = 0; n < dim; ++n) {
            for (std::size_t m = 0; m < dim; ++m) {
                if (n == m) continue;
                const double sep = static_cast<double>(n) - static_cast<double>(m);
                const double analytic = std::abs(result.rho_s0(n, m)) * std::exp(-sep * sep * gamma.values[k]);
                const double oracle = std::abs(result.reduced[k](n, m));
                out.max_deviation = std::max(out.max_deviation, std::abs(oracle - analytic));
                if (n < m) out.table.push_back({result.times[k], n, m, oracle, analytic});
            }
        }
    }
    return out;
}

}  // namespace dephasim
