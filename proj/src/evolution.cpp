#include "dephasim/evolution.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace dephasim {

namespace {

// Pairs with |rho^{nm}(0)| below this are treated as absent.
constexpr double kSupportFloor = 1e-300;

}  // namespace

DensityMatrix dephase(const DensityMatrix& rho0, const DephasingMap& map) {
    validate(rho0);
    if (!(map.gamma >= 0.0) || !std::isfinite(map.gamma)) {
        std::ostringstream os;
        os << "gamma = " << map.gamma << " must be finite and >= 0";
        throw Error(ErrorCode::InvalidArgument, os.str());
    }
    DensityMatrix out = rho0;
    const auto dim = static_cast<Eigen::Index>(rho0.dim());
    for (Eigen::Index n = 0; n < dim; ++n) {
        for (Eigen::Index m = 0; m < dim; ++m) {
            if (n == m) continue;
            const double d = static_cast<double>(n - m);
            out.entries(n, m) *= std::exp(-d * d * map.gamma);
        }
    }
    return out;
}

double coherence_l1(const DensityMatrix& rho) {
    validate(rho);
    double sum = 0.0;
    const auto dim = static_cast<Eigen::Index>(rho.dim());
    for (Eigen::Index n = 0; n < dim; ++n)
        for (Eigen::Index m = 0; m < dim; ++m)
            if (n != m) sum += std::abs(rho.entries(n, m));
    return sum;
}

ExponentReport exponent_scaling_check(const DensityMatrix& rho0, const DensityMatrix& rho_t, double reference_gamma) {
    if (rho0.dim() != rho_t.dim()) throw Error(ErrorCode::InvalidArgument, "density matrices differ in dimension");
    ExponentReport report;
    std::set<std::size_t> separations;
    const std::size_t dim = rho0.dim();
    for (std::size_t n = 0; n < dim; ++n) {
        for (std::size_t m = n + 1; m < dim; ++m) {
            const double before = std::abs(rho0(n, m));
            if (before <= kSupportFloor) continue;
            const double after = std::abs(rho_t(n, m));
            const double d = static_cast<double>(m - n);
            const double exponent = -std::log(after / before) / (d * d);
            report.entries.push_back({n, m, exponent});
            report.max_deviation = std::max(report.max_deviation, std::abs(exponent - reference_gamma));
            separations.insert(m - n);
        }
    }
    if (separations.size() < 2)
        throw Error(ErrorCode::NoOffDiagonalSupport,
                    "need nonzero coherences at two or more distinct level separations |n - m|");
    return report;
}

ExponentReport exponent_scaling_check(const DensityMatrix& rho0, const DephasingMap& map) {
    return exponent_scaling_check(rho0, dephase(rho0, map), map.gamma);
}

}  // namespace dephasim
