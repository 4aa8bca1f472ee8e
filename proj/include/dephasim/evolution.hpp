#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dephasim/model.hpp"

namespace dephasim {

struct DephasingMap {
    double gamma = 0.0;
    // "finite", "continuum", "closed-form", ...
    std::string source;
};

// rho^{nm} -> rho^{nm} exp(-(n - m)^2 gamma). Diagonal entries are copied untouched.
DensityMatrix dephase(const DensityMatrix& rho0, const DephasingMap& map);

// Sum of |rho^{nm}| over n != m.
double coherence_l1(const DensityMatrix& rho);

struct ExponentEntry {
    std::size_t n = 0;
    std::size_t m = 0;
    // -ln|rho^{nm}(t) / rho^{nm}(0)| / (n - m)^2
    double exponent = 0.0;
};

struct ExponentReport {
    std::vector<ExponentEntry> entries;
    // max |exponent - reference| over entries
    double max_deviation = 0.0;
};

// Dephases rho0 with `map` and recovers the per-pair exponents, which must all equal map.gamma.
// Throws NoOffDiagonalSupport unless rho0 has nonzero pairs at two or more distinct |n - m|.
ExponentReport exponent_scaling_check(const DensityMatrix& rho0, const DephasingMap& map);

// Same measurement for an externally evolved state, e.g. an oracle run.
ExponentReport exponent_scaling_check(const DensityMatrix& rho0, const DensityMatrix& rho_t, double reference_gamma);

}  // namespace dephasim
