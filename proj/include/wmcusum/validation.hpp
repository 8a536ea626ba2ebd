#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "wmcusum/model.hpp"
#include "wmcusum/sim.hpp"

namespace wmcusum {

/// One empirical-versus-closed-form comparison.
struct CheckResult {
    std::string name;
    double expected = 0.0;
    double observed = 0.0;
    double error = 0.0;     ///< relative or absolute, per `relative`
    double tolerance = 0.0;
    bool relative = true;
    bool passed = false;
};

struct ValidationOptions {
    SystemParams params = reference_params();
    AttackModel attack{4.0, 0.5, 0};
    double sigma_e_sq = 0.5;
    std::uint64_t seed = 1;
    bool fast = false; ///< 1e5 samples at 5% instead of 1e6 at 2%
};

/// Simulates healthy and attacked loops and compares sample statistics with the closed forms:
/// innovation variance and whiteness, residue/watermark independence, attacked residue variance,
/// residue/watermark covariance, estimate/attack cross-moment, estimate variance, healthy second
/// moments, LQG cost and watermark cost increase, and mean log-likelihood ratios.
std::vector<CheckResult> run_validation_suite(const ValidationOptions& opts);

} // namespace wmcusum
