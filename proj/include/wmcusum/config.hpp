#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wmcusum/model.hpp"
#include "wmcusum/sim.hpp"

namespace wmcusum {

/// Ordered (key, value) pairs from one configuration layer.
using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// Keys accepted in config files and as --key flags.
const std::vector<std::string>& config_keys();

/// Parses `name = value` lines. Blank lines and text after '#' are ignored. Throws
/// InvalidParameter naming the line for malformed lines and unknown keys.
ConfigEntries parse_config_text(std::string_view text);

ConfigEntries read_config_file(const std::filesystem::path& path);

/// Effective parameters of one CLI invocation. Defaults are the reference study.
struct RunConfig {
    SystemParams params = reference_params();
    double sigma_z_sq = 4.0;
    double rho = 0.5;
    /// At most one of these is set; delta_lqg is mapped to a watermark variance through the cost factor.
    std::optional<double> sigma_e_sq = 0.5;
    std::optional<double> delta_lqg;
    double p_false_alarm = 0.01;
    std::optional<std::size_t> attack_time = 100; ///< empty ("none") means no attack
    std::uint64_t seed = 1;
    std::size_t horizon = 100000;
    std::size_t runs = 100;
    std::size_t burn_in = 2000;
    std::size_t warmup = 100;
    std::vector<double> delta_lqg_grid;

    RunConfig();

    /// Applies one layer. A layer that sets sigma_e_sq or delta_lqg replaces whichever of the
    /// two an earlier layer set; setting both in one layer is an error.
    void apply(const ConfigEntries& entries);

    /// Checks every type invariant and that the loop is stable. Throws InvalidParameter or
    /// StabilityViolation.
    void validate() const;

    /// Watermark variance after resolving delta_lqg; 0 when neither is set.
    double watermark_variance(const ClosedLoopGains& gains) const;

    /// Attack statistics; attack_time is 0 when no attack is configured.
    AttackModel attack_model() const;
};

} // namespace wmcusum
