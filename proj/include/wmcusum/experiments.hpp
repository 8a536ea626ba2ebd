#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wmcusum/analysis.hpp"
#include "wmcusum/detect.hpp"
#include "wmcusum/model.hpp"
#include "wmcusum/sim.hpp"

namespace wmcusum {

/// Monte Carlo study description. attack.attack_time is the onset step within each run.
struct ExperimentSpec {
    SystemParams params;
    AttackModel attack;
    double p_false_alarm = 0.01;
    std::vector<double> delta_lqg_grid;
    std::size_t runs = 100;
    std::size_t horizon = 100000; ///< post-onset steps before a run is censored
    std::size_t burn_in = 2000;
    std::size_t warmup = 100;     ///< pre-onset steps the CUSUM watches for false alarms
    std::uint64_t base_seed = 1;
    std::vector<Variant> variants{Variant::joint};
    std::size_t max_restarts = 1000; ///< pre-onset false alarms tolerated per run

    void validate() const;
};

/// 20 points, 0.1 to 2.0 in steps of 0.1.
std::vector<double> default_delta_lqg_grid();

/// Seed of restart r of run i at grid point j.
std::uint64_t run_seed(std::uint64_t base_seed, std::uint64_t point, std::uint64_t run, std::uint64_t restart);

struct AddEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;               ///< sample std / sqrt(effective_runs); NaN below two runs
    std::size_t runs = 0;
    std::size_t effective_runs = 0;     ///< runs that alarmed within the horizon
    std::size_t failures = 0;           ///< censored runs, excluded from the mean
    std::size_t false_alarm_restarts = 0;
};

/// Average detection delay at one watermark variance.
///
/// Each run simulates the loop with the attack at spec.attack.attack_time. The CUSUM starts
/// spec.warmup steps before onset; an alarm in that window is a false alarm and the run is
/// redrawn with the next restart seed. At onset the statistic is reset to zero and the delay is
/// alarm_time - attack_time. Runs with no alarm within spec.horizon steps are failures.
/// Throws AllRunsFailed when no run alarms.
AddEstimate estimate_add(const ExperimentSpec& spec, double sigma_e_sq, Variant variant, std::uint64_t point = 0);

struct RunLengthEstimate {
    double mean = 0.0;       ///< censored runs count as horizon, so this is a lower bound when censored > 0
    double stderr_ = 0.0;
    std::size_t runs = 0;
    std::size_t censored = 0;
};

/// Steps until the first alarm of a CUSUM watching a healthy loop, run length = alarm index + 1.
/// spec.attack supplies only the statistics the detector assumes; no attack is simulated.
RunLengthEstimate estimate_false_alarm_run_length(const ExperimentSpec& spec, double sigma_e_sq, Variant variant);

struct VariantEstimate {
    Variant variant = Variant::joint;
    std::optional<AddEstimate> estimate; ///< empty when every run was censored
};

struct TradeoffPoint {
    double delta_lqg = 0.0;
    double sigma_e_sq = 0.0;
    KldBreakdown kld;
    AddBound bound;
    std::vector<VariantEstimate> simulated;

    const VariantEstimate* find(Variant v) const;
};

struct TradeoffCurve {
    ExperimentSpec spec;
    std::vector<TradeoffPoint> points;
};

/// Closed-form bounds only, no simulation.
TradeoffCurve bound_curve(const ExperimentSpec& spec);

/// Bounds plus Monte Carlo ADD for every variant in spec.variants. A grid point whose runs all
/// fail is kept with an empty estimate.
TradeoffCurve sweep_tradeoff(const ExperimentSpec& spec);

/// CSV with header delta_lqg,sigma_e_sq,bound_joint,bound_marginal,add_mean,add_stderr,failures
/// for the simulated series of one variant.
void write_tradeoff_csv(std::ostream& out, const TradeoffCurve& curve, Variant variant);

} // namespace wmcusum
