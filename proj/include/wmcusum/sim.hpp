#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "wmcusum/model.hpp"
#include "wmcusum/random.hpp"

namespace wmcusum {

/// Stationary Gaussian AR(1) measurement-replacement attack:
/// E z^2 = sigma_z_sq, E z[k] z[k-j] = rho^j sigma_z_sq.
struct AttackModel {
    double sigma_z_sq = 1.0;
    double rho = 0.0;
    std::size_t attack_time = 0; ///< first trace index at which the controller receives z

    void validate() const;
};

struct WatermarkConfig {
    double sigma_e_sq = 0.0; ///< zero disables watermarking

    void validate() const;
};

struct SimConfig {
    SystemParams params;
    ClosedLoopGains gains;
    std::optional<AttackModel> attack;
    WatermarkConfig watermark;
    std::size_t horizon = 1;  ///< recorded steps after burn-in
    std::size_t burn_in = 2000;
    std::uint64_t seed = 0;
    /// When false the true plant state is not propagated once the attack starts. The received
    /// sequence no longer depends on it, and for A > 1 it grows without bound.
    bool track_state_under_attack = true;

    void validate() const;
};

/// Builds a config with gains derived from params.
SimConfig make_sim_config(const SystemParams& params, std::optional<AttackModel> attack, WatermarkConfig watermark,
                          std::size_t horizon, std::uint64_t seed, std::size_t burn_in = 2000);

struct SimStep {
    std::size_t k = 0;
    double x = 0.0;         ///< true state (NaN when not tracked)
    double received = 0.0;  ///< y[k] or z[k]
    double u = 0.0;
    double e = 0.0;         ///< watermark added at k
    double e_prev = 0.0;    ///< watermark added at k-1, paired with the residue by the detector
    double xhat_pred = 0.0; ///< controller prediction from k-1
    double xhat_filt = 0.0;
    double residue = 0.0;   ///< received - C xhat_pred
    bool under_attack = false;
};

struct SimTrace {
    std::vector<SimStep> steps;

    std::size_t size() const { return steps.size(); }
};

/// Identifiers of the independent noise substreams derived from one seed.
enum class NoiseStream : std::uint64_t { process = 1, measurement = 2, watermark = 3, attack = 4 };

GaussianStream make_stream(std::uint64_t seed, NoiseStream which);

/// i.i.d. N(0, sigma_e_sq) samples; all zeros when sigma_e_sq == 0.
std::vector<double> gen_watermark(std::size_t n, double sigma_e_sq, GaussianStream& rng);

/// Stateful AR(1) generator started in its stationary distribution.
class AttackSource {
public:
    explicit AttackSource(const AttackModel& attack);

    double next(GaussianStream& rng);

private:
    double sigma_z_;
    double rho_;
    double innovation_scale_;
    double prev_ = 0.0;
    bool started_ = false;
};

std::vector<double> gen_attack_sequence(std::size_t n, const AttackModel& attack, GaussianStream& rng);

/// Step-at-a-time closed loop with the controller's steady-state Kalman filter driven by the
/// received sequence. The constructor runs the burn-in.
class ClosedLoopSimulator {
public:
    explicit ClosedLoopSimulator(const SimConfig& cfg);

    /// Advances one step and returns the record for trace index next_index().
    SimStep step();
    std::size_t next_index() const { return k_; }

private:
    SimStep advance(bool attacked, bool record_state);

    SimConfig cfg_;
    GaussianStream w_;
    GaussianStream v_;
    GaussianStream e_;
    GaussianStream z_;
    std::optional<AttackSource> attacker_;
    double sigma_e_;
    double x_ = 0.0;
    double xhat_pred_ = 0.0;
    double e_prev_ = 0.0;
    bool state_tracked_ = true;
    std::size_t k_ = 0;
};

SimTrace run_closed_loop(const SimConfig& cfg);

/// (1/N) sum (W x^2 + U u^2). Requires at least 1e4 steps.
double empirical_lqg_cost(const SimTrace& trace, const SystemParams& params);

inline constexpr std::size_t kMinCostTrace = 10000;

/// CSV with header k,x,received,u,e,residue,under_attack.
void write_trace_csv(std::ostream& out, const SimTrace& trace);

} // namespace wmcusum
