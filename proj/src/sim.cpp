#include "wmcusum/sim.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "wmcusum/errors.hpp"
#include "wmcusum/report.hpp"

namespace wmcusum {

namespace {

constexpr double kDivergenceLimit = 1e12;

} // namespace

void AttackModel::validate() const {
    if (!(std::isfinite(sigma_z_sq) && sigma_z_sq > 0.0)) {
        throw InvalidParameter("sigma_z_sq must be > 0");
    }
    if (!(rho >= 0.0 && rho < 1.0)) {
        throw InvalidParameter("rho must lie in [0, 1)");
    }
}

void WatermarkConfig::validate() const {
    if (!(std::isfinite(sigma_e_sq) && sigma_e_sq >= 0.0)) {
        throw InvalidParameter("sigma_e_sq must be >= 0");
    }
}

void SimConfig::validate() const {
    params.validate();
    watermark.validate();
    if (horizon < 1) {
        throw InvalidParameter("horizon must be >= 1");
    }
    if (attack) {
        attack->validate();
        if (attack->attack_time >= horizon) {
            throw InvalidParameter("attack_time must be < horizon");
        }
    }
}

SimConfig make_sim_config(const SystemParams& params, std::optional<AttackModel> attack, WatermarkConfig watermark,
                          std::size_t horizon, std::uint64_t seed, std::size_t burn_in) {
    SimConfig cfg;
    cfg.params = params;
    cfg.gains = derive_gains(params);
    cfg.attack = attack;
    cfg.watermark = watermark;
    cfg.horizon = horizon;
    cfg.burn_in = burn_in;
    cfg.seed = seed;
    cfg.validate();
    return cfg;
}

GaussianStream make_stream(std::uint64_t seed, NoiseStream which) {
    return GaussianStream(derive_seed({seed, static_cast<std::uint64_t>(which)}));
}

std::vector<double> gen_watermark(std::size_t n, double sigma_e_sq, GaussianStream& rng) {
    WatermarkConfig{sigma_e_sq}.validate();
    std::vector<double> out(n);
    for (auto& e : out) {
        e = rng.next(sigma_e_sq);
    }
    return out;
}

AttackSource::AttackSource(const AttackModel& attack)
    : sigma_z_(std::sqrt(attack.sigma_z_sq)), rho_(attack.rho),
      innovation_scale_(std::sqrt(1.0 - attack.rho * attack.rho) * std::sqrt(attack.sigma_z_sq)) {
    attack.validate();
}

double AttackSource::next(GaussianStream& rng) {
    const double xi = rng.standard();
    if (!started_) {
        started_ = true;
        prev_ = sigma_z_ * xi;
    } else {
        prev_ = rho_ * prev_ + innovation_scale_ * xi;
    }
    return prev_;
}

std::vector<double> gen_attack_sequence(std::size_t n, const AttackModel& attack, GaussianStream& rng) {
    AttackSource source(attack);
    std::vector<double> out(n);
    for (auto& z : out) {
        z = source.next(rng);
    }
    return out;
}

ClosedLoopSimulator::ClosedLoopSimulator(const SimConfig& cfg)
    : cfg_(cfg), w_(make_stream(cfg.seed, NoiseStream::process)), v_(make_stream(cfg.seed, NoiseStream::measurement)),
      e_(make_stream(cfg.seed, NoiseStream::watermark)), z_(make_stream(cfg.seed, NoiseStream::attack)),
      sigma_e_(std::sqrt(cfg.watermark.sigma_e_sq)) {
    cfg_.validate();
    if (cfg_.attack) {
        attacker_.emplace(*cfg_.attack);
    }
    for (std::size_t i = 0; i < cfg_.burn_in; ++i) {
        advance(false, false);
    }
}

SimStep ClosedLoopSimulator::step() {
    const bool attacked = attacker_ && k_ >= cfg_.attack->attack_time;
    SimStep s = advance(attacked, true);
    s.k = k_++;
    return s;
}

SimStep ClosedLoopSimulator::advance(bool attacked, bool record_state) {
    const auto& p = cfg_.params;
    const auto& g = cfg_.gains;

    // Every substream advances each step so runs that differ only in one knob share noise.
    const double v = v_.next(p.R);
    const double w = w_.next(p.Q);
    const double e = sigma_e_ * e_.standard();

    if (attacked && !cfg_.track_state_under_attack) {
        state_tracked_ = false;
    }

    SimStep s;
    s.under_attack = attacked;
    s.x = state_tracked_ ? x_ : std::numeric_limits<double>::quiet_NaN();
    s.received = attacked ? attacker_->next(z_) : p.C * x_ + v;
    s.xhat_pred = xhat_pred_;
    s.residue = s.received - p.C * xhat_pred_;
    s.xhat_filt = xhat_pred_ + g.K * s.residue;
    s.e = e;
    s.e_prev = e_prev_;
    s.u = g.L * s.xhat_filt + e;

    if (state_tracked_) {
        x_ = p.A * x_ + p.B * s.u + w;
        if (!(std::abs(x_) <= kDivergenceLimit)) {
            throw NumericalDivergence(fmt::format("|x| exceeded {} at step {}{}", kDivergenceLimit, k_,
                                                  record_state ? "" : " of burn-in"));
        }
    }
    xhat_pred_ = p.A * s.xhat_filt + p.B * s.u;
    e_prev_ = e;
    return s;
}

SimTrace run_closed_loop(const SimConfig& cfg) {
    ClosedLoopSimulator sim(cfg);
    SimTrace trace;
    trace.steps.reserve(cfg.horizon);
    for (std::size_t i = 0; i < cfg.horizon; ++i) {
        trace.steps.push_back(sim.step());
    }
    return trace;
}

double empirical_lqg_cost(const SimTrace& trace, const SystemParams& params) {
    if (trace.size() < kMinCostTrace) {
        throw TraceTooShort(fmt::format("LQG cost needs at least {} steps, trace has {}", kMinCostTrace, trace.size()));
    }
    double sum = 0.0;
    for (const auto& s : trace.steps) {
        sum += params.W * s.x * s.x + params.U * s.u * s.u;
    }
    return sum / static_cast<double>(trace.size());
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
    out << "k,x,received,u,e,residue,under_attack\n";
    for (const auto& s : trace.steps) {
        out << s.k << ',' << format_number(s.x) << ',' << format_number(s.received) << ',' << format_number(s.u) << ','
            << format_number(s.e) << ',' << format_number(s.residue) << ',' << (s.under_attack ? 1 : 0) << '\n';
    }
}

} // namespace wmcusum
