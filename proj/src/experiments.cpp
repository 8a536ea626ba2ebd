#include "wmcusum/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "wmcusum/errors.hpp"
#include "wmcusum/report.hpp"

namespace wmcusum {

namespace {

struct MeanAndError {
    double mean;
    double stderr_;
};

MeanAndError summarize(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) {
        mean += x;
    }
    mean /= n;
    if (xs.size() < 2) {
        return {mean, std::numeric_limits<double>::quiet_NaN()};
    }
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

DetectorConfig detector_for(const ExperimentSpec& spec, const ClosedLoopGains& gains, double sigma_e_sq,
                            Variant variant) {
    const KldBreakdown kld = kld_joint(gains, spec.params, spec.attack, sigma_e_sq);
    return DetectorConfig{spec.p_false_alarm, variant, make_density_pair(kld, sigma_e_sq)};
}

ObservationPair pair_of(const SimStep& s) { return {s.residue, s.e_prev}; }

} // namespace

void ExperimentSpec::validate() const {
    params.validate();
    attack.validate();
    detection_threshold(p_false_alarm);
    if (runs < 1) {
        throw InvalidParameter("runs must be >= 1");
    }
    if (horizon < 1) {
        throw InvalidParameter("horizon must be >= 1");
    }
    if (delta_lqg_grid.empty()) {
        throw InvalidParameter("delta_lqg grid must be nonempty");
    }
    for (std::size_t i = 0; i < delta_lqg_grid.size(); ++i) {
        if (!(std::isfinite(delta_lqg_grid[i]) && delta_lqg_grid[i] >= 0.0)) {
            throw InvalidParameter("delta_lqg grid values must be >= 0");
        }
        if (i > 0 && !(delta_lqg_grid[i] > delta_lqg_grid[i - 1])) {
            throw InvalidParameter("delta_lqg grid must be strictly ascending");
        }
    }
    if (variants.empty()) {
        throw InvalidParameter("at least one detector variant is required");
    }
}

std::vector<double> default_delta_lqg_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 20; ++i) {
        grid.push_back(0.1 * i);
    }
    return grid;
}

std::uint64_t run_seed(std::uint64_t base_seed, std::uint64_t point, std::uint64_t run, std::uint64_t restart) {
    return derive_seed({base_seed, point, run, restart});
}

AddEstimate estimate_add(const ExperimentSpec& spec, double sigma_e_sq, Variant variant, std::uint64_t point) {
    spec.validate();
    const ClosedLoopGains gains = derive_gains(spec.params);
    const DetectorConfig det_cfg = detector_for(spec, gains, sigma_e_sq, variant);
    const std::size_t onset = spec.attack.attack_time;
    const std::size_t watch_from = onset - std::min(spec.warmup, onset);

    SimConfig sim_cfg;
    sim_cfg.params = spec.params;
    sim_cfg.gains = gains;
    sim_cfg.attack = spec.attack;
    sim_cfg.watermark = WatermarkConfig{sigma_e_sq};
    sim_cfg.horizon = onset + spec.horizon;
    sim_cfg.burn_in = spec.burn_in;
    sim_cfg.track_state_under_attack = false;

    AddEstimate est;
    est.runs = spec.runs;
    std::vector<double> delays;
    delays.reserve(spec.runs);

    for (std::size_t run = 0; run < spec.runs; ++run) {
        std::optional<std::size_t> delay;
        for (std::size_t restart = 0; restart <= spec.max_restarts; ++restart) {
            sim_cfg.seed = run_seed(spec.base_seed, point, run, restart);
            ClosedLoopSimulator sim(sim_cfg);
            CusumDetector detector(det_cfg);

            bool false_alarm = false;
            for (std::size_t k = 0; k < onset; ++k) {
                const SimStep s = sim.step();
                if (k >= watch_from && detector.update(pair_of(s))) {
                    false_alarm = true;
                    break;
                }
            }
            if (false_alarm) {
                ++est.false_alarm_restarts;
                continue;
            }
            detector.reset();
            for (std::size_t k = onset; k < onset + spec.horizon; ++k) {
                if (detector.update(pair_of(sim.step()))) {
                    delay = k - onset;
                    break;
                }
            }
            break;
        }
        if (delay) {
            delays.push_back(static_cast<double>(*delay));
        } else {
            ++est.failures;
        }
    }

    est.effective_runs = delays.size();
    if (delays.empty()) {
        throw AllRunsFailed(fmt::format("no run alarmed within {} steps of onset (sigma_e_sq = {})", spec.horizon,
                                        format_number(sigma_e_sq)));
    }
    const MeanAndError s = summarize(delays);
    est.mean = s.mean;
    est.stderr_ = s.stderr_;
    return est;
}

RunLengthEstimate estimate_false_alarm_run_length(const ExperimentSpec& spec, double sigma_e_sq, Variant variant) {
    spec.validate();
    const ClosedLoopGains gains = derive_gains(spec.params);
    const DetectorConfig det_cfg = detector_for(spec, gains, sigma_e_sq, variant);

    SimConfig sim_cfg;
    sim_cfg.params = spec.params;
    sim_cfg.gains = gains;
    sim_cfg.watermark = WatermarkConfig{sigma_e_sq};
    sim_cfg.horizon = spec.horizon;
    sim_cfg.burn_in = spec.burn_in;

    RunLengthEstimate est;
    est.runs = spec.runs;
    std::vector<double> lengths;
    lengths.reserve(spec.runs);
    for (std::size_t run = 0; run < spec.runs; ++run) {
        // Point index 1 << 32 keeps these seeds apart from the ADD grid points.
        sim_cfg.seed = run_seed(spec.base_seed, std::uint64_t{1} << 32, run, 0);
        ClosedLoopSimulator sim(sim_cfg);
        CusumDetector detector(det_cfg);
        std::size_t length = spec.horizon;
        bool alarmed = false;
        for (std::size_t k = 0; k < spec.horizon; ++k) {
            if (detector.update(pair_of(sim.step()))) {
                length = k + 1;
                alarmed = true;
                break;
            }
        }
        if (!alarmed) {
            ++est.censored;
        }
        lengths.push_back(static_cast<double>(length));
    }
    const MeanAndError s = summarize(lengths);
    est.mean = s.mean;
    est.stderr_ = s.stderr_;
    return est;
}

const VariantEstimate* TradeoffPoint::find(Variant v) const {
    for (const auto& s : simulated) {
        if (s.variant == v) {
            return &s;
        }
    }
    return nullptr;
}

TradeoffCurve bound_curve(const ExperimentSpec& spec) {
    spec.validate();
    const ClosedLoopGains gains = derive_gains(spec.params);
    TradeoffCurve curve;
    curve.spec = spec;
    for (double delta : spec.delta_lqg_grid) {
        TradeoffPoint pt;
        pt.delta_lqg = delta;
        pt.sigma_e_sq = watermark_variance_for_delta_lqg(spec.params, gains, delta);
        pt.kld = kld_joint(gains, spec.params, spec.attack, pt.sigma_e_sq);
        pt.bound = add_upper_bound(pt.kld, spec.p_false_alarm);
        curve.points.push_back(pt);
    }
    return curve;
}

TradeoffCurve sweep_tradeoff(const ExperimentSpec& spec) {
    TradeoffCurve curve = bound_curve(spec);
    for (std::size_t j = 0; j < curve.points.size(); ++j) {
        auto& pt = curve.points[j];
        for (Variant v : spec.variants) {
            VariantEstimate ve{v, std::nullopt};
            try {
                ve.estimate = estimate_add(spec, pt.sigma_e_sq, v, j);
            } catch (const AllRunsFailed&) {
            }
            pt.simulated.push_back(ve);
        }
    }
    return curve;
}

void write_tradeoff_csv(std::ostream& out, const TradeoffCurve& curve, Variant variant) {
    out << "delta_lqg,sigma_e_sq,bound_joint,bound_marginal,add_mean,add_stderr,failures\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& pt : curve.points) {
        const VariantEstimate* ve = pt.find(variant);
        const AddEstimate* est = ve && ve->estimate ? &*ve->estimate : nullptr;
        const std::size_t failures = est ? est->failures : curve.spec.runs;
        out << format_number(pt.delta_lqg) << ',' << format_number(pt.sigma_e_sq) << ','
            << format_number(pt.bound.bound_joint) << ',' << format_number(pt.bound.bound_marginal) << ','
            << format_number(est ? est->mean : nan) << ',' << format_number(est ? est->stderr_ : nan) << ','
            << failures << '\n';
    }
}

} // namespace wmcusum
