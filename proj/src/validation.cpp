#include "wmcusum/validation.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "wmcusum/analysis.hpp"
#include "wmcusum/detect.hpp"
#include "wmcusum/stats.hpp"

namespace wmcusum {

namespace {

struct Columns {
    std::vector<double> x, received, u, e, e_prev, xhat_filt, residue;

    explicit Columns(const SimTrace& t) {
        for (const auto& s : t.steps) {
            x.push_back(s.x);
            received.push_back(s.received);
            u.push_back(s.u);
            e.push_back(s.e);
            e_prev.push_back(s.e_prev);
            xhat_filt.push_back(s.xhat_filt);
            residue.push_back(s.residue);
        }
    }
};

double mean_square(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) {
        s += x * x;
    }
    return s / static_cast<double>(xs.size());
}

CheckResult relative_check(std::string name, double expected, double observed, double tol) {
    CheckResult r{std::move(name), expected, observed, 0.0, tol, true, false};
    r.error = std::abs(observed - expected) / std::abs(expected);
    r.passed = r.error <= tol;
    return r;
}

CheckResult absolute_check(std::string name, double expected, double observed, double tol) {
    CheckResult r{std::move(name), expected, observed, 0.0, tol, false, false};
    r.error = std::abs(observed - expected);
    r.passed = r.error <= tol;
    return r;
}

} // namespace

std::vector<CheckResult> run_validation_suite(const ValidationOptions& opts) {
    const std::size_t n = opts.fast ? 100000 : 1000000;
    const double tol = opts.fast ? 0.05 : 0.02;
    const double se_unit = 1.0 / std::sqrt(static_cast<double>(n));
    const SystemParams& p = opts.params;
    const ClosedLoopGains g = derive_gains(p);
    const bool watermarked = opts.sigma_e_sq > 0.0;

    std::vector<CheckResult> out;

    // Healthy loop, with and without watermark on common noise.
    const SimTrace healthy = run_closed_loop(make_sim_config(p, std::nullopt, {opts.sigma_e_sq}, n, opts.seed));
    const SimTrace plain = run_closed_loop(make_sim_config(p, std::nullopt, {0.0}, n, opts.seed));
    const Columns h(healthy);

    out.push_back(relative_check("innovation_variance", g.sigma_gamma_sq, stats::variance(h.residue), tol));
    double worst_acf = 0.0;
    for (std::size_t lag = 1; lag <= 10; ++lag) {
        const double acf = stats::autocorrelation(h.residue, lag);
        if (std::abs(acf) > std::abs(worst_acf)) {
            worst_acf = acf;
        }
    }
    out.push_back(absolute_check("innovation_whiteness_lags_1_10", 0.0, worst_acf, 4.0 * se_unit));
    if (watermarked) {
        out.push_back(absolute_check("innovation_watermark_correlation", 0.0,
                                     stats::correlation(h.residue, h.e_prev), 3.0 * se_unit));
    }

    const HealthyMoments hm = healthy_loop_moments(p, g, opts.sigma_e_sq);
    out.push_back(relative_check("healthy_E_xhat_sq", hm.E_xhat_sq, mean_square(h.xhat_filt), tol));
    out.push_back(relative_check("healthy_E_y_sq", hm.E_y_sq, mean_square(h.received), tol));
    out.push_back(relative_check("healthy_E_x_sq", hm.E_x_sq, mean_square(h.x), tol));

    const double cost_plain = empirical_lqg_cost(plain, p);
    out.push_back(relative_check("lqg_cost_without_watermark", lqg_cost(p, g, 0.0), cost_plain, tol));
    if (watermarked) {
        out.push_back(relative_check("delta_lqg", delta_lqg_for_watermark_variance(p, g, opts.sigma_e_sq),
                                     empirical_lqg_cost(healthy, p) - cost_plain, tol));
    }

    // Attacked loop from the first recorded step.
    AttackModel attack = opts.attack;
    attack.attack_time = 0;
    SimConfig acfg = make_sim_config(p, attack, {opts.sigma_e_sq}, n, derive_seed({opts.seed, 0xa77acdULL}));
    acfg.track_state_under_attack = false;
    const SimTrace attacked = run_closed_loop(acfg);
    const Columns a(attacked);
    const AttackedMoments am = attacked_moments(g, p, attack, opts.sigma_e_sq);

    out.push_back(
        relative_check("attacked_residue_variance", am.sigma_gamma_tilde_sq, stats::variance(a.residue), tol));
    if (watermarked) {
        out.push_back(relative_check("attacked_residue_watermark_covariance", am.cov_residue_watermark,
                                     stats::covariance(a.residue, a.e_prev), tol));
    }
    {
        std::vector<double> z_next(a.received.begin() + 1, a.received.end());
        std::vector<double> xhat_prev(a.xhat_filt.begin(), a.xhat_filt.end() - 1);
        const double observed = stats::covariance(z_next, xhat_prev);
        if (am.xhat_z_lag1 != 0.0) {
            out.push_back(relative_check("attacked_estimate_attack_cross_moment", am.xhat_z_lag1, observed, tol));
        } else {
            const double scale = std::sqrt(attack.sigma_z_sq * am.sigma_xhat_sq);
            out.push_back(
                absolute_check("attacked_estimate_attack_cross_moment", 0.0, observed, 4.0 * scale * se_unit));
        }
    }
    out.push_back(relative_check("attacked_estimate_variance", am.sigma_xhat_sq, mean_square(a.xhat_filt), tol));

    const KldBreakdown kld = kld_joint(g, p, attack, opts.sigma_e_sq);
    const DensityPair density = make_density_pair(kld, opts.sigma_e_sq);
    double joint_sum = 0.0;
    double marginal_sum = 0.0;
    for (const auto& s : attacked.steps) {
        joint_sum += joint_llr(s.residue, s.e_prev, density);
        marginal_sum += marginal_llr(s.residue, kld.sigma_gamma_sq, kld.sigma_gamma_tilde_sq);
    }
    out.push_back(relative_check("attacked_mean_joint_llr", kld.joint_kld, joint_sum / static_cast<double>(n), tol));
    if (kld.marginal_kld > 0.0) {
        out.push_back(relative_check("attacked_mean_marginal_llr", kld.marginal_kld,
                                     marginal_sum / static_cast<double>(n), tol));
    }
    return out;
}

} // namespace wmcusum
