#pragma once

#include <string_view>

#include "wmcusum/model.hpp"
#include "wmcusum/sim.hpp"

namespace wmcusum {

/// Which sequential test: the residue/watermark pair or the residue alone.
enum class Variant { joint, marginal };

std::string_view to_string(Variant v);
/// Throws InvalidParameter on anything other than "joint" or "marginal".
Variant parse_variant(std::string_view name);

/// Stationary variance of the residue seen by the controller while it is fed the attacker's
/// AR(1) sequence with watermark variance sigma_e_sq.
double sigma_gamma_tilde_sq(const ClosedLoopGains& gains, const SystemParams& params, const AttackModel& attack,
                            double sigma_e_sq);

/// Per-step divergence between the attacked and healthy (residue, lagged watermark) densities.
/// All divergences are in nats.
struct KldBreakdown {
    double lambda = 0.0;               ///< correlation of (residue, e[k-1]) under attack, -B C sigma_e / sigma_tilde
    double sigma_gamma_tilde_sq = 0.0; ///< attacked residue variance
    double sigma_gamma_sq = 0.0;       ///< healthy innovation variance
    double joint_kld = 0.0;            ///< correlation_term + marginal_kld
    double marginal_kld = 0.0;         ///< divergence of the residue alone
    double correlation_term = 0.0;     ///< 0.5 ln(1 / (1 - lambda^2))
};

KldBreakdown kld_joint(const ClosedLoopGains& gains, const SystemParams& params, const AttackModel& attack,
                       double sigma_e_sq);

/// Asymptotic upper bounds |ln p_fa| / KLD on the average detection delay. A zero divergence
/// yields +infinity ("unbounded") rather than an error.
struct AddBound {
    double p_false_alarm = 0.0;
    double bound_joint = 0.0;
    double bound_marginal = 0.0;
};

/// alpha = |ln p_false_alarm|; throws InvalidParameter unless 0 < p < 1.
double detection_threshold(double p_false_alarm);

AddBound add_upper_bound(const KldBreakdown& kld, double p_false_alarm);

/// U + B^2 (W + L^2 U) / (1 - (A+BL)^2): cost increase per unit of watermark variance.
double watermark_cost_factor(const SystemParams& params, const ClosedLoopGains& gains);

double watermark_variance_for_delta_lqg(const SystemParams& params, const ClosedLoopGains& gains, double delta_lqg);
double delta_lqg_for_watermark_variance(const SystemParams& params, const ClosedLoopGains& gains, double sigma_e_sq);

/// Healthy-regime second moments with watermark variance sigma_e_sq, and the cost increase
/// assembled from them relative to sigma_e_sq = 0.
struct HealthyMoments {
    double E_xhat_sq = 0.0; ///< filtered estimate
    double E_y_sq = 0.0;    ///< measurement
    double E_x_sq = 0.0;    ///< true state
    double delta_lqg = 0.0;
};

HealthyMoments healthy_loop_moments(const SystemParams& params, const ClosedLoopGains& gains, double sigma_e_sq);

/// Stationary W E x^2 + U E u^2 of the healthy loop with watermark variance sigma_e_sq.
double lqg_cost(const SystemParams& params, const ClosedLoopGains& gains, double sigma_e_sq);

/// Attacked-regime second-order statistics used to build the residue variance.
struct AttackedMoments {
    double cov_residue_watermark = 0.0; ///< cov(residue[k], e[k-1]) = -C B sigma_e^2
    double xhat_z_lag1 = 0.0;           ///< cov(z[k], xhat_filt[k-1]) = K sigma_z^2 rho / (1 - rho calA)
    double sigma_xhat_sq = 0.0;         ///< E xhat_filt^2 while attacked
    double sigma_gamma_tilde_sq = 0.0;
};

AttackedMoments attacked_moments(const ClosedLoopGains& gains, const SystemParams& params, const AttackModel& attack,
                                 double sigma_e_sq);

/// Attack stealthiness level epsilon measured as the per-step divergence of the chosen test.
double stealthiness_level(const KldBreakdown& kld, Variant variant);

inline double nats_to_bits(double nats) { return nats / 0.69314718055994530942; }

} // namespace wmcusum
