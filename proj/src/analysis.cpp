#include "wmcusum/analysis.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "wmcusum/errors.hpp"

namespace wmcusum {

namespace {

void require_sigma_e(double sigma_e_sq) { WatermarkConfig{sigma_e_sq}.validate(); }

// r - 1 - ln r without cancellation near r = 1.
double gaussian_variance_divergence(double ratio) { return 0.5 * ((ratio - 1.0) - std::log1p(ratio - 1.0)); }

} // namespace

std::string_view to_string(Variant v) { return v == Variant::joint ? "joint" : "marginal"; }

Variant parse_variant(std::string_view name) {
    if (name == "joint") {
        return Variant::joint;
    }
    if (name == "marginal") {
        return Variant::marginal;
    }
    throw InvalidParameter("variant must be 'joint' or 'marginal', got '" + std::string(name) + "'");
}

double sigma_gamma_tilde_sq(const ClosedLoopGains& gains, const SystemParams& params, const AttackModel& attack,
                            double sigma_e_sq) {
    attack.validate();
    require_sigma_e(sigma_e_sq);
    const double C = params.C;
    const double B = params.B;
    const double K = gains.K;
    const double pole = gains.closed_loop_pole;
    const double calA = gains.calA;
    const double rho = attack.rho;
    const double one_minus_rho_calA = 1.0 - rho * calA;
    const double one_minus_calA_sq = 1.0 - calA * calA;

    const double lead = 1.0 - rho * C * K * pole / one_minus_rho_calA;
    const double tail = (1.0 - rho * rho) * C * C * K * K * pole * pole /
                        (one_minus_calA_sq * one_minus_rho_calA * one_minus_rho_calA);
    return (lead * lead + tail) * attack.sigma_z_sq + B * B * C * C * sigma_e_sq / one_minus_calA_sq;
}

KldBreakdown kld_joint(const ClosedLoopGains& gains, const SystemParams& params, const AttackModel& attack,
                       double sigma_e_sq) {
    KldBreakdown out;
    out.sigma_gamma_tilde_sq = sigma_gamma_tilde_sq(gains, params, attack, sigma_e_sq);
    out.sigma_gamma_sq = gains.sigma_gamma_sq;
    out.lambda = -params.B * params.C * std::sqrt(sigma_e_sq) / std::sqrt(out.sigma_gamma_tilde_sq);
    if (!(std::abs(out.lambda) < 1.0)) {
        throw InternalConsistencyError("residue/watermark correlation is not inside (-1, 1)");
    }
    out.correlation_term = -0.5 * std::log1p(-out.lambda * out.lambda);
    out.marginal_kld = gaussian_variance_divergence(out.sigma_gamma_tilde_sq / out.sigma_gamma_sq);
    out.joint_kld = out.correlation_term + out.marginal_kld;
    return out;
}

double detection_threshold(double p_false_alarm) {
    if (!(p_false_alarm > 0.0 && p_false_alarm < 1.0)) {
        throw InvalidParameter("p_false_alarm must lie in (0, 1)");
    }
    return std::abs(std::log(p_false_alarm));
}

AddBound add_upper_bound(const KldBreakdown& kld, double p_false_alarm) {
    const double alpha = detection_threshold(p_false_alarm);
    const auto bound = [alpha](double d) {
        return d > 0.0 ? alpha / d : std::numeric_limits<double>::infinity();
    };
    return AddBound{p_false_alarm, bound(kld.joint_kld), bound(kld.marginal_kld)};
}

double watermark_cost_factor(const SystemParams& params, const ClosedLoopGains& gains) {
    const double L = gains.L;
    const double pole = gains.closed_loop_pole;
    return params.U + params.B * params.B * (params.W + L * L * params.U) / (1.0 - pole * pole);
}

double watermark_variance_for_delta_lqg(const SystemParams& params, const ClosedLoopGains& gains, double delta_lqg) {
    if (!(std::isfinite(delta_lqg) && delta_lqg >= 0.0)) {
        throw InvalidParameter("delta_lqg must be >= 0");
    }
    return delta_lqg / watermark_cost_factor(params, gains);
}

double delta_lqg_for_watermark_variance(const SystemParams& params, const ClosedLoopGains& gains, double sigma_e_sq) {
    require_sigma_e(sigma_e_sq);
    return sigma_e_sq * watermark_cost_factor(params, gains);
}

namespace {

struct RawMoments {
    double xhat_sq;
    double y_sq;
    double x_sq;
};

RawMoments healthy_raw_moments(const SystemParams& p, const ClosedLoopGains& g, double sigma_e_sq) {
    const double pole_sq = g.closed_loop_pole * g.closed_loop_pole;
    const double B = p.B;
    const double C = p.C;
    RawMoments m{};
    m.xhat_sq = (B * B * sigma_e_sq + g.K * g.K * g.sigma_gamma_sq) / (1.0 - pole_sq);
    m.y_sq = g.sigma_gamma_sq * (1.0 + C * C * g.K * g.K * pole_sq / (1.0 - pole_sq)) +
             B * B * C * C * sigma_e_sq / (1.0 - pole_sq);
    m.x_sq = (m.y_sq - p.R) / (C * C);
    return m;
}

} // namespace

HealthyMoments healthy_loop_moments(const SystemParams& params, const ClosedLoopGains& gains, double sigma_e_sq) {
    require_sigma_e(sigma_e_sq);
    const RawMoments w = healthy_raw_moments(params, gains, sigma_e_sq);
    const RawMoments n = healthy_raw_moments(params, gains, 0.0);
    HealthyMoments out;
    out.E_xhat_sq = w.xhat_sq;
    out.E_y_sq = w.y_sq;
    out.E_x_sq = w.x_sq;
    out.delta_lqg = params.W * (w.x_sq - n.x_sq) + params.U * gains.L * gains.L * (w.xhat_sq - n.xhat_sq) +
                    params.U * sigma_e_sq;
    return out;
}

double lqg_cost(const SystemParams& params, const ClosedLoopGains& gains, double sigma_e_sq) {
    require_sigma_e(sigma_e_sq);
    const RawMoments m = healthy_raw_moments(params, gains, sigma_e_sq);
    // e[k] is independent of xhat_filt[k], so E u^2 = L^2 E xhat^2 + sigma_e^2.
    return params.W * m.x_sq + params.U * (gains.L * gains.L * m.xhat_sq + sigma_e_sq);
}

AttackedMoments attacked_moments(const ClosedLoopGains& gains, const SystemParams& params, const AttackModel& attack,
                                 double sigma_e_sq) {
    attack.validate();
    require_sigma_e(sigma_e_sq);
    const double calA = gains.calA;
    const double rho = attack.rho;
    const double one_minus_ck = 1.0 - params.C * gains.K;
    AttackedMoments out;
    out.cov_residue_watermark = -params.C * params.B * sigma_e_sq;
    out.xhat_z_lag1 = gains.K * attack.sigma_z_sq * rho / (1.0 - rho * calA);
    out.sigma_xhat_sq = gains.K * gains.K * (1.0 + rho * calA) * attack.sigma_z_sq /
                            ((1.0 - rho * calA) * (1.0 - calA * calA)) +
                        params.B * params.B * one_minus_ck * one_minus_ck * sigma_e_sq / (1.0 - calA * calA);
    out.sigma_gamma_tilde_sq = sigma_gamma_tilde_sq(gains, params, attack, sigma_e_sq);
    return out;
}

double stealthiness_level(const KldBreakdown& kld, Variant variant) {
    return variant == Variant::joint ? kld.joint_kld : kld.marginal_kld;
}

} // namespace wmcusum
