#include "wmcusum/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "wmcusum/errors.hpp"
#include "wmcusum/report.hpp"

namespace wmcusum {

namespace {

double log_normal_pdf(double x, double mean, double var) {
    const double d = x - mean;
    return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

void check_gaussian(const BivariateGaussian& g, const char* which) {
    if (!(std::isfinite(g.residue_var) && g.residue_var > 0.0)) {
        throw InvalidParameter(std::string(which) + " residue variance must be > 0");
    }
    if (!(std::isfinite(g.watermark_var) && g.watermark_var >= 0.0)) {
        throw InvalidParameter(std::string(which) + " watermark variance must be >= 0");
    }
    if (!(std::abs(g.correlation) < 1.0)) {
        throw InvalidParameter(std::string(which) + " correlation must lie in (-1, 1)");
    }
    if (g.watermark_var == 0.0 && g.correlation != 0.0) {
        throw InvalidParameter(std::string(which) + " correlation must be 0 without a watermark");
    }
}

} // namespace

double BivariateGaussian::conditional_slope() const {
    if (watermark_var == 0.0) {
        return 0.0;
    }
    return correlation * std::sqrt(residue_var / watermark_var);
}

void DensityPair::validate() const {
    check_gaussian(h0, "h0");
    check_gaussian(h1, "h1");
    if (h0.correlation != 0.0) {
        throw InvalidParameter("h0 residue and watermark must be uncorrelated");
    }
    if (h0.watermark_var != h1.watermark_var) {
        throw InvalidParameter("h0 and h1 must share the watermark variance");
    }
}

DensityPair make_density_pair(const KldBreakdown& kld, double sigma_e_sq) {
    DensityPair d;
    d.h0 = BivariateGaussian{kld.sigma_gamma_sq, sigma_e_sq, 0.0};
    d.h1 = BivariateGaussian{kld.sigma_gamma_tilde_sq, sigma_e_sq, sigma_e_sq > 0.0 ? kld.lambda : 0.0};
    d.validate();
    return d;
}

std::vector<ObservationPair> observation_pairs(const SimTrace& trace) {
    std::vector<ObservationPair> out;
    out.reserve(trace.size());
    for (const auto& s : trace.steps) {
        out.push_back({s.residue, s.e_prev});
    }
    return out;
}

double joint_llr(double residue, double watermark_prev, const DensityPair& density) {
    const auto& h1 = density.h1;
    const auto& h0 = density.h0;
    return log_normal_pdf(residue, h1.conditional_slope() * watermark_prev, h1.conditional_var()) -
           log_normal_pdf(residue, h0.conditional_slope() * watermark_prev, h0.conditional_var());
}

double marginal_llr(double residue, double sigma_gamma_sq, double sigma_gamma_tilde_sq) {
    return 0.5 * std::log(sigma_gamma_sq / sigma_gamma_tilde_sq) +
           0.5 * residue * residue * (1.0 / sigma_gamma_sq - 1.0 / sigma_gamma_tilde_sq);
}

double llr(const ObservationPair& obs, Variant variant, const DensityPair& density) {
    if (variant == Variant::joint) {
        return joint_llr(obs.residue, obs.watermark_prev, density);
    }
    return marginal_llr(obs.residue, density.h0.residue_var, density.h1.residue_var);
}

void DetectorConfig::validate() const {
    detection_threshold(p_false_alarm);
    density.validate();
}

double DetectorConfig::threshold() const { return detection_threshold(p_false_alarm); }

CusumDetector::CusumDetector(const DetectorConfig& cfg) : cfg_(cfg), alpha_(cfg.threshold()) { cfg_.validate(); }

bool CusumDetector::update(const ObservationPair& obs) {
    s_ = std::max(0.0, s_ + llr(obs, cfg_.variant, cfg_.density));
    return s_ > alpha_;
}

DetectionOutcome run_cusum(std::span<const ObservationPair> pairs, const DetectorConfig& cfg, bool stop_on_alarm) {
    if (pairs.empty()) {
        throw InvalidParameter("CUSUM needs a nonempty stream");
    }
    CusumDetector detector(cfg);
    DetectionOutcome out;
    out.statistic_path.reserve(pairs.size());
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const bool above = detector.update(pairs[k]);
        out.statistic_path.push_back(detector.statistic());
        if (above && !out.alarm_time) {
            out.alarm_time = k;
            if (stop_on_alarm) {
                break;
            }
        }
    }
    return out;
}

void write_statistic_csv(std::ostream& out, const DetectionOutcome& outcome, std::size_t first_k) {
    out << "k,S_k\n";
    for (std::size_t i = 0; i < outcome.statistic_path.size(); ++i) {
        out << first_k + i << ',' << format_number(outcome.statistic_path[i]) << '\n';
    }
}

} // namespace wmcusum
