#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "wmcusum/analysis.hpp"
#include "wmcusum/sim.hpp"

namespace wmcusum {

/// Zero-mean bivariate Gaussian over (residue, lagged watermark).
struct BivariateGaussian {
    double residue_var = 1.0;
    double watermark_var = 0.0; ///< may be 0, in which case the watermark coordinate is degenerate
    double correlation = 0.0;

    /// Mean and variance of the residue conditioned on the watermark value.
    double conditional_slope() const;
    double conditional_var() const { return residue_var * (1.0 - correlation * correlation); }
};

/// h0: healthy innovations independent of the watermark. h1: attacked residue correlated with it.
struct DensityPair {
    BivariateGaussian h0;
    BivariateGaussian h1;

    void validate() const;
};

DensityPair make_density_pair(const KldBreakdown& kld, double sigma_e_sq);

/// One detector input: residue at k and the watermark applied at k-1.
struct ObservationPair {
    double residue = 0.0;
    double watermark_prev = 0.0;
};

std::vector<ObservationPair> observation_pairs(const SimTrace& trace);

/// ln f_h1(residue, e) - ln f_h0(residue, e). The watermark marginal is shared and cancels, so
/// the ratio is that of the residue conditioned on e, which stays finite when sigma_e = 0.
double joint_llr(double residue, double watermark_prev, const DensityPair& density);

/// ln N(residue; 0, sigma_gamma_tilde_sq) - ln N(residue; 0, sigma_gamma_sq).
double marginal_llr(double residue, double sigma_gamma_sq, double sigma_gamma_tilde_sq);

double llr(const ObservationPair& obs, Variant variant, const DensityPair& density);

struct DetectorConfig {
    double p_false_alarm = 0.01;
    Variant variant = Variant::joint;
    DensityPair density;

    void validate() const;
    /// alpha = |ln p_false_alarm|
    double threshold() const;
};

struct DetectionOutcome {
    std::optional<std::size_t> alarm_time; ///< index of the first S_k > alpha
    std::vector<double> statistic_path;    ///< S_k after each processed pair
};

/// S_k = max(0, S_{k-1} + llr_k), S before the first pair = 0, alarm when S_k > alpha.
class CusumDetector {
public:
    explicit CusumDetector(const DetectorConfig& cfg);

    /// Folds one pair into the statistic. Returns true when the statistic is above the threshold.
    bool update(const ObservationPair& obs);
    double statistic() const { return s_; }
    double threshold() const { return alpha_; }
    void reset() { s_ = 0.0; }

private:
    DetectorConfig cfg_;
    double alpha_;
    double s_ = 0.0;
};

/// Runs the CUSUM over a pair stream. With stop_on_alarm the path ends at the first alarm;
/// otherwise the whole stream is processed and only the first crossing is reported.
DetectionOutcome run_cusum(std::span<const ObservationPair> pairs, const DetectorConfig& cfg,
                           bool stop_on_alarm = false);

/// CSV with header k,S_k.
void write_statistic_csv(std::ostream& out, const DetectionOutcome& outcome, std::size_t first_k = 0);

} // namespace wmcusum
