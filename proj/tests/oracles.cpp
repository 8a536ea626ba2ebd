#include "oracles.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "wmcusum/detect.hpp"

namespace oracle {

namespace {

template <std::size_t N>
using Mat = std::array<std::array<double, N>, N>;

template <std::size_t N, std::size_t M>
using Gain = std::array<std::array<double, M>, N>;

// Sigma <- F Sigma F' + G diag(noise) G' until converged.
template <std::size_t N, std::size_t M>
Mat<N> stationary_covariance(const Mat<N>& F, const Gain<N, M>& G, const std::array<double, M>& noise) {
    Mat<N> drive{};
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j)
            for (std::size_t m = 0; m < M; ++m)
                drive[i][j] += G[i][m] * noise[m] * G[j][m];
    Mat<N> sigma = drive;
    for (int it = 0; it < 100000; ++it) {
        Mat<N> fs{};
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j)
                for (std::size_t k = 0; k < N; ++k)
                    fs[i][j] += F[i][k] * sigma[k][j];
        Mat<N> next = drive;
        double change = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) {
                for (std::size_t k = 0; k < N; ++k)
                    next[i][j] += fs[i][k] * F[j][k];
                change = std::max(change, std::abs(next[i][j] - sigma[i][j]));
            }
        sigma = next;
        if (change < 1e-15) {
            break;
        }
    }
    return sigma;
}

} // namespace

double quadratic_positive_root(double a, double b, double c) { return (-b + std::sqrt(b * b - 4 * a * c)) / (2 * a); }

double riccati_fixed_point(double a, double g, double q, double r) {
    double x = q;
    for (int it = 0; it < 1000000; ++it) {
        const double next = a * a * x + q - a * a * g * g * x * x / (g * g * x + r);
        if (next == x) {
            break;
        }
        x = next;
    }
    return x;
}

double riccati_bisection(double a, double g, double q, double r, double hi) {
    auto resid = [&](double x) { return a * a * x + q - a * a * g * g * x * x / (g * g * x + r) - x; };
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (resid(mid) > 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

HealthyMoments healthy_moments_lyapunov(const wmcusum::SystemParams& p, const wmcusum::ClosedLoopGains& g,
                                        double sigma_e_sq) {
    const double A = p.A, B = p.B, C = p.C, K = g.K, L = g.L;
    // xhat_filt = (1 - K C) xp + K C x + K v ; u = L xhat_filt + e
    // x'  = A x + B u + w ; xp' = A xhat_filt + B u
    const double fx = K * C, fp = 1 - K * C, fv = K;
    const Mat<2> F{{{A + B * L * fx, B * L * fp}, {(A + B * L) * fx, (A + B * L) * fp}}};
    const Gain<2, 3> G{{{1.0, B * L * fv, B}, {0.0, (A + B * L) * fv, B}}};
    const auto S = stationary_covariance<2, 3>(F, G, {p.Q, p.R, sigma_e_sq});
    HealthyMoments m{};
    m.E_x_sq = S[0][0];
    m.E_xhat_filt_sq = fx * fx * S[0][0] + 2 * fx * fp * S[0][1] + fp * fp * S[1][1] + fv * fv * p.R;
    m.E_y_sq = C * C * S[0][0] + p.R;
    m.innovation_var = C * C * (S[0][0] - 2 * S[0][1] + S[1][1]) + p.R;
    m.cost = p.W * m.E_x_sq + p.U * (L * L * m.E_xhat_filt_sq + sigma_e_sq);
    return m;
}

AttackedMoments attacked_moments_lyapunov(const wmcusum::SystemParams& p, const wmcusum::ClosedLoopGains& g,
                                          const wmcusum::AttackModel& attack, double sigma_e_sq) {
    const double B = p.B, C = p.C, K = g.K, pole = g.closed_loop_pole, rho = attack.rho;
    const double one_minus_ck = 1 - C * K;
    // State (z[k], xhat_filt[k], e[k]); e is carried so the residue can see e[k-1].
    // z'    = rho z + s xi
    // xhat' = xhat_pred' + K (z' - C xhat_pred'),  xhat_pred' = pole xhat + B e
    //       = K rho z + (1-CK) pole xhat + (1-CK) B e + K s xi
    // e'    = e_new
    const double s = std::sqrt((1 - rho * rho) * attack.sigma_z_sq);
    const Mat<3> F{{{rho, 0, 0}, {K * rho, one_minus_ck * pole, one_minus_ck * B}, {0, 0, 0}}};
    const Gain<3, 2> G{{{s, 0}, {K * s, 0}, {0, 1}}};
    const auto S = stationary_covariance<3, 2>(F, G, {1.0, sigma_e_sq});

    // residue' = z' - C (pole xhat + B e) = rho z - C pole xhat - C B e + s xi
    const std::array<double, 3> r{rho, -C * pole, -C * B};
    double var = s * s;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            var += r[i] * S[i][j] * r[j];
    AttackedMoments m{};
    m.residue_var = var;
    m.xhat_filt_sq = S[1][1];
    m.z_xhat_prev = rho * S[0][1];
    m.residue_e_prev_cov = r[0] * S[0][2] + r[1] * S[1][2] + r[2] * S[2][2];
    return m;
}

double bivariate_log_pdf(double gamma, double e, double sd_gamma, double sd_e, double corr) {
    const double one_m = 1 - corr * corr;
    const double q = gamma * gamma / (sd_gamma * sd_gamma) + e * e / (sd_e * sd_e) -
                     2 * corr * e * gamma / (sd_e * sd_gamma);
    return -std::log(2 * std::numbers::pi * sd_gamma * sd_e * std::sqrt(one_m)) - q / (2 * one_m);
}

double kld_by_quadrature(double sigma_gamma_sq, double sigma_gamma_tilde_sq, double lambda, double sigma_e_sq,
                         std::size_t nodes) {
    const double sg = std::sqrt(sigma_gamma_sq);
    const double st = std::sqrt(sigma_gamma_tilde_sq);
    auto trapezoid_weight = [nodes](std::size_t i) { return (i == 0 || i + 1 == nodes) ? 0.5 : 1.0; };
    const double hg = 16 * st / static_cast<double>(nodes - 1);
    if (sigma_e_sq == 0.0) {
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes; ++i) {
            const double x = -8 * st + hg * static_cast<double>(i);
            const double l1 = -0.5 * std::log(2 * std::numbers::pi * sigma_gamma_tilde_sq) -
                              x * x / (2 * sigma_gamma_tilde_sq);
            const double l0 = -0.5 * std::log(2 * std::numbers::pi * sigma_gamma_sq) - x * x / (2 * sigma_gamma_sq);
            sum += trapezoid_weight(i) * std::exp(l1) * (l1 - l0);
        }
        return sum * hg;
    }
    const double se = std::sqrt(sigma_e_sq);
    const double he = 16 * se / static_cast<double>(nodes - 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
        const double x = -8 * st + hg * static_cast<double>(i);
        for (std::size_t j = 0; j < nodes; ++j) {
            const double e = -8 * se + he * static_cast<double>(j);
            const double l1 = bivariate_log_pdf(x, e, st, se, lambda);
            const double l0 = bivariate_log_pdf(x, e, sg, se, 0.0);
            sum += trapezoid_weight(i) * trapezoid_weight(j) * std::exp(l1) * (l1 - l0);
        }
    }
    return sum * hg * he;
}

double mc_mean_llr(const wmcusum::KldBreakdown& kld, double sigma_e_sq, wmcusum::Variant variant, std::size_t n,
                   std::uint64_t seed) {
    const auto density = wmcusum::make_density_pair(kld, sigma_e_sq);
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> unit;
    const double se = std::sqrt(sigma_e_sq);
    const double st = std::sqrt(kld.sigma_gamma_tilde_sq);
    const double lam = kld.lambda;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = unit(eng);
        const double b = unit(eng);
        const double e = se * a;
        const double gamma = st * (lam * a + std::sqrt(1 - lam * lam) * b);
        sum += wmcusum::llr({gamma, e}, variant, density);
    }
    return sum / static_cast<double>(n);
}

} // namespace oracle
