#pragma once

namespace wmcusum {

/// Scalar plant, sensor and LQG cost description.
///
///   x[k+1] = A x[k] + B u[k] + w[k],   w ~ N(0, Q)
///   y[k]   = C x[k] + v[k],            v ~ N(0, R)
///   J      = lim E (W x^2 + U u^2)
///
/// Aggregate on purpose; validate() is called by every operation that needs the invariants.
struct SystemParams {
    double A = 0.0;
    double B = 1.0;
    double C = 1.0;
    double Q = 1.0;
    double R = 1.0;
    double W = 1.0;
    double U = 1.0;

    /// Throws InvalidParameter unless Q, R, W, U > 0, B != 0, C != 0 and all values are finite.
    void validate() const;
};

/// Steady-state quantities of the Kalman filter and LQG controller.
struct ClosedLoopGains {
    double P = 0.0;              ///< prediction error variance E(x - xhat_pred)^2
    double K = 0.0;              ///< Kalman gain C P / (C^2 P + R)
    double S = 0.0;              ///< control Riccati solution
    double L = 0.0;              ///< feedback gain, u = L xhat_filt
    double calA = 0.0;           ///< (1 - C K)(A + B L), pole of the filter driven by a foreign sequence
    double sigma_gamma_sq = 0.0; ///< innovation variance C^2 P + R
    double closed_loop_pole = 0.0; ///< A + B L
};

/// Positive root of P = A^2 P + Q - A^2 C^2 P^2 / (C^2 P + R).
double solve_estimation_riccati(const SystemParams& params);

/// Positive root of S = A^2 S + W - A^2 B^2 S^2 / (B^2 S + U).
double solve_control_riccati(const SystemParams& params);

/// Relative residual |P - rhs(P)| / P of the estimation Riccati equation.
double estimation_riccati_residual(const SystemParams& params, double P);

/// Relative residual of the control Riccati equation.
double control_riccati_residual(const SystemParams& params, double S);

/// Solves both Riccati equations and assembles the gains. Throws StabilityViolation
/// if either |A + B L| or |calA| is not strictly below one.
ClosedLoopGains derive_gains(const SystemParams& params);

/// The parameter set used for the headline numerical study: A = 0.7, B = C = Q = R = W = 1, U = 0.4.
SystemParams reference_params();

} // namespace wmcusum
