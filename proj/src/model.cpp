#include "wmcusum/model.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "wmcusum/errors.hpp"

namespace wmcusum {

namespace {

constexpr double kResidualTolerance = 1e-12;

// Both Riccati equations share the shape X = a^2 X + q - a^2 g^2 X^2 / (g^2 X + r).
struct ScalarRiccati {
    double a_sq;
    double g_sq;
    double q;
    double r;

    double rhs(double x) const { return a_sq * x + q - a_sq * g_sq * x * x / (g_sq * x + r); }

    double relative_residual(double x) const { return std::abs(x - rhs(x)) / std::abs(x); }

    // Clearing the denominator gives g^2 X^2 + (r (1 - a^2) - q g^2) X - q r = 0, which has
    // exactly one positive root when q, r > 0.
    double quadratic_root() const {
        const double qa = g_sq;
        const double qb = r * (1.0 - a_sq) - q * g_sq;
        const double qc = -q * r;
        const double disc = std::sqrt(qb * qb - 4.0 * qa * qc);
        if (qb >= 0.0) {
            return 2.0 * qc / (-qb - disc);
        }
        return (-qb + disc) / (2.0 * qa);
    }

    // rhs(x) - x is positive at 0 and negative past the root.
    double bisect() const {
        double lo = 0.0;
        double hi = 1.0;
        int expansions = 0;
        while (rhs(hi) - hi > 0.0) {
            hi *= 2.0;
            if (++expansions > 2000 || !std::isfinite(hi)) {
                throw InternalConsistencyError("Riccati bisection failed to bracket a positive root");
            }
        }
        for (int it = 0; it < 4000; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) {
                break;
            }
            (rhs(mid) - mid > 0.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    double solve(const char* name) const {
        double x = quadratic_root();
        if (!(std::isfinite(x) && x > 0.0) || relative_residual(x) > kResidualTolerance) {
            x = bisect();
        }
        if (!(std::isfinite(x) && x > 0.0)) {
            throw InternalConsistencyError(fmt::format("{} Riccati equation has no positive root", name));
        }
        return x;
    }
};

ScalarRiccati estimation_equation(const SystemParams& p) { return {p.A * p.A, p.C * p.C, p.Q, p.R}; }
ScalarRiccati control_equation(const SystemParams& p) { return {p.A * p.A, p.B * p.B, p.W, p.U}; }

void require(bool ok, const char* what) {
    if (!ok) {
        throw InvalidParameter(what);
    }
}

} // namespace

void SystemParams::validate() const {
    require(std::isfinite(A) && std::isfinite(B) && std::isfinite(C) && std::isfinite(Q) && std::isfinite(R) &&
                std::isfinite(W) && std::isfinite(U),
            "system parameters must be finite");
    require(Q > 0.0, "Q must be > 0");
    require(R > 0.0, "R must be > 0");
    require(W > 0.0, "W must be > 0");
    require(U > 0.0, "U must be > 0");
    require(B != 0.0, "B must be nonzero");
    require(C != 0.0, "C must be nonzero");
}

double solve_estimation_riccati(const SystemParams& params) {
    params.validate();
    return estimation_equation(params).solve("estimation");
}

double solve_control_riccati(const SystemParams& params) {
    params.validate();
    return control_equation(params).solve("control");
}

double estimation_riccati_residual(const SystemParams& params, double P) {
    return estimation_equation(params).relative_residual(P);
}

double control_riccati_residual(const SystemParams& params, double S) {
    return control_equation(params).relative_residual(S);
}

ClosedLoopGains derive_gains(const SystemParams& params) {
    ClosedLoopGains g;
    g.P = solve_estimation_riccati(params);
    g.S = solve_control_riccati(params);
    const double C = params.C;
    const double B = params.B;
    g.sigma_gamma_sq = C * C * g.P + params.R;
    g.K = C * g.P / g.sigma_gamma_sq;
    g.L = -params.A * B * g.S / (B * B * g.S + params.U);
    g.closed_loop_pole = params.A + B * g.L;
    g.calA = (1.0 - C * g.K) * g.closed_loop_pole;

    if (!(std::abs(g.closed_loop_pole) < 1.0)) {
        throw StabilityViolation(fmt::format("closed-loop pole A+BL = {} is not inside the unit circle",
                                             g.closed_loop_pole));
    }
    if (!(std::abs(g.calA) < 1.0)) {
        throw StabilityViolation(fmt::format("composite pole (1-CK)(A+BL) = {} is not inside the unit circle", g.calA));
    }
    return g;
}

SystemParams reference_params() { return SystemParams{0.7, 1.0, 1.0, 1.0, 1.0, 1.0, 0.4}; }

} // namespace wmcusum
