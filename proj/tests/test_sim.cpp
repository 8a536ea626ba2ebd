#include "doctest.h"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "wmcusum/analysis.hpp"
#include "wmcusum/errors.hpp"
#include "wmcusum/sim.hpp"
#include "wmcusum/stats.hpp"

using namespace wmcusum;

namespace {

constexpr std::size_t kLong = 1000000;

struct Columns {
    std::vector<double> residue, e_prev, received, xhat_filt, xhat_filt_prev, x, u;
};

Columns columns(const SimTrace& t, std::size_t from = 0) {
    Columns c;
    for (std::size_t i = from; i < t.size(); ++i) {
        const auto& s = t.steps[i];
        c.residue.push_back(s.residue);
        c.e_prev.push_back(s.e_prev);
        c.received.push_back(s.received);
        c.xhat_filt.push_back(s.xhat_filt);
        c.xhat_filt_prev.push_back(i > 0 ? t.steps[i - 1].xhat_filt : 0.0);
        c.x.push_back(s.x);
        c.u.push_back(s.u);
    }
    return c;
}

double second_moment(const std::vector<double>& xs) {
    double s = 0.0;
    for (double v : xs) s += v * v;
    return s / static_cast<double>(xs.size());
}

double cross_moment(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s / static_cast<double>(a.size());
}

bool same_step(const SimStep& a, const SimStep& b) {
    return a.k == b.k && a.x == b.x && a.received == b.received && a.u == b.u && a.e == b.e &&
           a.e_prev == b.e_prev && a.xhat_pred == b.xhat_pred && a.xhat_filt == b.xhat_filt &&
           a.residue == b.residue && a.under_attack == b.under_attack;
}

} // namespace

TEST_CASE("watermark generation") {
    GaussianStream rng(7);
    CHECK(gen_watermark(5, 0.0, rng) == std::vector<double>(5, 0.0));

    GaussianStream a(11), b(11);
    const auto xs = gen_watermark(kLong, 0.5, a);
    CHECK(stats::variance(xs) == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::abs(stats::mean(xs)) < 4 * std::sqrt(0.5 / kLong));
    CHECK(gen_watermark(1000, 0.5, b) == std::vector<double>(xs.begin(), xs.begin() + 1000));
}

TEST_CASE("attack sequence statistics") {
    SUBCASE("white when rho = 0") {
        GaussianStream rng(3);
        const auto z = gen_attack_sequence(kLong, {2.0, 0.0, 0}, rng);
        CHECK(std::abs(stats::autocorrelation(z, 1)) < 3.0 / std::sqrt(double(kLong)));
        CHECK(stats::variance(z) == doctest::Approx(2.0).epsilon(0.01));
    }
    SUBCASE("lag-2 autocovariance at rho = 0.5") {
        GaussianStream rng(4);
        const auto z = gen_attack_sequence(kLong, {4.0, 0.5, 0}, rng);
        const std::span<const double> all(z);
        CHECK(stats::covariance(all.subspan(2), all.first(z.size() - 2)) == doctest::Approx(1.0).epsilon(0.02));
    }
    SUBCASE("stationary variance at rho = 0.9") {
        GaussianStream rng(5);
        const auto z = gen_attack_sequence(kLong, {1.0, 0.9, 0}, rng);
        CHECK(stats::variance(z) == doctest::Approx(1.0).epsilon(0.02));
    }
    SUBCASE("first sample already has the stationary variance") {
        std::vector<double> first;
        for (std::uint64_t s = 0; s < 20000; ++s) {
            GaussianStream rng(s);
            first.push_back(gen_attack_sequence(1, {3.0, 0.95, 0}, rng)[0]);
        }
        CHECK(stats::variance(first) == doctest::Approx(3.0).epsilon(0.05));
    }
}

TEST_CASE("configuration validation") {
    const auto p = reference_params();
    CHECK_THROWS_AS(make_sim_config(p, std::nullopt, {0.0}, 0, 1), InvalidParameter);
    CHECK_THROWS_AS(make_sim_config(p, AttackModel{4.0, 0.5, 10}, {0.0}, 10, 1), InvalidParameter);
    CHECK_THROWS_AS(make_sim_config(p, AttackModel{0.0, 0.5, 0}, {0.0}, 10, 1), InvalidParameter);
    CHECK_THROWS_AS(make_sim_config(p, AttackModel{1.0, 1.0, 0}, {0.0}, 10, 1), InvalidParameter);
    CHECK_THROWS_AS(make_sim_config(p, std::nullopt, {-0.1}, 10, 1), InvalidParameter);
}

TEST_CASE("trace layout and determinism") {
    const auto cfg = make_sim_config(reference_params(), AttackModel{4.0, 0.5, 50}, {0.5}, 200, 99);
    const auto a = run_closed_loop(cfg);
    const auto b = run_closed_loop(cfg);
    REQUIRE(a.size() == 200);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.steps[i].k == i);
        CHECK(a.steps[i].under_attack == (i >= 50));
        CHECK(same_step(a.steps[i], b.steps[i]));
        if (i > 0) {
            CHECK(a.steps[i].e_prev == a.steps[i - 1].e);
        }
    }
    auto other = cfg;
    other.seed = 100;
    CHECK(run_closed_loop(other).steps[0].residue != a.steps[0].residue);
}

TEST_CASE("watermark stream does not depend on the attack") {
    // Streams are drawn every step, so the watermark path is shared across attacked and healthy runs.
    const auto healthy = run_closed_loop(make_sim_config(reference_params(), std::nullopt, {0.5}, 300, 5));
    const auto attacked = run_closed_loop(make_sim_config(reference_params(), AttackModel{4.0, 0.5, 100}, {0.5}, 300, 5));
    for (std::size_t i = 0; i < 300; ++i) {
        CHECK(healthy.steps[i].e == attacked.steps[i].e);
    }
    CHECK(healthy.steps[99].residue == attacked.steps[99].residue);
    CHECK(healthy.steps[100].received != attacked.steps[100].received);
}

TEST_CASE("healthy loop matches the innovation statistics") {
    const auto p = reference_params();
    const auto g = derive_gains(p);
    SUBCASE("no watermark") {
        const auto t = run_closed_loop(make_sim_config(p, std::nullopt, {0.0}, kLong, 21));
        const auto c = columns(t);
        CHECK(stats::variance(c.residue) == doctest::Approx(g.sigma_gamma_sq).epsilon(0.02));
        for (std::size_t lag = 1; lag <= 10; ++lag) {
            CAPTURE(lag);
            CHECK(std::abs(stats::autocorrelation(c.residue, lag)) < 4.0 / std::sqrt(double(kLong)));
        }
    }
    SUBCASE("with watermark") {
        const auto t = run_closed_loop(make_sim_config(p, std::nullopt, {0.5}, kLong, 22));
        const auto c = columns(t);
        CHECK(stats::variance(c.residue) == doctest::Approx(g.sigma_gamma_sq).epsilon(0.02));
        CHECK(std::abs(stats::correlation(c.residue, c.e_prev)) < 3.0 / std::sqrt(double(kLong)));

        const auto ref = oracle::healthy_moments_lyapunov(p, g, 0.5);
        CHECK(ref.innovation_var == doctest::Approx(g.sigma_gamma_sq).epsilon(1e-10));
        CHECK(second_moment(c.x) == doctest::Approx(ref.E_x_sq).epsilon(0.02));
        CHECK(second_moment(c.xhat_filt) == doctest::Approx(ref.E_xhat_filt_sq).epsilon(0.02));
        CHECK(second_moment(c.received) == doctest::Approx(ref.E_y_sq).epsilon(0.02));
    }
}

TEST_CASE("attacked loop moments") {
    const auto p = reference_params();
    const auto g = derive_gains(p);
    const AttackModel attack{4.0, 0.5, 0};
    const auto t = run_closed_loop(make_sim_config(p, attack, {0.5}, kLong, 23));
    // Drop the first steps so the filter has forgotten the healthy prefix.
    const auto c = columns(t, 100);
    const auto ref = oracle::attacked_moments_lyapunov(p, g, attack, 0.5);

    CHECK(stats::variance(c.residue) == doctest::Approx(ref.residue_var).epsilon(0.02));
    CHECK(stats::covariance(c.residue, c.e_prev) == doctest::Approx(-p.C * p.B * 0.5).epsilon(0.02));
    CHECK(cross_moment(c.received, c.xhat_filt_prev) == doctest::Approx(ref.z_xhat_prev).epsilon(0.02));
    CHECK(second_moment(c.xhat_filt) == doctest::Approx(ref.xhat_filt_sq).epsilon(0.02));
}

TEST_CASE("unstable plant under attack") {
    auto p = reference_params();
    p.A = 1.2;
    auto cfg = make_sim_config(p, AttackModel{4.0, 0.5, 10}, {0.5}, 5000, 3);
    cfg.track_state_under_attack = false;
    const auto t = run_closed_loop(cfg);
    CHECK(std::isfinite(t.steps[9].x));
    CHECK(std::isnan(t.steps[10].x));
    CHECK(std::isfinite(t.steps.back().residue));
}

TEST_CASE("divergence is reported") {
    auto p = reference_params();
    p.A = 1.2;
    auto cfg = make_sim_config(p, std::nullopt, {0.0}, 10000, 3);
    cfg.gains.L = 0.0; // no feedback: x grows like 1.2^k
    CHECK_THROWS_AS(run_closed_loop(cfg), NumericalDivergence);
}

TEST_CASE("empirical LQG cost") {
    const auto p = reference_params();
    const auto g = derive_gains(p);
    const auto short_trace = run_closed_loop(make_sim_config(p, std::nullopt, {0.0}, kMinCostTrace - 1, 1));
    CHECK_THROWS_AS(empirical_lqg_cost(short_trace, p), TraceTooShort);

    auto zero = p;
    zero.W = 0.0;
    zero.U = 0.0;
    const auto t0 = run_closed_loop(make_sim_config(p, std::nullopt, {0.0}, kMinCostTrace, 1));
    CHECK(empirical_lqg_cost(t0, zero) == 0.0);

    const auto base = run_closed_loop(make_sim_config(p, std::nullopt, {0.0}, kLong, 31));
    const double c0 = empirical_lqg_cost(base, p);
    CHECK(c0 == doctest::Approx(oracle::healthy_moments_lyapunov(p, g, 0.0).cost).epsilon(0.02));

    for (double se : {0.25, 0.5, 1.0}) {
        CAPTURE(se);
        const auto marked = run_closed_loop(make_sim_config(p, std::nullopt, {se}, kLong, 31));
        const double ref = oracle::healthy_moments_lyapunov(p, g, se).cost -
                           oracle::healthy_moments_lyapunov(p, g, 0.0).cost;
        CHECK(empirical_lqg_cost(marked, p) - c0 == doctest::Approx(ref).epsilon(0.02));
    }
}

TEST_CASE("trace csv") {
    const auto t = run_closed_loop(make_sim_config(reference_params(), AttackModel{4.0, 0.5, 1}, {0.5}, 3, 1));
    std::ostringstream out;
    write_trace_csv(out, t);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "k,x,received,u,e,residue,under_attack");
    std::getline(in, line);
    CHECK(line.substr(0, 2) == "0,");
    CHECK(line.back() == '0');
    std::getline(in, line);
    CHECK(line.back() == '1');
}
