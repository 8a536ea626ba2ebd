#include "wmcusum/report.hpp"

#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

namespace wmcusum {

using nlohmann::json;

std::string format_number(double value) {
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    if (value == 0.0) {
        return "0"; // folds -0
    }
    return fmt::format("{:.9g}", value);
}

double round_for_output(double value) {
    if (!std::isfinite(value)) {
        return value;
    }
    return std::strtod(format_number(value).c_str(), nullptr);
}

json json_number(double value) {
    if (!std::isfinite(value)) {
        return nullptr;
    }
    return round_for_output(value);
}

json to_json(const SystemParams& p) {
    return {{"A", json_number(p.A)}, {"B", json_number(p.B)}, {"C", json_number(p.C)}, {"Q", json_number(p.Q)},
            {"R", json_number(p.R)}, {"W", json_number(p.W)}, {"U", json_number(p.U)}};
}

json to_json(const ClosedLoopGains& g) {
    return {{"P", json_number(g.P)},
            {"K", json_number(g.K)},
            {"S", json_number(g.S)},
            {"L", json_number(g.L)},
            {"calA", json_number(g.calA)},
            {"sigma_gamma_sq", json_number(g.sigma_gamma_sq)},
            {"closed_loop_pole", json_number(g.closed_loop_pole)}};
}

json to_json(const KldBreakdown& k) {
    return {{"lambda", json_number(k.lambda)},
            {"sigma_gamma_tilde_sq", json_number(k.sigma_gamma_tilde_sq)},
            {"sigma_gamma_sq", json_number(k.sigma_gamma_sq)},
            {"correlation_term", json_number(k.correlation_term)},
            {"marginal_kld", json_number(k.marginal_kld)},
            {"joint_kld", json_number(k.joint_kld)}};
}

json to_json(const AddBound& b) {
    return {{"p_false_alarm", json_number(b.p_false_alarm)},
            {"bound_joint", json_number(b.bound_joint)},
            {"bound_marginal", json_number(b.bound_marginal)}};
}

json to_json(const AttackModel& a) {
    return {{"sigma_z_sq", json_number(a.sigma_z_sq)}, {"rho", json_number(a.rho)}, {"attack_time", a.attack_time}};
}

json to_json(const RunConfig& c) {
    json j = to_json(c.params);
    j["sigma_z_sq"] = json_number(c.sigma_z_sq);
    j["rho"] = json_number(c.rho);
    j["sigma_e_sq"] = c.sigma_e_sq ? json_number(*c.sigma_e_sq) : json(nullptr);
    j["delta_lqg"] = c.delta_lqg ? json_number(*c.delta_lqg) : json(nullptr);
    j["p_false_alarm"] = json_number(c.p_false_alarm);
    j["attack_time"] = c.attack_time ? json(*c.attack_time) : json("none");
    j["seed"] = c.seed;
    j["horizon"] = c.horizon;
    j["runs"] = c.runs;
    j["burn_in"] = c.burn_in;
    j["warmup"] = c.warmup;
    json grid = json::array();
    for (double d : c.delta_lqg_grid) {
        grid.push_back(json_number(d));
    }
    j["delta_lqg_grid"] = grid;
    return j;
}

json to_json(const ExperimentSpec& s) {
    json grid = json::array();
    for (double d : s.delta_lqg_grid) {
        grid.push_back(json_number(d));
    }
    json variants = json::array();
    for (Variant v : s.variants) {
        variants.push_back(std::string(to_string(v)));
    }
    return {{"params", to_json(s.params)},
            {"attack", to_json(s.attack)},
            {"p_false_alarm", json_number(s.p_false_alarm)},
            {"delta_lqg_grid", grid},
            {"runs", s.runs},
            {"horizon", s.horizon},
            {"burn_in", s.burn_in},
            {"warmup", s.warmup},
            {"base_seed", s.base_seed},
            {"variants", variants},
            {"max_restarts", s.max_restarts}};
}

json to_json(const AddEstimate& e) {
    return {{"add_mean", json_number(e.mean)},
            {"add_stderr", json_number(e.stderr_)},
            {"runs", e.runs},
            {"effective_runs", e.effective_runs},
            {"failures", e.failures},
            {"false_alarm_restarts", e.false_alarm_restarts}};
}

json to_json(const RunLengthEstimate& e) {
    return {{"mean_run_length", json_number(e.mean)},
            {"stderr", json_number(e.stderr_)},
            {"runs", e.runs},
            {"censored", e.censored}};
}

json to_json(const TradeoffCurve& c) {
    json points = json::array();
    for (const auto& pt : c.points) {
        json sim = json::object();
        for (const auto& ve : pt.simulated) {
            sim[std::string(to_string(ve.variant))] =
                ve.estimate ? to_json(*ve.estimate) : json{{"failed", true}, {"failures", c.spec.runs}};
        }
        points.push_back({{"delta_lqg", json_number(pt.delta_lqg)},
                          {"sigma_e_sq", json_number(pt.sigma_e_sq)},
                          {"bound_joint", json_number(pt.bound.bound_joint)},
                          {"bound_marginal", json_number(pt.bound.bound_marginal)},
                          {"kld", to_json(pt.kld)},
                          {"simulated", sim}});
    }
    return {{"spec", to_json(c.spec)}, {"points", points}};
}

json to_json(const CheckResult& r) {
    return {{"check", r.name},
            {"expected", json_number(r.expected)},
            {"observed", json_number(r.observed)},
            {"error", json_number(r.error)},
            {"tolerance", json_number(r.tolerance)},
            {"mode", r.relative ? "relative" : "absolute"},
            {"passed", r.passed}};
}

} // namespace wmcusum
