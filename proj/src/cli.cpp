#include "wmcusum/cli.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "wmcusum/analysis.hpp"
#include "wmcusum/config.hpp"
#include "wmcusum/detect.hpp"
#include "wmcusum/errors.hpp"
#include "wmcusum/experiments.hpp"
#include "wmcusum/report.hpp"
#include "wmcusum/sim.hpp"
#include "wmcusum/validation.hpp"

namespace wmcusum {

namespace {

using nlohmann::json;

struct Invocation {
    std::string command;
    RunConfig cfg;
    std::string format = "csv";
    std::string variant = "joint";
    bool fast = false;
};

std::vector<Variant> selected_variants(const std::string& name) {
    if (name == "both") {
        return {Variant::joint, Variant::marginal};
    }
    return {parse_variant(name)};
}

ExperimentSpec experiment_spec(const RunConfig& cfg, std::vector<Variant> variants) {
    if (!cfg.attack_time) {
        throw InvalidParameter("attack_time must be set (not 'none') for detection-delay experiments");
    }
    ExperimentSpec spec;
    spec.params = cfg.params;
    spec.attack = cfg.attack_model();
    spec.p_false_alarm = cfg.p_false_alarm;
    spec.delta_lqg_grid = cfg.delta_lqg_grid;
    spec.runs = cfg.runs;
    spec.horizon = cfg.horizon;
    spec.burn_in = cfg.burn_in;
    spec.warmup = cfg.warmup;
    spec.base_seed = cfg.seed;
    spec.variants = std::move(variants);
    return spec;
}

json envelope(const Invocation& inv) { return {{"command", inv.command}, {"config", to_json(inv.cfg)}}; }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int cmd_gains(const Invocation& inv, std::string& text) {
    const ClosedLoopGains g = derive_gains(inv.cfg.params);
    if (inv.format == "json") {
        json j = envelope(inv);
        j["gains"] = to_json(g);
        text = dump(j);
        return kExitOk;
    }
    std::ostringstream os;
    os << "P,K,S,L,calA,sigma_gamma_sq,closed_loop_pole\n"
       << format_number(g.P) << ',' << format_number(g.K) << ',' << format_number(g.S) << ',' << format_number(g.L)
       << ',' << format_number(g.calA) << ',' << format_number(g.sigma_gamma_sq) << ','
       << format_number(g.closed_loop_pole) << '\n';
    text = os.str();
    return kExitOk;
}

int cmd_kld(const Invocation& inv, std::string& text) {
    const auto& p = inv.cfg.params;
    const ClosedLoopGains g = derive_gains(p);
    const double sigma_e_sq = inv.cfg.watermark_variance(g);
    const KldBreakdown k = kld_joint(g, p, inv.cfg.attack_model(), sigma_e_sq);
    const AddBound b = add_upper_bound(k, inv.cfg.p_false_alarm);
    const double delta = delta_lqg_for_watermark_variance(p, g, sigma_e_sq);
    if (inv.format == "json") {
        json j = envelope(inv);
        j["sigma_e_sq"] = json_number(sigma_e_sq);
        j["delta_lqg"] = json_number(delta);
        j["kld"] = to_json(k);
        j["bound"] = to_json(b);
        j["epsilon"] = {{"joint", json_number(stealthiness_level(k, Variant::joint))},
                        {"marginal", json_number(stealthiness_level(k, Variant::marginal))}};
        text = dump(j);
        return kExitOk;
    }
    std::ostringstream os;
    os << "sigma_e_sq,delta_lqg,lambda,sigma_gamma_sq,sigma_gamma_tilde_sq,correlation_term,marginal_kld,joint_kld,"
          "p_false_alarm,bound_joint,bound_marginal,epsilon_joint,epsilon_marginal\n";
    for (double v : {sigma_e_sq, delta, k.lambda, k.sigma_gamma_sq, k.sigma_gamma_tilde_sq, k.correlation_term,
                     k.marginal_kld, k.joint_kld, b.p_false_alarm, b.bound_joint, b.bound_marginal,
                     stealthiness_level(k, Variant::joint)}) {
        os << format_number(v) << ',';
    }
    os << format_number(stealthiness_level(k, Variant::marginal)) << '\n';
    text = os.str();
    return kExitOk;
}

int cmd_simulate(const Invocation& inv, std::string& text) {
    const auto& cfg = inv.cfg;
    const ClosedLoopGains g = derive_gains(cfg.params);
    const double sigma_e_sq = cfg.watermark_variance(g);
    std::optional<AttackModel> attack;
    if (cfg.attack_time) {
        attack = cfg.attack_model();
    }
    SimConfig sc = make_sim_config(cfg.params, attack, {sigma_e_sq}, cfg.horizon, cfg.seed, cfg.burn_in);
    sc.track_state_under_attack = cfg.params.A * cfg.params.A < 1.0;
    const SimTrace trace = run_closed_loop(sc);

    if (inv.format != "json") {
        std::ostringstream os;
        write_trace_csv(os, trace);
        text = os.str();
        return kExitOk;
    }
    json j = envelope(inv);
    json cols = {{"k", json::array()},      {"x", json::array()}, {"received", json::array()},
                 {"u", json::array()},      {"e", json::array()}, {"residue", json::array()},
                 {"under_attack", json::array()}};
    for (const auto& s : trace.steps) {
        cols["k"].push_back(s.k);
        cols["x"].push_back(json_number(s.x));
        cols["received"].push_back(json_number(s.received));
        cols["u"].push_back(json_number(s.u));
        cols["e"].push_back(json_number(s.e));
        cols["residue"].push_back(json_number(s.residue));
        cols["under_attack"].push_back(s.under_attack);
    }
    j["trace"] = cols;

    const KldBreakdown k = kld_joint(g, cfg.params, cfg.attack_model(), sigma_e_sq);
    const auto pairs = observation_pairs(trace);
    json cusum = json::object();
    for (Variant v : selected_variants(inv.variant)) {
        const DetectionOutcome o =
            run_cusum(pairs, DetectorConfig{cfg.p_false_alarm, v, make_density_pair(k, sigma_e_sq)});
        json path = json::array();
        for (double s : o.statistic_path) {
            path.push_back(json_number(s));
        }
        cusum[std::string(to_string(v))] = {{"alarm_time", o.alarm_time ? json(*o.alarm_time) : json(nullptr)},
                                            {"S_k", path}};
    }
    j["cusum"] = cusum;
    text = dump(j);
    return kExitOk;
}

int cmd_add(const Invocation& inv, std::string& text) {
    const auto variants = selected_variants(inv.variant);
    ExperimentSpec spec = experiment_spec(inv.cfg, variants);
    const ClosedLoopGains g = derive_gains(spec.params);
    const double sigma_e_sq = inv.cfg.watermark_variance(g);
    const double delta = delta_lqg_for_watermark_variance(spec.params, g, sigma_e_sq);
    spec.delta_lqg_grid = {delta};
    const KldBreakdown k = kld_joint(g, spec.params, spec.attack, sigma_e_sq);
    const AddBound b = add_upper_bound(k, spec.p_false_alarm);

    std::vector<std::pair<Variant, AddEstimate>> results;
    for (Variant v : variants) {
        results.emplace_back(v, estimate_add(spec, sigma_e_sq, v));
    }

    if (inv.format == "json") {
        json j = envelope(inv);
        j["spec"] = to_json(spec);
        j["sigma_e_sq"] = json_number(sigma_e_sq);
        j["delta_lqg"] = json_number(delta);
        j["bound"] = to_json(b);
        json sim = json::object();
        for (const auto& [v, est] : results) {
            sim[std::string(to_string(v))] = to_json(est);
        }
        j["simulated"] = sim;
        text = dump(j);
        return kExitOk;
    }
    std::ostringstream os;
    os << "variant,delta_lqg,sigma_e_sq,bound,add_mean,add_stderr,effective_runs,failures,false_alarm_restarts\n";
    for (const auto& [v, est] : results) {
        const double bound = v == Variant::joint ? b.bound_joint : b.bound_marginal;
        os << to_string(v) << ',' << format_number(delta) << ',' << format_number(sigma_e_sq) << ','
           << format_number(bound) << ',' << format_number(est.mean) << ',' << format_number(est.stderr_) << ','
           << est.effective_runs << ',' << est.failures << ',' << est.false_alarm_restarts << '\n';
    }
    text = os.str();
    return kExitOk;
}

int cmd_sweep(const Invocation& inv, std::string& text) {
    const auto variants = selected_variants(inv.variant);
    if (inv.format == "csv" && variants.size() != 1) {
        throw InvalidParameter("CSV sweep output holds one simulated series; use --variant joint|marginal or "
                               "--format json");
    }
    const TradeoffCurve curve = sweep_tradeoff(experiment_spec(inv.cfg, variants));
    if (inv.format == "json") {
        json j = envelope(inv);
        j.update(to_json(curve));
        text = dump(j);
        return kExitOk;
    }
    std::ostringstream os;
    write_tradeoff_csv(os, curve, variants.front());
    text = os.str();
    return kExitOk;
}

int cmd_check(const Invocation& inv, std::string& text) {
    const auto& cfg = inv.cfg;
    ValidationOptions opts;
    opts.params = cfg.params;
    opts.attack = cfg.attack_model();
    opts.sigma_e_sq = cfg.watermark_variance(derive_gains(cfg.params));
    opts.seed = cfg.seed;
    opts.fast = inv.fast;
    const auto results = run_validation_suite(opts);
    bool all = true;
    for (const auto& r : results) {
        all = all && r.passed;
    }
    if (inv.format == "json") {
        json j = envelope(inv);
        j["fast"] = inv.fast;
        json arr = json::array();
        for (const auto& r : results) {
            arr.push_back(to_json(r));
        }
        j["checks"] = arr;
        j["all_passed"] = all;
        text = dump(j);
    } else {
        std::ostringstream os;
        os << "check,expected,observed,error,tolerance,mode,passed\n";
        for (const auto& r : results) {
            os << r.name << ',' << format_number(r.expected) << ',' << format_number(r.observed) << ','
               << format_number(r.error) << ',' << format_number(r.tolerance) << ','
               << (r.relative ? "relative" : "absolute") << ',' << (r.passed ? 1 : 0) << '\n';
        }
        text = os.str();
    }
    return all ? kExitOk : kExitRuntime;
}

std::string flag_names(const std::string& key) {
    std::string dashed = key;
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    return dashed == key ? "--" + key : "--" + dashed + ",--" + key;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Watermark-aided CUSUM detection of measurement-replacement attacks on a scalar LQG loop",
                 "wmcusum"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    Invocation inv;
    std::string config_path;
    std::string out_path;
    std::map<std::string, std::string> flag_values;

    app.add_option("--config", config_path, "config file of 'name = value' lines");
    app.add_option("--out", out_path, "output path (default: standard output)");
    app.add_option("--format", inv.format, "output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--variant", inv.variant, "detector variant")->check(CLI::IsMember({"joint", "marginal", "both"}));
    app.add_flag("--fast", inv.fast, "check: 1e5 samples at 5% tolerance");
    for (const auto& key : config_keys()) {
        app.add_option_function<std::string>(
            flag_names(key), [&flag_values, key](const std::string& v) { flag_values[key] = v; }, key);
    }

    app.add_subcommand("gains", "steady-state filter and controller gains");
    app.add_subcommand("kld", "divergence breakdown and detection-delay bounds");
    app.add_subcommand("simulate", "one closed-loop trace");
    app.add_subcommand("add", "Monte Carlo detection delay at one operating point");
    app.add_subcommand("sweep", "bounds and Monte Carlo delay over the delta_lqg grid");
    app.add_subcommand("check", "empirical versus closed-form validation suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    inv.command = app.get_subcommands().front()->get_name();

    std::string text;
    int status = kExitOk;
    try {
        if (!config_path.empty()) {
            inv.cfg.apply(read_config_file(config_path));
        }
        ConfigEntries flags;
        // Follow config_keys() order so the mapping does not depend on argv order.
        for (const auto& key : config_keys()) {
            if (auto it = flag_values.find(key); it != flag_values.end()) {
                flags.emplace_back(key, it->second);
            }
        }
        inv.cfg.apply(flags);
        inv.cfg.validate();

        if (inv.command == "gains") {
            status = cmd_gains(inv, text);
        } else if (inv.command == "kld") {
            status = cmd_kld(inv, text);
        } else if (inv.command == "simulate") {
            status = cmd_simulate(inv, text);
        } else if (inv.command == "add") {
            status = cmd_add(inv, text);
        } else if (inv.command == "sweep") {
            status = cmd_sweep(inv, text);
        } else {
            status = cmd_check(inv, text);
        }
    } catch (const InvalidParameter& e) {
        err << "invalid argument: " << e.what() << '\n';
        return kExitUsage;
    } catch (const StabilityViolation& e) {
        err << "invalid argument: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }

    if (out_path.empty()) {
        out << text;
    } else {
        std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
        if (!(file << text) || !file.flush()) {
            err << "error: cannot write '" << out_path << "'\n";
            return kExitRuntime;
        }
    }
    return status;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"wmcusum"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace wmcusum
