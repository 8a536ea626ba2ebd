#include "wmcusum/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "wmcusum/analysis.hpp"
#include "wmcusum/errors.hpp"
#include "wmcusum/experiments.hpp"

namespace wmcusum {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_real(const std::string& key, std::string_view text) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw InvalidParameter(fmt::format("{}: '{}' is not a finite real number", key, text));
    }
    return value;
}

template <typename Int>
Int parse_integer(const std::string& key, std::string_view text) {
    Int value{};
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw InvalidParameter(fmt::format("{}: '{}' is not a nonnegative integer", key, text));
    }
    return value;
}

std::vector<double> parse_grid(const std::string& key, std::string_view text) {
    std::vector<double> grid;
    while (!text.empty()) {
        const auto comma = text.find(',');
        grid.push_back(parse_real(key, trim(text.substr(0, comma))));
        if (comma == std::string_view::npos) {
            break;
        }
        text.remove_prefix(comma + 1);
    }
    return grid;
}

bool is_known_key(std::string_view key) {
    const auto& keys = config_keys();
    return std::find(keys.begin(), keys.end(), key) != keys.end();
}

} // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "A",         "B",       "C",           "Q",         "R",           "W",    "U",
        "sigma_z_sq", "rho",    "sigma_e_sq",  "delta_lqg", "p_false_alarm", "attack_time", "seed",
        "horizon",   "runs",    "burn_in",     "warmup",    "delta_lqg_grid"};
    return keys;
}

ConfigEntries parse_config_text(std::string_view text) {
    ConfigEntries entries;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);

        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw InvalidParameter(fmt::format("config line {}: expected 'name = value'", line_no));
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (!is_known_key(key)) {
            throw InvalidParameter(fmt::format("config line {}: unknown key '{}'", line_no, key));
        }
        if (value.empty()) {
            throw InvalidParameter(fmt::format("config line {}: key '{}' has no value", line_no, key));
        }
        entries.emplace_back(key, value);
    }
    return entries;
}

ConfigEntries read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidParameter(fmt::format("cannot read config file '{}'", path.string()));
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

RunConfig::RunConfig() : delta_lqg_grid(default_delta_lqg_grid()) {}

void RunConfig::apply(const ConfigEntries& entries) {
    std::optional<double> layer_sigma_e;
    std::optional<double> layer_delta;
    for (const auto& [key, value] : entries) {
        if (!is_known_key(key)) {
            throw InvalidParameter(fmt::format("unknown key '{}'", key));
        }
        if (key == "A") {
            params.A = parse_real(key, value);
        } else if (key == "B") {
            params.B = parse_real(key, value);
        } else if (key == "C") {
            params.C = parse_real(key, value);
        } else if (key == "Q") {
            params.Q = parse_real(key, value);
        } else if (key == "R") {
            params.R = parse_real(key, value);
        } else if (key == "W") {
            params.W = parse_real(key, value);
        } else if (key == "U") {
            params.U = parse_real(key, value);
        } else if (key == "sigma_z_sq") {
            sigma_z_sq = parse_real(key, value);
        } else if (key == "rho") {
            rho = parse_real(key, value);
        } else if (key == "sigma_e_sq") {
            layer_sigma_e = parse_real(key, value);
        } else if (key == "delta_lqg") {
            layer_delta = parse_real(key, value);
        } else if (key == "p_false_alarm") {
            p_false_alarm = parse_real(key, value);
        } else if (key == "attack_time") {
            attack_time = value == "none" ? std::nullopt
                                          : std::optional<std::size_t>(parse_integer<std::size_t>(key, value));
        } else if (key == "seed") {
            seed = parse_integer<std::uint64_t>(key, value);
        } else if (key == "horizon") {
            horizon = parse_integer<std::size_t>(key, value);
        } else if (key == "runs") {
            runs = parse_integer<std::size_t>(key, value);
        } else if (key == "burn_in") {
            burn_in = parse_integer<std::size_t>(key, value);
        } else if (key == "warmup") {
            warmup = parse_integer<std::size_t>(key, value);
        } else if (key == "delta_lqg_grid") {
            delta_lqg_grid = parse_grid(key, value);
        }
    }
    if (layer_sigma_e && layer_delta) {
        throw InvalidParameter("sigma_e_sq and delta_lqg are mutually exclusive");
    }
    if (layer_sigma_e) {
        sigma_e_sq = layer_sigma_e;
        delta_lqg.reset();
    }
    if (layer_delta) {
        delta_lqg = layer_delta;
        sigma_e_sq.reset();
    }
}

void RunConfig::validate() const {
    params.validate();
    derive_gains(params);
    attack_model().validate();
    detection_threshold(p_false_alarm);
    if (sigma_e_sq && !(*sigma_e_sq >= 0.0)) {
        throw InvalidParameter("sigma_e_sq must be >= 0");
    }
    if (delta_lqg && !(*delta_lqg >= 0.0)) {
        throw InvalidParameter("delta_lqg must be >= 0");
    }
    if (horizon < 1) {
        throw InvalidParameter("horizon must be >= 1");
    }
    if (runs < 1) {
        throw InvalidParameter("runs must be >= 1");
    }
    ExperimentSpec probe;
    probe.params = params;
    probe.attack = attack_model();
    probe.p_false_alarm = p_false_alarm;
    probe.delta_lqg_grid = delta_lqg_grid;
    probe.validate();
}

double RunConfig::watermark_variance(const ClosedLoopGains& gains) const {
    if (delta_lqg) {
        return watermark_variance_for_delta_lqg(params, gains, *delta_lqg);
    }
    return sigma_e_sq.value_or(0.0);
}

AttackModel RunConfig::attack_model() const { return AttackModel{sigma_z_sq, rho, attack_time.value_or(0)}; }

} // namespace wmcusum
