// SPDX-License-Identifier: Apache-2.0
#include "eepn/config_file.hpp"

#include "eepn/errors.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace eepn {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(std::string_view v)
{
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ParameterError("expected a number, got '" + std::string(v) + "'");
    }
    return out;
}

std::uint64_t to_unsigned(std::string_view v)
{
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ParameterError("expected a non-negative integer, got '" + std::string(v) + "'");
    }
    return out;
}

int to_int(std::string_view v)
{
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ParameterError("expected an integer, got '" + std::string(v) + "'");
    }
    return out;
}

bool to_bool(std::string_view v)
{
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    throw ParameterError("expected true or false, got '" + std::string(v) + "'");
}

std::vector<ReversalMode> to_modes(std::string_view v)
{
    std::vector<ReversalMode> modes;
    while (!v.empty()) {
        const auto comma = v.find(',');
        const auto item = trim(v.substr(0, comma));
        if (!item.empty() && item != "none") {
            modes.push_back(parse_reversal_mode(item));
        }
        if (comma == std::string_view::npos) {
            break;
        }
        v.remove_prefix(comma + 1);
    }
    return modes;
}

struct McKeys {
    std::optional<bool> enabled;
    std::optional<std::size_t> n;
};

using Setter = std::function<void(RunConfig&, McKeys&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters()
{
    static const std::map<std::string, Setter, std::less<>> table{
        {"symbol_rate_gbd", [](RunConfig& c, McKeys&, std::string_view v) { c.symbol_rate = to_double(v) * 1e9; }},
        {"rolloff", [](RunConfig& c, McKeys&, std::string_view v) { c.rolloff = to_double(v); }},
        {"samples_per_symbol", [](RunConfig& c, McKeys&, std::string_view v) { c.samples_per_symbol = to_int(v); }},
        {"rrc_span_symbols", [](RunConfig& c, McKeys&, std::string_view v) { c.rrc_span_symbols = to_int(v); }},
        {"constellation", [](RunConfig& c, McKeys&, std::string_view v) { c.constellation = parse_constellation(v); }},
        {"n_symbols", [](RunConfig& c, McKeys&, std::string_view v) { c.n_symbols = to_unsigned(v); }},
        {"linewidth_khz", [](RunConfig& c, McKeys&, std::string_view v) { c.linewidth_hz = to_double(v) * 1e3; }},
        {"snr_db", [](RunConfig& c, McKeys&, std::string_view v) { c.snr_db = to_double(v); }},
        {"master_seed", [](RunConfig& c, McKeys&, std::string_view v) { c.master_seed = to_unsigned(v); }},
        {"fiber.dispersion_ps_nm_km",
         [](RunConfig& c, McKeys&, std::string_view v) { c.fiber.dispersion_ps_nm_km = to_double(v); }},
        {"fiber.length_km", [](RunConfig& c, McKeys&, std::string_view v) { c.fiber.length_km = to_double(v); }},
        {"fiber.wavelength_nm", [](RunConfig& c, McKeys&, std::string_view v) { c.fiber.wavelength_nm = to_double(v); }},
        {"mc.enabled", [](RunConfig&, McKeys& m, std::string_view v) { m.enabled = to_bool(v); }},
        {"mc.n_subcarriers", [](RunConfig&, McKeys& m, std::string_view v) { m.n = to_unsigned(v); }},
        {"mc.bps_window_symbols",
         [](RunConfig& c, McKeys&, std::string_view v) { c.mc_bps_window_symbols = to_int(v); }},
        {"bps.test_phases", [](RunConfig& c, McKeys&, std::string_view v) { c.bps.n_test_phases = to_int(v); }},
        {"bps.window_symbols", [](RunConfig& c, McKeys&, std::string_view v) { c.bps.window_symbols = to_int(v); }},
        {"partition.block_size_symbols",
         [](RunConfig& c, McKeys&, std::string_view v) { c.block_size = to_unsigned(v); }},
        {"analysis.segment_symbols",
         [](RunConfig& c, McKeys&, std::string_view v) { c.analysis.cpsd.segment = to_unsigned(v); }},
        {"analysis.hop_symbols", [](RunConfig& c, McKeys&, std::string_view v) { c.analysis.cpsd.hop = to_unsigned(v); }},
        {"analysis.selection_threshold",
         [](RunConfig& c, McKeys&, std::string_view v) { c.analysis.selection_threshold = to_double(v); }},
        {"analysis.degraded_offset_ui",
         [](RunConfig& c, McKeys&, std::string_view v) { c.analysis.degraded_offset_ui = to_double(v); }},
        {"mitigation.modes", [](RunConfig& c, McKeys&, std::string_view v) { c.mitigation_modes = to_modes(v); }},
        {"mitigation.n_taps", [](RunConfig& c, McKeys&, std::string_view v) { c.mitigation_taps = to_unsigned(v); }},
        {"mitigation.refine_bps", [](RunConfig& c, McKeys&, std::string_view v) { c.refine_bps = to_bool(v); }},
        {"mitigation.refine_window_symbols",
         [](RunConfig& c, McKeys&, std::string_view v) { c.refine_window_symbols = to_int(v); }},
        {"mitigation.passes", [](RunConfig& c, McKeys&, std::string_view v) { c.mitigation_passes = to_int(v); }},
        {"mitigation.oversampling",
         [](RunConfig& c, McKeys&, std::string_view v) { c.design_oversampling = to_int(v); }},
    };
    return table;
}

} // namespace

RunConfig parse_config(std::string_view text, const RunConfig& base)
{
    RunConfig cfg = base;
    McKeys mc;
    std::set<std::string, std::less<>> seen;
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
        const std::string where = "line " + std::to_string(line_no) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigurationError(where + "expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) {
            throw ConfigurationError(where + "unknown key '" + std::string(key) + "'");
        }
        if (!seen.emplace(key).second) {
            throw ConfigurationError(where + "key '" + std::string(key) + "' given twice");
        }
        try {
            it->second(cfg, mc, value);
        } catch (const ParameterError& e) {
            throw ConfigurationError(where + std::string(key) + ": " + e.what());
        }
    }

    const bool enabled = mc.enabled.value_or(base.mc.has_value() || mc.n.has_value());
    if (enabled) {
        const std::size_t n = mc.n.value_or(base.mc ? base.mc->n_subcarriers : 8);
        cfg = cfg.with_subcarriers(n);
    } else {
        cfg.mc.reset();
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const RunConfig& base)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigurationError("cannot read config file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), base);
}

} // namespace eepn
