#pragma once

// Run configuration: a sectioned key = value text file.
//
//   [physical]       mass_kg, scattering_length_m, omega_z_per_s, lambda_ratio, eta, Lambda_per_s2,
//                    N_total, alpha0_frac, beta0_frac, phi0_rad, tau_s, kappa_override_per_s, eta_schedule
//   [discretization] M, omega_up_per_s
//   [integrator]     rtol, atol, sample_dt_s
//   [analysis]       peak_prominence_frac, dip_prominence_frac, omega_min_per_s, omega_max_per_s
//   [output]         directory, formats
//   [sweep]          axis.<key>, observables, max_points, per_point_output
//
// All frequencies are angular (rad/s). Numbers may be written with a factor of pi
// ("pi", "2*pi", "pi/2"). Axis values are comma lists or linspace(a, b, n).
// A JSON document with the same sections (or a meta.json holding one under
// "resolved_config") is accepted as well.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "atomlaser/errors.hpp"
#include "atomlaser/params.hpp"
#include "atomlaser/simulation.hpp"
#include "atomlaser/sweep.hpp"

namespace atomlaser {

struct OutputSettings {
    std::string directory = "out";
    bool csv = true;
    bool json = true;
};

struct SweepBlock {
    std::vector<SweepAxis> axes;
    std::vector<std::string> observables;
    std::size_t max_points = 100000;
    bool per_point_output = false;
};

struct RunConfig {
    RunSettings run;
    OutputSettings output;
    std::optional<SweepBlock> sweep;

    SweepSpec sweep_spec() const
    {
        if (!sweep) throw ConfigError("configuration has no [sweep] section");
        return {run, sweep->axes, sweep->observables, sweep->max_points};
    }
};

namespace config_detail {

struct Entry {
    std::string value;
    std::string origin; // "file:line" or "override"
    std::size_t order = 0;
};

// "section.key" -> entry, ordered for deterministic processing.
using Entries = std::map<std::string, Entry>;

inline std::string trim(std::string_view s)
{
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

inline std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

inline std::optional<double> plain_number(std::string_view s)
{
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

// number | [a*]pi[/b] | a pi
inline std::optional<double> number(std::string_view text)
{
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (auto v = plain_number(s)) return v;
    const auto at = s.find("pi");
    if (at == std::string::npos) return std::nullopt;
    double factor = 1.0, divisor = 1.0;
    std::string head = s.substr(0, at);
    const std::string tail = s.substr(at + 2);
    if (!head.empty() && head.back() == '*') head.pop_back();
    if (head == "-") factor = -1.0;
    else if (!head.empty()) {
        const auto f = plain_number(head);
        if (!f) return std::nullopt;
        factor = *f;
    }
    if (!tail.empty()) {
        if (tail.front() != '/') return std::nullopt;
        const auto d = plain_number(std::string_view(tail).substr(1));
        if (!d || *d == 0.0) return std::nullopt;
        divisor = *d;
    }
    return factor * std::numbers::pi / divisor;
}

[[noreturn]] inline void fail(const std::string& key, const Entry& e, const std::string& what)
{
    throw ConfigError(e.origin + ": key '" + key + "': " + what);
}

inline double parse_number(const std::string& key, const Entry& e)
{
    const auto v = number(e.value);
    if (!v) fail(key, e, "expected a number, got '" + e.value + "'");
    if (!std::isfinite(*v)) fail(key, e, "value must be finite");
    return *v;
}

inline bool parse_bool(const std::string& key, const Entry& e)
{
    std::string v = e.value;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(key, e, "expected true or false");
}

inline std::vector<double> parse_values(const std::string& key, const Entry& e)
{
    std::string v = trim(e.value);
    if (v.rfind("linspace(", 0) == 0 && v.back() == ')') {
        const auto args = split(std::string_view(v).substr(9, v.size() - 10), ',');
        if (args.size() != 3) fail(key, e, "linspace needs (start, stop, count)");
        const auto a = number(args[0]), b = number(args[1]), n = plain_number(args[2]);
        if (!a || !b || !n || *n < 1 || *n != std::floor(*n) || *n > 1e7)
            fail(key, e, "invalid linspace arguments");
        return linspace(*a, *b, static_cast<std::size_t>(*n));
    }
    if (!v.empty() && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
    if (trim(v).empty()) fail(key, e, "axis has no values");
    std::vector<double> out;
    for (const auto& item : split(v, ',')) {
        const auto x = number(item);
        if (!x || !std::isfinite(*x)) fail(key, e, "invalid axis value '" + item + "'");
        out.push_back(*x);
    }
    return out;
}

inline SeparationSchedule parse_schedule(const std::string& key, const Entry& e)
{
    SeparationSchedule s;
    if (trim(e.value).empty()) return s;
    for (const auto& item : split(e.value, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 2) fail(key, e, "expected 't:eta' pairs separated by commas");
        const auto t = number(parts[0]), eta = number(parts[1]);
        if (!t || !eta) fail(key, e, "invalid knot '" + item + "'");
        s.knots.emplace_back(*t, *eta);
    }
    return s;
}

inline const std::vector<std::string>& sections()
{
    static const std::vector<std::string> s = {"physical", "discretization", "integrator", "analysis", "output",
                                               "sweep"};
    return s;
}

inline bool known_key(const std::string& section, const std::string& key)
{
    if (const ScalarSetting* s = find_scalar_setting(key)) return s->section == section;
    if (section == "physical") return key == "eta_schedule";
    if (section == "output") return key == "directory" || key == "formats";
    if (section == "sweep") {
        if (key.rfind("axis.", 0) == 0) return find_scalar_setting(key.substr(5)) != nullptr;
        return key == "observables" || key == "max_points" || key == "per_point_output";
    }
    return false;
}

inline void insert(Entries& entries, const std::string& section, const std::string& key, Entry e)
{
    if (std::find(sections().begin(), sections().end(), section) == sections().end())
        throw ConfigError(e.origin + ": unknown section [" + section + "]");
    if (!known_key(section, key))
        throw ConfigError(e.origin + ": unknown key '" + key + "' in section [" + section + "]");
    const std::string full = section + "." + key;
    const auto old = entries.find(full);
    e.order = old != entries.end() ? old->second.order : entries.size();
    entries[full] = std::move(e);
}

inline Entries parse_text(std::string_view text, const std::string& source)
{
    Entries entries;
    std::string section;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string origin = source + ":" + std::to_string(line_no);
        std::string line = raw;
        if (const auto hash = line.find_first_of("#;"); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(origin + ": malformed section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (std::find(sections().begin(), sections().end(), section) == sections().end())
                throw ConfigError(origin + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(origin + ": expected 'key = value'");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (section.empty()) throw ConfigError(origin + ": key '" + key + "' outside any section");
        if (entries.count(section + "." + key))
            throw ConfigError(origin + ": duplicate key '" + key + "' in section [" + section + "]");
        insert(entries, section, key, {value, origin});
    }
    return entries;
}

inline std::string json_scalar(const nlohmann::ordered_json& v)
{
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    if (v.is_array()) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ", ";
            out += json_scalar(v[i]);
        }
        return out;
    }
    throw ConfigError("unsupported JSON value " + v.dump());
}

inline Entries parse_json(const nlohmann::ordered_json& doc, const std::string& source)
{
    const nlohmann::ordered_json& root = doc.contains("resolved_config") ? doc.at("resolved_config") : doc;
    if (!root.is_object()) throw ConfigError(source + ": expected a JSON object");
    Entries entries;
    for (const auto& [section, body] : root.items()) {
        if (!body.is_object()) throw ConfigError(source + ": section '" + section + "' must be an object");
        for (const auto& [key, value] : body.items())
            insert(entries, section, key, {json_scalar(value), source + ": " + section + "." + key});
    }
    return entries;
}

inline void apply_override(Entries& entries, const std::string& text)
{
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + text + "': expected key=value");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    const Entry e{value, "override '" + text + "'"};

    const auto dot = key.find('.');
    if (dot != std::string::npos) {
        const std::string section = key.substr(0, dot);
        if (std::find(sections().begin(), sections().end(), section) != sections().end()) {
            insert(entries, section, key.substr(dot + 1), e);
            return;
        }
    }
    std::vector<std::string> matches;
    for (const auto& section : sections())
        if (known_key(section, key)) matches.push_back(section);
    if (matches.empty()) throw ConfigError(e.origin + ": unknown key '" + key + "'");
    if (matches.size() > 1) throw ConfigError(e.origin + ": ambiguous key '" + key + "'; prefix the section");
    insert(entries, matches.front(), key, e);
}

inline RunConfig build(const Entries& entries)
{
    RunConfig cfg;
    SweepBlock sweep;
    bool has_sweep = false;

    for (const auto& [full, e] : entries) {
        const auto dot = full.find('.');
        const std::string section = full.substr(0, dot);
        const std::string key = full.substr(dot + 1);
        try {
            if (section == "output") {
                if (key == "directory") {
                    if (e.value.empty()) fail(key, e, "directory must not be empty");
                    cfg.output.directory = e.value;
                } else {
                    cfg.output.csv = cfg.output.json = false;
                    for (const auto& f : split(e.value, ',')) {
                        if (f == "csv") cfg.output.csv = true;
                        else if (f == "json") cfg.output.json = true;
                        else fail(key, e, "unknown format '" + f + "' (csv, json)");
                    }
                }
            } else if (section == "sweep") {
                has_sweep = true;
                if (key.rfind("axis.", 0) == 0) {
                    sweep.axes.push_back({key.substr(5), parse_values(key, e)});
                } else if (key == "observables") {
                    for (const auto& o : split(e.value, ',')) {
                        if (o.empty()) continue;
                        if (!is_summary_name(o)) fail(key, e, "unknown observable '" + o + "'");
                        sweep.observables.push_back(o);
                    }
                } else if (key == "max_points") {
                    const double v = parse_number(key, e);
                    if (v < 1 || v != std::floor(v)) fail(key, e, "must be a positive integer");
                    sweep.max_points = static_cast<std::size_t>(v);
                } else {
                    sweep.per_point_output = parse_bool(key, e);
                }
            } else if (key == "eta_schedule") {
                cfg.run.physical.separation_schedule = parse_schedule(key, e);
            } else if (key == "kappa_override_per_s" && (e.value == "none" || e.value.empty())) {
                cfg.run.physical.kappa_override.reset();
            } else if ((key == "omega_min_per_s" || key == "omega_max_per_s") &&
                       (e.value == "none" || e.value.empty())) {
                continue;
            } else {
                set_scalar(cfg.run, key, parse_number(key, e));
            }
        } catch (const ConfigError& err) {
            const std::string msg = err.what();
            if (msg.rfind(e.origin, 0) == 0) throw;
            fail(key, e, msg);
        }
    }

    if (has_sweep) {
        std::stable_sort(sweep.axes.begin(), sweep.axes.end(), [&](const SweepAxis& a, const SweepAxis& b) {
            return entries.at("sweep.axis." + a.key).order < entries.at("sweep.axis." + b.key).order;
        });
        cfg.sweep = std::move(sweep);
    }
    return cfg;
}

} // namespace config_detail

/// Parses configuration text. `source` names the input in diagnostics.
inline RunConfig parse_config(std::string_view text, const std::string& source = "config",
                              const std::vector<std::string>& overrides = {})
{
    auto entries = config_detail::parse_text(text, source);
    for (const auto& o : overrides) config_detail::apply_override(entries, o);
    return config_detail::build(entries);
}

inline RunConfig parse_config_json(const nlohmann::ordered_json& doc, const std::string& source = "config",
                                   const std::vector<std::string>& overrides = {})
{
    auto entries = config_detail::parse_json(doc, source);
    for (const auto& o : overrides) config_detail::apply_override(entries, o);
    return config_detail::build(entries);
}

/// Loads a text or JSON configuration file (JSON when the first non-blank character is '{').
inline RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {})
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::ordered_json doc;
        try {
            doc = nlohmann::ordered_json::parse(text);
        } catch (const nlohmann::ordered_json::parse_error& e) {
            throw ConfigError(path + ": invalid JSON: " + e.what());
        }
        return parse_config_json(doc, path, overrides);
    }
    return parse_config(text, path, overrides);
}

/// Fully resolved configuration; parse_config_json(to_json(c)) reproduces c.
inline nlohmann::ordered_json to_json(const RunConfig& c)
{
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& s : scalar_settings()) {
        const auto v = s.get(c.run);
        if (v) j[std::string(s.section)][std::string(s.key)] = *v;
    }
    if (!c.run.physical.separation_schedule.empty()) {
        std::string sched;
        char buf[64];
        for (const auto& k : c.run.physical.separation_schedule.knots) {
            std::snprintf(buf, sizeof buf, "%s%.17g:%.17g", sched.empty() ? "" : ", ", k.first, k.second);
            sched += buf;
        }
        j["physical"]["eta_schedule"] = sched;
    }
    j["output"]["directory"] = c.output.directory;
    std::string formats;
    if (c.output.csv) formats = "csv";
    if (c.output.json) formats += formats.empty() ? "json" : ",json";
    j["output"]["formats"] = formats;
    if (c.sweep) {
        auto& s = j["sweep"];
        for (const auto& a : c.sweep->axes) s["axis." + a.key] = a.values;
        std::string obs;
        for (const auto& o : c.sweep->observables) obs += (obs.empty() ? "" : ",") + o;
        s["observables"] = obs;
        s["max_points"] = c.sweep->max_points;
        s["per_point_output"] = c.sweep->per_point_output;
    }
    return j;
}

} // namespace atomlaser
