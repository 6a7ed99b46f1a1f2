#pragma once

// TOML-subset configuration reader for the CLI.  Supports the documented
// schema -- [model], [run], [verify] sections with scalar values and flat
// arrays -- plus comments and quoted strings.  Unknown keys are rejected.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fitwave/engine.hpp"
#include "fitwave/ensemble.hpp"
#include "fitwave/errors.hpp"

namespace fitwave::config {

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// strips an unquoted trailing comment
inline std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') in_str = !in_str;
        else if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
}

inline std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

inline double to_number(const std::string& raw, const std::string& key) {
    try {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' expects a number, got '" + raw + "'");
    }
}

inline bool to_bool(const std::string& raw, const std::string& key) {
    if (raw == "true") return true;
    if (raw == "false") return false;
    throw ConfigError("config: key '" + key + "' expects true/false, got '" + raw + "'");
}

inline std::vector<std::string> split_array(const std::string& raw, const std::string& key) {
    const std::string t = trim(raw);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']')
        throw ConfigError("config: key '" + key + "' expects an array");
    std::vector<std::string> items;
    std::string cur;
    bool in_str = false;
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
        const char c = t[i];
        if (c == '"') in_str = !in_str;
        if (c == ',' && !in_str) {
            const std::string item = trim(cur);
            if (!item.empty()) items.push_back(unquote(item));
            cur.clear();
        } else {
            cur += c;
        }
    }
    const std::string item = trim(cur);
    if (!item.empty()) items.push_back(unquote(item));
    return items;
}

inline std::int64_t to_count(double v, const std::string& key) {
    if (!(v >= 0) || v != std::floor(v) || v > 9.2e18)
        throw ConfigError("config: key '" + key + "' expects a nonnegative integer");
    return static_cast<std::int64_t>(v);
}

} // namespace detail

inline ensemble::ExperimentConfig parse(std::istream& in) {
    ensemble::ExperimentConfig cfg;
    bool saw_model = false;
    std::string section;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string body = detail::trim(detail::strip_comment(line));
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) + ": bad section");
            section = detail::trim(body.substr(1, body.size() - 2));
            if (section != "model" && section != "run" && section != "verify")
                throw ConfigError("config: unknown section [" + section + "]");
            continue;
        }
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = detail::trim(body.substr(0, eq));
        const std::string raw = detail::trim(body.substr(eq + 1));
        const std::string qualified = section + "." + key;

        if (qualified == "model.N") {
            cfg.params.N = detail::to_count(detail::to_number(raw, qualified), qualified);
            saw_model = true;
        } else if (qualified == "model.mu") {
            cfg.params.mu = detail::to_number(raw, qualified);
        } else if (qualified == "model.s") {
            cfg.params.s = detail::to_number(raw, qualified);
        } else if (qualified == "run.replicates") {
            cfg.replicates = static_cast<int>(detail::to_count(detail::to_number(raw, qualified), qualified));
        } else if (qualified == "run.t_mult") {
            cfg.t_mult = detail::to_number(raw, qualified);
        } else if (qualified == "run.t_end") {
            cfg.t_end_abs = detail::to_number(raw, qualified);
        } else if (qualified == "run.resolution") {
            cfg.resolution = static_cast<int>(detail::to_count(detail::to_number(raw, qualified), qualified));
        } else if (qualified == "run.engine") {
            const std::string v = detail::unquote(raw);
            if (v == "faithful") cfg.engine_kind = engine::EngineKind::faithful;
            else if (v == "effective") cfg.engine_kind = engine::EngineKind::effective;
            else throw ConfigError("config: run.engine must be \"faithful\" or \"effective\"");
        } else if (qualified == "run.seed") {
            cfg.master_seed = static_cast<std::uint64_t>(
                detail::to_count(detail::to_number(raw, qualified), qualified));
        } else if (qualified == "run.workers") {
            cfg.workers = static_cast<int>(detail::to_count(detail::to_number(raw, qualified), qualified));
        } else if (qualified == "run.record_events") {
            cfg.record_events = detail::to_bool(raw, qualified);
        } else if (qualified == "run.probes") {
            cfg.probes.clear();
            for (const auto& item : detail::split_array(raw, qualified))
                cfg.probes.push_back(detail::to_number(item, qualified));
        } else if (qualified == "run.theorem3_t") {
            cfg.theorem3_t = detail::to_number(raw, qualified);
        } else if (qualified == "run.theorem3_ell_max") {
            cfg.theorem3_ell_max = static_cast<int>(detail::to_count(detail::to_number(raw, qualified), qualified));
        } else if (qualified == "verify.targets") {
            cfg.verify_targets = detail::split_array(raw, qualified);
        } else if (qualified == "verify.trend_N") {
            cfg.trend_N.clear();
            for (const auto& item : detail::split_array(raw, qualified))
                cfg.trend_N.push_back(detail::to_number(item, qualified));
        } else if (qualified == "verify.trend_replicates") {
            cfg.replicates = static_cast<int>(detail::to_count(detail::to_number(raw, qualified), qualified));
        } else {
            throw ConfigError("config: unknown key '" + qualified + "'");
        }
    }
    if (!saw_model) throw ConfigError("config: missing [model] N");
    return cfg;
}

inline ensemble::ExperimentConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    return parse(in);
}

} // namespace fitwave::config
