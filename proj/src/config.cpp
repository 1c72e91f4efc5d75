#include "weakam/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace weakam {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& tok, const std::string& origin) {
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
        throw ConfigError(origin + ": expected a number, got '" + tok + "'");
    return v;
}

} // namespace

ConfigValue parse_config_value(const std::string& literal) {
    std::string v = trim(literal);
    ConfigValue out;
    if (v.empty()) throw ConfigError("empty config value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"') throw ConfigError("unterminated string: " + v);
        out.type = ConfigValue::Type::String;
        out.str = v.substr(1, v.size() - 2);
        return out;
    }
    if (v.front() == '[') {
        if (v.back() != ']') throw ConfigError("unterminated array: " + v);
        out.type = ConfigValue::Type::Array;
        std::string inner = v.substr(1, v.size() - 2);
        std::stringstream ss(inner);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            if (tok.empty()) continue;
            out.arr.push_back(parse_number(tok, "array"));
        }
        return out;
    }
    // bare word: number, or unquoted string (e.g. kind = constant)
    char* end = nullptr;
    double num = std::strtod(v.c_str(), &end);
    if (end != v.c_str() && *end == '\0') {
        out.type = ConfigValue::Type::Number;
        out.num = num;
    } else {
        out.type = ConfigValue::Type::String;
        out.str = v;
    }
    return out;
}

ConfigMap parse_config_text(const std::string& text, const std::string& origin) {
    ConfigMap map;
    std::string section;
    std::stringstream ss(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(ss, raw)) {
        ++lineno;
        // strip comments outside quotes
        std::string line;
        bool in_quote = false;
        for (char ch : raw) {
            if (ch == '"') in_quote = !in_quote;
            if (ch == '#' && !in_quote) break;
            line.push_back(ch);
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (!section.empty()) key = section + "." + key;
        map[key] = parse_config_value(line.substr(eq + 1));
    }
    return map;
}

ConfigMap parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config file not found: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

namespace {

const ConfigValue* find(const ConfigMap& m, const std::string& key) {
    auto it = m.find(key);
    return it == m.end() ? nullptr : &it->second;
}

double need_num(const ConfigMap& m, const std::string& key, std::optional<double> fallback = {}) {
    const ConfigValue* v = find(m, key);
    if (!v) {
        if (fallback) return *fallback;
        throw ConfigError("config: missing key '" + key + "'");
    }
    if (v->type != ConfigValue::Type::Number)
        throw ConfigError("config: key '" + key + "' must be a number");
    return v->num;
}

std::string need_str(const ConfigMap& m, const std::string& key, std::optional<std::string> fb = {}) {
    const ConfigValue* v = find(m, key);
    if (!v) {
        if (fb) return *fb;
        throw ConfigError("config: missing key '" + key + "'");
    }
    if (v->type != ConfigValue::Type::String)
        throw ConfigError("config: key '" + key + "' must be a string");
    return v->str;
}

std::vector<double> need_arr(const ConfigMap& m, const std::string& key,
                             std::optional<std::vector<double>> fb = {}) {
    const ConfigValue* v = find(m, key);
    if (!v) {
        if (fb) return *fb;
        throw ConfigError("config: missing key '" + key + "'");
    }
    if (v->type != ConfigValue::Type::Array)
        throw ConfigError("config: key '" + key + "' must be an array");
    return v->arr;
}

DampingProfile damping_from_map(const ConfigMap& m) {
    std::string kind = need_str(m, "damping.kind", std::string("constant"));
    if (kind == "constant") {
        auto coeffs = need_arr(m, "damping.coeffs");
        if (coeffs.size() != 1)
            throw ConfigError("config: damping.coeffs for constant kind is [lambda]");
        return DampingProfile::constant(coeffs[0]);
    }
    if (kind == "fourier") {
        auto coeffs = need_arr(m, "damping.coeffs");
        if (coeffs.empty()) throw ConfigError("config: damping.coeffs: [a0, a1, b1, a2, b2, ...]");
        std::vector<double> ac, bs;
        for (std::size_t k = 1; k < coeffs.size(); k += 2) {
            ac.push_back(coeffs[k]);
            bs.push_back(k + 1 < coeffs.size() ? coeffs[k + 1] : 0.0);
        }
        return DampingProfile::fourier(coeffs[0], std::move(ac), std::move(bs));
    }
    if (kind == "samples") return DampingProfile::from_samples(need_arr(m, "damping.samples"));
    throw ConfigError("config: unknown damping.kind '" + kind + "'");
}

Potential potential_from_map(const ConfigMap& m) {
    std::string kind = need_str(m, "potential.kind", std::string("zero"));
    if (kind == "zero") return Potential::zero();
    if (kind == "cosine") {
        auto coeffs = need_arr(m, "potential.coeffs", std::vector<double>{1.0});
        if (coeffs.size() != 1)
            throw ConfigError("config: potential.coeffs for cosine kind is [amplitude]");
        return Potential::cosine_well(coeffs[0]);
    }
    if (kind == "trig") {
        auto coeffs = need_arr(m, "potential.coeffs");
        if (coeffs.empty() || (coeffs.size() - 1) % 4 != 0)
            throw ConfigError("config: potential.coeffs for trig kind is "
                              "[offset, amp, kx, kt, phase, ...]");
        std::vector<PotentialTerm> terms;
        for (std::size_t k = 1; k < coeffs.size(); k += 4)
            terms.push_back({coeffs[k], static_cast<int>(coeffs[k + 1]),
                             static_cast<int>(coeffs[k + 2]), coeffs[k + 3]});
        return Potential::trig(coeffs[0], std::move(terms));
    }
    throw ConfigError("config: unknown potential.kind '" + kind + "'");
}

const std::set<std::string> kKnownKeys = {
    "damping.kind", "damping.coeffs", "damping.samples", "potential.kind", "potential.coeffs",
    "c",            "alpha",          "grid.nx",         "grid.nt",        "grid.v_max",
    "seed",         "threads",
};

} // namespace

RunConfig build_run_config(ConfigMap map) {
    for (const auto& [key, value] : map) {
        (void)value;
        if (!kKnownKeys.count(key)) throw ConfigError("config: unknown key '" + key + "'");
    }
    RunConfig rc;
    double c = need_num(map, "c", 0.0);
    double alpha = need_num(map, "alpha", 0.0);
    rc.model = ModelSpec::mechanical(potential_from_map(map), c, damping_from_map(map), alpha);
    rc.grid.nx = static_cast<int>(need_num(map, "grid.nx", 128));
    rc.grid.nt = static_cast<int>(need_num(map, "grid.nt", 32));
    rc.grid.v_max = need_num(map, "grid.v_max", 0.0); // 0: derive from the model
    rc.seed = static_cast<std::uint64_t>(need_num(map, "seed", 0));
    rc.threads = static_cast<int>(need_num(map, "threads", 0));
    return rc;
}

RunConfig load_run_config(const std::string& path,
                          const std::map<std::string, std::string>& overrides) {
    ConfigMap map = parse_config_file(path);
    for (const auto& [key, literal] : overrides) map[key] = parse_config_value(literal);
    return build_run_config(std::move(map));
}

} // namespace weakam
