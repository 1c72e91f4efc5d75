#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "weakam/grid.hpp"
#include "weakam/model.hpp"

namespace weakam {

/// Parsed config value: a number, a quoted string, or a number array.
struct ConfigValue {
    enum class Type { Number, String, Array } type = Type::Number;
    double num = 0.0;
    std::string str;
    std::vector<double> arr;
};

/// Flat key/value view of a config file; section headers become key prefixes
/// ("[damping]" + "kind" -> "damping.kind").
using ConfigMap = std::map<std::string, ConfigValue>;

ConfigMap parse_config_text(const std::string& text, const std::string& origin = "<string>");
ConfigMap parse_config_file(const std::string& path);

/// Parses a single value literal the way the file parser would.
ConfigValue parse_config_value(const std::string& literal);

struct RunConfig {
    ModelSpec model;
    Grid grid;
    std::uint64_t seed = 0;
    int threads = 1;

    RunConfig() : model(ModelSpec::mechanical(Potential::zero(), 0.0,
                                              DampingProfile::constant(1.0), 0.0)) {}
};

/**
 * Builds the run configuration from a config file plus textual overrides
 * (flag values win over file values). Recognized keys are documented in
 * docs/config.md; unknown keys raise ConfigError.
 */
RunConfig load_run_config(const std::string& path,
                          const std::map<std::string, std::string>& overrides = {});

/// Same, starting from an already-parsed map (used by tests).
RunConfig build_run_config(ConfigMap map);

} // namespace weakam
