#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gfatom/model.hpp"
#include "gfatom/observables.hpp"

// Run configuration: a small TOML subset (sections, key = value, numbers,
// quoted strings, # comments) strictly validated with line-accurate errors.

namespace gfatom {

class ConfigError : public std::runtime_error {
  public:
    ConfigError(const std::string& source, int line, const std::string& what_arg)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " +
                             what_arg),
          line_(line) {}
    ConfigError(const std::string& source, const std::string& what_arg)
        : std::runtime_error(source + ": " + what_arg), line_(0) {}
    int line() const { return line_; }

  private:
    int line_;
};

struct ConfigValue {
    std::string raw;  // unquoted content for strings, token otherwise
    int line = 0;
    bool is_string = false;
};

struct ConfigSection {
    std::string name;
    int line = 0;
    std::vector<std::pair<std::string, ConfigValue>> entries;

    const ConfigValue* find(const std::string& key) const {
        for (const auto& kv : entries)
            if (kv.first == key) return &kv.second;
        return nullptr;
    }
};

struct ParsedConfig {
    std::string source;  // file name used in diagnostics
    std::vector<ConfigSection> sections;

    static ParsedConfig from_string(const std::string& text,
                                    const std::string& source_name);
    static ParsedConfig from_file(const std::string& path);

    const ConfigSection* find(const std::string& name) const {
        for (const auto& s : sections)
            if (s.name == name) return &s;
        return nullptr;
    }
};

struct ScanSpec {
    std::string axis;
    double min = 0.0;
    double max = 0.0;
    int points = 0;
    std::string axis2;
    double min2 = 0.0;
    double max2 = 0.0;
    int points2 = 0;

    bool has_axis2() const { return !axis2.empty(); }
};

struct NumericSpec {
    double rtol = 1e-9;
    double atol = 1e-12;
    double rate_tol = 1e-5;
    double q_tol = 1e-2;
    double t_eval_us = 0.0;  // 0 = automatic counting time
    double dark_threshold = 1e-6;
    int n_max = 64;
};

struct OutputSpec {
    std::string basename;
};

struct RunConfig {
    AtomModel model;
    DriveConfig drive;
    int initial_level = 1;
    bool has_scan = false;
    ScanSpec scan;
    NumericSpec numeric;
    OutputSpec output;
    std::string source_path;

    ScanAxis axis1() const;
    ScanAxis axis2() const;
    ScanOptions scan_options() const;  // numeric block mapped onto the engine
    std::string serialize_resolved() const;
};

RunConfig parse_run_config(const std::string& text,
                           const std::string& source_name);
RunConfig load_run_config(const std::string& path);

}  // namespace gfatom
