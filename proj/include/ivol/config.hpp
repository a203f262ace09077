// Run configuration: a flat `key = value` file.
//
//   input.<label> = path        one per asset (relative to the config file)
//   treatment = <label>
//   control = <label>           enables the difference-in-differences stage
//   timezone = America/New_York
//   max_missing = 0.10
//   output_dir = out
//   seed = 1
//   period = <label>, <start>, <end>   repeated, in order; first is baseline
//   baseline = <label>
//   multipliers = 1.0, 1.4, 0.95, 0.6 synthetic treatment factors per period
//   control_multipliers = ...
//   correlation = 0.5
#pragma once

#include "ivol/common.hpp"
#include "ivol/market_data.hpp"
#include "ivol/synthetic.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ivol {

struct RunConfig {
  std::map<std::string, std::filesystem::path> inputs;  // label -> minute-bar file
  std::string treatment, control;
  PeriodScheme scheme = PeriodScheme::futures_launch_2017();
  double max_missing = 0.10;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;
  SyntheticConfig synthetic;

  bool dd_requested() const { return !control.empty(); }

  /// Checks labels against inputs. `need_dd` makes a missing control an error.
  void validate(bool need_dd = false) const {
    scheme.validate();
    if (!(max_missing >= 0 && max_missing <= 1)) throw ConfigError("max_missing must lie in [0, 1]");
    if (!treatment.empty() && !inputs.contains(treatment))
      throw ConfigError("treatment '" + treatment + "' has no input file");
    if (need_dd || dd_requested()) {
      if (treatment.empty()) throw ConfigError("difference-in-differences needs a treatment label");
      if (control.empty()) throw ConfigError("difference-in-differences needs a control label");
      if (!inputs.contains(control)) throw ConfigError("control '" + control + "' has no input file");
      if (control == treatment) throw ConfigError("treatment and control must differ");
    }
    synthetic.validate(scheme.periods.size());
  }
};

namespace config_detail {

inline double to_double(const std::string& key, std::string_view v) {
  v = detail::trim(v);
  double out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": not a number: '" + std::string(v) + "'");
  return out;
}

inline std::vector<double> to_doubles(const std::string& key, std::string_view v) {
  std::vector<double> out;
  for (auto part : detail::split(v, ',')) out.push_back(to_double(key, part));
  return out;
}

}  // namespace config_detail

/// Parses a config stream. Relative input and output paths resolve against `base`.
inline RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base = {}) {
  RunConfig cfg;
  std::vector<Period> periods;
  std::optional<std::string> baseline, tz;
  std::string raw;
  std::size_t lineno = 0;
  auto resolve = [&](std::string_view p) {
    std::filesystem::path path{std::string(p)};
    return path.is_relative() && !base.empty() ? base / path : path;
  };
  while (std::getline(in, raw)) {
    ++lineno;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const auto line = detail::trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const auto where = "line " + std::to_string(lineno) + ": ";
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    if (value.empty()) throw ConfigError(where + "empty value for '" + key + "'");
    try {
      if (key.starts_with("input.")) {
        const std::string label = key.substr(6);
        if (label.empty()) throw ConfigError("input label is empty");
        if (!cfg.inputs.emplace(label, resolve(value)).second) throw ConfigError("duplicate input '" + label + "'");
      } else if (key == "treatment") {
        cfg.treatment = value;
      } else if (key == "control") {
        cfg.control = value;
      } else if (key == "timezone") {
        tz = std::string(value);
      } else if (key == "max_missing") {
        cfg.max_missing = config_detail::to_double(key, value);
      } else if (key == "output_dir") {
        cfg.output_dir = resolve(value);
      } else if (key == "seed") {
        const double s = config_detail::to_double(key, value);
        if (s < 0 || s != std::floor(s)) throw ConfigError("seed must be a non-negative integer");
        cfg.seed = static_cast<std::uint64_t>(s);
      } else if (key == "period") {
        const auto parts = detail::split(value, ',');
        if (parts.size() != 3) throw ConfigError("period needs 'label, start, end'");
        periods.push_back({std::string(detail::trim(parts[0])), Date::parse(detail::trim(parts[1])),
                           Date::parse(detail::trim(parts[2]))});
      } else if (key == "baseline") {
        baseline = std::string(value);
      } else if (key == "multipliers") {
        cfg.synthetic.treatment_multipliers = config_detail::to_doubles(key, value);
      } else if (key == "control_multipliers") {
        cfg.synthetic.control_multipliers = config_detail::to_doubles(key, value);
      } else if (key == "correlation") {
        cfg.synthetic.correlation = config_detail::to_double(key, value);
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    } catch (const Error& e) {
      throw ConfigError(where + e.what());
    }
  }
  if (!periods.empty()) cfg.scheme.periods = std::move(periods);
  if (tz) cfg.scheme.timezone = Timezone::parse(*tz);
  cfg.scheme.baseline = 0;
  if (baseline) {
    std::size_t i = 0;
    while (i < cfg.scheme.periods.size() && cfg.scheme.periods[i].label != *baseline) ++i;
    if (i == cfg.scheme.periods.size()) throw ConfigError("baseline '" + *baseline + "' is not a period");
    cfg.scheme.baseline = i;
  }
  cfg.synthetic.seed = cfg.seed;
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path.string());
  return parse_run_config(f, path.parent_path());
}

}  // namespace ivol
