#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tlsfluct/dynamics.hpp"
#include "tlsfluct/ensemble.hpp"

namespace tlsfluct {

/// Everything a pipeline run needs besides paths. Precedence is
/// preset defaults < config file < command-line settings.
struct RunConfig {
  std::string preset = "dataset2";
  EnsembleConfig ensemble;

  int n_f = 31;
  double fq_min_hz = 4.5e9;
  double fq_max_hz = 4.56e9;
  double dt_s = 1000.0;
  double t_obs_s = 47.2 * 3600.0;
  double noise_sigma_hz = 2e3;
  double bare_rate_hz = 1.0 / 27e-6;

  double segment_s = 25.0 * 3600.0;
  double overlap = 0.5;
  double series_dt_s = 0.0;  // spacing for plain series files; 0 = use dt_s

  /// Keys set after the preset was applied, in application order.
  std::vector<std::string> overridden;

  DynamicsParams dynamics() const;
  /// ConfigError naming the offending key.
  void validate() const;
};

/// "dataset1" .. "dataset3", or "custom" (dataset2 values as a starting point).
RunConfig preset_config(std::string_view preset);

/// Sets one key from its textual value; ConfigError for unknown keys or
/// malformed / non-integral numbers.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Flat key=value lines, '#' comments, blank lines ignored.
std::vector<std::pair<std::string, std::string>> parse_settings(const std::string& text);

/// All accepted keys, sorted.
std::vector<std::string> setting_keys();

}  // namespace tlsfluct
