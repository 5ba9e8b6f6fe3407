#include "tlsfluct/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "tlsfluct/errors.hpp"

namespace tlsfluct {

namespace {

struct RunField {
  bool integral;
  std::function<void(RunConfig&, double)> set;
};

const std::map<std::string, RunField, std::less<>>& run_fields() {
  static const std::map<std::string, RunField, std::less<>> fields = [] {
    std::map<std::string, RunField, std::less<>> f;
    auto real = [&f](const char* key, double RunConfig::*member) {
      f[key] = {false, [member](RunConfig& c, double v) { c.*member = v; }};
    };
    f["n_f"] = {true, [](RunConfig& c, double v) { c.n_f = static_cast<int>(v); }};
    real("fq_min_hz", &RunConfig::fq_min_hz);
    real("fq_max_hz", &RunConfig::fq_max_hz);
    real("dt_s", &RunConfig::dt_s);
    real("t_obs_s", &RunConfig::t_obs_s);
    real("noise_sigma_hz", &RunConfig::noise_sigma_hz);
    real("bare_rate_hz", &RunConfig::bare_rate_hz);
    real("segment_s", &RunConfig::segment_s);
    real("overlap", &RunConfig::overlap);
    real("series_dt_s", &RunConfig::series_dt_s);
    f["seed"] = {true, [](RunConfig& c, double v) { c.ensemble.seed = static_cast<std::uint64_t>(v); }};
    f["threads"] = {true, [](RunConfig& c, double v) { c.ensemble.threads = static_cast<unsigned>(v); }};
    for (const auto& e : ensemble_fields()) {
      f[e.key] = {e.integral, [set = e.set](RunConfig& c, double v) { set(c.ensemble, v); }};
    }
    return f;
  }();
  return fields;
}

}  // namespace

DynamicsParams RunConfig::dynamics() const {
  DynamicsParams p;
  p.fq_hz = linspace(fq_min_hz, fq_max_hz, n_f);
  p.dt_s = dt_s;
  p.t_obs_s = t_obs_s;
  p.noise_sigma_hz = noise_sigma_hz;
  p.qubit.bare_rate_hz = bare_rate_hz;
  p.threads = ensemble.threads;
  return p;
}

void RunConfig::validate() const {
  if (n_f < 1) throw ConfigError("n_f must be >= 1");
  if (!(fq_min_hz > 0.0 && fq_max_hz >= fq_min_hz)) {
    throw ConfigError("need 0 < fq_min_hz <= fq_max_hz");
  }
  if (!(segment_s > 0.0)) throw ConfigError("segment_s must be > 0");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw ConfigError("overlap must lie in [0, 1)");
  if (!(series_dt_s >= 0.0)) throw ConfigError("series_dt_s must be >= 0");
  ensemble.validate();
  dynamics().validate();
}

RunConfig preset_config(std::string_view preset) {
  RunConfig c;
  const DatasetPreset& p = dataset_preset(preset == "custom" ? std::string_view("dataset2") : preset);
  c.preset = std::string(preset);
  c.n_f = p.n_f;
  c.fq_min_hz = p.fq_min_hz;
  c.fq_max_hz = p.fq_max_hz;
  c.dt_s = p.dt_s;
  c.t_obs_s = p.t_obs_s;
  return c;
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  const auto it = run_fields().find(key);
  if (it == run_fields().end()) throw ConfigError("unknown key '" + std::string(key) + "'");
  double v = 0.0;
  const char* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, v);
  if (value.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw ConfigError("malformed number for key '" + std::string(key) + "': '" +
                      std::string(value) + "'");
  }
  if (it->second.integral && (v < 0.0 || v != std::floor(v))) {
    throw ConfigError("key '" + std::string(key) + "' expects a non-negative integer");
  }
  it->second.set(config, v);
  config.overridden.emplace_back(key);
}

std::vector<std::pair<std::string, std::string>> parse_settings(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(lines, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

std::vector<std::string> setting_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : run_fields()) keys.push_back(k);
  return keys;
}

}  // namespace tlsfluct
