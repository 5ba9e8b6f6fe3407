#include "tlsfluct/dynamics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "tlsfluct/digest.hpp"
#include "tlsfluct/errors.hpp"
#include "tlsfluct/parallel.hpp"
#include "tlsfluct/sampling.hpp"

namespace tlsfluct {

namespace {

void require_param(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

bool parse_number(std::string_view text, double& value) {
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  return res.ec == std::errc() && res.ptr == end && std::isfinite(value);
}

}  // namespace

std::size_t grid_rows(double dt_s, double t_obs_s) {
  if (!(dt_s > 0.0) || !(t_obs_s >= dt_s)) {
    throw DomainError("time grid needs dt > 0 and t_obs >= dt");
  }
  // The tiny slack keeps e.g. 47.2 h / 1000 s from losing its last row to rounding.
  return static_cast<std::size_t>(std::floor(t_obs_s / dt_s * (1.0 + 1e-12))) + 1;
}

std::vector<double> generate_switch_times(double rate_hz, double t_obs_s, RandomStream& stream) {
  if (!(rate_hz >= 0.0)) throw DomainError("switching rate must be >= 0");
  std::vector<double> times;
  if (rate_hz == 0.0) return times;
  double t = 0.0;
  while (true) {
    t += sample_dwell(rate_hz, stream.uniform());
    if (t > t_obs_s) break;
    times.push_back(t);
  }
  return times;
}

RtsTrace generate_rts(double rate_hz, double dt_s, double t_obs_s, RandomStream stream) {
  const std::size_t rows = grid_rows(dt_s, t_obs_s);
  RtsTrace trace;
  trace.rate_hz = rate_hz;
  trace.dt_s = dt_s;
  trace.t_obs_s = t_obs_s;
  std::int8_t state = stream.uniform() < 0.5 ? -1 : 1;
  const auto switches = generate_switch_times(rate_hz, t_obs_s, stream);
  trace.states.resize(rows);
  std::size_t next = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double t = static_cast<double>(r) * dt_s;
    while (next < switches.size() && switches[next] <= t) {
      state = static_cast<std::int8_t>(-state);
      ++next;
    }
    trace.states[r] = state;
  }
  return trace;
}

FrequencyTrace qtls_frequency_trace(const QTlsRecord& qtls, const std::vector<RtsTrace>& traces,
                                    std::size_t rows, double dt_s) {
  if (traces.size() != qtls.ttls.size()) {
    throw ShapeError("Q-TLS " + std::to_string(qtls.id) + " has " +
                     std::to_string(qtls.ttls.size()) + " T-TLSs but " +
                     std::to_string(traces.size()) + " traces were given");
  }
  for (const auto& t : traces) {
    if (t.states.size() != rows || t.dt_s != dt_s) {
      throw ShapeError("RTS trace does not share the time grid");
    }
  }
  FrequencyTrace out;
  out.dt_s = dt_s;
  out.frequency_hz.assign(rows, qtls.frequency_hz);
  for (std::size_t l = 0; l < traces.size(); ++l) {
    const double shift = qtls.ttls[l].shift_hz;
    const auto& states = traces[l].states;
    for (std::size_t r = 0; r < rows; ++r) {
      out.frequency_hz[r] += states[r] < 0 ? shift : -shift;
    }
  }
  return out;
}

void DynamicsParams::validate() const {
  require_param(!fq_hz.empty(), "qubit frequency grid is empty");
  for (double f : fq_hz) require_param(f > 0.0 && std::isfinite(f), "qubit frequencies must be > 0");
  require_param(dt_s > 0.0 && std::isfinite(dt_s), "dt must be > 0");
  require_param(t_obs_s >= dt_s && std::isfinite(t_obs_s), "t_obs must be >= dt");
  require_param(noise_sigma_hz >= 0.0 && std::isfinite(noise_sigma_hz), "noise sigma must be >= 0");
  require_param(qubit.bare_rate_hz > 0.0 && std::isfinite(qubit.bare_rate_hz),
                "bare qubit rate must be > 0");
}

DynamicsParams DatasetPreset::params() const {
  DynamicsParams p;
  p.fq_hz = linspace(fq_min_hz, fq_max_hz, n_f);
  p.dt_s = dt_s;
  p.t_obs_s = t_obs_s;
  return p;
}

const std::vector<DatasetPreset>& dataset_presets() {
  static const std::vector<DatasetPreset> presets{
      {"dataset1", 16, 4.369e9, 4.669e9, 640.0, 42.5 * 3600.0},
      {"dataset2", 31, 4.500e9, 4.560e9, 1000.0, 47.2 * 3600.0},
      {"dataset3", 31, 4.500e9, 4.530e9, 1000.0, 48.1 * 3600.0},
  };
  return presets;
}

const DatasetPreset& dataset_preset(std::string_view name) {
  for (const auto& p : dataset_presets()) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "' (dataset1, dataset2, dataset3)");
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw DomainError("linspace needs n >= 1");
  if (n == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(n));
  const double step = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[i] = lo + step * i;
  out.back() = hi;
  return out;
}

std::vector<double> SpectrotemporalChart::column(std::size_t c) const {
  if (c >= cols()) {
    throw ShapeError("column " + std::to_string(c) + " out of range (" + std::to_string(cols()) +
                     " columns)");
  }
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
  return out;
}

std::string dynamics_digest(const DynamicsParams& params) {
  std::string text = "bare_rate_hz=" + format_double(params.qubit.bare_rate_hz) + "\n";
  text += "dt_s=" + format_double(params.dt_s) + "\n";
  text += "fq_hz=";
  for (double f : params.fq_hz) text += format_double(f) + ",";
  text += "\nnoise_sigma_hz=" + format_double(params.noise_sigma_hz) + "\n";
  text += "t_obs_s=" + format_double(params.t_obs_s) + "\n";
  return fnv1a_hex(text);
}

ChartResult simulate_chart(const std::vector<QTlsRecord>& qtls, const DynamicsParams& params,
                           const RandomStream& stream) {
  params.validate();
  const std::size_t rows = grid_rows(params.dt_s, params.t_obs_s);
  const std::size_t cols = params.fq_hz.size();
  const double bare = params.qubit.bare_rate_hz;
  for (const auto& q : qtls) {
    if (!(q.decay_rate_hz > bare)) {
      throw ConfigError("Q-TLS " + std::to_string(q.id) +
                        " decay rate must exceed the bare qubit rate");
    }
  }

  ChartResult result;
  result.traces.resize(qtls.size());
  const RandomStream rts_root = stream.substream(0);
  parallel_for(qtls.size(), params.threads, [&](std::size_t k) {
    const auto& q = qtls[k];
    const RandomStream q_root = rts_root.substream(q.id);
    std::vector<RtsTrace> rts;
    rts.reserve(q.ttls.size());
    for (std::size_t l = 0; l < q.ttls.size(); ++l) {
      rts.push_back(
          generate_rts(q.ttls[l].switching_rate_hz, params.dt_s, params.t_obs_s, q_root.substream(l)));
    }
    result.traces[k] = qtls_frequency_trace(q, rts, rows, params.dt_s);
  });

  auto& chart = result.chart;
  chart.fq_hz = params.fq_hz;
  chart.time_s.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) chart.time_s[r] = static_cast<double>(r) * params.dt_s;
  chart.t1_s.assign(rows * cols, 0.0);

  const RandomStream noise_root = stream.substream(1);
  std::vector<std::size_t> clamped(rows, 0);
  parallel_for(rows, params.threads, [&](std::size_t r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double rate = bare;
      for (std::size_t k = 0; k < qtls.size(); ++k) {
        rate += qubit_qtls_rate(params.fq_hz[c] - result.traces[k].frequency_hz[r],
                                qtls[k].coupling_hz, qtls[k].decay_rate_hz, bare);
      }
      if (params.noise_sigma_hz > 0.0) {
        RandomStream cell = noise_root.substream(r * cols + c);
        rate += sample_gaussian(params.noise_sigma_hz, cell);
      }
      if (!(rate > 0.0)) {
        rate = bare / 10.0;
        ++clamped[r];
      }
      chart.t1_s[r * cols + c] = 1.0 / rate;
    }
  });

  auto& meta = chart.metadata;
  meta.dt_s = params.dt_s;
  meta.t_obs_s = params.t_obs_s;
  meta.noise_sigma_hz = params.noise_sigma_hz;
  meta.bare_rate_hz = bare;
  meta.dynamics_digest = dynamics_digest(params);
  meta.clamped_cells = std::accumulate(clamped.begin(), clamped.end(), std::size_t{0});
  return result;
}

SpectrotemporalChart compute_chart(const Ensemble& ensemble, const DynamicsParams& params) {
  auto result = simulate_chart(ensemble.qtls, params, RandomStream(ensemble.seed, 1));
  result.chart.metadata.seed = ensemble.seed;
  result.chart.metadata.config_digest = ensemble.config_digest;
  return std::move(result.chart);
}

ScenarioSpec parse_scenario(const std::string& text) {
  ScenarioSpec spec;
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string kind;
    if (!(tokens >> kind)) continue;
    const std::string where = "scenario line " + std::to_string(line_no) + ": ";
    if (kind != "qtls" && kind != "ttls") {
      throw ConfigError(where + "expected 'qtls' or 'ttls', got '" + kind + "'");
    }

    std::map<std::string, double> values;
    std::string token;
    while (tokens >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw ConfigError(where + "expected key=value, got '" + token + "'");
      }
      const std::string key = token.substr(0, eq);
      double v = 0.0;
      if (!parse_number(std::string_view(token).substr(eq + 1), v)) {
        throw ConfigError(where + "malformed number for key '" + key + "'");
      }
      if (!values.emplace(key, v).second) throw ConfigError(where + "duplicate key '" + key + "'");
    }

    // Each quantity may be given in any one of the listed units.
    auto take = [&](const char* name, std::initializer_list<std::pair<const char*, double>> units) {
      std::optional<double> found;
      for (const auto& [suffix, scale] : units) {
        const auto it = values.find(std::string(name) + "_" + suffix);
        if (it == values.end()) continue;
        if (found) throw ConfigError(where + "'" + name + "' given more than once");
        found = it->second * scale;
        values.erase(it);
      }
      if (!found) throw ConfigError(where + "missing '" + name + "'");
      return *found;
    };

    if (kind == "qtls") {
      ScenarioQtls q;
      q.frequency_hz = take("f", {{"ghz", 1e9}, {"mhz", 1e6}, {"hz", 1.0}});
      q.coupling_hz = take("g", {{"mhz", 1e6}, {"khz", 1e3}, {"hz", 1.0}});
      q.decay_rate_hz = take("gamma1", {{"mhz", 1e6}, {"khz", 1e3}, {"hz", 1.0}});
      if (!(q.frequency_hz > 0.0) || !(q.coupling_hz >= 0.0) || !(q.decay_rate_hz > 0.0)) {
        throw ConfigError(where + "need f > 0, g >= 0, gamma1 > 0");
      }
      spec.qtls.push_back(q);
    } else {
      if (spec.qtls.empty()) throw ConfigError(where + "'ttls' before any 'qtls'");
      ScenarioTtls t;
      t.rate_hz = take("gamma", {{"hz", 1.0}, {"uhz", 1e-6}});
      t.shift_hz = take("df", {{"mhz", 1e6}, {"khz", 1e3}, {"hz", 1.0}});
      if (!(t.rate_hz >= 0.0)) throw ConfigError(where + "need gamma >= 0");
      spec.qtls.back().ttls.push_back(t);
    }
    if (!values.empty()) {
      throw ConfigError(where + "unknown key '" + values.begin()->first + "'");
    }
  }
  return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_file(path));
}

std::string scenario_digest(const ScenarioSpec& spec) {
  std::string text;
  for (const auto& q : spec.qtls) {
    text += "qtls " + format_double(q.frequency_hz) + " " + format_double(q.coupling_hz) + " " +
            format_double(q.decay_rate_hz) + "\n";
    for (const auto& t : q.ttls) {
      text += "ttls " + format_double(t.rate_hz) + " " + format_double(t.shift_hz) + "\n";
    }
  }
  return fnv1a_hex(text);
}

std::vector<QTlsRecord> scenario_records(const ScenarioSpec& spec) {
  std::vector<QTlsRecord> out;
  for (std::size_t k = 0; k < spec.qtls.size(); ++k) {
    const auto& s = spec.qtls[k];
    QTlsRecord q;
    q.id = k;
    q.frequency_hz = s.frequency_hz;
    q.coupling_hz = s.coupling_hz;
    q.decay_rate_hz = s.decay_rate_hz;
    for (const auto& t : s.ttls) {
      TTlsRecord r;
      r.shift_hz = t.shift_hz;
      r.switching_rate_hz = t.rate_hz;
      q.ttls.push_back(r);
    }
    out.push_back(std::move(q));
  }
  return out;
}

ChartResult run_scenario(const ScenarioSpec& spec, const DynamicsParams& params, std::uint64_t seed) {
  auto result = simulate_chart(scenario_records(spec), params, RandomStream(seed, 1));
  result.chart.metadata.seed = seed;
  result.chart.metadata.config_digest = scenario_digest(spec);
  return result;
}

namespace {

std::string header_line(const char* kind, const ChartMetadata& meta) {
  return std::string("# tlsfluct ") + kind + " seed=" + std::to_string(meta.seed) +
         " config_digest=" + meta.config_digest + " dynamics_digest=" + meta.dynamics_digest +
         " preset=" + meta.preset + "\n";
}

}  // namespace

std::string chart_to_text(const SpectrotemporalChart& chart) {
  std::string out = header_line("chart", chart.metadata);
  out += "t_s\\fq_hz";
  for (double f : chart.fq_hz) out += "\t" + format_double(f);
  out += "\n";
  for (std::size_t r = 0; r < chart.rows(); ++r) {
    out += format_double(chart.time_s[r]);
    for (std::size_t c = 0; c < chart.cols(); ++c) out += "\t" + format_double(chart.at(r, c));
    out += "\n";
  }
  return out;
}

SpectrotemporalChart chart_from_text(const std::string& text) {
  SpectrotemporalChart chart;
  std::istringstream lines(text);
  std::string line;
  bool have_axis = false;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    std::istringstream tokens(line);
    std::string tok;
    if (line[0] == '#') {
      while (tokens >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const auto key = tok.substr(0, eq);
        const auto value = tok.substr(eq + 1);
        if (key == "seed") {
          chart.metadata.seed = std::strtoull(value.c_str(), nullptr, 10);
        } else if (key == "config_digest") {
          chart.metadata.config_digest = value;
        } else if (key == "dynamics_digest") {
          chart.metadata.dynamics_digest = value;
        } else if (key == "preset") {
          chart.metadata.preset = value;
        }
      }
      continue;
    }
    std::vector<double> row;
    bool first = true;
    while (tokens >> tok) {
      if (first && !have_axis) {
        first = false;
        continue;  // corner label
      }
      first = false;
      double v = 0.0;
      if (!parse_number(tok, v)) throw SchemaError("chart file: malformed number '" + tok + "'");
      row.push_back(v);
    }
    if (!have_axis) {
      chart.fq_hz = std::move(row);
      have_axis = true;
      continue;
    }
    if (row.size() != chart.fq_hz.size() + 1) {
      throw SchemaError("chart file: row with " + std::to_string(row.size()) +
                        " cells, expected " + std::to_string(chart.fq_hz.size() + 1));
    }
    chart.time_s.push_back(row[0]);
    chart.t1_s.insert(chart.t1_s.end(), row.begin() + 1, row.end());
  }
  if (!have_axis || chart.fq_hz.empty()) throw SchemaError("chart file: missing frequency axis");
  if (chart.time_s.size() >= 2) chart.metadata.dt_s = chart.time_s[1] - chart.time_s[0];
  return chart;
}

std::string chart_metadata_json(const SpectrotemporalChart& chart) {
  const auto& m = chart.metadata;
  nlohmann::json j;
  j["schema"] = "tlsfluct.chart-meta";
  j["version"] = 1;
  j["preset"] = m.preset;
  j["seed"] = m.seed;
  j["config_digest"] = m.config_digest;
  j["dynamics_digest"] = m.dynamics_digest;
  j["rows"] = chart.rows();
  j["cols"] = chart.cols();
  j["dt_s"] = m.dt_s;
  j["t_obs_s"] = m.t_obs_s;
  j["noise_sigma_hz"] = m.noise_sigma_hz;
  j["bare_rate_hz"] = m.bare_rate_hz;
  j["clamped_cells"] = m.clamped_cells;
  j["notes"] = m.notes;
  return j.dump(1) + "\n";
}

void save_chart(const std::filesystem::path& path, const SpectrotemporalChart& chart) {
  write_file(path, chart_to_text(chart));
  auto meta = path;
  meta.replace_extension(".meta.json");
  write_file(meta, chart_metadata_json(chart));
}

SpectrotemporalChart load_chart(const std::filesystem::path& path) {
  return chart_from_text(read_file(path));
}

std::string traces_to_text(const std::vector<FrequencyTrace>& traces, const ChartMetadata& meta) {
  std::string out = header_line("traces", meta);
  out += "t_s";
  for (std::size_t k = 0; k < traces.size(); ++k) out += "\tqtls" + std::to_string(k) + "_hz";
  out += "\n";
  const std::size_t rows = traces.empty() ? 0 : traces.front().frequency_hz.size();
  for (std::size_t r = 0; r < rows; ++r) {
    out += format_double(static_cast<double>(r) * traces.front().dt_s);
    for (const auto& t : traces) out += "\t" + format_double(t.frequency_hz[r]);
    out += "\n";
  }
  return out;
}

}  // namespace tlsfluct
