#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tlsfluct/ensemble.hpp"
#include "tlsfluct/random.hpp"
#include "tlsfluct/tls_physics.hpp"

namespace tlsfluct {

/// Number of grid instants 0, dt, 2dt, ... <= t_obs.
std::size_t grid_rows(double dt_s, double t_obs_s);

/// Point-sampled symmetric telegraph process; states are -1 (|->) or +1 (|+>).
struct RtsTrace {
  std::vector<std::int8_t> states;
  double rate_hz = 0.0;
  double dt_s = 0.0;
  double t_obs_s = 0.0;
};

/// Switching instants in (0, t_obs] of a symmetric RTS with rate gamma.
std::vector<double> generate_switch_times(double rate_hz, double t_obs_s, RandomStream& stream);

/// Random initial state, exponential dwell times, sampled at multiples of dt.
RtsTrace generate_rts(double rate_hz, double dt_s, double t_obs_s, RandomStream stream);

struct FrequencyTrace {
  std::vector<double> frequency_hz;
  double dt_s = 0.0;
};

/// f(t) = f_Q-TLS + sum_l (state_l == - ? shift_l : -shift_l) on a grid of
/// `rows` instants. ShapeError when the trace count or grids disagree.
FrequencyTrace qtls_frequency_trace(const QTlsRecord& qtls, const std::vector<RtsTrace>& traces,
                                    std::size_t rows, double dt_s);

struct DynamicsParams {
  std::vector<double> fq_hz;
  double dt_s = 1000.0;
  double t_obs_s = 47.2 * 3600.0;
  double noise_sigma_hz = 2e3;
  QubitDecayParams qubit;
  unsigned threads = 0;

  void validate() const;
};

/// Measurement grids of the three reference datasets.
struct DatasetPreset {
  std::string name;
  int n_f;
  double fq_min_hz;
  double fq_max_hz;
  double dt_s;
  double t_obs_s;

  DynamicsParams params() const;
};

const std::vector<DatasetPreset>& dataset_presets();
/// ConfigError for unknown names.
const DatasetPreset& dataset_preset(std::string_view name);

std::vector<double> linspace(double lo, double hi, int n);

struct ChartMetadata {
  std::string preset = "custom";
  std::uint64_t seed = 0;
  std::string config_digest;
  std::string dynamics_digest;
  double dt_s = 0.0;
  double t_obs_s = 0.0;
  double noise_sigma_hz = 0.0;
  double bare_rate_hz = 0.0;
  std::size_t clamped_cells = 0;
  std::map<std::string, std::string> notes;
};

/// T1 over (time row, qubit frequency column), row-major.
struct SpectrotemporalChart {
  std::vector<double> time_s;
  std::vector<double> fq_hz;
  std::vector<double> t1_s;
  ChartMetadata metadata;

  std::size_t rows() const { return time_s.size(); }
  std::size_t cols() const { return fq_hz.size(); }
  double at(std::size_t r, std::size_t c) const { return t1_s[r * fq_hz.size() + c]; }
  std::vector<double> column(std::size_t c) const;
};

struct ChartResult {
  SpectrotemporalChart chart;
  std::vector<FrequencyTrace> traces;  // one per Q-TLS, in input order
};

/// Canonical digest of the grid and noise settings (threads excluded).
std::string dynamics_digest(const DynamicsParams& params);

/// RTS of T-TLS l of Q-TLS q uses stream.substream(0).substream(q.id).substream(l);
/// the noise of cell (r, c) uses stream.substream(1).substream(r * N_f + c).
ChartResult simulate_chart(const std::vector<QTlsRecord>& qtls, const DynamicsParams& params,
                           const RandomStream& stream);

/// Chart for a generated ensemble, streams keyed by (ensemble.seed, 1).
SpectrotemporalChart compute_chart(const Ensemble& ensemble, const DynamicsParams& params);

struct ScenarioTtls {
  double rate_hz = 0.0;
  double shift_hz = 0.0;
};

struct ScenarioQtls {
  double frequency_hz = 0.0;
  double coupling_hz = 0.0;
  double decay_rate_hz = 0.0;
  std::vector<ScenarioTtls> ttls;
};

struct ScenarioSpec {
  std::vector<ScenarioQtls> qtls;
};

/// Line format (units in the key suffix, '#' starts a comment):
///   qtls f_ghz=4.5011 g_mhz=0.04 gamma1_mhz=15
///   ttls gamma_uhz=100 df_mhz=0.6
/// Each ttls line belongs to the preceding qtls line. ConfigError on bad input.
ScenarioSpec parse_scenario(const std::string& text);
ScenarioSpec load_scenario(const std::filesystem::path& path);
std::string scenario_digest(const ScenarioSpec& spec);

std::vector<QTlsRecord> scenario_records(const ScenarioSpec& spec);

ChartResult run_scenario(const ScenarioSpec& spec, const DynamicsParams& params, std::uint64_t seed);

/// First line a '#' comment with seed and digests, then the f_q axis row
/// (leading corner cell), then one row per time: t, T1 ...
std::string chart_to_text(const SpectrotemporalChart& chart);
SpectrotemporalChart chart_from_text(const std::string& text);
std::string chart_metadata_json(const SpectrotemporalChart& chart);
void save_chart(const std::filesystem::path& path, const SpectrotemporalChart& chart);
SpectrotemporalChart load_chart(const std::filesystem::path& path);

std::string traces_to_text(const std::vector<FrequencyTrace>& traces, const ChartMetadata& meta);

}  // namespace tlsfluct
