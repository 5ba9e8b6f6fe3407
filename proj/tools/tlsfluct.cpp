// Command-line front end: generate -> simulate -> analyze, plus hand-written scenarios.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tlsfluct/analysis.hpp"
#include "tlsfluct/config.hpp"
#include "tlsfluct/dynamics.hpp"
#include "tlsfluct/efield.hpp"
#include "tlsfluct/ensemble.hpp"
#include "tlsfluct/errors.hpp"

namespace fs = std::filesystem;
using namespace tlsfluct;

namespace {

enum ExitCode : int {
  exit_ok = 0,
  exit_unexpected = 1,
  exit_config = 2,
  exit_io = 3,
  exit_numerical = 4,
  exit_generation = 5,
  exit_schema = 6,
  exit_fit = 7,
  exit_domain = 8,
};

int exit_code_for(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return exit_config;
    case ErrorCategory::io: return exit_io;
    case ErrorCategory::numerical:
    case ErrorCategory::singular_point: return exit_numerical;
    case ErrorCategory::generation: return exit_generation;
    case ErrorCategory::schema:
    case ErrorCategory::shape: return exit_schema;
    case ErrorCategory::fit:
    case ErrorCategory::insufficient_data: return exit_fit;
    case ErrorCategory::domain: return exit_domain;
  }
  return exit_unexpected;
}

struct CommonOptions {
  std::string preset;
  std::string config_file;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::vector<std::string> settings;  // key=value
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--preset", o.preset, "dataset1 | dataset2 | dataset3 | custom");
  cmd->add_option("--config", o.config_file, "flat key=value settings file")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&o](std::uint64_t s) { o.seed = s, o.seed_given = true; }, "64-bit master seed");
  cmd->add_option("settings", o.settings, "key=value overrides (see README for keys)");
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot open " + p.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + p.string());
}

// preset < config file < command line.
RunConfig resolve(const CommonOptions& o) {
  std::vector<std::pair<std::string, std::string>> file_settings;
  std::string preset = "dataset2";
  if (!o.config_file.empty()) {
    for (auto& kv : parse_settings(read_text(o.config_file))) {
      if (kv.first == "preset") {
        preset = kv.second;
      } else {
        file_settings.push_back(std::move(kv));
      }
    }
  }
  if (!o.preset.empty()) preset = o.preset;
  RunConfig cfg = preset_config(preset);
  for (const auto& [k, v] : file_settings) apply_setting(cfg, k, v);
  for (const auto& s : o.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("expected key=value, got '" + s + "'");
    }
    apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (o.seed_given) cfg.ensemble.seed = o.seed;
  cfg.validate();
  return cfg;
}

void annotate(ChartMetadata& meta, const RunConfig& cfg) {
  meta.preset = cfg.preset;
  static const char* grid_keys[] = {"n_f", "fq_min_hz", "fq_max_hz", "dt_s", "t_obs_s"};
  std::string grid;
  std::string all;
  for (const auto& k : cfg.overridden) {
    if (all.find(k + ",") == std::string::npos) all += k + ",";
    if (std::find(std::begin(grid_keys), std::end(grid_keys), k) != std::end(grid_keys) &&
        grid.find(k + ",") == std::string::npos) {
      grid += k + ",";
    }
  }
  if (!all.empty()) meta.notes["overridden_keys"] = all.substr(0, all.size() - 1);
  if (!grid.empty() && cfg.preset != "custom") {
    meta.notes["grid_override"] = "custom grid values replace preset " + cfg.preset + " (" +
                                  grid.substr(0, grid.size() - 1) + ")";
  }
}

fs::path prepare_out(const std::string& dir) {
  fs::path out(dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out.string() + ": " + ec.message());
  return out;
}

// Binary PPM of T1 (rows = time, columns = f_q), dark = short T1.
void render_chart(const fs::path& path, const SpectrotemporalChart& chart) {
  const std::size_t scale_x = std::max<std::size_t>(1, 256 / std::max<std::size_t>(1, chart.cols()));
  const std::size_t w = chart.cols() * scale_x;
  const std::size_t h = chart.rows();
  const auto [lo_it, hi_it] = std::minmax_element(chart.t1_s.begin(), chart.t1_s.end());
  const double lo = *lo_it;
  const double span = std::max(*hi_it - lo, 1e-300);
  std::string data = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t x = 0; x < w; ++x) {
      const double v = (chart.at(r, x / scale_x) - lo) / span;
      data.push_back(static_cast<char>(std::lround(255.0 * v)));
      data.push_back(static_cast<char>(std::lround(255.0 * v * v)));
      data.push_back(static_cast<char>(std::lround(255.0 * (1.0 - v) * 0.6)));
    }
  }
  write_text(path, data);
}

int cmd_generate(const CommonOptions& o) {
  const RunConfig cfg = resolve(o);
  const auto out = prepare_out(o.out_dir);
  const Ensemble e = generate_ensemble(cfg.ensemble);
  save_ensemble(out / "ensemble.json", e);
  std::cout << "generated " << e.qtls.size() << " Q-TLSs from " << e.candidates
            << " candidates -> " << (out / "ensemble.json").string() << "\n";
  return exit_ok;
}

int cmd_simulate(const CommonOptions& o, const std::string& ensemble_file, bool render) {
  const RunConfig cfg = resolve(o);
  const auto out = prepare_out(o.out_dir);
  Ensemble e;
  if (!ensemble_file.empty()) {
    e = load_ensemble(ensemble_file);
  } else {
    e = generate_ensemble(cfg.ensemble);
    save_ensemble(out / "ensemble.json", e);
  }
  SpectrotemporalChart chart = compute_chart(e, cfg.dynamics());
  annotate(chart.metadata, cfg);
  save_chart(out / "chart.txt", chart);
  if (render) render_chart(out / "chart.ppm", chart);
  std::cout << "chart " << chart.rows() << "x" << chart.cols() << " from " << e.qtls.size()
            << " Q-TLSs -> " << (out / "chart.txt").string() << "\n";
  return exit_ok;
}

int cmd_scenario(const CommonOptions& o, const std::string& scenario_file, bool render) {
  const RunConfig cfg = resolve(o);
  const auto out = prepare_out(o.out_dir);
  const ScenarioSpec spec = load_scenario(scenario_file);
  ChartResult result = run_scenario(spec, cfg.dynamics(), cfg.ensemble.seed);
  annotate(result.chart.metadata, cfg);
  result.chart.metadata.notes["scenario"] = fs::path(scenario_file).filename().string();
  save_chart(out / "chart.txt", result.chart);
  write_text(out / "traces.txt", traces_to_text(result.traces, result.chart.metadata));
  if (render) render_chart(out / "chart.ppm", result.chart);
  std::cout << "scenario chart " << result.chart.rows() << "x" << result.chart.cols() << " -> "
            << (out / "chart.txt").string() << "\n";
  return exit_ok;
}

int cmd_analyze(const CommonOptions& o, const std::string& input, std::size_t column) {
  const RunConfig cfg = resolve(o);
  const auto out = prepare_out(o.out_dir);
  const std::string text = read_text(input);
  std::map<std::string, std::string> header;
  header["source"] = fs::path(input).filename().string();
  TimeSeries ts;
  if (text.rfind("# tlsfluct chart", 0) == 0) {
    const SpectrotemporalChart chart = chart_from_text(text);
    ts.values = chart.column(column);
    ts.dt_s = chart.metadata.dt_s > 0.0 ? chart.metadata.dt_s : cfg.dt_s;
    header["column"] = std::to_string(column);
    header["fq_hz"] = std::to_string(chart.fq_hz[column]);
    header["seed"] = std::to_string(chart.metadata.seed);
    header["config_digest"] = chart.metadata.config_digest;
    header["dynamics_digest"] = chart.metadata.dynamics_digest;
  } else {
    ts = parse_series(text, cfg.series_dt_s > 0.0 ? cfg.series_dt_s : cfg.dt_s);
  }
  header["dt_s"] = std::to_string(ts.dt_s);
  const AnalysisReport report = analyze_series(ts, cfg.segment_s, cfg.overlap);
  write_text(out / "report.txt", report_to_text(report, header));
  if (report.allan_fit) {
    std::cout << "allan fit: 1/tau0 = " << 1.0 / report.allan_fit->tau0 << " Hz\n";
  } else {
    std::cout << "allan fit failed: " << report.allan_fit_error << "\n";
  }
  if (!report.psd_fit) std::cout << "psd fit failed: " << report.psd_fit_error << "\n";
  std::cout << "report -> " << (out / "report.txt").string() << "\n";
  return exit_ok;
}

int cmd_field(const CommonOptions& o, double z_nm) {
  const RunConfig cfg = resolve(o);
  const auto out = prepare_out(o.out_dir);
  const CpwField field(cfg.ensemble.geometry);
  const double phi0 = cfg.ensemble.qubit.zero_point_voltage();
  const double half = cfg.ensemble.geometry.sample_half_span_um();
  std::string text = "# x_um\t|E|_V_per_m (z = " + std::to_string(z_nm) + " nm, phi0 = " +
                     std::to_string(phi0) + " V)\n";
  const int n = 4801;
  for (int i = 0; i < n; ++i) {
    const double x = -half + 2.0 * half * i / (n - 1);
    char line[64];
    std::snprintf(line, sizeof line, "%.6f\t%.9g\n", x, field.magnitude(x, z_nm, phi0));
    text += line;
  }
  write_text(out / "field_profile.txt", text);
  std::cout << "field profile -> " << (out / "field_profile.txt").string() << "\n";
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral-diffusion simulator for qubit T1 fluctuations caused by TLS defects"};
  app.require_subcommand(1);

  CommonOptions gen_opts, sim_opts, scen_opts, an_opts, field_opts;
  std::string ensemble_file, scenario_file, input_file;
  bool render_sim = false, render_scen = false;
  std::size_t column = 0;
  double z_nm = 1.5;

  auto* gen = app.add_subcommand("generate", "draw a Q-TLS/T-TLS ensemble");
  add_common(gen, gen_opts);

  auto* sim = app.add_subcommand("simulate", "spectrotemporal T1 chart from an ensemble");
  add_common(sim, sim_opts);
  sim->add_option("--ensemble", ensemble_file, "existing ensemble.json (otherwise generated)")
      ->check(CLI::ExistingFile);
  sim->add_flag("--render", render_sim, "also write chart.ppm");

  auto* scen = app.add_subcommand("scenario", "chart and frequency traces from a scenario file");
  add_common(scen, scen_opts);
  scen->add_option("--scenario", scenario_file, "scenario file")->required()->check(CLI::ExistingFile);
  scen->add_flag("--render", render_scen, "also write chart.ppm");

  auto* an = app.add_subcommand("analyze", "Allan deviation, Welch PSD and Lorentzian fits");
  add_common(an, an_opts);
  an->add_option("--input", input_file, "chart.txt or one-value-per-line series")
      ->required()
      ->check(CLI::ExistingFile);
  an->add_option("--column", column, "chart column (qubit frequency index)");

  auto* fld = app.add_subcommand("field", "dump |E(x)| at fixed height for the CPW geometry");
  add_common(fld, field_opts);
  fld->add_option("--z-nm", z_nm, "height above the metal plane in nm");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_config;
  }

  try {
    if (*gen) return cmd_generate(gen_opts);
    if (*sim) return cmd_simulate(sim_opts, ensemble_file, render_sim);
    if (*scen) return cmd_scenario(scen_opts, scenario_file, render_scen);
    if (*an) return cmd_analyze(an_opts, input_file, column);
    if (*fld) return cmd_field(field_opts, z_nm);
  } catch (const Error& e) {
    std::cerr << "error [" << category_name(e.category()) << "]: " << e.what() << "\n";
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_unexpected;
  }
  return exit_unexpected;
}
