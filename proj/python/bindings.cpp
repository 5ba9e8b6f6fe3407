// pybind11 front end for the core library. Arrays cross as numpy float64.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tlsfluct/analysis.hpp"
#include "tlsfluct/dynamics.hpp"
#include "tlsfluct/efield.hpp"
#include "tlsfluct/ensemble.hpp"
#include "tlsfluct/errors.hpp"
#include "tlsfluct/tls_physics.hpp"

namespace py = pybind11;
using namespace tlsfluct;

namespace {

py::array_t<double> to_numpy(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

std::vector<double> from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  return {a.data(), a.data() + a.size()};
}

EnsembleConfig make_config(std::uint64_t seed, unsigned threads, const py::dict& overrides) {
  EnsembleConfig c;
  c.seed = seed;
  c.threads = threads;
  const auto& fields = ensemble_fields();
  for (const auto& [k, v] : overrides) {
    const auto key = py::cast<std::string>(k);
    const auto it = std::find_if(fields.begin(), fields.end(), [&](const EnsembleField& f) { return key == f.key; });
    if (it == fields.end()) throw ConfigError("unknown ensemble setting '" + key + "'");
    it->set(c, py::cast<double>(v));
  }
  c.validate();
  return c;
}

py::dict config_dict(const EnsembleConfig& c) {
  py::dict d;
  for (const auto& f : ensemble_fields()) d[f.key] = f.get(c);
  return d;
}

DynamicsParams dynamics_for(const std::string& preset, const py::object& fq_hz, unsigned threads,
                            const py::object& noise_sigma_hz) {
  DynamicsParams p = dataset_preset(preset).params();
  if (!fq_hz.is_none()) p.fq_hz = from_numpy(py::cast<py::array_t<double>>(fq_hz));
  if (!noise_sigma_hz.is_none()) p.noise_sigma_hz = py::cast<double>(noise_sigma_hz);
  p.threads = threads;
  return p;
}

py::dict chart_dict(const SpectrotemporalChart& chart) {
  py::dict d;
  py::array_t<double> t1({chart.rows(), chart.cols()});
  std::copy(chart.t1_s.begin(), chart.t1_s.end(), t1.mutable_data());
  d["time_s"] = to_numpy(chart.time_s);
  d["fq_hz"] = to_numpy(chart.fq_hz);
  d["t1_s"] = t1;
  d["seed"] = chart.metadata.seed;
  d["config_digest"] = chart.metadata.config_digest;
  d["dynamics_digest"] = chart.metadata.dynamics_digest;
  d["clamped_cells"] = chart.metadata.clamped_cells;
  d["text"] = chart_to_text(chart);
  return d;
}

py::dict fit_dict(const LorentzianFit& f) {
  py::dict d;
  d["a0"] = f.a0;
  d["h0"] = f.h0;
  d["tau0"] = f.tau0;
  d["a0_se"] = f.a0_se;
  d["h0_se"] = f.h0_se;
  d["tau0_se"] = f.tau0_se;
  d["residual_norm"] = f.residual_norm;
  d["iterations"] = f.iterations;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral-diffusion simulator for qubit T1 fluctuations caused by TLS defects";

  // later registrations are tried first, so the base class goes first
  const auto base = py::register_exception<Error>(m, "TlsfluctError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<DomainError>(m, "DomainError", base);
  py::register_exception<FitError>(m, "FitError", base);
  py::register_exception<InsufficientDataError>(m, "InsufficientDataError", base);
  py::register_exception<GenerationError>(m, "GenerationError", base);

  py::class_<TTlsRecord>(m, "TTls")
      .def_readonly("shift_hz", &TTlsRecord::shift_hz)
      .def_readonly("switching_rate_hz", &TTlsRecord::switching_rate_hz)
      .def_readonly("asymmetry_hz", &TTlsRecord::asymmetry_hz)
      .def_readonly("tunneling_hz", &TTlsRecord::tunneling_hz)
      .def_readonly("energy_hz", &TTlsRecord::energy_hz)
      .def_readonly("distance_nm", &TTlsRecord::distance_nm)
      .def_readonly("interaction_hz", &TTlsRecord::interaction_hz);

  py::class_<QTlsRecord>(m, "QTls")
      .def_readonly("id", &QTlsRecord::id)
      .def_readonly("frequency_hz", &QTlsRecord::frequency_hz)
      .def_readonly("coupling_hz", &QTlsRecord::coupling_hz)
      .def_readonly("decay_rate_hz", &QTlsRecord::decay_rate_hz)
      .def_property_readonly("x_um", [](const QTlsRecord& q) { return q.position.x_um; })
      .def_property_readonly("z_nm", [](const QTlsRecord& q) { return q.position.z_nm; })
      .def_property_readonly("interface", [](const QTlsRecord& q) { return interface_name(q.position.interface); })
      .def_readonly("dipole_debye", &QTlsRecord::dipole_debye)
      .def_readonly("tunneling_hz", &QTlsRecord::tunneling_hz)
      .def_readonly("ttls", &QTlsRecord::ttls);

  py::class_<Ensemble>(m, "Ensemble")
      .def_readonly("seed", &Ensemble::seed)
      .def_readonly("config_digest", &Ensemble::config_digest)
      .def_readonly("candidates", &Ensemble::candidates)
      .def_readonly("qtls", &Ensemble::qtls)
      .def("to_json", &ensemble_to_text)
      .def_static("from_json", &ensemble_from_text);

  m.def("default_ensemble_config", [] { return config_dict(EnsembleConfig{}); },
        "Default value of every ensemble setting.");
  m.def(
      "generate_ensemble",
      [](std::uint64_t seed, unsigned threads, const py::kwargs& overrides) {
        const auto cfg = make_config(seed, threads, overrides);
        py::gil_scoped_release release;
        return generate_ensemble(cfg);
      },
      py::arg("seed") = 1, py::arg("threads") = 0,
      "Q-TLS/T-TLS ensemble; keyword arguments override ensemble settings by name.");

  m.def(
      "compute_chart",
      [](const Ensemble& e, const std::string& preset, const py::object& fq_hz, unsigned threads,
         const py::object& noise_sigma_hz) {
        const auto p = dynamics_for(preset, fq_hz, threads, noise_sigma_hz);
        return chart_dict(compute_chart(e, p));
      },
      py::arg("ensemble"), py::arg("preset") = "dataset2", py::arg("fq_hz") = py::none(), py::arg("threads") = 0,
      py::arg("noise_sigma_hz") = py::none());

  m.def(
      "run_scenario",
      [](const std::string& text, std::uint64_t seed, const std::string& preset, const py::object& fq_hz,
         const py::object& noise_sigma_hz) {
        const auto p = dynamics_for(preset, fq_hz, 0, noise_sigma_hz);
        const auto r = run_scenario(parse_scenario(text), p, seed);
        py::dict d = chart_dict(r.chart);
        py::list traces;
        for (const auto& t : r.traces) traces.append(to_numpy(t.frequency_hz));
        d["traces_hz"] = traces;
        return d;
      },
      py::arg("scenario"), py::arg("seed") = 1, py::arg("preset") = "dataset2", py::arg("fq_hz") = py::none(),
      py::arg("noise_sigma_hz") = py::none(), "Chart and Q-TLS frequency traces for a scenario text.");

  m.def("preset_frequencies", [](const std::string& name) { return to_numpy(dataset_preset(name).params().fq_hz); });

  m.def(
      "rts",
      [](double rate_hz, double dt_s, double t_obs_s, std::uint64_t seed, std::uint64_t stream) {
        const auto t = generate_rts(rate_hz, dt_s, t_obs_s, RandomStream(seed, stream));
        py::array_t<std::int8_t> a(t.states.size(), t.states.data());
        return a;
      },
      py::arg("rate_hz"), py::arg("dt_s"), py::arg("t_obs_s"), py::arg("seed") = 1, py::arg("stream") = 0);

  m.def(
      "allan_deviation",
      [](const py::array_t<double>& values, double dt_s, const py::object& taus) {
        const TimeSeries ts{from_numpy(values), dt_s};
        const auto c = taus.is_none() ? allan_deviation(ts) : [&] {
          const auto t = from_numpy(py::cast<py::array_t<double>>(taus));
          return allan_deviation(ts, t);
        }();
        return py::make_tuple(to_numpy(c.taus), to_numpy(c.sigma));
      },
      py::arg("values"), py::arg("dt_s"), py::arg("taus") = py::none(), "Overlapping Allan deviation (taus, sigma).");

  m.def(
      "welch_psd",
      [](const py::array_t<double>& values, double dt_s, double segment_s, double overlap) {
        const auto s = welch_psd(TimeSeries{from_numpy(values), dt_s}, segment_s, overlap);
        return py::make_tuple(to_numpy(s.freqs), to_numpy(s.psd));
      },
      py::arg("values"), py::arg("dt_s"), py::arg("segment_s") = 25.0 * 3600.0, py::arg("overlap") = 0.5);

  m.def(
      "fit_allan",
      [](const py::array_t<double>& taus, const py::array_t<double>& sigma) {
        AllanCurve c;
        c.taus = from_numpy(taus);
        c.sigma = from_numpy(sigma);
        return fit_dict(fit_allan_model(c));
      },
      py::arg("taus"), py::arg("sigma"));
  m.def(
      "fit_psd",
      [](const py::array_t<double>& freqs, const py::array_t<double>& psd) {
        Spectrum s;
        s.freqs = from_numpy(freqs);
        s.psd = from_numpy(psd);
        return fit_dict(fit_psd_model(s));
      },
      py::arg("freqs"), py::arg("psd"));
  m.def("allan_model_variance", &allan_model_variance, py::arg("tau"), py::arg("a0"), py::arg("h0"), py::arg("tau0"));
  m.def("psd_model", &psd_model, py::arg("f"), py::arg("a0"), py::arg("h0"), py::arg("tau0"));

  m.def(
      "qubit_qtls_rate",
      [](double detuning_hz, double coupling_hz, double qtls_rate, double bare_rate) {
        return qubit_qtls_rate(detuning_hz, coupling_hz, qtls_rate, bare_rate);
      },
      py::arg("detuning_hz"), py::arg("coupling_hz"), py::arg("qtls_rate"), py::arg("bare_rate") = 1.0 / 27e-6);
  m.def("fitted_envelope_rate", &fitted_envelope_rate, py::arg("detuning_hz"), py::arg("coupling_hz"),
        py::arg("qtls_rate"), py::arg("bare_rate") = 1.0 / 27e-6);
  m.def(
      "barrier_from_tunneling",
      [](double tunneling_hz) { return barrier_from_tunneling(tunneling_hz, MaterialParams{}); },
      py::arg("tunneling_hz"), "Barrier height (Hz) for the default material.");
  m.def(
      "switching_rate", [](double barrier_hz) { return switching_rate(barrier_hz, MaterialParams{}); },
      py::arg("barrier_hz"));
  m.def(
      "field_magnitude",
      [](double x_um, double z_nm, double voltage) { return field_magnitude(x_um, z_nm, CpwGeometry{}, voltage); },
      py::arg("x_um"), py::arg("z_nm"), py::arg("voltage") = 1.0, "|E| in V/m for the default CPW geometry.");
  m.def("ttls_density", &ttls_density, py::arg("count"), py::arg("r_max_nm"), py::arg("oxide_thickness_nm"),
        py::arg("e_min_hz"), py::arg("e_max_hz"));
}
