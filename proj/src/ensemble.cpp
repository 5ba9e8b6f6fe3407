#include "tlsfluct/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "tlsfluct/digest.hpp"
#include "tlsfluct/errors.hpp"
#include "tlsfluct/parallel.hpp"

namespace tlsfluct {

namespace {

using json = nlohmann::json;

constexpr const char* kSchemaName = "tlsfluct.ensemble";
constexpr int kSchemaVersion = 1;
constexpr int kMaxPositionDraws = 1000;

#define TLSFLUCT_FIELD(key, member)                                      \
  EnsembleField {                                                        \
    key, false, [](const EnsembleConfig& c) -> double { return c.member; }, \
        [](EnsembleConfig& c, double v) { c.member = v; }                \
  }

#define TLSFLUCT_INT_FIELD(key, member, type)                                              \
  EnsembleField {                                                                          \
    key, true, [](const EnsembleConfig& c) -> double { return static_cast<double>(c.member); }, \
        [](EnsembleConfig& c, double v) { c.member = static_cast<type>(v); }               \
  }

std::vector<EnsembleField> make_fields() {
  std::vector<EnsembleField> fields{
      TLSFLUCT_FIELD("activation_fraction", activation_fraction),
      TLSFLUCT_FIELD("attempt_frequency_hz", material.attempt_frequency_hz),
      TLSFLUCT_FIELD("charging_hz", qubit.charging_hz),
      TLSFLUCT_FIELD("coupling_cutoff_hz", coupling_cutoff_hz),
      TLSFLUCT_FIELD("dipole_max_debye", dipole_max_debye),
      TLSFLUCT_FIELD("dipole_min_debye", dipole_min_debye),
      TLSFLUCT_FIELD("edge_exclusion_nm", edge_exclusion_nm),
      TLSFLUCT_FIELD("gap_width_um", geometry.gap_width_um),
      TLSFLUCT_FIELD("ground_margin_um", geometry.ground_margin_um),
      TLSFLUCT_FIELD("gtm_e_max_hz", gtm_e_max_hz),
      TLSFLUCT_FIELD("gtm_e_min_hz", gtm_e_min_hz),
      TLSFLUCT_FIELD("gtm_mu", gtm_mu),
      TLSFLUCT_FIELD("interaction_constant_k_nm3", material.interaction_constant_k_nm3),
      TLSFLUCT_FIELD("interaction_volume_um3", interaction_volume_um3),
      TLSFLUCT_FIELD("josephson_hz", qubit.josephson_hz),
      TLSFLUCT_INT_FIELD("max_ttls_attempts", max_ttls_attempts, std::uint64_t),
      TLSFLUCT_FIELD("oxide_thickness_nm", geometry.oxide_thickness_nm),
      TLSFLUCT_FIELD("qtls_band_min_hz", qtls_band_min_hz),
      TLSFLUCT_FIELD("qtls_bandwidth_hz", qtls_bandwidth_hz),
      TLSFLUCT_FIELD("qtls_density_per_ghz_um3", qtls_density_per_ghz_um3),
      TLSFLUCT_FIELD("qtls_rate_max_hz", qtls_rate_max_hz),
      TLSFLUCT_FIELD("qtls_rate_min_hz", qtls_rate_min_hz),
      TLSFLUCT_FIELD("qubit_capacitance_f", qubit.capacitance_f),
      TLSFLUCT_FIELD("radius_max_nm", radius_max_nm),
      TLSFLUCT_FIELD("radius_min_nm", radius_min_nm),
      TLSFLUCT_FIELD("rate_prefactor_hz", material.rate_prefactor_hz),
      TLSFLUCT_FIELD("segment_length_um", geometry.segment_length_um),
      TLSFLUCT_FIELD("strip_width_um", geometry.strip_width_um),
      TLSFLUCT_FIELD("temperature_k", material.temperature_k),
      TLSFLUCT_INT_FIELD("ttls_per_qtls", ttls_per_qtls, int),
      EnsembleField{"tunneling_mass_amu", false,
                    [](const EnsembleConfig& c) -> double {
                      return c.material.tunneling_mass_kg / constants::atomic_mass_unit;
                    },
                    [](EnsembleConfig& c, double v) {
                      c.material.tunneling_mass_kg = v * constants::atomic_mass_unit;
                    }},
      TLSFLUCT_FIELD("well_separation_m", material.well_separation_m),
  };
  std::sort(fields.begin(), fields.end(), [](const auto& l, const auto& r) {
    return std::string_view(l.key) < std::string_view(r.key);
  });
  return fields;
}

#undef TLSFLUCT_FIELD
#undef TLSFLUCT_INT_FIELD

void require_config(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid ensemble config: " + what);
}

json ttls_to_json(const TTlsRecord& t) {
  json j;
  j["asymmetry_hz"] = t.asymmetry_hz;
  j["distance_nm"] = t.distance_nm;
  j["energy_hz"] = t.energy_hz;
  j["interaction_hz"] = t.interaction_hz;
  j["shift_hz"] = t.shift_hz;
  j["switching_rate_hz"] = t.switching_rate_hz;
  j["tunneling_hz"] = t.tunneling_hz;
  return j;
}

json qtls_to_json(const QTlsRecord& q) {
  json j;
  j["id"] = q.id;
  j["frequency_hz"] = q.frequency_hz;
  j["coupling_hz"] = q.coupling_hz;
  j["decay_rate_hz"] = q.decay_rate_hz;
  j["x_um"] = q.position.x_um;
  j["z_nm"] = q.position.z_nm;
  j["interface"] = interface_name(q.position.interface);
  j["dipole_debye"] = q.dipole_debye;
  j["tunneling_hz"] = q.tunneling_hz;
  j["ttls"] = json::array();
  for (const auto& t : q.ttls) j["ttls"].push_back(ttls_to_json(t));
  return j;
}

Interface parse_interface(const std::string& name) {
  if (name == "SA") return Interface::substrate_air;
  if (name == "MA") return Interface::metal_air;
  throw SchemaError("unknown interface tag '" + name + "'");
}

}  // namespace

const char* interface_name(Interface i) noexcept {
  return i == Interface::metal_air ? "MA" : "SA";
}

const std::vector<EnsembleField>& ensemble_fields() {
  static const std::vector<EnsembleField> fields = make_fields();
  return fields;
}

void EnsembleConfig::validate() const {
  require_config(qtls_density_per_ghz_um3 >= 0.0, "qtls_density_per_ghz_um3 must be >= 0");
  require_config(qtls_bandwidth_hz > 0.0, "qtls_bandwidth_hz must be > 0");
  require_config(qtls_band_min_hz > 0.0, "qtls_band_min_hz must be > 0");
  require_config(interaction_volume_um3 > 0.0, "interaction_volume_um3 must be > 0");
  require_config(coupling_cutoff_hz >= 0.0, "coupling_cutoff_hz must be >= 0");
  require_config(ttls_per_qtls >= 0, "ttls_per_qtls must be >= 0");
  require_config(gtm_mu > 0.0 && gtm_mu < 1.0, "gtm_mu must lie in (0, 1)");
  require_config(gtm_e_min_hz > 0.0 && gtm_e_min_hz < gtm_e_max_hz,
                 "need 0 < gtm_e_min_hz < gtm_e_max_hz");
  require_config(gtm_e_max_hz <= material.attempt_frequency_hz,
                 "gtm_e_max_hz must not exceed attempt_frequency_hz (negative barrier)");
  require_config(activation_fraction > 0.0, "activation_fraction must be > 0");
  require_config(max_ttls_attempts > 0, "max_ttls_attempts must be > 0");
  require_config(dipole_min_debye > 0.0 && dipole_min_debye < dipole_max_debye,
                 "need 0 < dipole_min_debye < dipole_max_debye");
  require_config(radius_min_nm > 0.0 && radius_min_nm < radius_max_nm,
                 "need 0 < radius_min_nm < radius_max_nm");
  require_config(qtls_rate_min_hz > 0.0 && qtls_rate_min_hz < qtls_rate_max_hz,
                 "need 0 < qtls_rate_min_hz < qtls_rate_max_hz");
  require_config(edge_exclusion_nm >= 0.0, "edge_exclusion_nm must be >= 0");
  try {
    material.validate();
    geometry.validate();
    (void)qubit.zero_point_voltage();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid ensemble config: ") + e.what());
  }
}

double EnsembleConfig::expected_candidates() const {
  return qtls_density_per_ghz_um3 * interaction_volume_um3 * qtls_bandwidth_hz * 1e-9;
}

std::string config_digest(const EnsembleConfig& config) {
  std::string text;
  for (const auto& f : ensemble_fields()) {
    text += f.key;
    text += '=';
    text += format_double(f.get(config));
    text += '\n';
  }
  return fnv1a_hex(text);
}

namespace {

std::vector<QTlsRecord> generate_qtls_impl(const EnsembleConfig& config, const CpwField& field,
                                           const RandomStream& stream,
                                           std::uint64_t* candidates_out) {
  config.validate();
  RandomStream count_stream = stream.substream(0);
  const std::uint64_t candidates = sample_poisson(config.expected_candidates(), count_stream);
  if (candidates_out != nullptr) *candidates_out = candidates;
  if (candidates == 0) return {};

  const RandomStream property_root = stream.substream(1);
  const ProbabilityLaw dipoles = dipole_law(config.dipole_min_debye, config.dipole_max_debye);
  const double phi0 = config.qubit.zero_point_voltage();
  const double half_span = config.geometry.sample_half_span_um();
  const double thickness = config.geometry.oxide_thickness_nm;
  const double rate_ratio = config.qtls_rate_min_hz / config.qtls_rate_max_hz;

  std::vector<std::optional<QTlsRecord>> drawn(candidates);
  parallel_for(candidates, config.threads, [&](std::size_t i) {
    RandomStream s = property_root.substream(i);
    QTlsRecord q;
    q.id = i;
    q.frequency_hz = config.qtls_band_min_hz + config.qtls_bandwidth_hz * s.uniform();

    double x = 0.0;
    double z = 0.0;
    int draws = 0;
    do {
      if (++draws > kMaxPositionDraws) {
        throw GenerationError("could not place a Q-TLS away from the conductor edges");
      }
      x = -half_span + 2.0 * half_span * s.uniform();
      z = thickness * s.uniform_positive();
    } while (field.edge_distance_nm(x, z) < config.edge_exclusion_nm);
    q.position = {x, z, field.over_metal(x) ? Interface::metal_air : Interface::substrate_air};

    const double u_dipole = s.uniform();
    const double u_tunneling = s.uniform();
    const double e_mag = field.magnitude(x, z, phi0);
    // g is monotone in p, so a candidate that fails even at p_max is dropped
    // without inverting the dipole CDF.
    if (coupling_strength(config.dipole_max_debye, e_mag) < config.coupling_cutoff_hz) return;
    q.dipole_debye = sample_dipole(dipoles, u_dipole);
    q.coupling_hz = coupling_strength(q.dipole_debye, e_mag);
    if (q.coupling_hz < config.coupling_cutoff_hz) return;

    // Delta_0 log-uniform over [f sqrt(rate_min/rate_max), f]; Gamma_1 ~ Delta_0^2.
    q.tunneling_hz = q.frequency_hz * std::pow(rate_ratio, 0.5 * (1.0 - u_tunneling));
    const double ratio = q.tunneling_hz / q.frequency_hz;
    q.decay_rate_hz = config.qtls_rate_max_hz * ratio * ratio;
    drawn[i] = std::move(q);
  });

  std::vector<QTlsRecord> kept;
  for (auto& q : drawn) {
    if (q) kept.push_back(std::move(*q));
  }
  return kept;
}

}  // namespace

std::vector<QTlsRecord> generate_qtls_ensemble(const EnsembleConfig& config, const CpwField& field,
                                               const RandomStream& stream) {
  return generate_qtls_impl(config, field, stream, nullptr);
}

std::vector<TTlsRecord> generate_ttls_set(const QTlsRecord& qtls, const EnsembleConfig& config,
                                          RandomStream stream) {
  const auto target = static_cast<std::size_t>(config.ttls_per_qtls);
  const double threshold = config.activation_fraction * config.material.thermal_frequency_hz();
  std::vector<TTlsRecord> out;
  out.reserve(target);
  std::uint64_t attempts = 0;
  while (out.size() < target) {
    if (attempts >= config.max_ttls_attempts) {
      std::ostringstream msg;
      msg << "T-TLS rejection sampling gave up after " << attempts << " attempts (acceptance "
          << static_cast<double>(out.size()) / static_cast<double>(attempts) << ", Q-TLS id "
          << qtls.id << ")";
      throw GenerationError(msg.str());
    }
    ++attempts;
    const double u1 = stream.uniform();
    const double u2 = stream.uniform();
    const double u3 = stream.uniform();
    const auto pair = sample_gtm_pair(config.gtm_mu, config.gtm_e_min_hz, config.gtm_e_max_hz, u1, u2);
    const double r = sample_radius(config.radius_min_nm, config.radius_max_nm, u3);
    const double energy = tls_energy(pair.asymmetry, pair.tunneling);
    const double u = interaction_energy(r, config.material.interaction_constant_k_nm3);
    if (!(activation_energy(energy, pair.asymmetry, u) < threshold)) continue;

    TTlsRecord t;
    t.asymmetry_hz = pair.asymmetry;
    t.tunneling_hz = pair.tunneling;
    t.energy_hz = energy;
    t.distance_nm = r;
    t.interaction_hz = u;
    t.shift_hz = qtls_frequency_shift(qtls.frequency_hz, energy, pair.asymmetry, u).minus_hz;
    t.switching_rate_hz =
        switching_rate(barrier_from_tunneling(pair.tunneling, config.material), config.material);
    out.push_back(t);
  }
  return out;
}

Ensemble generate_ensemble(const EnsembleConfig& config) {
  config.validate();
  const CpwField field(config.geometry);
  const RandomStream root(config.seed, 0);

  Ensemble ensemble;
  ensemble.seed = config.seed;
  ensemble.config_digest = config_digest(config);
  ensemble.qtls = generate_qtls_impl(config, field, root.substream(1), &ensemble.candidates);

  const RandomStream ttls_root = root.substream(2);
  parallel_for(ensemble.qtls.size(), config.threads, [&](std::size_t k) {
    auto& q = ensemble.qtls[k];
    q.ttls = generate_ttls_set(q, config, ttls_root.substream(q.id));
  });
  return ensemble;
}

double ttls_interaction_volume_um3(double r_max_nm, double oxide_thickness_nm) {
  if (!(r_max_nm > 0.0 && oxide_thickness_nm > 0.0)) {
    throw DomainError("interaction volume needs positive radius and thickness");
  }
  const double r = r_max_nm * 1e-3;
  return constants::pi * r * r * oxide_thickness_nm * 1e-3;
}

double ttls_density(double count, double r_max_nm, double oxide_thickness_nm, double e_min_hz,
                    double e_max_hz) {
  if (!(count > 0.0 && e_max_hz > e_min_hz && e_min_hz > 0.0)) {
    throw DomainError("density needs a positive count and E_max > E_min > 0");
  }
  const double bandwidth_ghz = (e_max_hz - e_min_hz) * 1e-9;
  return count / (ttls_interaction_volume_um3(r_max_nm, oxide_thickness_nm) * bandwidth_ghz);
}

std::string ensemble_to_text(const Ensemble& ensemble) {
  json j;
  j["schema"] = kSchemaName;
  j["version"] = kSchemaVersion;
  j["seed"] = ensemble.seed;
  j["config_digest"] = ensemble.config_digest;
  j["candidates"] = ensemble.candidates;
  j["units"] = {{"frequency", "Hz"},        {"rate", "1/s"},     {"x", "um"}, {"z", "nm"},
                {"dipole", "debye"},         {"distance", "nm"}};
  j["qtls"] = json::array();
  for (const auto& q : ensemble.qtls) j["qtls"].push_back(qtls_to_json(q));
  return j.dump(1) + "\n";
}

Ensemble ensemble_from_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("ensemble file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("schema").get<std::string>() != kSchemaName) {
      throw SchemaError("not an ensemble file (schema '" + j.at("schema").get<std::string>() + "')");
    }
    const int version = j.at("version").get<int>();
    if (version != kSchemaVersion) {
      throw SchemaError("unsupported ensemble schema version " + std::to_string(version));
    }
    Ensemble e;
    e.seed = j.at("seed").get<std::uint64_t>();
    e.config_digest = j.at("config_digest").get<std::string>();
    e.candidates = j.at("candidates").get<std::uint64_t>();
    for (const auto& jq : j.at("qtls")) {
      QTlsRecord q;
      q.id = jq.at("id").get<std::uint64_t>();
      q.frequency_hz = jq.at("frequency_hz").get<double>();
      q.coupling_hz = jq.at("coupling_hz").get<double>();
      q.decay_rate_hz = jq.at("decay_rate_hz").get<double>();
      q.position.x_um = jq.at("x_um").get<double>();
      q.position.z_nm = jq.at("z_nm").get<double>();
      q.position.interface = parse_interface(jq.at("interface").get<std::string>());
      q.dipole_debye = jq.at("dipole_debye").get<double>();
      q.tunneling_hz = jq.at("tunneling_hz").get<double>();
      for (const auto& jt : jq.at("ttls")) {
        TTlsRecord t;
        t.asymmetry_hz = jt.at("asymmetry_hz").get<double>();
        t.distance_nm = jt.at("distance_nm").get<double>();
        t.energy_hz = jt.at("energy_hz").get<double>();
        t.interaction_hz = jt.at("interaction_hz").get<double>();
        t.shift_hz = jt.at("shift_hz").get<double>();
        t.switching_rate_hz = jt.at("switching_rate_hz").get<double>();
        t.tunneling_hz = jt.at("tunneling_hz").get<double>();
        q.ttls.push_back(t);
      }
      e.qtls.push_back(std::move(q));
    }
    return e;
  } catch (const json::exception& ex) {
    throw SchemaError(std::string("malformed ensemble file: ") + ex.what());
  }
}

void save_ensemble(const std::filesystem::path& path, const Ensemble& ensemble) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << ensemble_to_text(ensemble);
  if (!out) throw IoError("failed writing " + path.string());
}

Ensemble load_ensemble(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ensemble_from_text(buf.str());
}

}  // namespace tlsfluct
