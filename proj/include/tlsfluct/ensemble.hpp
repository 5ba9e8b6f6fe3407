#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tlsfluct/efield.hpp"
#include "tlsfluct/random.hpp"
#include "tlsfluct/sampling.hpp"
#include "tlsfluct/tls_physics.hpp"

namespace tlsfluct {

enum class Interface { substrate_air, metal_air };

const char* interface_name(Interface i) noexcept;

struct QTlsPosition {
  double x_um = 0.0;
  double z_nm = 0.0;
  Interface interface = Interface::substrate_air;

  bool operator==(const QTlsPosition&) const = default;
};

/// Thermal defect attached to a Q-TLS.
struct TTlsRecord {
  double shift_hz = 0.0;           // delta f^- (the |+> branch is -shift_hz)
  double switching_rate_hz = 0.0;  // gamma
  double asymmetry_hz = 0.0;       // Delta
  double tunneling_hz = 0.0;       // Delta_0
  double energy_hz = 0.0;          // E_T
  double distance_nm = 0.0;        // r
  double interaction_hz = 0.0;     // U

  bool operator==(const TTlsRecord&) const = default;
};

/// High-frequency defect coupled to the qubit.
struct QTlsRecord {
  std::uint64_t id = 0;  // candidate index; keys this defect's random sub-streams
  double frequency_hz = 0.0;
  double coupling_hz = 0.0;
  double decay_rate_hz = 0.0;  // Gamma_1 of the Q-TLS, 1/s
  QTlsPosition position;
  double dipole_debye = 0.0;
  double tunneling_hz = 0.0;
  std::vector<TTlsRecord> ttls;

  bool operator==(const QTlsRecord&) const = default;
};

struct EnsembleConfig {
  double qtls_density_per_ghz_um3 = 200.0;
  double qtls_band_min_hz = 4e9;
  double qtls_bandwidth_hz = 1e9;
  /// Two CPW segments, each 96 um x 3 nm in cross-section and 376 um long.
  double interaction_volume_um3 = 2.0 * 96.0 * 0.003 * 376.0;
  double coupling_cutoff_hz = 70e3;
  int ttls_per_qtls = 10;

  double gtm_mu = 0.3;
  double gtm_e_min_hz = 125e6;
  double gtm_e_max_hz = 1e9;
  /// T-TLS accepted when E0+ - E0- < activation_fraction * k_B T / h.
  double activation_fraction = 0.5;
  std::uint64_t max_ttls_attempts = 1'000'000;

  double dipole_min_debye = 0.1;
  double dipole_max_debye = 6.0;
  double radius_min_nm = 15.0;
  double radius_max_nm = 60.0;
  double qtls_rate_min_hz = 1e6;
  double qtls_rate_max_hz = 1e8;
  double edge_exclusion_nm = 0.1;

  MaterialParams material;
  CpwGeometry geometry;
  QubitElectrical qubit;

  std::uint64_t seed = 1;
  unsigned threads = 0;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
  /// Expected number of raw candidates, D V_int B.
  double expected_candidates() const;
};

struct Ensemble {
  std::uint64_t seed = 0;
  std::string config_digest;
  std::uint64_t candidates = 0;  // raw Poisson draw before the coupling cutoff
  std::vector<QTlsRecord> qtls;

  bool operator==(const Ensemble&) const = default;
};

/// Canonical digest of every field of the config except threads.
std::string config_digest(const EnsembleConfig& config);

/// Step (1): Poisson candidates, position, dipole, coupling and decay rate;
/// keeps defects with g >= cutoff. Records have empty T-TLS sets.
std::vector<QTlsRecord> generate_qtls_ensemble(const EnsembleConfig& config, const CpwField& field,
                                               const RandomStream& stream);

/// Step (2): rejection-samples the interacting T-TLS set of one Q-TLS.
std::vector<TTlsRecord> generate_ttls_set(const QTlsRecord& qtls, const EnsembleConfig& config,
                                          RandomStream stream);

/// Steps (1) and (2) with the sub-stream layout keyed by config.seed.
Ensemble generate_ensemble(const EnsembleConfig& config);

/// D = N / (pi r_max^2 t_ox (E_max - E_min)), in 1/(GHz um^3).
double ttls_density(double count, double r_max_nm, double oxide_thickness_nm, double e_min_hz,
                    double e_max_hz);
/// pi r_max^2 t_ox in um^3.
double ttls_interaction_volume_um3(double r_max_nm, double oxide_thickness_nm);

void save_ensemble(const std::filesystem::path& path, const Ensemble& ensemble);
Ensemble load_ensemble(const std::filesystem::path& path);

std::string ensemble_to_text(const Ensemble& ensemble);
Ensemble ensemble_from_text(const std::string& text);

/// Named numeric field of EnsembleConfig, used for config files, overrides
/// and the canonical digest. Integer fields reject non-integral values.
struct EnsembleField {
  const char* key;
  bool integral;
  double (*get)(const EnsembleConfig&);
  void (*set)(EnsembleConfig&, double);
};

/// All tunable fields in canonical (sorted) key order; seed and threads are excluded.
const std::vector<EnsembleField>& ensemble_fields();

}  // namespace tlsfluct
