#pragma once

#include <span>
#include <vector>

#include "tlsfluct/constants.hpp"

// Closed-form TLS physics. Energies are carried as frequencies (E/h, in Hz);
// temperatures enter through k_B T / h. Decay rates are in 1/s.
namespace tlsfluct {

struct MaterialParams {
  double attempt_frequency_hz = 1e9;                               // Omega_0
  double well_separation_m = 2e-10;                                // d
  double tunneling_mass_kg = 16.0 * constants::atomic_mass_unit;   // m
  double rate_prefactor_hz = 0.4;                                  // gamma_0
  double temperature_k = 0.060;                                    // T
  double interaction_constant_k_nm3 = 10.0;                        // U_0 / k_B

  /// k_B T / h.
  double thermal_frequency_hz() const {
    return constants::boltzmann_hz_per_kelvin * temperature_k;
  }
  /// Throws DomainError unless every field is strictly positive.
  void validate() const;
};

struct QubitDecayParams {
  double bare_rate_hz = 1.0 / 27e-6;  // 1/27 MHz
  double qubit_frequency_hz = 4.5e9;
};

/// Level structure of one defect.
struct TlsLevelStructure {
  double asymmetry_hz = 0.0;  // Delta
  double tunneling_hz = 0.0;  // Delta_0
  double energy_hz = 0.0;     // E
  double angle_rad = 0.0;     // theta = atan(Delta_0 / Delta)
  double barrier_hz = 0.0;    // V

  static TlsLevelStructure from_energies(double asymmetry_hz, double tunneling_hz,
                                         const MaterialParams& material);
};

double tls_energy(double asymmetry_hz, double tunneling_hz);

/// WKB barrier height that produces `tunneling_hz` for the given material.
/// Throws DomainError when Delta_0 exceeds Omega_0 (negative barrier).
double barrier_from_tunneling(double tunneling_hz, const MaterialParams& material);

/// Forward WKB relation: Delta_0 = Omega_0 exp(-(d / hbar) sqrt(2 m V)).
double tunneling_from_barrier(double barrier_hz, const MaterialParams& material);

/// Thermally activated switching rate gamma_0 exp(-V / k_B T).
double switching_rate(double barrier_hz, const MaterialParams& material);

/// U_0 / r^3 in Hz, with U_0 given as k_B x (K nm^3) and r in nm.
double interaction_energy(double distance_nm, double interaction_constant_k_nm3);

/// sqrt(E_T^2 + 4 U (Delta_T + U)), the splitting E0+ - E0- of the coupled pair.
double activation_energy(double ttls_energy_hz, double ttls_asymmetry_hz, double interaction_hz);

struct PairEigenenergies {
  double e0_minus;
  double e0_plus;
  double e1_minus;
  double e1_plus;
};

PairEigenenergies pair_eigenenergies(double qtls_energy_hz, double ttls_energy_hz,
                                     double ttls_asymmetry_hz, double interaction_hz);

struct FrequencyShift {
  double minus_hz;  // T-TLS in |->
  double plus_hz;   // T-TLS in |+>, always -minus_hz
};

FrequencyShift qtls_frequency_shift(double qtls_energy_hz, double ttls_energy_hz,
                                    double ttls_asymmetry_hz, double interaction_hz);

/// Contribution of one Q-TLS to the qubit relaxation rate.
/// Requires qtls_rate > bare_rate (DomainError otherwise).
double qubit_qtls_rate(double detuning_hz, double coupling_hz, double qtls_rate,
                       double bare_rate);
double qubit_qtls_rate(double detuning_hz, double coupling_hz, double qtls_rate,
                       const QubitDecayParams& qubit);

struct Relaxation {
  double rate;   // Gamma_1^q, 1/s
  double t1_s;
};

Relaxation total_relaxation(std::span<const double> contributions, double bare_rate);

/// Exact envelope of the excited-state probability of a qubit coupled to a
/// single lossy Q-TLS (single-excitation, non-Hermitian evolution). The
/// imaginary part of the eigenvalue splitting is dropped in the exponents.
std::vector<double> decay_envelope_oracle(double detuning_hz, double coupling_hz,
                                          double qtls_rate, double bare_rate,
                                          std::span<const double> times_s);

/// Rate from a log-linear least-squares fit of the envelope on 64
/// log-spaced points in [1 ns, 3 / Gamma], Gamma being the predicted total rate.
double fitted_envelope_rate(double detuning_hz, double coupling_hz, double qtls_rate,
                            double bare_rate);

}  // namespace tlsfluct
