#include "tlsfluct/tls_physics.hpp"

#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>

#include "tlsfluct/errors.hpp"

namespace tlsfluct {

namespace {

using complex = std::complex<double>;
using constants::pi;

/// Energy of the WKB exponent per (ln(Omega_0/Delta_0))^2, in Hz.
double barrier_scale_hz(const MaterialParams& mat) {
  const double d = mat.well_separation_m;
  return constants::hbar * constants::hbar / (2.0 * mat.tunneling_mass_kg * d * d) /
         constants::planck;
}

void check_rate_regime(double coupling_hz, double qtls_rate, double bare_rate) {
  if (!(coupling_hz >= 0.0)) throw DomainError("coupling strength must be >= 0");
  if (!(bare_rate >= 0.0)) throw DomainError("bare qubit rate must be >= 0");
  if (!(qtls_rate > bare_rate)) {
    std::ostringstream msg;
    msg << "Q-TLS rate " << qtls_rate << " must exceed the bare qubit rate " << bare_rate;
    throw DomainError(msg.str());
  }
}

/// Complex splitting Lambda, principal square root.
complex splitting(double detuning_hz, double coupling_hz, double qtls_rate, double bare_rate) {
  const complex w{qtls_rate - bare_rate, -4.0 * pi * detuning_hz};
  const double c = 16.0 * std::pow(2.0 * pi * coupling_hz, 2);
  return std::sqrt(w * w - c);
}

}  // namespace

void MaterialParams::validate() const {
  if (!(attempt_frequency_hz > 0.0 && well_separation_m > 0.0 && tunneling_mass_kg > 0.0 &&
        rate_prefactor_hz > 0.0 && temperature_k > 0.0 && interaction_constant_k_nm3 > 0.0)) {
    throw DomainError("material parameters must all be strictly positive");
  }
}

TlsLevelStructure TlsLevelStructure::from_energies(double asymmetry_hz, double tunneling_hz,
                                                   const MaterialParams& material) {
  TlsLevelStructure s;
  s.asymmetry_hz = asymmetry_hz;
  s.tunneling_hz = tunneling_hz;
  s.energy_hz = tls_energy(asymmetry_hz, tunneling_hz);
  s.angle_rad = std::atan2(tunneling_hz, asymmetry_hz);
  s.barrier_hz = barrier_from_tunneling(tunneling_hz, material);
  return s;
}

double tls_energy(double asymmetry_hz, double tunneling_hz) {
  if (!(asymmetry_hz >= 0.0) || !(tunneling_hz >= 0.0)) {
    throw DomainError("TLS energies must be non-negative");
  }
  return std::hypot(asymmetry_hz, tunneling_hz);
}

double barrier_from_tunneling(double tunneling_hz, const MaterialParams& material) {
  if (!(tunneling_hz > 0.0)) throw DomainError("tunneling energy must be positive");
  if (tunneling_hz > material.attempt_frequency_hz) {
    std::ostringstream msg;
    msg << "tunneling energy " << tunneling_hz << " Hz exceeds attempt frequency "
        << material.attempt_frequency_hz << " Hz (negative barrier)";
    throw DomainError(msg.str());
  }
  const double log_ratio = std::log(material.attempt_frequency_hz / tunneling_hz);
  return barrier_scale_hz(material) * log_ratio * log_ratio;
}

double tunneling_from_barrier(double barrier_hz, const MaterialParams& material) {
  if (!(barrier_hz >= 0.0)) throw DomainError("barrier must be non-negative");
  const double barrier_j = barrier_hz * constants::planck;
  const double exponent = material.well_separation_m / constants::hbar *
                          std::sqrt(2.0 * material.tunneling_mass_kg * barrier_j);
  return material.attempt_frequency_hz * std::exp(-exponent);
}

double switching_rate(double barrier_hz, const MaterialParams& material) {
  if (!(barrier_hz >= 0.0)) throw DomainError("barrier must be non-negative");
  if (!(material.temperature_k > 0.0)) throw DomainError("temperature must be positive");
  return material.rate_prefactor_hz * std::exp(-barrier_hz / material.thermal_frequency_hz());
}

double interaction_energy(double distance_nm, double interaction_constant_k_nm3) {
  if (!(distance_nm > 0.0)) throw DomainError("interaction distance must be positive");
  return constants::boltzmann_hz_per_kelvin * interaction_constant_k_nm3 /
         (distance_nm * distance_nm * distance_nm);
}

double activation_energy(double ttls_energy_hz, double ttls_asymmetry_hz,
                         double interaction_hz) {
  return std::sqrt(ttls_energy_hz * ttls_energy_hz +
                   4.0 * interaction_hz * (ttls_asymmetry_hz + interaction_hz));
}

PairEigenenergies pair_eigenenergies(double qtls_energy_hz, double ttls_energy_hz,
                                     double ttls_asymmetry_hz, double interaction_hz) {
  const double half_t = 0.5 * ttls_energy_hz;
  const double u = interaction_hz;
  const double ground = half_t * half_t + u * ttls_asymmetry_hz + u * u;
  const double excited = half_t * half_t - u * ttls_asymmetry_hz + u * u;
  if (ground < 0.0 || excited < 0.0) {
    std::ostringstream msg;
    msg << "complex pair spectrum for E_T=" << ttls_energy_hz << " Delta_T=" << ttls_asymmetry_hz
        << " U=" << interaction_hz;
    throw DomainError(msg.str());
  }
  const double r0 = std::sqrt(ground);
  const double r1 = std::sqrt(excited);
  const double half_q = 0.5 * qtls_energy_hz;
  return {-half_q - r0, -half_q + r0, half_q - r1, half_q + r1};
}

FrequencyShift qtls_frequency_shift(double qtls_energy_hz, double ttls_energy_hz,
                                    double ttls_asymmetry_hz, double interaction_hz) {
  // Validates the radicands; E_Q cancels in E1 - E0 - E_Q.
  (void)pair_eigenenergies(qtls_energy_hz, ttls_energy_hz, ttls_asymmetry_hz, interaction_hz);
  const double half_t = 0.5 * ttls_energy_hz;
  const double u = interaction_hz;
  const double r0 = std::sqrt(half_t * half_t + u * ttls_asymmetry_hz + u * u);
  const double r1 = std::sqrt(half_t * half_t - u * ttls_asymmetry_hz + u * u);
  // r0 - r1 without cancellation.
  const double sum = r0 + r1;
  const double shift = sum > 0.0 ? 2.0 * u * ttls_asymmetry_hz / sum : 0.0;
  return {shift, -shift};
}

double qubit_qtls_rate(double detuning_hz, double coupling_hz, double qtls_rate,
                       double bare_rate) {
  check_rate_regime(coupling_hz, qtls_rate, bare_rate);
  const complex w{qtls_rate - bare_rate, -4.0 * pi * detuning_hz};
  const double c = 16.0 * std::pow(2.0 * pi * coupling_hz, 2);
  const complex lambda = std::sqrt(w * w - c);
  // (Re w - Re Lambda) / 2 rewritten as Re[c / (w + Lambda)] / 2, since
  // (w - Lambda)(w + Lambda) = c and Re(w + Lambda) > 0.
  const double rate = 0.5 * (c / (w + lambda)).real();
  return rate > 0.0 ? rate : 0.0;
}

double qubit_qtls_rate(double detuning_hz, double coupling_hz, double qtls_rate,
                       const QubitDecayParams& qubit) {
  return qubit_qtls_rate(detuning_hz, coupling_hz, qtls_rate, qubit.bare_rate_hz);
}

Relaxation total_relaxation(std::span<const double> contributions, double bare_rate) {
  for (double c : contributions) {
    if (!(c >= 0.0)) throw DomainError("relaxation contributions must be non-negative");
  }
  const double rate = std::accumulate(contributions.begin(), contributions.end(), bare_rate);
  return {rate, 1.0 / rate};
}

std::vector<double> decay_envelope_oracle(double detuning_hz, double coupling_hz,
                                          double qtls_rate, double bare_rate,
                                          std::span<const double> times_s) {
  check_rate_regime(coupling_hz, qtls_rate, bare_rate);
  const complex lambda = splitting(detuning_hz, coupling_hz, qtls_rate, bare_rate);
  const double diff = qtls_rate - bare_rate;
  const complex detune{0.0, 4.0 * pi * detuning_hz};
  const complex a = lambda - diff + detune;
  const complex b = lambda + diff - detune;
  const double norm = std::norm(2.0 * lambda);
  if (!(norm > 0.0)) throw NumericalError("envelope undefined at the exceptional point");

  const double wa = std::norm(a) / norm;
  const double wb = std::norm(b) / norm;
  const double wab = 2.0 * (a * std::conj(b)).real() / norm;
  const double total = qtls_rate + bare_rate;
  const double re = lambda.real();

  std::vector<double> out;
  out.reserve(times_s.size());
  for (double t : times_s) {
    if (!(t >= 0.0)) throw DomainError("envelope times must be non-negative");
    out.push_back(wa * std::exp(-0.5 * (total + re) * t) +
                  wb * std::exp(-0.5 * (total - re) * t) + wab * std::exp(-0.5 * total * t));
  }
  return out;
}

double fitted_envelope_rate(double detuning_hz, double coupling_hz, double qtls_rate,
                            double bare_rate) {
  const double predicted =
      bare_rate + qubit_qtls_rate(detuning_hz, coupling_hz, qtls_rate, bare_rate);
  constexpr int points = 64;
  const double t_lo = 1e-9;
  const double t_hi = 3.0 / predicted;
  std::vector<double> t(points);
  for (int i = 0; i < points; ++i) {
    t[i] = t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (points - 1));
  }
  const auto p = decay_envelope_oracle(detuning_hz, coupling_hz, qtls_rate, bare_rate, t);

  double st = 0, sy = 0, stt = 0, sty = 0;
  for (int i = 0; i < points; ++i) {
    const double y = std::log(std::max(p[i], 1e-300));
    st += t[i];
    sy += y;
    stt += t[i] * t[i];
    sty += t[i] * y;
  }
  const double n = points;
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  return -slope;
}

}  // namespace tlsfluct
