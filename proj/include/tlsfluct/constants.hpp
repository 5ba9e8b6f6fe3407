#pragma once

#include <numbers>

// CODATA 2018 exact/recommended values, SI units.
namespace tlsfluct::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double planck = 6.62607015e-34;               // J s
inline constexpr double hbar = planck / (2.0 * pi);            // J s
inline constexpr double boltzmann = 1.380649e-23;              // J / K
inline constexpr double elementary_charge = 1.602176634e-19;   // C
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
inline constexpr double speed_of_light = 299792458.0;          // m / s
inline constexpr double debye = 1e-21 / speed_of_light;        // C m

/// k_B / h in Hz per kelvin (about 20.837 GHz/K).
inline constexpr double boltzmann_hz_per_kelvin = boltzmann / planck;

}  // namespace tlsfluct::constants
