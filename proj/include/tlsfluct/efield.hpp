#pragma once

#include <complex>
#include <span>
#include <vector>

namespace tlsfluct {

/// Cross-section of one CPW segment of the qubit capacitor. Lengths in the
/// units of the field names; x is measured from the strip center, z above the
/// (zero-thickness) metal plane.
struct CpwGeometry {
  double strip_width_um = 24.0;     // S
  double gap_width_um = 24.0;       // W
  double segment_length_um = 376.0; // L
  double oxide_thickness_nm = 3.0;  // t_ox, also the sampled z span
  double ground_margin_um = 12.0;   // how far the sample region reaches into the ground plane

  double strip_half_width_um() const { return 0.5 * strip_width_um; }      // a
  double ground_edge_um() const { return 0.5 * strip_width_um + gap_width_um; }  // b
  double sample_half_span_um() const { return ground_edge_um() + ground_margin_um; }

  void validate() const;
};

struct QubitElectrical {
  double capacitance_f = 100e-15;
  double josephson_hz = 8.6e9;   // E_J / h
  double charging_hz = 188.6e6;  // E_c / h

  double plasma_frequency_hz() const;
  double zero_point_voltage() const;
};

/// phi_0 = (e / C) (E_J / 2 E_c)^(1/4), with energies given as E/h.
double zero_point_voltage(double capacitance_f, double josephson_hz, double charging_hz);

/// Quasi-static field of a zero-thickness CPW (strip at V, coplanar grounds at 0).
///
/// The Schwarz-Christoffel map of the upper half plane onto a parallel-plate
/// capacitor gives the complex field
///
///   E_x - i E_z = i V b / (K(k') sqrt((w^2 - a^2)(w^2 - b^2))),   w = x + i z,
///
/// with k = a / b and k' = sqrt(1 - k^2), so that the tangential field
/// integrates to V across each gap. The object stores the 1 V normalization;
/// results are linear in the applied voltage.
class CpwField {
 public:
  explicit CpwField(const CpwGeometry& geometry);

  const CpwGeometry& geometry() const noexcept { return geometry_; }

  /// (E_x, E_z) in V/m at (x [um], z [nm]) for the given strip voltage.
  /// Throws SingularPointError at a conductor edge or on the metal plane.
  std::complex<double> field(double x_um, double z_nm, double voltage = 1.0) const;

  double magnitude(double x_um, double z_nm, double voltage = 1.0) const;

  /// Distance in nm from (x, z) to the nearest conductor edge.
  double edge_distance_nm(double x_um, double z_nm) const;

  /// True if x lies under metal (strip or ground footprint).
  bool over_metal(double x_um) const;

  /// |E| along z = z_nm at each x.
  std::vector<double> profile(std::span<const double> xs_um, double z_nm,
                              double voltage = 1.0) const;

 private:
  CpwGeometry geometry_;
  double a_m_;
  double b_m_;
  double scale_;  // b / K(k'), in metres
};

double field_magnitude(double x_um, double z_nm, const CpwGeometry& geometry, double voltage);

/// g = p E / h for an effective dipole (already including cos eta) in debye.
double coupling_strength(double dipole_debye, double field_v_per_m);

}  // namespace tlsfluct
