#include "tlsfluct/efield.hpp"

#include <cmath>
#include <sstream>

#include "tlsfluct/constants.hpp"
#include "tlsfluct/errors.hpp"

namespace tlsfluct {

void CpwGeometry::validate() const {
  if (!(strip_width_um > 0.0 && gap_width_um > 0.0 && segment_length_um > 0.0 &&
        oxide_thickness_nm > 0.0 && ground_margin_um >= 0.0)) {
    throw DomainError("CPW dimensions must be positive");
  }
}

double QubitElectrical::plasma_frequency_hz() const {
  return std::sqrt(8.0 * josephson_hz * charging_hz);
}

double QubitElectrical::zero_point_voltage() const {
  return tlsfluct::zero_point_voltage(capacitance_f, josephson_hz, charging_hz);
}

double zero_point_voltage(double capacitance_f, double josephson_hz, double charging_hz) {
  if (!(capacitance_f > 0.0 && josephson_hz > 0.0 && charging_hz > 0.0)) {
    throw DomainError("zero-point voltage needs positive C, E_J and E_c");
  }
  return constants::elementary_charge / capacitance_f *
         std::pow(josephson_hz / (2.0 * charging_hz), 0.25);
}

CpwField::CpwField(const CpwGeometry& geometry) : geometry_(geometry) {
  geometry_.validate();
  a_m_ = geometry_.strip_half_width_um() * 1e-6;
  b_m_ = geometry_.ground_edge_um() * 1e-6;
  const double k = a_m_ / b_m_;
  const double k_prime = std::sqrt(1.0 - k * k);
  scale_ = b_m_ / std::comp_ellint_1(k_prime);
}

std::complex<double> CpwField::field(double x_um, double z_nm, double voltage) const {
  if (!(z_nm >= 0.0)) throw DomainError("field is evaluated in the upper half plane only");
  const double x = x_um * 1e-6;
  const double z = z_nm * 1e-9;
  const double ax = std::abs(x);
  if (z == 0.0 && (ax <= a_m_ || ax >= b_m_)) {
    std::ostringstream msg;
    msg << "field requested on a conductor at x=" << x_um << " um";
    throw SingularPointError(msg.str());
  }
  const std::complex<double> w{x, z};
  // Product of principal roots of the linear factors: analytic in the open
  // upper half plane, with all branch cuts pointing into the lower half plane.
  const std::complex<double> root = std::sqrt(w - a_m_) * std::sqrt(w + a_m_) *
                                    std::sqrt(w - b_m_) * std::sqrt(w + b_m_);
  if (std::abs(root) == 0.0) {
    throw SingularPointError("field requested at a conductor edge");
  }
  // E_x - i E_z = i V scale / root.
  const std::complex<double> conj_field = std::complex<double>{0.0, voltage * scale_} / root;
  return {conj_field.real(), -conj_field.imag()};
}

double CpwField::magnitude(double x_um, double z_nm, double voltage) const {
  return std::abs(field(x_um, z_nm, voltage));
}

double CpwField::edge_distance_nm(double x_um, double z_nm) const {
  const double ax = std::abs(x_um);
  const double a = geometry_.strip_half_width_um();
  const double b = geometry_.ground_edge_um();
  const double dx_nm = std::min(std::abs(ax - a), std::abs(ax - b)) * 1e3;
  return std::hypot(dx_nm, z_nm);
}

bool CpwField::over_metal(double x_um) const {
  const double ax = std::abs(x_um);
  return ax <= geometry_.strip_half_width_um() || ax >= geometry_.ground_edge_um();
}

std::vector<double> CpwField::profile(std::span<const double> xs_um, double z_nm,
                                      double voltage) const {
  std::vector<double> out;
  out.reserve(xs_um.size());
  for (double x : xs_um) out.push_back(magnitude(x, z_nm, voltage));
  return out;
}

double field_magnitude(double x_um, double z_nm, const CpwGeometry& geometry, double voltage) {
  return CpwField(geometry).magnitude(x_um, z_nm, voltage);
}

double coupling_strength(double dipole_debye, double field_v_per_m) {
  if (!(dipole_debye >= 0.0) || !(field_v_per_m >= 0.0)) {
    throw DomainError("dipole and field magnitude must be non-negative");
  }
  return dipole_debye * constants::debye * field_v_per_m / constants::planck;
}

}  // namespace tlsfluct
