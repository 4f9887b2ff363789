#include "dcomp/physics.hpp"

#include <cmath>
#include <cstdlib>

#include "dcomp/errors.hpp"

namespace dcomp {

VelocityDistribution VelocityDistribution::from_ratio(double v0, double sigma_over_v0, double trunc_k) {
  return VelocityDistribution{v0, sigma_over_v0 * v0, trunc_k};
}

void VelocityDistribution::validate() const {
  if (!(v0 > 0.0)) throw DomainError("velocity distribution: v0 must be > 0");
  if (!(sigma_v > 0.0)) throw DomainError("velocity distribution: sigma_v must be > 0");
  if (!(trunc_k >= 3.0)) throw DomainError("velocity distribution: trunc_k must be >= 3");
  if (!(lower() > 0.0)) throw DomainError("velocity distribution: support reaches v <= 0");
}

double VelocityDistribution::density(double v) const {
  if (v < lower() || v > upper()) return 0.0;
  const double z = (v - v0) / sigma_v;
  const double norm = sigma_v * std::sqrt(kTwoPi) * std::erf(trunc_k / std::sqrt(2.0));
  return std::exp(-0.5 * z * z) / norm;
}

void InteractionRegion::validate() const {
  if (!(plate_gap > 0.0)) throw DomainError("interaction region: plate gap must be > 0");
  if (!(length > 0.0)) throw DomainError("interaction region: length must be > 0");
  if (!(polarizability > 0.0)) throw DomainError("interaction region: polarizability must be > 0");
  if (!(voltage >= 0.0)) throw DomainError("interaction region: voltage must be >= 0");
}

double InteractionRegion::angular_frequency() const {
  return stark_angular_frequency(voltage, plate_gap, polarizability);
}

void InterferometerGeometry::validate() const {
  if (!(shifter_separation > 0.0)) throw DomainError("geometry: shifter separation must be > 0");
  if (!(grating_separation > 0.0)) throw DomainError("geometry: grating separation must be > 0");
  if (!(grating_wavevector > 0.0)) throw DomainError("geometry: grating wavevector must be > 0");
}

double interaction_phase(double v, double omega_int, double l_int) {
  if (!(v > 0.0)) throw DomainError("interaction_phase: velocity must be > 0");
  if (!(l_int > 0.0)) throw DomainError("interaction_phase: length must be > 0");
  return omega_int * l_int / v;
}

double stark_angular_frequency(double voltage, double plate_gap, double polarizability) {
  if (!(plate_gap > 0.0)) throw DomainError("stark_angular_frequency: plate gap must be > 0");
  if (!(polarizability > 0.0)) throw DomainError("stark_angular_frequency: polarizability must be > 0");
  const double field = voltage / plate_gap;
  return 0.5 * polarizability * field * field / kHbar;
}

double power_law_phase(double v, double phi0, double v0, int n) {
  if (!(v > 0.0) || !(v0 > 0.0)) throw DomainError("power_law_phase: velocities must be > 0");
  return phi0 * std::pow(v / v0, n);
}

double optimal_uncompensated_phase(int n, double v0, double sigma_v) {
  if (n == 0) throw DomainError("optimal_uncompensated_phase: n = 0 has no dispersion");
  return (v0 / sigma_v) / std::abs(n);
}

PhaseBound compensated_phase_bound(int n, double v0, double sigma_v) {
  if (n == 0) throw DomainError("compensated_phase_bound: n = 0 has no dispersion");
  if (n == -1) return Unbounded{};
  const double ratio = v0 / sigma_v;
  return ratio * ratio / std::abs(static_cast<double>(n) * (n + 1));
}

double sagnac_phase(double v, double rotation_rate, double grating_wavevector, double grating_separation) {
  if (!(v > 0.0)) throw DomainError("sagnac_phase: velocity must be > 0");
  return 2.0 * grating_wavevector * grating_separation * grating_separation * rotation_rate / v;
}

double rephasing_frequency(double omega_int, double l_int, double l_shifters) {
  if (!(l_shifters > 0.0)) throw DomainError("rephasing_frequency: shifter separation must be > 0");
  return omega_int * l_int / (kTwoPi * l_shifters);
}

}  // namespace dcomp
