#pragma once

#include <variant>

#include "dcomp/constants.hpp"

namespace dcomp {

/// Gaussian beam-velocity model truncated to v0 +- trunc_k * sigma_v and
/// renormalized over that support.
struct VelocityDistribution {
  double v0 = 1722.6;      // m/s
  double sigma_v = 0.04 * 1722.6;  // m/s
  double trunc_k = 5.0;

  static VelocityDistribution from_ratio(double v0, double sigma_over_v0, double trunc_k = 5.0);

  /// Throws DomainError when an invariant is violated.
  void validate() const;

  double lower() const noexcept { return v0 - trunc_k * sigma_v; }
  double upper() const noexcept { return v0 + trunc_k * sigma_v; }
  double ratio() const noexcept { return sigma_v / v0; }

  /// Normalized density on the truncated support, zero outside it.
  double density(double v) const;
};

/// Parallel-plate interaction region around one interferometer arm.
struct InteractionRegion {
  double voltage = 0.0;          // V
  double plate_gap = 2.0e-3;     // m
  double length = 0.1;           // m
  double polarizability = kSodiumPolarizability;  // C m^2 / V

  void validate() const;
  double angular_frequency() const;
};

struct InterferometerGeometry {
  double shifter_separation = 1.0;   // m, between the two phase shifters
  double grating_separation = 0.66;  // m
  double grating_wavevector = kDefaultGratingWavevector;  // rad/m

  void validate() const;
};

/// Phase accumulated during the transit time l_int / v through a region
/// with a velocity-independent energy shift hbar * omega_int.
double interaction_phase(double v, double omega_int, double l_int);

/// omega_int = (alpha V^2 / 2 d^2) / hbar.
double stark_angular_frequency(double voltage, double plate_gap, double polarizability);

/// phi0 * (v / v0)^n.
double power_law_phase(double v, double phi0, double v0, int n);

/// Interaction phase at v0 that maximizes signal-to-noise for a v^n
/// interaction without compensation: |1/n| v0 / sigma_v.
double optimal_uncompensated_phase(int n, double v0, double sigma_v);

struct Unbounded {
  friend bool operator==(Unbounded, Unbounded) = default;
};

using PhaseBound = std::variant<double, Unbounded>;

/// Largest usable interaction phase when a 1/v counter phase removes the
/// first-order dispersion of a v^n interaction: |1/(n(n+1))| (v0/sigma_v)^2.
/// n = -1 cancels exactly and is Unbounded.
PhaseBound compensated_phase_bound(int n, double v0, double sigma_v);

/// Rotation-induced phase 2 k_g L_g^2 Omega / v.
double sagnac_phase(double v, double rotation_rate, double grating_wavevector, double grating_separation);

/// Ramp frequency at which the counter phase cancels omega_int L_int / v
/// for every velocity.
double rephasing_frequency(double omega_int, double l_int, double l_shifters);

}  // namespace dcomp
