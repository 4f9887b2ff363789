#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dcomp/fringe.hpp"
#include "dcomp/scenario.hpp"

namespace dcomp {

/// Sinusoid fitted to a detector scan at the known grating wavevector.
struct FringeFit {
  double mean_rate = 0.0;   // N, counts/s
  double amplitude = 0.0;   // A C', counts/s
  double phase = 0.0;       // rad
  double phase_sigma = 0.0; // rad, 1 sigma
  /// Covariance of the (offset, cos, sin) coefficients in (counts/s)^2.
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
};

/// Weighted linear least squares on {1, cos k_g z, sin k_g z}: an
/// unweighted pass, then one re-fit with the Poisson variances predicted by
/// the first. Throws FitError for a singular design.
FringeFit fit_fringe(const DetectorScan& scan, double grating_wavevector, double phase_reference = 0.0);

struct PhaseSweepPoint {
  double v_squared = 0.0;    // V^2
  double phase = 0.0;        // rad, unwrapped along the sweep
  double phase_sigma = 0.0;  // rad
  double contrast = 0.0;     // fitted A C' / (contrast0 N)
};

/// Derives an independent generator seed for sub-stream `stream`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Interaction phase at v0 per volt^2 of plate voltage.
double phase_per_volt_squared(const Scenario& scenario);

/// Default V^2 grid: polarizability.n_points values centred on the expected
/// rephasing point, spaced so neighbouring phases differ by phase_step_rad.
std::vector<double> default_sweep_grid(const Scenario& scenario);

/// For each V^2 synthesizes and fits one scan, then unwraps the phases in
/// sweep order against the closed-form prediction plus the mean offset of
/// the points unwrapped so far.
std::vector<PhaseSweepPoint> run_voltage_sweep(const Scenario& scenario, std::span<const double> v_squared);

struct ZeroCrossing {
  double v2_reph = 0.0;
  double v2_reph_sigma = 0.0;
  double slope = 0.0;            // rad / V^2
  double slope_sigma = 0.0;
  double phase_sigma = 0.0;      // fitted-line uncertainty at the crossing
  std::size_t first = 0;         // window start index
  std::size_t count = 0;
};

inline constexpr std::size_t kDefaultCrossingWindow = 10;

/// Weighted line through the `window` points centred on the first sign
/// change of the phase. Throws std::range_error when the phase never
/// changes sign.
ZeroCrossing zero_crossing_fit(std::span<const PhaseSweepPoint> points, std::size_t window = kDefaultCrossingWindow);

/// alpha = 2 h f L_shifters d^2 / (L_int V_reph^2).
double extract_alpha(double frequency, double l_shifters, double plate_gap, double l_int, double v2_reph);

/// Delta alpha / alpha = Delta phi' / phi_int(v0).
double alpha_fractional_uncertainty(double phase_sigma, double phi_int_v0);

/// Removes the ramp asymmetry offset measured with the ramps stopped.
inline double correct_asymmetry(double phase, double phi_error) { return phase - phi_error; }

struct PolarizabilityResult {
  double alpha = 0.0;
  double frac_uncertainty = 0.0;
  double v2_reph = 0.0;
  double v2_reph_sigma = 0.0;
  double phase_sigma = 0.0;    // Delta phi' at the crossing
  double phi_int_v0 = 0.0;     // slope * V_reph^2
  double phi_error = 0.0;      // asymmetry offset removed before the fit
  std::size_t window_first = 0;
  std::size_t window_count = 0;
};

struct PolarizabilityRun {
  std::vector<PhaseSweepPoint> points;  // as measured, before the asymmetry correction
  ZeroCrossing crossing;
  PolarizabilityResult result;
};

/// Sweep, asymmetry correction, zero-crossing fit, alpha and its
/// fractional uncertainty. Requires shifters.f_hz > 0.
PolarizabilityRun estimate_polarizability(const Scenario& scenario);
PolarizabilityRun estimate_polarizability(const Scenario& scenario, std::span<const double> v_squared);

}  // namespace dcomp
