#pragma once

#include <vector>

#include "dcomp/scenario.hpp"

namespace dcomp {

/// Rotation rate sampled on a strictly increasing time grid, linear in
/// between and held constant outside it.
struct RotationProfile {
  std::vector<double> times;  // s
  std::vector<double> rates;  // rad/s

  void validate() const;
  double start() const { return times.front(); }
  double end() const { return times.back(); }
  double rate_at(double t) const;
  /// Exact integral of the piecewise-linear rate over [a, b].
  double integral(double a, double b) const;
};

struct ServoState {
  double frequency = 0.0;  // Hz, current ramp frequency
  double residual = 0.0;   // rad, last measured fringe phase
  double angle = 0.0;      // rad, accumulated from the ramp frequency
  double gain = 0.0;       // Hz per (rad s); each update adds gain * interval * residual
  double interval = 1e-3;  // s

  void validate() const;
};

struct ServoSample {
  double t = 0.0;
  double omega = 0.0;
  double frequency = 0.0;
  double residual = 0.0;
  double angle = 0.0;
};

/// Ramp frequency whose counter phase 2 pi f L_shifters / v cancels the
/// Sagnac phase 2 k_g L_g^2 Omega / v at every velocity.
double rotation_to_frequency(double rotation_rate, double grating_wavevector, double grating_separation,
                             double l_shifters);

/// Inverse of rotation_to_frequency.
double frequency_to_rotation(double frequency, double grating_wavevector, double grating_separation,
                             double l_shifters);

/// Gain that removes half of the measured residual per update:
/// 0.5 / (interval * 2 pi L_shifters / v0).
double default_servo_gain(double interval, double v0, double l_shifters);

/// Closed loop: at each update the residual fringe phase is read from a
/// synthetic scan that fills one update interval, the ramp frequency moves
/// by gain * interval * residual, and the angle integrates the frequency
/// (trapezoid). Throws NumericalError when |residual| grows by more than 5%
/// on 10 consecutive updates.
std::vector<ServoSample> run_servo(const RotationProfile& profile, ServoState state, const Scenario& scenario);

}  // namespace dcomp
