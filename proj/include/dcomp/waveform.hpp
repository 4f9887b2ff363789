#pragma once

#include <complex>
#include <variant>
#include <vector>

#include "dcomp/constants.hpp"

namespace dcomp {

/// Linear phase ramp from 0 to sign * peak, reset once per period.
struct IdealSawtooth {
  double frequency = 0.0;  // Hz
  int sign = +1;
  double peak = kTwoPi;    // rad; 2 pi for a perfect ramp
};

/// Phase produced by an RC-filtered rectangle wave through a quadratic
/// field response: sign * gamma * (1 - exp(-t/rc))^2 while the drive is on
/// (first duty/f of each period), zero after the diode reset.
struct RcRamp {
  double frequency = 0.0;  // Hz
  double duty = 0.9;
  double gamma = 0.83 * kPi;  // rad
  double rc = 0.0;            // s
  int sign = +1;
};

struct NullWaveform {};

class Waveform {
 public:
  using Variant = std::variant<NullWaveform, IdealSawtooth, RcRamp>;

  Waveform() = default;
  Waveform(NullWaveform w) : shape_(w) {}
  Waveform(IdealSawtooth w) : shape_(w) { validate(); }
  Waveform(RcRamp w) : shape_(w) { validate(); }

  static Waveform ideal(double frequency, int sign, double peak = kTwoPi) {
    return IdealSawtooth{frequency, sign, peak};
  }
  static Waveform rc(double frequency, double duty, double gamma, double rc, int sign) {
    return RcRamp{frequency, duty, gamma, rc, sign};
  }

  const Variant& shape() const noexcept { return shape_; }

  bool is_null() const noexcept { return std::holds_alternative<NullWaveform>(shape_); }
  /// Null, or a ramp with f = 0 (which never leaves zero phase).
  bool is_static() const noexcept { return is_null() || frequency() == 0.0; }
  bool is_ideal() const noexcept { return std::holds_alternative<IdealSawtooth>(shape_); }

  double frequency() const noexcept;
  double period() const;
  int sign() const noexcept;

  /// Phase at time t, reduced to one ramp period.
  double phase_at(double t) const;

  /// Times in [0, period) where the phase or its derivatives are not smooth.
  std::vector<double> breakpoints() const;

  /// Same ramp with the opposite sign.
  Waveform mirrored() const;

  void validate() const;

 private:
  Variant shape_{};
};

/// The two phase shifters. The second one sees an atom tau = L/v later, plus
/// a fixed start offset between the two drive clocks.
struct ShifterPair {
  Waveform first;
  Waveform second;
  double offset = 0.0;  // s

  /// w and its mirror image, the configuration that produces a counter phase.
  static ShifterPair counter(const Waveform& w, double offset = 0.0) { return {w, w.mirrored(), offset}; }

  bool is_static() const noexcept { return first.is_static() && second.is_static(); }
  /// Ideal 2 pi ramps of equal frequency and opposite sign; the pair sum is
  /// then constant in time.
  bool is_exact_counter() const noexcept;
  /// Common period; throws DomainError when the two ramps disagree.
  double period() const;
};

/// -2 pi f L / v, unwrapped.
double counter_phase(double v, double frequency, double l_shifters);

/// phi_1(t) + phi_2(t + tau).
double pair_sum_phase(const Waveform& first, const Waveform& second, double t, double tau);

/// < exp(i [phi_1(t) + phi_2(t + tau + offset)]) >_t over one ramp period.
std::complex<double> pair_time_average(const ShifterPair& pair, double tau);

/// Lags tau (within one period) at which the time average above has a kink
/// because discontinuities of the two ramps line up.
std::vector<double> pair_kink_lags(const ShifterPair& pair);

/// < phi_1(t) + phi_2(t) >_t over one period: the phase offset left by
/// ramps that are not exact mirror images.
double asymmetry_error(const Waveform& first, const Waveform& second);

/// c1 = < exp(i phi(t)) exp(-i sign 2 pi f t) >_t. |c1| = 1 only for an ideal
/// sawtooth; zero for the null waveform.
std::complex<double> first_harmonic(const Waveform& w);

/// Charged cylinder over a ground plane.
struct ShifterGeometry {
  double radius = 0.5e-3;           // m, cylinder radius r
  double ground_distance = 1.5e-3;  // m, axis to ground plane a
  double path_separation = 50e-6;   // m, w
  double path_distance = 1.0e-3;    // m, mean path distance from the axis x

  void validate() const;
};

/// Default prefactor of the gradient-field phase, pi / (2 hbar).
inline constexpr double kCylinderPhasePrefactor = kPi / (2.0 * kHbar);

/// Differential phase between the two paths passing the charged cylinder:
/// prefactor * ln^-2(2a/r) * alpha w V0^2 / (v x^2).
double cylinder_phase(const ShifterGeometry& geom, double cylinder_voltage, double v, double polarizability,
                      double prefactor = kCylinderPhasePrefactor);

struct RcRampFit {
  double gamma = 0.0;  // rad
  double rc = 0.0;     // s
  double first_harmonic = 0.0;  // |c1| at the optimum
  int iterations = 0;
};

/// (gamma, rc) maximizing |first_harmonic| of an RC ramp at fixed f and duty.
RcRampFit optimize_rc_ramp(double frequency, double duty, double gamma_start = 2.0 * kPi, double rc_start = 0.0);

}  // namespace dcomp
