#include "dcomp/gyro.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "dcomp/errors.hpp"
#include "dcomp/estimate.hpp"
#include "dcomp/fringe.hpp"

namespace dcomp {

void RotationProfile::validate() const {
  if (times.size() < 2) throw DomainError("rotation profile: need at least two samples");
  if (times.size() != rates.size()) throw DomainError("rotation profile: times and rates differ in length");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw DomainError("rotation profile: time grid must be strictly increasing");
  }
}

double RotationProfile::rate_at(double t) const {
  if (t <= times.front()) return rates.front();
  if (t >= times.back()) return rates.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
  const std::size_t lo = hi - 1;
  const double u = (t - times[lo]) / (times[hi] - times[lo]);
  return rates[lo] + u * (rates[hi] - rates[lo]);
}

double RotationProfile::integral(double a, double b) const {
  if (b < a) return -integral(b, a);
  // Knots inside (a, b) split the integrand into linear pieces.
  std::vector<double> knots{a};
  for (double t : times) {
    if (t > a && t < b) knots.push_back(t);
  }
  knots.push_back(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    total += 0.5 * (rate_at(knots[i]) + rate_at(knots[i + 1])) * (knots[i + 1] - knots[i]);
  }
  return total;
}

void ServoState::validate() const {
  if (!(interval > 0.0)) throw DomainError("servo: update interval must be > 0");
  if (!(gain > 0.0)) throw DomainError("servo: gain must be > 0");
}

double rotation_to_frequency(double rotation_rate, double grating_wavevector, double grating_separation,
                             double l_shifters) {
  if (!(l_shifters > 0.0)) throw DomainError("rotation_to_frequency: shifter separation must be > 0");
  return grating_wavevector * grating_separation * grating_separation * rotation_rate / (kPi * l_shifters);
}

double frequency_to_rotation(double frequency, double grating_wavevector, double grating_separation,
                             double l_shifters) {
  return kPi * l_shifters * frequency / (grating_wavevector * grating_separation * grating_separation);
}

double default_servo_gain(double interval, double v0, double l_shifters) {
  return 0.5 / (interval * kTwoPi * l_shifters / v0);
}

namespace {

// Ideal counter pair realizing a signed ramp frequency.
std::optional<ShifterPair> pair_for(const ShifterConfig& shifters, double frequency) {
  if (frequency == 0.0) return std::nullopt;
  auto pair = shifters.pair_at(std::abs(frequency));
  if (pair && frequency < 0.0) {
    pair->first = pair->first.mirrored();
    pair->second = pair->second.mirrored();
  }
  return pair;
}

}  // namespace

std::vector<ServoSample> run_servo(const RotationProfile& profile, ServoState state, const Scenario& s) {
  profile.validate();
  state.validate();
  if (s.shifters.kind == ShifterKind::null) throw DomainError("run_servo: the servo needs active phase shifters");

  const auto dist = s.beam.distribution();
  const auto geom = s.geometry.geometry();
  const auto z = fringe_positions(geom.grating_wavevector, s.detection.n_z);
  const double dwell = state.interval / static_cast<double>(s.detection.n_z);
  const double angle_per_cycle =
      frequency_to_rotation(1.0, geom.grating_wavevector, geom.grating_separation, geom.shifter_separation);

  const auto steps = static_cast<std::size_t>(std::floor((profile.end() - profile.start()) / state.interval + 1e-9));
  std::vector<ServoSample> out;
  out.reserve(steps + 1);

  int growing = 0;
  double previous_abs = 0.0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = profile.start() + static_cast<double>(k) * state.interval;
    const double omega = profile.rate_at(t);
    const double kg = geom.grating_wavevector;
    const double lg = geom.grating_separation;
    const PhaseProfile sagnac = [=](double v) { return sagnac_phase(v, omega, kg, lg); };

    const FringeIntegrator integrator(dist, geom, pair_for(s.shifters, state.frequency));
    const auto amp = integrator.evaluate(sagnac, state.residual);
    const FringeObservable obs{s.detection.flux, s.detection.contrast0 * s.detection.flux, amp.contrast, amp.phase};
    const auto scan = synthesize_scan(obs, z, kg, dwell, derive_seed(s.detection.seed, k), s.gyro.noise);
    state.residual = fit_fringe(scan, kg, state.residual).phase;

    out.push_back({t, omega, state.frequency, state.residual, state.angle});

    const double magnitude = std::abs(state.residual);
    growing = (magnitude > 1.05 * previous_abs && magnitude > 1e-6) ? growing + 1 : 0;
    previous_abs = magnitude;
    if (growing >= 10) {
      throw NumericalError(fmt::format("servo diverged at t = {} s: |residual| grew for 10 updates to {} rad", t,
                                       magnitude));
    }

    if (k == steps) break;
    const double next = state.frequency + state.gain * state.interval * state.residual;
    state.angle += 0.5 * (state.frequency + next) * state.interval * angle_per_cycle;
    state.frequency = next;
  }
  return out;
}

}  // namespace dcomp
