#include "dcomp/waveform.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <memory>

#include "dcomp/errors.hpp"
#include "dcomp/quadrature.hpp"

namespace dcomp {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double reduce(double t, double period) {
  double r = t - std::floor(t / period) * period;
  if (r >= period) r -= period;
  return r;
}

std::vector<double> merged_breaks(const Waveform& a, const Waveform& b, double shift_b) {
  auto out = a.breakpoints();
  for (double t : b.breakpoints()) out.push_back(t - shift_b);
  return out;
}

}  // namespace

double Waveform::frequency() const noexcept {
  return std::visit(Overloaded{[](const NullWaveform&) { return 0.0; },
                               [](const IdealSawtooth& w) { return w.frequency; },
                               [](const RcRamp& w) { return w.frequency; }},
                    shape_);
}

double Waveform::period() const {
  const double f = frequency();
  if (!(f > 0.0)) throw DomainError("waveform: period undefined for a static waveform");
  return 1.0 / f;
}

int Waveform::sign() const noexcept {
  return std::visit(Overloaded{[](const NullWaveform&) { return 0; },
                               [](const IdealSawtooth& w) { return w.sign; },
                               [](const RcRamp& w) { return w.sign; }},
                    shape_);
}

double Waveform::phase_at(double t) const {
  return std::visit(Overloaded{[](const NullWaveform&) { return 0.0; },
                               [t](const IdealSawtooth& w) {
                                 if (w.frequency == 0.0) return 0.0;
                                 const double tp = reduce(t, 1.0 / w.frequency);
                                 return w.sign * w.peak * w.frequency * tp;
                               },
                               [t](const RcRamp& w) {
                                 if (w.frequency == 0.0) return 0.0;
                                 const double tp = reduce(t, 1.0 / w.frequency);
                                 if (tp >= w.duty / w.frequency) return 0.0;
                                 const double rise = -std::expm1(-tp / w.rc);
                                 return w.sign * w.gamma * rise * rise;
                               }},
                    shape_);
}

std::vector<double> Waveform::breakpoints() const {
  return std::visit(Overloaded{[](const NullWaveform&) { return std::vector<double>{}; },
                               [](const IdealSawtooth& w) {
                                 return w.frequency > 0.0 ? std::vector<double>{0.0} : std::vector<double>{};
                               },
                               [](const RcRamp& w) {
                                 return w.frequency > 0.0 ? std::vector<double>{0.0, w.duty / w.frequency}
                                                          : std::vector<double>{};
                               }},
                    shape_);
}

Waveform Waveform::mirrored() const {
  return std::visit(Overloaded{[](const NullWaveform& w) { return Waveform(w); },
                               [](IdealSawtooth w) {
                                 w.sign = -w.sign;
                                 return Waveform(w);
                               },
                               [](RcRamp w) {
                                 w.sign = -w.sign;
                                 return Waveform(w);
                               }},
                    shape_);
}

void Waveform::validate() const {
  std::visit(Overloaded{[](const NullWaveform&) {},
                        [](const IdealSawtooth& w) {
                          if (!(w.frequency >= 0.0)) throw DomainError("ideal sawtooth: frequency must be >= 0");
                          if (w.sign != 1 && w.sign != -1) throw DomainError("ideal sawtooth: sign must be +1 or -1");
                          if (!std::isfinite(w.peak)) throw DomainError("ideal sawtooth: peak must be finite");
                        },
                        [](const RcRamp& w) {
                          if (!(w.frequency >= 0.0)) throw DomainError("rc ramp: frequency must be >= 0");
                          if (!(w.duty > 0.0 && w.duty < 1.0)) throw DomainError("rc ramp: duty must be in (0, 1)");
                          if (!(w.gamma > 0.0)) throw DomainError("rc ramp: gamma must be > 0");
                          if (!(w.rc > 0.0)) throw DomainError("rc ramp: rc must be > 0");
                          if (w.sign != 1 && w.sign != -1) throw DomainError("rc ramp: sign must be +1 or -1");
                        }},
             shape_);
}

bool ShifterPair::is_exact_counter() const noexcept {
  const auto* a = std::get_if<IdealSawtooth>(&first.shape());
  const auto* b = std::get_if<IdealSawtooth>(&second.shape());
  return a != nullptr && b != nullptr && a->frequency > 0.0 && a->frequency == b->frequency &&
         a->sign == -b->sign && a->peak == kTwoPi && b->peak == kTwoPi;
}

double ShifterPair::period() const {
  if (first.is_static()) return second.period();
  if (second.is_static()) return first.period();
  const double f1 = first.frequency();
  const double f2 = second.frequency();
  if (std::abs(f1 - f2) > 1e-12 * std::max(f1, f2)) {
    throw DomainError("shifter pair: the two ramps must share one frequency");
  }
  return 1.0 / f1;
}

double counter_phase(double v, double frequency, double l_shifters) {
  if (!(v > 0.0)) throw DomainError("counter_phase: velocity must be > 0");
  return -kTwoPi * frequency * l_shifters / v;
}

double pair_sum_phase(const Waveform& first, const Waveform& second, double t, double tau) {
  if (!(tau >= 0.0)) throw DomainError("pair_sum_phase: tau must be >= 0");
  return first.phase_at(t) + second.phase_at(t + tau);
}

std::complex<double> pair_time_average(const ShifterPair& pair, double tau) {
  if (pair.is_static()) return {1.0, 0.0};
  const double lag = tau + pair.offset;
  if (pair.is_exact_counter()) {
    const double f = pair.first.frequency();
    return std::polar(1.0, -pair.first.sign() * kTwoPi * f * lag);
  }
  const double period = pair.period();
  const auto breaks = merged_breaks(pair.first, pair.second, lag);
  return period_average<std::complex<double>>(period, breaks, [&](double t) {
    return std::polar(1.0, pair.first.phase_at(t) + pair.second.phase_at(t + lag));
  });
}

std::vector<double> pair_kink_lags(const ShifterPair& pair) {
  if (pair.is_static() || pair.is_exact_counter() || pair.first.is_static() || pair.second.is_static()) {
    return {};
  }
  const double period = pair.period();
  std::vector<double> lags;
  for (double a : pair.first.breakpoints()) {
    for (double b : pair.second.breakpoints()) {
      lags.push_back(reduce(b - a - pair.offset, period));
    }
  }
  std::sort(lags.begin(), lags.end());
  lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
  return lags;
}

double asymmetry_error(const Waveform& first, const Waveform& second) {
  if (first.is_static() && second.is_static()) return 0.0;
  const ShifterPair pair{first, second, 0.0};
  const double period = pair.period();
  const auto breaks = merged_breaks(first, second, 0.0);
  return period_average<double>(period, breaks,
                                [&](double t) { return first.phase_at(t) + second.phase_at(t); });
}

std::complex<double> first_harmonic(const Waveform& w) {
  if (w.is_null()) return {0.0, 0.0};
  const double f = w.frequency();
  if (!(f > 0.0)) throw DomainError("first_harmonic: frequency must be > 0");
  const double period = 1.0 / f;
  const double s = w.sign();
  const auto breaks = w.breakpoints();
  return period_average<std::complex<double>>(
      period, breaks, [&](double t) { return std::polar(1.0, w.phase_at(t) - s * kTwoPi * f * t); });
}

void ShifterGeometry::validate() const {
  if (!(radius > 0.0 && radius < ground_distance)) throw DomainError("shifter geometry: need 0 < r < a");
  if (!(path_separation > 0.0)) throw DomainError("shifter geometry: path separation must be > 0");
  if (!(path_distance > 0.0)) throw DomainError("shifter geometry: path distance must be > 0");
}

double cylinder_phase(const ShifterGeometry& geom, double cylinder_voltage, double v, double polarizability,
                      double prefactor) {
  geom.validate();
  if (!(v > 0.0)) throw DomainError("cylinder_phase: velocity must be > 0");
  const double log_term = std::log(2.0 * geom.ground_distance / geom.radius);
  return prefactor / (log_term * log_term) * polarizability * geom.path_separation * cylinder_voltage *
         cylinder_voltage / (v * geom.path_distance * geom.path_distance);
}

namespace {

struct RampProblem {
  double frequency;
  double duty;
};

double negative_harmonic(const gsl_vector* x, void* params) {
  const auto& p = *static_cast<const RampProblem*>(params);
  const double gamma = gsl_vector_get(x, 0);
  const double rc_cycles = gsl_vector_get(x, 1);
  if (!(gamma > 0.0) || !(rc_cycles > 0.0)) return 1.0;
  const auto w = Waveform::rc(p.frequency, p.duty, gamma, rc_cycles / p.frequency, +1);
  return -std::abs(first_harmonic(w));
}

}  // namespace

RcRampFit optimize_rc_ramp(double frequency, double duty, double gamma_start, double rc_start) {
  if (!(frequency > 0.0)) throw DomainError("optimize_rc_ramp: frequency must be > 0");
  if (!(duty > 0.0 && duty < 1.0)) throw DomainError("optimize_rc_ramp: duty must be in (0, 1)");
  if (!(rc_start > 0.0)) rc_start = 0.5 / frequency;

  RampProblem problem{frequency, duty};
  gsl_multimin_function fn{&negative_harmonic, 2, &problem};

  using VectorPtr = std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)>;
  VectorPtr x(gsl_vector_alloc(2), &gsl_vector_free);
  VectorPtr step(gsl_vector_alloc(2), &gsl_vector_free);
  gsl_vector_set(x.get(), 0, gamma_start);
  gsl_vector_set(x.get(), 1, rc_start * frequency);
  gsl_vector_set(step.get(), 0, 0.2 * gamma_start);
  gsl_vector_set(step.get(), 1, 0.2 * rc_start * frequency);

  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> solver(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2), &gsl_multimin_fminimizer_free);
  gsl_multimin_fminimizer_set(solver.get(), &fn, x.get(), step.get());

  int iter = 0;
  int status = GSL_CONTINUE;
  while (status == GSL_CONTINUE && iter < 2000) {
    ++iter;
    if (gsl_multimin_fminimizer_iterate(solver.get()) != GSL_SUCCESS) break;
    status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver.get()), 1e-10);
  }
  const gsl_vector* best = gsl_multimin_fminimizer_x(solver.get());
  RcRampFit fit;
  fit.gamma = gsl_vector_get(best, 0);
  fit.rc = gsl_vector_get(best, 1) / frequency;
  fit.first_harmonic = -gsl_multimin_fminimizer_minimum(solver.get());
  fit.iterations = iter;
  return fit;
}

}  // namespace dcomp
