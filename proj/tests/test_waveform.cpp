#include <doctest.h>

#include <cmath>
#include <complex>

#include "dcomp/constants.hpp"
#include "dcomp/errors.hpp"
#include "dcomp/waveform.hpp"
#include "oracles.hpp"

using namespace dcomp;
using doctest::Approx;

namespace {

oracle::Ramp ideal_ramp(double f, int sign, double peak = 2.0 * oracle::pi) {
  oracle::Ramp r;
  r.kind = oracle::Ramp::ideal;
  r.f = f;
  r.sign = sign;
  r.peak = peak;
  return r;
}

oracle::Ramp rc_ramp(double f, double gamma, double rc, int sign, double duty = 0.9) {
  oracle::Ramp r;
  r.kind = oracle::Ramp::rc_filtered;
  r.f = f;
  r.sign = sign;
  r.gamma = gamma;
  r.rc = rc;
  r.duty = duty;
  return r;
}

}  // namespace

TEST_CASE("ideal sawtooth phase") {
  const double f = 17e3;
  const auto w = Waveform::ideal(f, +1);
  CHECK(w.phase_at(1.0 / (4.0 * f)) == Approx(kPi / 2.0));
  CHECK(w.phase_at(1.0 / f) == Approx(0.0).scale(1.0));
  CHECK(Waveform::ideal(f, -1).phase_at(1.0 / (4.0 * f)) == Approx(-kPi / 2.0));
  CHECK(Waveform::ideal(0.0, +1).phase_at(0.3) == 0.0);
  CHECK(Waveform{}.phase_at(0.3) == 0.0);
  CHECK_THROWS_AS(Waveform::ideal(-1.0, +1), DomainError);
  CHECK_THROWS_AS(Waveform::ideal(1.0, 0), DomainError);
}

TEST_CASE("rc ramp phase") {
  const double f = 40e3;
  const auto w = Waveform::rc(f, 0.9, 0.83 * kPi, 1.0 / (2.4 * f), +1);
  const double end = 0.9 / f * (1.0 - 1e-12);
  const double expected = 0.83 * kPi * std::pow(1.0 - std::exp(-2.16), 2);
  CHECK(w.phase_at(end) == Approx(expected).epsilon(1e-9));
  CHECK(w.phase_at(end) == Approx(2.04).epsilon(2e-3));
  CHECK(w.phase_at(0.95 / f) == 0.0);  // diode reset
  CHECK(w.phase_at(0.0) == 0.0);
  // Literal rc * f = 2.4 barely rises.
  CHECK(Waveform::rc(f, 0.9, 0.83 * kPi, 2.4 / f, +1).phase_at(end) == Approx(0.255).epsilon(5e-3));

  CHECK_THROWS_AS(Waveform::rc(f, 1.0, 1.0, 1e-5, +1), DomainError);
  CHECK_THROWS_AS(Waveform::rc(f, 0.5, 0.0, 1e-5, +1), DomainError);
  CHECK_THROWS_AS(Waveform::rc(f, 0.5, 1.0, 0.0, +1), DomainError);
}

TEST_CASE("phase_at is periodic") {
  const double f = 12.5e3;
  for (const auto& w : {Waveform::ideal(f, +1), Waveform::ideal(f, -1), Waveform::rc(f, 0.9, 2.6, 3e-5, +1)}) {
    for (double t : {1.3e-6, 2.71e-5, 6.5e-5}) {
      CHECK(w.phase_at(t) == Approx(w.phase_at(t + 1.0 / f)).epsilon(1e-9));
      CHECK(w.phase_at(t) == Approx(w.phase_at(t + 7.0 / f)).epsilon(1e-9));
    }
  }
}

TEST_CASE("counter_phase") {
  CHECK(counter_phase(1722.6, 17e3, 1.0) == Approx(-62.0).epsilon(1e-3));
  CHECK(counter_phase(1722.6, 17e3, 1.0) == Approx(-2.0 * oracle::pi * 17e3 / 1722.6).epsilon(1e-14));
  CHECK(counter_phase(1000.0, 0.0, 1.0) == 0.0);
  CHECK(counter_phase(1745.0, 40e3, 1.0) == Approx(-144.0).epsilon(1e-3));
  CHECK_THROWS_AS(counter_phase(0.0, 1.0, 1.0), DomainError);
}

TEST_CASE("pair_sum_phase") {
  const double f = 10e3;
  const auto up = Waveform::ideal(f, +1);
  const auto down = Waveform::ideal(f, -1);
  for (double t : {0.0, 1.7e-5, 3.3e-5, 8.9e-5}) {
    CHECK(std::remainder(pair_sum_phase(up, down, t, 0.0), kTwoPi) == Approx(0.0).scale(1.0));
    CHECK(std::remainder(pair_sum_phase(up, down, t, 0.5e-3), kTwoPi) == Approx(0.0).scale(1.0));
  }
  // Constant in t, equal to -2 pi f tau mod 2 pi.
  const double tau = 0.537e-3;
  for (double t : {0.0, 1.7e-5, 3.3e-5, 8.9e-5}) {
    const double d = std::remainder(pair_sum_phase(up, down, t, tau) + kTwoPi * f * tau, kTwoPi);
    CHECK(d == Approx(0.0).scale(1.0).epsilon(1e-9));
  }
  // RC pairs leave a time-dependent residual.
  const auto a = Waveform::rc(f, 0.9, 0.83 * kPi, 1.0 / (2.4 * f), +1);
  const auto b = a.mirrored();
  const double p0 = pair_sum_phase(a, b, 1e-5, 0.37e-4);
  const double p1 = pair_sum_phase(a, b, 4e-5, 0.37e-4);
  CHECK(std::abs(p0 - p1) > 0.1);
  CHECK_THROWS_AS(pair_sum_phase(up, down, 0.0, -1e-6), DomainError);
}

TEST_CASE("pair_time_average agrees with a brute-force average") {
  const double f = 17e3;
  const double gamma = 0.83 * kPi;
  const double rc = 1.0 / (2.4 * f);
  const ShifterPair pair{Waveform::rc(f, 0.9, gamma, rc, +1), Waveform::rc(f, 0.9, gamma * 1.01, rc, -1), 3e-6};
  for (double tau : {0.0, 1.1e-5, 5.8e-4}) {
    const auto got = pair_time_average(pair, tau);
    const auto want = oracle::time_average(rc_ramp(f, gamma, rc, +1), rc_ramp(f, gamma * 1.01, rc, -1), tau, 3e-6,
                                           400000);
    CHECK(std::abs(got - want) < 2e-5);
  }
  const ShifterPair ideal{Waveform::ideal(f, +1), Waveform::ideal(f, -1, 2.0 * kPi * 0.97), 0.0};
  for (double tau : {0.0, 2.9e-5}) {
    const auto want = oracle::time_average(ideal_ramp(f, +1), ideal_ramp(f, -1, 2.0 * oracle::pi * 0.97), tau, 0.0,
                                           400000);
    CHECK(std::abs(pair_time_average(ideal, tau) - want) < 2e-5);
  }
  // Exact counter pair: unit phasor at the counter phase.
  const auto exact = ShifterPair::counter(Waveform::ideal(f, +1));
  const double tau = 1.0 / 1722.6;
  CHECK(std::abs(pair_time_average(exact, tau) - std::polar(1.0, counter_phase(1722.6, f, 1.0))) < 1e-12);
}

TEST_CASE("asymmetry_error") {
  const double f = 40e3;
  const auto w = Waveform::rc(f, 0.9, 0.83 * kPi, 1.0 / (2.4 * f), +1);
  CHECK(std::abs(asymmetry_error(w, w.mirrored())) < 1e-12);
  CHECK(std::abs(asymmetry_error(Waveform::ideal(f, +1), Waveform::ideal(f, -1))) < 1e-12);
  const double eps = 0.01;
  const double err = asymmetry_error(Waveform::ideal(f, +1), Waveform::ideal(f, -1, kTwoPi * (1.0 + eps)));
  CHECK(err == Approx(-kTwoPi * eps / 2.0).epsilon(1e-9));
  CHECK(err == Approx(-0.0314).epsilon(1e-3));
  CHECK_THROWS_AS(asymmetry_error(Waveform::ideal(f, +1), Waveform::ideal(2 * f, -1)), DomainError);

  // Antisymmetric under flipping both signs.
  const auto a = Waveform::rc(f, 0.9, 2.5, 1e-5, +1);
  const auto b = Waveform::rc(f, 0.9, 2.7, 1.2e-5, -1);
  CHECK(asymmetry_error(a.mirrored(), b.mirrored()) == Approx(-asymmetry_error(a, b)).epsilon(1e-12));
}

TEST_CASE("first_harmonic") {
  const double f = 40e3;
  CHECK(std::abs(first_harmonic(Waveform::ideal(f, +1))) == Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(first_harmonic(Waveform::ideal(f, -1))) == Approx(1.0).epsilon(1e-12));
  CHECK(first_harmonic(Waveform{}) == std::complex<double>{0.0, 0.0});
  CHECK(std::abs(first_harmonic(Waveform::ideal(f, +1, 0.9 * kTwoPi))) < 1.0 - 1e-3);

  // Both readings of the quoted RC constant, against a fine midpoint rule.
  const double gamma = 0.83 * kPi;
  for (double rc : {1.0 / (2.4 * f), 2.4 / f}) {
    const auto got = first_harmonic(Waveform::rc(f, 0.9, gamma, rc, +1));
    const auto want = oracle::first_harmonic(rc_ramp(f, gamma, rc, +1));
    CHECK(std::abs(got - want) < 1e-6);
    CHECK(std::abs(got) < 1.0 - 1e-3);
  }
  CHECK(std::abs(first_harmonic(Waveform::rc(f, 0.9, gamma, 1.0 / (2.4 * f), +1))) == Approx(0.4946).epsilon(1e-3));
  CHECK(std::abs(first_harmonic(Waveform::rc(f, 0.9, gamma, 2.4 / f, +1))) == Approx(0.0466).epsilon(1e-2));
}

TEST_CASE("optimize_rc_ramp improves on the quoted parameters") {
  const double f = 40e3;
  const auto fit = optimize_rc_ramp(f, 0.9);
  const double quoted = std::abs(first_harmonic(Waveform::rc(f, 0.9, 0.83 * kPi, 1.0 / (2.4 * f), +1)));
  CHECK(fit.first_harmonic > quoted);
  CHECK(fit.first_harmonic < 1.0);
  CHECK(fit.first_harmonic == Approx(std::abs(first_harmonic(Waveform::rc(f, 0.9, fit.gamma, fit.rc, +1)))));
  CHECK(fit.first_harmonic == Approx(0.979).epsilon(2e-3));
  // Scale-free in f.
  const auto slow = optimize_rc_ramp(f / 4.0, 0.9);
  CHECK(slow.rc * f / 4.0 == Approx(fit.rc * f).epsilon(1e-4));
}

TEST_CASE("cylinder_phase") {
  const ShifterGeometry g{0.5e-3, 1.5e-3, 50e-6, 1.0e-3};
  const double hbar = 1.054571817e-34;
  const double l = std::log(2.0 * 1.5e-3 / 0.5e-3);
  const double want = oracle::pi / (2.0 * hbar) / (l * l) * 2.68e-39 * 50e-6 * 2000.0 * 2000.0 / (1700.0 * 1e-6);
  CHECK(cylinder_phase(g, 2000.0, 1700.0, 2.68e-39) == Approx(want).epsilon(1e-12));
  CHECK(cylinder_phase(g, 2000.0, 1700.0, 2.68e-39) == Approx(1.46).epsilon(5e-3));
  CHECK(cylinder_phase(g, 0.0, 1700.0, 2.68e-39) == 0.0);
  CHECK(cylinder_phase(g, 4000.0, 1700.0, 2.68e-39) == Approx(4.0 * cylinder_phase(g, 2000.0, 1700.0, 2.68e-39)));
  CHECK(cylinder_phase(g, 2000.0, 850.0, 2.68e-39) == Approx(2.0 * cylinder_phase(g, 2000.0, 1700.0, 2.68e-39)));
  CHECK(cylinder_phase(g, 2000.0, 1700.0, 2.68e-39, 1.0) ==
        Approx(cylinder_phase(g, 2000.0, 1700.0, 2.68e-39) / (oracle::pi / (2.0 * hbar))));
  CHECK_THROWS_AS(cylinder_phase(g, 2000.0, 0.0, 2.68e-39), DomainError);
  CHECK_THROWS_AS(cylinder_phase(ShifterGeometry{2e-3, 1.5e-3, 50e-6, 1e-3}, 1.0, 1.0, 1.0), DomainError);
}
