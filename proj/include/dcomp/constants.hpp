#pragma once

#include <numbers>

namespace dcomp {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// CODATA 2018
inline constexpr double kHbar = 1.054571817e-34;          // J s
inline constexpr double kPlanck = 6.62607015e-34;         // J s
inline constexpr double kVacuumPermittivity = 8.8541878128e-12;  // F/m

/// Converts a volume polarizability in cubic angstroms to SI (C m^2 / V):
/// alpha_SI = 4 pi eps0 * alpha_A3 * 1e-30.
inline constexpr double kAngstrom3ToSi = 4.0 * std::numbers::pi * kVacuumPermittivity * 1e-30;

/// Sodium ground-state polarizability, 24.1 A^3, in SI.
inline constexpr double kSodiumPolarizability = 2.68e-39;

/// Grating wavevector for 100 nm period gratings.
inline constexpr double kDefaultGratingWavevector = kTwoPi / 100e-9;

}  // namespace dcomp
