#pragma once

#include <numbers>

namespace twodes {

// Energies are in eV, times in fs. Rates are quoted as energies (Gamma), so a
// rate in 1/fs is Gamma / kHbar.
inline constexpr double kHbar = 0.6582119569;          // eV fs
inline constexpr double kHbarC = 197.3269804;           // eV nm
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kMeV = 1e-3;                    // eV

/// Vacuum wavelength in nm of a photon with energy `energy_ev`.
inline double wavelength_nm(double energy_ev) { return kTwoPi * kHbarC / energy_ev; }

}  // namespace twodes
