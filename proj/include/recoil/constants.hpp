#pragma once

namespace recoil {

/// CODATA values; frequencies elsewhere in the library are ordinary (Hz).
struct PhysicalConstants {
  static constexpr double hbar = 1.054571817e-34;   // J s
  static constexpr double k_B = 1.380649e-23;       // J/K
  static constexpr double amu = 1.66053906660e-27;  // kg
  static constexpr double m_sr88 = 88.0 * amu;      // kg
  static constexpr double lambda_689 = 689e-9;      // m, 1S0-3P1 intercombination line
  static constexpr double lambda_813 = 813e-9;      // m, magic-wavelength lattice
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

}  // namespace recoil
