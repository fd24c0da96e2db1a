#pragma once

#include <Eigen/Core>
#include <cmath>
#include <ostream>

#include "recoil/constants.hpp"
#include "recoil/errors.hpp"

namespace recoil {

// Recoil-induced-resonance gain of a thermal 88Sr cloud.
//
// Sign convention: delta_f is the red shift of the emitted photon below the
// absorbed pump photon, so the gain lobe (emission into lower frequency while
// the atom climbs the momentum ladder) lies at delta_f > 0.

namespace detail {

template <typename Scalar>
void require_positive(Scalar value, const char* what) {
  if (!(value > Scalar(0))) throw DomainError(std::string(what) + " must be > 0");
}

/// Thermal velocity spread sqrt(k_B T / m).
template <typename Scalar>
Scalar thermal_velocity(Scalar temperature) {
  using std::sqrt;
  return sqrt(Scalar(PhysicalConstants::k_B) * temperature / Scalar(PhysicalConstants::m_sr88));
}

/// Half of the recoil velocity n hbar k / m.
template <typename Scalar>
Scalar half_recoil_velocity(Scalar lambda, Scalar n) {
  return n * Scalar(kPi * PhysicalConstants::hbar / PhysicalConstants::m_sr88) / lambda;
}

}  // namespace detail

/// One-dimensional Maxwell-Boltzmann momentum density of 88Sr, in s/(kg m).
template <typename Scalar>
Scalar mb_density(Scalar p, Scalar temperature) {
  using std::exp;
  using std::sqrt;
  detail::require_positive(temperature, "temperature");
  const Scalar sigma_p =
      sqrt(Scalar(PhysicalConstants::m_sr88)) * sqrt(Scalar(PhysicalConstants::k_B) * temperature);
  const Scalar u = p / sigma_p;
  return exp(Scalar(-0.5) * u * u) / (Scalar(std::sqrt(kTwoPi)) * sigma_p);
}

/// Recoil gain density at red shift `delta_f` (Hz) for emission wavelength
/// `lambda` and `n` photon recoils per process. Odd in delta_f.
template <typename Scalar>
Scalar rir_gain(Scalar delta_f, Scalar temperature, Scalar lambda, Scalar n) {
  using std::exp;
  detail::require_positive(temperature, "temperature");
  detail::require_positive(lambda, "lambda");
  detail::require_positive(n, "n_recoil");
  const Scalar sigma_v = detail::thermal_velocity(temperature);
  const Scalar a = detail::half_recoil_velocity(lambda, n);
  const Scalar v = lambda * delta_f / n;
  const Scalar lo = (v - a) / sigma_v;
  const Scalar hi = (v + a) / sigma_v;
  const Scalar prefactor = lambda / (n * Scalar(std::sqrt(kTwoPi)) * sigma_v);
  return prefactor * (exp(Scalar(-0.5) * lo * lo) - exp(Scalar(-0.5) * hi * hi));
}

/// Coefficient-wise gain over an array of red shifts.
template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1> rir_gain(
    const Eigen::ArrayBase<Derived>& delta_f, typename Derived::Scalar temperature,
    typename Derived::Scalar lambda, typename Derived::Scalar n) {
  using Scalar = typename Derived::Scalar;
  detail::require_positive(temperature, "temperature");
  detail::require_positive(lambda, "lambda");
  detail::require_positive(n, "n_recoil");
  const Scalar sigma_v = detail::thermal_velocity(temperature);
  const Scalar a = detail::half_recoil_velocity(lambda, n);
  const Scalar prefactor = lambda / (n * Scalar(std::sqrt(kTwoPi)) * sigma_v);
  const auto v = (lambda / n) * delta_f.derived();
  const auto lo = (v - a) / sigma_v;
  const auto hi = (v + a) / sigma_v;
  return prefactor * ((Scalar(-0.5) * lo.square()).exp() - (Scalar(-0.5) * hi.square()).exp());
}

struct GainPeak {
  double delta_f_hz;
  double gain;
};

/// Golden-section maximum of the positive lobe, to 1 Hz.
GainPeak rir_peak(double temperature, double lambda = PhysicalConstants::lambda_689, double n = 1.0);

/// Full width at half maximum of the positive lobe.
double positive_lobe_fwhm(double temperature, double lambda = PhysicalConstants::lambda_689,
                          double n = 1.0);

struct GainCurve {
  Eigen::VectorXd delta_f;  // Hz, strictly increasing
  Eigen::VectorXd gain;
  double temperature = 0.0;
  double n_recoil = 1.0;
  double lambda = PhysicalConstants::lambda_689;
};

GainCurve sample_gain_curve(double temperature, double lambda, double n,
                            const Eigen::Ref<const Eigen::VectorXd>& grid);

/// Evenly spaced grid of `points` values over [lo, hi].
Eigen::VectorXd linear_grid(double lo, double hi, Eigen::Index points);

/// Columns: delta_f_hz, gain.
void write_csv(std::ostream& os, const GainCurve& curve);

}  // namespace recoil
