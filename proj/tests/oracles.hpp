#pragma once

// Independent reference implementations for the tests. Nothing here calls the
// library's rate model: the dressed mode comes from diagonalising the 2x2
// atom-cavity matrix, roots from a dense uniform grid and stability from a
// fixed-step RK4 integration.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "recoil/config.hpp"

namespace oracle {

/// Lower normal mode of [[delta, g sqrt(N)], [g sqrt(N), 0]].
inline double lower_mode(double delta, double g, double n) {
  Eigen::Matrix2d h;
  const double c = g * std::sqrt(n);
  h << delta, c, c, 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline double rate(double n, double delta, const recoil::SystemParams& p) {
  const double n_c = p.excited_fraction_in_loop ? n * (1.0 - 2.0 * p.excited_fraction) : n;
  const double mode = lower_mode(delta, p.g, n_c);
  double m = 0.0;
  for (const auto& line : p.pump_lines) {
    const double x = 2.0 * (mode - line.detuning_hz - p.delta_rir) / p.gamma_rir;
    m += line.weight * p.m0 * n / (1.0 + x * x);
  }
  return p.loading_rate - p.gamma_loss * n - p.gamma_lasing * m * n;
}

/// Sign changes of the rate on `points` evenly spaced atom numbers over
/// [1, 2 R / gamma_loss], located by linear interpolation.
inline std::vector<double> brute_roots(double delta, const recoil::SystemParams& p, long points = 1'000'000) {
  const double lo = 1.0;
  const double hi = 2.0 * p.loading_rate / p.gamma_loss;
  const double h = (hi - lo) / static_cast<double>(points - 1);
  std::vector<double> roots;
  double n0 = lo;
  double f0 = rate(n0, delta, p);
  for (long i = 1; i < points; ++i) {
    const double n1 = lo + static_cast<double>(i) * h;
    const double f1 = rate(n1, delta, p);
    if (f0 == 0.0) roots.push_back(n0);
    else if ((f0 < 0.0) != (f1 < 0.0) && f1 != 0.0) roots.push_back(n0 + f0 / (f0 - f1) * (n1 - n0));
    n0 = n1;
    f0 = f1;
  }
  return roots;
}

/// Integrates dN/dt from `n0` for `t` seconds with `steps` RK4 steps.
inline double rk4(double n0, double delta, const recoil::SystemParams& p, double t, int steps) {
  const double dt = t / steps;
  double n = n0;
  for (int i = 0; i < steps; ++i) {
    const double k1 = rate(n, delta, p);
    const double k2 = rate(std::max(n + 0.5 * dt * k1, 0.0), delta, p);
    const double k3 = rate(std::max(n + 0.5 * dt * k2, 0.0), delta, p);
    const double k4 = rate(std::max(n + dt * k3, 0.0), delta, p);
    n = std::max(n + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), 0.0);
  }
  return n;
}

/// Perturbs the root both ways by eps = min(1 %, half the distance to the
/// neighbouring roots) and integrates for a few local relaxation times. The
/// root counts as stable when both perturbations decay. Entries of `all`
/// within 1e-6 relative of `root` are taken to be the root itself.
inline bool ode_stable(double root, double delta, const recoil::SystemParams& p, const std::vector<double>& all) {
  double gap = root;
  for (double r : all)
    if (std::abs(r - root) > 1e-6 * root) gap = std::min(gap, std::abs(r - root));
  const double eps = std::min(0.01 * root, 0.5 * gap);
  const double lambda = std::abs(rate(root + eps, delta, p) - rate(root - eps, delta, p)) / (2.0 * eps);
  const double t = 3.0 / std::max(lambda, 1e-12);
  const int steps = 600;
  bool decays = true;
  for (double sign : {-1.0, 1.0}) {
    const double end = rk4(root + sign * eps, delta, p, t, steps);
    decays = decays && std::abs(end - root) < 0.5 * eps;
  }
  return decays;
}

/// Default parameters with every rate constant scaled by an independent factor in [0.8, 1.2].
inline recoil::SystemParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> f(0.8, 1.2);
  auto p = recoil::default_params();
  p.loading_rate *= f(rng);
  p.gamma_loss *= f(rng);
  p.gamma_lasing *= f(rng);
  p.m0 *= f(rng);
  p.g *= f(rng);
  p.gamma_rir *= f(rng);
  p.delta_rir *= f(rng);
  for (auto& line : p.pump_lines) line.detuning_hz *= f(rng);
  return p;
}

}  // namespace oracle
