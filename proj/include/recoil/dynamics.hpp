#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <ostream>
#include <string>

#include "recoil/config.hpp"
#include "recoil/equilibrium.hpp"

namespace recoil {

/// Bare cavity detuning (Hz) as a function of model time (s).
using DetuningSchedule = std::function<double(double)>;

DetuningSchedule constant_detuning(double delta_ca);

/// Sampled solution of dN/dt with M slaved to N.
struct Trajectory {
  Eigen::VectorXd t;
  Eigen::VectorXd n;
  Eigen::VectorXd m;
  Eigen::VectorXd delta_ca;
  Eigen::VectorXd delta_dressed;
  std::string schedule;
};

struct IntegrateOptions {
  double rel_tol = 1e-8;
  double max_step = 0.0;      // s; 0 means unbounded
  double initial_step = 0.0;  // s; 0 picks one from the local rate
  long max_steps = 5'000'000;
};

/// Adaptive Dormand-Prince 5(4) integration from N(0) = n0 to t_end. Steps
/// that would push N below zero, or carry N across a zero of dN/dt by more
/// than the local tolerance, are rejected and retried with a smaller step.
/// Throws NumericalError on step-size underflow.
Trajectory integrate(double n0, const DetuningSchedule& schedule, const SystemParams& params, double t_end,
                     double tol, std::string schedule_description = "custom");

Trajectory integrate(double n0, const DetuningSchedule& schedule, const SystemParams& params, double t_end,
                     const IntegrateOptions& options, std::string schedule_description = "custom");

struct SettleResult {
  double n;
  double t;  // model time needed, s
};

/// Integrates at fixed delta_ca until |dN/dt| / N < rel_rate * gamma_loss.
/// Throws NumericalError when that takes longer than max_time_factor / gamma_loss.
SettleResult settle(double n0, double delta_ca, const SystemParams& params, double rel_rate = 1e-9,
                    double max_time_factor = 1e4);

inline constexpr double kEarlyWindow = 200e-6;  // s

struct StepResponse {
  Trajectory trajectory;
  EquilibriumPoint initial;
  EquilibriumPoint settled;
  double early_dressed_shift = 0.0;    // dressed(kEarlyWindow) - dressed(0-)
  double max_early_excursion = 0.0;    // max |dressed(t) - dressed(0-)| for t < kEarlyWindow
  double steady_dressed_shift = 0.0;   // settled - initial
  bool changed_branch = false;         // settled root not continuously connected to the initial one
};

/// Starts on the stable equilibrium at `delta_before` nearest `initial_n`
/// (default R / gamma_loss), steps the cavity to `delta_after` at t = 0 and
/// integrates to t_end.
StepResponse step_response(double delta_before, double delta_after, const SystemParams& params, double t_end,
                           std::optional<double> initial_n = std::nullopt);

/// Columns: t_s, N, M, delta_dressed_hz.
void write_csv(std::ostream& os, const Trajectory& trajectory);

}  // namespace recoil
