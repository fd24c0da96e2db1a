#include "recoil/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "recoil/csv.hpp"
#include "recoil/errors.hpp"
#include "recoil/rate_model.hpp"

namespace recoil {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

class RateStepper {
 public:
  RateStepper(const DetuningSchedule& schedule, const SystemParams& params, double rel_tol, double max_step)
      : schedule_(schedule), params_(params), tol_(rel_tol), max_step_(max_step) {}

  double rate(double t, double n) const { return atom_rate(std::max(n, 0.0), schedule_(t), params_); }

  double initial_step(double t, double n, double t_end) const {
    const double f = std::abs(rate(t, n));
    const double scale = std::max(n, 1.0);
    double h = f > 0.0 ? 1e-3 * scale / f : t_end - t;
    h = std::clamp(h, 1e-12, t_end - t);
    if (max_step_ > 0.0) h = std::min(h, max_step_);
    return h;
  }

  /// One accepted step from (t, n) not beyond t_limit; updates h to the
  /// suggested next step. Returns the rate at the new point.
  double advance(double& t, double& n, double& h, double f0, double t_limit) {
    const double h_floor = 1e-14 * std::max(1.0, std::abs(t));
    for (int attempt = 0;; ++attempt) {
      h = std::min(h, t_limit - t);
      if (max_step_ > 0.0) h = std::min(h, max_step_);
      if (h < h_floor || attempt > 200) {
        std::ostringstream msg;
        msg << "integrate: step size underflow at t = " << t << " s, N = " << n << " (h = " << h
            << " s, dN/dt = " << f0 << " /s); the rate equation is too stiff for the requested tolerance";
        throw NumericalError(msg.str());
      }
      const double k1 = f0;
      const double k2 = rate(t + c2 * h, n + h * a21 * k1);
      const double k3 = rate(t + c3 * h, n + h * (a31 * k1 + a32 * k2));
      const double k4 = rate(t + c4 * h, n + h * (a41 * k1 + a42 * k2 + a43 * k3));
      const double k5 = rate(t + c5 * h, n + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const double k6 = rate(t + h, n + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      const double n_new = n + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const double k7 = rate(t + h, n_new);
      const double err_abs = std::abs(h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7));
      const double scale = tol_ * std::max({std::abs(n), std::abs(n_new), 1.0});
      const double err = err_abs / scale;

      const bool negative = n_new < 0.0;
      const bool crossed = sign_of(k7) != 0 && sign_of(f0) != 0 && sign_of(k7) != sign_of(f0) &&
                           std::abs(n_new - n) > scale;
      if (err <= 1.0 && !negative && !crossed) {
        t += h;
        n = n_new;
        const double factor = err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
        h *= factor;
        return k7;
      }
      const double factor = err > 1.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.5) : 0.5;
      h *= factor;
    }
  }

 private:
  const DetuningSchedule& schedule_;
  const SystemParams& params_;
  double tol_;
  double max_step_;
};

}  // namespace

DetuningSchedule constant_detuning(double delta_ca) {
  return [delta_ca](double) { return delta_ca; };
}

Trajectory integrate(double n0, const DetuningSchedule& schedule, const SystemParams& params, double t_end,
                     double tol, std::string schedule_description) {
  IntegrateOptions options;
  options.rel_tol = tol;
  return integrate(n0, schedule, params, t_end, options, std::move(schedule_description));
}

Trajectory integrate(double n0, const DetuningSchedule& schedule, const SystemParams& params, double t_end,
                     const IntegrateOptions& options, std::string schedule_description) {
  if (!(n0 >= 0.0)) throw DomainError("integrate: N0 must be >= 0");
  if (!(t_end > 0.0)) throw DomainError("integrate: t_end must be > 0");
  if (!(options.rel_tol > 0.0)) throw DomainError("integrate: tolerance must be > 0");

  RateStepper stepper(schedule, params, options.rel_tol, options.max_step);
  std::vector<double> ts{0.0};
  std::vector<double> ns{n0};
  double t = 0.0;
  double n = n0;
  double f = stepper.rate(t, n);
  double h = options.initial_step > 0.0 ? options.initial_step : stepper.initial_step(t, n, t_end);
  long steps = 0;
  while (t < t_end) {
    if (++steps > options.max_steps) throw NumericalError("integrate: exceeded maximum number of steps");
    f = stepper.advance(t, n, h, f, t_end);
    if (t_end - t < 1e-12 * t_end) t = t_end;
    ts.push_back(t);
    ns.push_back(n);
  }

  Trajectory traj;
  const auto count = static_cast<Eigen::Index>(ts.size());
  traj.t = Eigen::Map<const Eigen::VectorXd>(ts.data(), count);
  traj.n = Eigen::Map<const Eigen::VectorXd>(ns.data(), count);
  traj.m.resize(count);
  traj.delta_ca.resize(count);
  traj.delta_dressed.resize(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const double d = schedule(traj.t[i]);
    traj.delta_ca[i] = d;
    traj.m[i] = photon_number(traj.n[i], d, params);
    traj.delta_dressed[i] = dressed_detuning(traj.n[i], d, params);
  }
  traj.schedule = std::move(schedule_description);
  return traj;
}

SettleResult settle(double n0, double delta_ca, const SystemParams& params, double rel_rate,
                    double max_time_factor) {
  const auto schedule = constant_detuning(delta_ca);
  const double t_limit = max_time_factor / params.gamma_loss;
  const double threshold = rel_rate * params.gamma_loss;
  RateStepper stepper(schedule, params, 1e-11, 0.0);
  double t = 0.0;
  double n = n0;
  double f = stepper.rate(t, n);
  double h = stepper.initial_step(t, n, t_limit);
  while (!(n > 0.0 && std::abs(f) / n < threshold)) {
    if (t >= t_limit) {
      std::ostringstream msg;
      msg << "settle: no equilibrium reached within " << t_limit << " s at delta_ca = " << delta_ca
          << " Hz (N = " << n << ", dN/dt = " << f << " /s)";
      throw NumericalError(msg.str());
    }
    f = stepper.advance(t, n, h, f, t_limit);
  }
  return {n, t};
}

StepResponse step_response(double delta_before, double delta_after, const SystemParams& params, double t_end,
                           std::optional<double> initial_n) {
  if (!(t_end > 0.0)) throw DomainError("step_response: t_end must be > 0");
  const double target = initial_n.value_or(params.unlased_atom_number());
  const auto roots = find_equilibria(delta_before, params);
  const EquilibriumPoint* start = nullptr;
  for (const auto& r : roots)
    if (r.stable && (!start || std::abs(r.n_star - target) < std::abs(start->n_star - target))) start = &r;
  if (!start) throw DomainError("step_response: no stable equilibrium at the initial detuning");

  StepResponse out;
  out.initial = *start;

  // Resolve the early window finely, then let the step size grow.
  IntegrateOptions early;
  early.max_step = kEarlyWindow / 100.0;
  const double t_early = std::min(kEarlyWindow, t_end);
  auto schedule = constant_detuning(delta_after);
  std::ostringstream desc;
  desc << "step " << format_number(delta_before) << " -> " << format_number(delta_after) << " Hz at t=0";
  Trajectory first = integrate(start->n_star, schedule, params, t_early, early, desc.str());

  out.early_dressed_shift = first.delta_dressed[first.delta_dressed.size() - 1] - start->delta_dressed;
  out.max_early_excursion = (first.delta_dressed.array() - start->delta_dressed).abs().maxCoeff();

  if (t_end > t_early) {
    const double n_mid = first.n[first.n.size() - 1];
    IntegrateOptions late;
    Trajectory rest = integrate(n_mid, schedule, params, t_end - t_early, late, desc.str());
    const Eigen::Index a = first.t.size();
    const Eigen::Index b = rest.t.size() - 1;  // drop the duplicated joint sample
    Trajectory joined;
    joined.t.resize(a + b);
    joined.n.resize(a + b);
    joined.m.resize(a + b);
    joined.delta_ca.resize(a + b);
    joined.delta_dressed.resize(a + b);
    joined.t << first.t, (rest.t.tail(b).array() + t_early).matrix();
    joined.n << first.n, rest.n.tail(b);
    joined.m << first.m, rest.m.tail(b);
    joined.delta_ca << first.delta_ca, rest.delta_ca.tail(b);
    joined.delta_dressed << first.delta_dressed, rest.delta_dressed.tail(b);
    joined.schedule = desc.str();
    out.trajectory = std::move(joined);
  } else {
    out.trajectory = std::move(first);
  }

  const double n_end = out.trajectory.n[out.trajectory.n.size() - 1];
  const auto after_roots = find_equilibria(delta_after, params);
  const EquilibriumPoint* landed = nullptr;
  for (const auto& r : after_roots)
    if (r.stable && (!landed || std::abs(r.n_star - n_end) < std::abs(landed->n_star - n_end))) landed = &r;
  out.settled = landed ? *landed : make_equilibrium_point(n_end, delta_after, params);
  out.steady_dressed_shift = out.settled.delta_dressed - out.initial.delta_dressed;

  // Quasi-static continuation of the initial root; a different end point
  // means the step carried the system past the end of its branch.
  if (delta_after != delta_before) {
    SweepSpec walk;
    walk.delta_ca_start = delta_before;
    walk.delta_ca_end = delta_after;
    walk.step = std::min(1e3, std::abs(delta_after - delta_before) / 10.0);
    walk.direction = delta_after > delta_before ? SweepDirection::up : SweepDirection::down;
    HysteresisOptions walk_options;
    walk_options.initial_n = start->n_star;
    HysteresisTrace trace = hysteresis_walk(solve_sweep(walk, params), walk.direction, params, walk_options);
    const double continued = trace.points.back().n;
    out.changed_branch = !trace.jump_locations.empty() ||
                         std::abs(continued - out.settled.n_star) > 1e-6 * out.settled.n_star;
  }
  return out;
}

void write_csv(std::ostream& os, const Trajectory& trajectory) {
  write_csv_header(os, {"t_s", "N", "M", "delta_dressed_hz"});
  for (Eigen::Index i = 0; i < trajectory.t.size(); ++i)
    os << format_number(trajectory.t[i]) << ',' << format_number(trajectory.n[i]) << ','
       << format_number(trajectory.m[i]) << ',' << format_number(trajectory.delta_dressed[i]) << '\n';
}

}  // namespace recoil
