#include "recoil/gain.hpp"

#include <sstream>

#include "recoil/csv.hpp"

namespace recoil {

namespace {

constexpr double kInvPhi = 0.6180339887498949;  // (sqrt(5) - 1) / 2

double search_upper_bound(double temperature, double lambda, double n) {
  return 20.0 * n * detail::thermal_velocity(temperature) / lambda;
}

/// Bisection for gain(x) = level on a monotone interval.
double half_level_crossing(double lo, double hi, double level, double temperature, double lambda,
                           double n) {
  const bool rising = rir_gain(hi, temperature, lambda, n) > rir_gain(lo, temperature, lambda, n);
  for (int i = 0; i < 200 && hi - lo > 1e-6; ++i) {
    const double mid = 0.5 * (lo + hi);
    const bool above = rir_gain(mid, temperature, lambda, n) > level;
    if (above == rising) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

GainPeak rir_peak(double temperature, double lambda, double n) {
  detail::require_positive(temperature, "temperature");
  detail::require_positive(lambda, "lambda");
  detail::require_positive(n, "n_recoil");

  const double upper = search_upper_bound(temperature, lambda, n);
  double a = 0.0;
  double b = upper;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = rir_gain(c, temperature, lambda, n);
  double fd = rir_gain(d, temperature, lambda, n);
  int iterations = 0;
  while (b - a > 1.0) {
    if (++iterations > 500) {
      std::ostringstream msg;
      msg << "rir_peak: golden-section search did not converge (bracket [" << a << ", " << b
          << "] Hz after " << iterations << " iterations)";
      throw NumericalError(msg.str());
    }
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = rir_gain(c, temperature, lambda, n);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = rir_gain(d, temperature, lambda, n);
    }
  }
  const double x = 0.5 * (a + b);
  const double peak = rir_gain(x, temperature, lambda, n);
  if (upper - x < 1.0 || !(peak > 0.0)) {
    std::ostringstream msg;
    msg << "rir_peak: maximum not interior to (0, " << upper << "] Hz (found " << x
        << " Hz, gain " << peak << ")";
    throw NumericalError(msg.str());
  }
  return {x, peak};
}

double positive_lobe_fwhm(double temperature, double lambda, double n) {
  const auto peak = rir_peak(temperature, lambda, n);
  const double half = 0.5 * peak.gain;
  const double left = half_level_crossing(0.0, peak.delta_f_hz, half, temperature, lambda, n);
  const double right = half_level_crossing(peak.delta_f_hz, search_upper_bound(temperature, lambda, n),
                                           half, temperature, lambda, n);
  return right - left;
}

GainCurve sample_gain_curve(double temperature, double lambda, double n,
                            const Eigen::Ref<const Eigen::VectorXd>& grid) {
  if (grid.size() == 0) throw DomainError("sample_gain_curve: empty grid");
  for (Eigen::Index i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw DomainError("sample_gain_curve: grid must be strictly increasing");
  GainCurve curve;
  curve.delta_f = grid;
  curve.gain = rir_gain(grid.array(), temperature, lambda, n).matrix();
  curve.temperature = temperature;
  curve.n_recoil = n;
  curve.lambda = lambda;
  return curve;
}

Eigen::VectorXd linear_grid(double lo, double hi, Eigen::Index points) {
  if (points < 1) throw DomainError("linear_grid: need at least one point");
  if (points == 1) return Eigen::VectorXd::Constant(1, lo);
  if (!(hi > lo)) throw DomainError("linear_grid: hi must exceed lo");
  return Eigen::VectorXd::LinSpaced(points, lo, hi);
}

void write_csv(std::ostream& os, const GainCurve& curve) {
  write_csv_header(os, {"delta_f_hz", "gain"});
  for (Eigen::Index i = 0; i < curve.delta_f.size(); ++i)
    os << format_number(curve.delta_f[i]) << ',' << format_number(curve.gain[i]) << '\n';
}

}  // namespace recoil
