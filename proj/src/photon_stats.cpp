#include "recoil/photon_stats.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <random>
#include <string>

#include "recoil/constants.hpp"
#include "recoil/csv.hpp"
#include "recoil/errors.hpp"

namespace recoil {

namespace {

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) throw DomainError(std::string(what) + " must be > 0");
}

/// Appends Poisson arrivals of constant `rate` over [t0, t1).
void append_poisson(std::vector<double>& out, double rate, double t0, double t1, std::mt19937_64& rng) {
  if (rate <= 0.0) return;
  std::exponential_distribution<double> gap(rate);
  double t = t0 + gap(rng);
  while (t < t1) {
    if (out.empty() || t > out.back()) out.push_back(t);
    t += gap(rng);
  }
}

/// Lag products c[tau] = sum_i n_i n_{i+tau} for tau = 0..tau_max, exact for
/// integer counts. Long records are correlated blockwise with FFTs.
std::vector<double> lag_products(const Eigen::VectorXd& n, Eigen::Index tau_max) {
  const Eigen::Index size = n.size();
  std::vector<double> c(static_cast<std::size_t>(tau_max) + 1, 0.0);
  if (static_cast<double>(size) * static_cast<double>(tau_max + 1) < 2e7) {
    for (Eigen::Index tau = 0; tau <= tau_max; ++tau)
      c[static_cast<std::size_t>(tau)] = n.head(size - tau).dot(n.segment(tau, size - tau));
    return c;
  }

  Eigen::Index fft_size = 1 << 14;
  while (fft_size < 4 * (tau_max + 1)) fft_size *= 2;
  const Eigen::Index block = fft_size - tau_max;
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> a(fft_size), b(fft_size), fa, fb, prod(fft_size), corr;
  for (Eigen::Index start = 0; start < size; start += block) {
    std::fill(a.begin(), a.end(), 0.0);
    std::fill(b.begin(), b.end(), 0.0);
    for (Eigen::Index i = 0; i < block && start + i < size; ++i) a[i] = n[start + i];
    for (Eigen::Index i = 0; i < fft_size && start + i < size; ++i) b[i] = n[start + i];
    fft.fwd(fa, a);
    fft.fwd(fb, b);
    for (Eigen::Index k = 0; k < fft_size; ++k) prod[k] = std::conj(fa[k]) * fb[k];
    fft.inv(corr, prod);
    for (Eigen::Index tau = 0; tau <= tau_max; ++tau) c[static_cast<std::size_t>(tau)] += std::round(corr[tau].real());
  }
  return c;
}

}  // namespace

PhotonStream gen_poisson(double rate, double duration, std::uint64_t seed) {
  require_positive(rate, "rate");
  require_positive(duration, "duration");
  PhotonStream s{{}, duration, seed};
  s.timestamps.reserve(static_cast<std::size_t>(rate * duration * 1.01 + 16));
  std::mt19937_64 rng(seed);
  append_poisson(s.timestamps, rate, 0.0, duration, rng);
  return s;
}

PhotonStream gen_modulated(double rate, double mod_freq, double depth, double duration, std::uint64_t seed) {
  require_positive(rate, "rate");
  require_positive(duration, "duration");
  if (!(mod_freq >= 0.0)) throw DomainError("mod_freq must be >= 0");
  if (!(depth >= 0.0 && depth <= 1.0)) throw DomainError("depth must lie in [0, 1]");
  PhotonStream s{{}, duration, seed};
  const double peak = rate * (1.0 + depth);
  s.timestamps.reserve(static_cast<std::size_t>(rate * duration * 1.01 + 16));
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gap(peak);
  std::uniform_real_distribution<double> accept(0.0, 1.0);
  for (double t = gap(rng); t < duration; t += gap(rng)) {
    const double intensity = rate * (1.0 + depth * std::sin(kTwoPi * mod_freq * t));
    if (accept(rng) * peak < intensity && (s.timestamps.empty() || t > s.timestamps.back()))
      s.timestamps.push_back(t);
  }
  return s;
}

PhotonStream gen_thermal(double rate, double coherence_time, double duration, std::uint64_t seed) {
  require_positive(rate, "rate");
  require_positive(coherence_time, "coherence_time");
  require_positive(duration, "duration");
  PhotonStream s{{}, duration, seed};
  s.timestamps.reserve(static_cast<std::size_t>(rate * duration * 1.05 + 16));
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> intensity(1.0);
  for (double t0 = 0.0; t0 < duration; t0 += coherence_time) {
    const double level = rate * intensity(rng);
    append_poisson(s.timestamps, level, t0, std::min(t0 + coherence_time, duration), rng);
  }
  return s;
}

PhotonStream apply_dead_time(const PhotonStream& stream, double dead_time) {
  if (!(dead_time >= 0.0)) throw DomainError("dead_time must be >= 0");
  PhotonStream out{{}, stream.duration, stream.seed};
  out.timestamps.reserve(stream.timestamps.size());
  for (double t : stream.timestamps)
    if (out.timestamps.empty() || t - out.timestamps.back() >= dead_time) out.timestamps.push_back(t);
  return out;
}

BinnedCounts bin_counts(const PhotonStream& stream, double bin_width) {
  require_positive(bin_width, "bin_width");
  BinnedCounts bins;
  bins.bin_width = bin_width;
  const auto i_max = static_cast<Eigen::Index>(std::ceil(stream.duration / bin_width));
  bins.counts = CountVector::Zero(std::max<Eigen::Index>(i_max, 1));
  for (double t : stream.timestamps) {
    // Edge timestamps belong to the bin they open, up to rounding in t / w.
    const double x = t / bin_width;
    const double nearest = std::round(x);
    const double snapped = std::abs(x - nearest) <= 4.0 * std::numeric_limits<double>::epsilon() * nearest ? nearest : x;
    auto k = static_cast<Eigen::Index>(std::floor(snapped));
    k = std::clamp<Eigen::Index>(k, 0, bins.counts.size() - 1);
    ++bins.counts[k];
  }
  return bins;
}

G2Result g2_estimate(const BinnedCounts& bins, Eigen::Index tau_max_bins, ZeroLag zero_lag) {
  const Eigen::Index i_max = bins.i_max();
  if (tau_max_bins < 0 || tau_max_bins >= i_max)
    throw DomainError("tau_max_bins must lie in [0, i_max)");
  const Eigen::VectorXd n = bins.counts.cast<double>();

  G2Result r;
  r.tau.resize(tau_max_bins + 1);
  r.g2.resize(tau_max_bins + 1);
  r.defined.assign(static_cast<std::size_t>(tau_max_bins + 1), false);

  // Prefix sums give the truncated denominator sum_{i <= i_max - tau} n_i.
  std::vector<double> prefix(static_cast<std::size_t>(i_max) + 1, 0.0);
  for (Eigen::Index i = 0; i < i_max; ++i) prefix[i + 1] = prefix[i] + n[i];

  const auto products = lag_products(n, tau_max_bins);
  for (Eigen::Index tau = 0; tau <= tau_max_bins; ++tau) {
    const Eigen::Index len = i_max - tau;
    double numerator = products[static_cast<std::size_t>(tau)];
    if (tau == 0 && zero_lag == ZeroLag::distinct_pairs) numerator -= prefix[len];
    const double denominator = prefix[len];
    r.tau[tau] = static_cast<double>(tau) * bins.bin_width;
    if (denominator > 0.0) {
      r.g2[tau] = numerator / (denominator * denominator) * static_cast<double>(len);
      r.defined[static_cast<std::size_t>(tau)] = true;
    } else {
      r.g2[tau] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return r;
}

PhotonStream read_timetags(const std::filesystem::path& path, std::optional<double> duration) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open time-tag file '" + path.string() + "'");
  PhotonStream s;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    if (view.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const auto value = parse_number(view);
    if (!value || !std::isfinite(*value) || *value < 0.0)
      throw ParseError("malformed timestamp '" + line + "'", line_no);
    if (!s.timestamps.empty() && !(*value > s.timestamps.back()))
      throw ParseError("timestamps must be strictly increasing", line_no);
    s.timestamps.push_back(*value);
  }
  if (is.bad()) throw IoError("read error on '" + path.string() + "'");
  if (duration) {
    require_positive(*duration, "duration");
    if (!s.timestamps.empty() && !(s.timestamps.back() < *duration))
      throw DomainError("duration must exceed the last timestamp");
    s.duration = *duration;
  } else {
    s.duration = s.timestamps.empty() ? 0.0
                                      : std::nextafter(s.timestamps.back(), std::numeric_limits<double>::infinity());
  }
  return s;
}

void write_timetags(std::ostream& os, const PhotonStream& stream) {
  for (double t : stream.timestamps) os << format_number(t) << '\n';
}

void write_csv(std::ostream& os, const G2Result& result) {
  write_csv_header(os, {"tau_s", "g2", "defined_flag"});
  for (Eigen::Index i = 0; i < result.tau.size(); ++i)
    os << format_number(result.tau[i]) << ',' << format_number(result.g2[i]) << ','
       << (result.defined[static_cast<std::size_t>(i)] ? 1 : 0) << '\n';
}

}  // namespace recoil
