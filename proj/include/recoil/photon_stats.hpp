#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

namespace recoil {

/// Photon detection times in seconds, strictly increasing, within [0, duration).
struct PhotonStream {
  std::vector<double> timestamps;
  double duration = 0.0;
  std::uint64_t seed = 0;
};

PhotonStream gen_poisson(double rate, double duration, std::uint64_t seed);

/// Intensity rate * (1 + depth sin(2 pi mod_freq t)), generated by thinning.
PhotonStream gen_modulated(double rate, double mod_freq, double depth, double duration, std::uint64_t seed);

/// Chaotic light: piecewise-constant intensity drawn from an exponential
/// distribution of mean `rate` and redrawn every `coherence_time`. Its
/// intensity correlation is 1 + max(0, 1 - tau / coherence_time).
PhotonStream gen_thermal(double rate, double coherence_time, double duration, std::uint64_t seed);

/// Non-paralyzable dead time: an event is kept iff it arrives at least
/// `dead_time` after the last kept event.
PhotonStream apply_dead_time(const PhotonStream& stream, double dead_time);

using CountVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// Counts in consecutive bins [k w, (k + 1) w); i_max = ceil(duration / w).
struct BinnedCounts {
  double bin_width = 0.0;
  CountVector counts;

  Eigen::Index i_max() const { return counts.size(); }
};

BinnedCounts bin_counts(const PhotonStream& stream, double bin_width);

/// How the zero-lag numerator treats a bin's coincidences with itself.
enum class ZeroLag {
  /// sum n_i^2, as in the printed estimator; includes each photon paired with itself.
  printed,
  /// sum n_i (n_i - 1): pairs of distinct photons only. Poisson light gives
  /// g2(0) = 1 and dead-time losses pull it below one.
  distinct_pairs,
};

struct G2Result {
  Eigen::VectorXd tau;   // s, integer multiples of the bin width
  Eigen::VectorXd g2;    // NaN where undefined
  std::vector<bool> defined;
};

/// g2(tau) = [sum_{i<=i_max-tau} n_i n_{i+tau}] / [sum_{i<=i_max-tau} n_i]^2 * (i_max - tau)
/// for tau = 0 .. tau_max_bins. A zero denominator marks the lag undefined.
G2Result g2_estimate(const BinnedCounts& bins, Eigen::Index tau_max_bins,
                     ZeroLag zero_lag = ZeroLag::distinct_pairs);

/// One timestamp per line, seconds; '#' comments and blank lines skipped.
/// Throws ParseError with the offending line number. When `duration` is not
/// given it is taken just past the last timestamp.
PhotonStream read_timetags(const std::filesystem::path& path, std::optional<double> duration = std::nullopt);
void write_timetags(std::ostream& os, const PhotonStream& stream);

/// Columns: tau_s, g2, defined_flag.
void write_csv(std::ostream& os, const G2Result& result);

}  // namespace recoil
