#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "recoil/errors.hpp"
#include "recoil/photon_stats.hpp"

using namespace recoil;
using Catch::Approx;

namespace {

PhotonStream toy_stream() {
  // Bins of width 1: counts 1, 2, 1, 0.
  return {{0.5, 1.2, 1.7, 2.5}, 4.0, 0};
}

// Direct transcription of the estimator with plain loops.
std::vector<double> oracle_g2(const std::vector<long>& n, long tau_max, bool distinct) {
  const long i_max = static_cast<long>(n.size());
  std::vector<double> out;
  for (long tau = 0; tau <= tau_max; ++tau) {
    double num = 0.0, den = 0.0;
    for (long i = 0; i < i_max - tau; ++i) {
      num += static_cast<double>(n[i]) * static_cast<double>(n[i + tau] - (tau == 0 && distinct ? 1 : 0));
      den += static_cast<double>(n[i]);
    }
    out.push_back(num / (den * den) * static_cast<double>(i_max - tau));
  }
  return out;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << content;
  return path;
}

}  // namespace

TEST_CASE("hand-computed toy record", "[g2]") {
  const auto bins = bin_counts(toy_stream(), 1.0);
  REQUIRE(bins.i_max() == 4);
  CHECK(bins.counts[0] == 1);
  CHECK(bins.counts[1] == 2);
  CHECK(bins.counts[2] == 1);
  CHECK(bins.counts[3] == 0);

  const auto printed = g2_estimate(bins, 1, ZeroLag::printed);
  CHECK(printed.g2[0] == 1.5);
  CHECK(printed.g2[1] == 0.75);
  CHECK(printed.tau[1] == 1.0);

  // Distinct pairs: sum n(n-1) = 2, (2 / 16) * 4 = 0.5.
  const auto distinct = g2_estimate(bins, 1, ZeroLag::distinct_pairs);
  CHECK(distinct.g2[0] == 0.5);
  CHECK(distinct.g2[1] == 0.75);
}

TEST_CASE("estimator matches the loop oracle, direct and FFT paths", "[g2][oracle]") {
  std::mt19937_64 rng(4);
  for (long size : {50L, 1000L, 400000L}) {
    std::poisson_distribution<long> draw(1.7);
    BinnedCounts bins;
    bins.bin_width = 1e-6;
    bins.counts.resize(size);
    std::vector<long> raw(static_cast<std::size_t>(size));
    for (long i = 0; i < size; ++i) bins.counts[i] = raw[static_cast<std::size_t>(i)] = draw(rng);
    const long tau_max = std::min(size - 1, 80L);
    for (bool distinct : {false, true}) {
      const auto got = g2_estimate(bins, tau_max, distinct ? ZeroLag::distinct_pairs : ZeroLag::printed);
      const auto want = oracle_g2(raw, tau_max, distinct);
      for (long tau = 0; tau <= tau_max; ++tau) CHECK(got.g2[tau] == Approx(want[tau]).epsilon(1e-12));
    }
  }
}

TEST_CASE("undefined lags are flagged", "[g2]") {
  BinnedCounts bins;
  bins.bin_width = 1.0;
  bins.counts = CountVector::Zero(6);
  bins.counts[5] = 3;
  const auto r = g2_estimate(bins, 2);
  CHECK_FALSE(r.defined[1]);
  CHECK(std::isnan(r.g2[1]));
  CHECK(r.defined[0]);
  CHECK_THROWS_AS(g2_estimate(bins, 6), DomainError);
  CHECK_THROWS_AS(g2_estimate(bins, -1), DomainError);
}

TEST_CASE("binning is right-open and covers the record", "[g2]") {
  PhotonStream s{{0.0, 1.0, 2.0 - 1e-12, 2.0, 2.5}, 2.5000001, 0};
  const auto bins = bin_counts(s, 0.5);
  REQUIRE(bins.i_max() == 6);
  CHECK(bins.counts[0] == 1);
  CHECK(bins.counts[2] == 1);
  CHECK(bins.counts[3] == 1);
  CHECK(bins.counts[4] == 1);
  CHECK(bins.counts[5] == 1);
  CHECK(bins.counts.sum() == 5);
  // 0.1 s bins: 0.3 / 0.1 is 2.9999999999999996 in floating point
  PhotonStream edge{{0.3}, 1.0, 0};
  CHECK(bin_counts(edge, 0.1).counts[3] == 1);
  CHECK_THROWS_AS(bin_counts(s, 0.0), DomainError);
}

TEST_CASE("generators are reproducible and ordered", "[g2][property]") {
  const auto a = gen_poisson(1e5, 0.1, 42);
  const auto b = gen_poisson(1e5, 0.1, 42);
  const auto c = gen_poisson(1e5, 0.1, 43);
  CHECK(a.timestamps == b.timestamps);
  CHECK(a.timestamps != c.timestamps);
  for (const auto* s : {&a, &c}) {
    CHECK(std::is_sorted(s->timestamps.begin(), s->timestamps.end()));
    CHECK(std::adjacent_find(s->timestamps.begin(), s->timestamps.end()) == s->timestamps.end());
    CHECK(s->timestamps.back() < s->duration);
  }
  // Count is Poisson: mean 1e4, sd 100.
  CHECK(std::abs(static_cast<double>(a.timestamps.size()) - 1e4) < 500.0);
  CHECK_THROWS_AS(gen_poisson(-1.0, 1.0, 0), DomainError);
  CHECK_THROWS_AS(gen_modulated(1e5, 1e4, 1.5, 1.0, 0), DomainError);
  CHECK_THROWS_AS(gen_thermal(1e5, 0.0, 1.0, 0), DomainError);
}

TEST_CASE("Poisson light has g2 = 1", "[g2]") {
  const auto s = gen_poisson(1e6, 2.0, 9);
  const auto r = g2_estimate(bin_counts(s, 1e-6), 5);
  for (Eigen::Index k = 0; k <= 5; ++k) CHECK(r.g2[k] == Approx(1.0).margin(0.01));
}

TEST_CASE("chaotic light bunches", "[g2]") {
  const double tc = 10e-6;
  const auto s = gen_thermal(5e5, tc, 5.0, 12);
  const auto r = g2_estimate(bin_counts(s, 1e-6), 20);
  CHECK(r.g2[0] == Approx(2.0).margin(0.1));
  // Triangle correlation from the piecewise-constant intensity, smeared by the 1 us bins.
  CHECK(r.g2[5] == Approx(1.5).margin(0.1));
  CHECK(r.g2[15] == Approx(1.0).margin(0.05));
}

TEST_CASE("dead time removes close pairs", "[g2]") {
  const auto s = gen_poisson(1.5e6, 1.0, 5);
  const auto d = apply_dead_time(s, 22e-9);
  for (std::size_t i = 1; i < d.timestamps.size(); ++i) CHECK(d.timestamps[i] - d.timestamps[i - 1] >= 22e-9);
  CHECK(d.timestamps.size() < s.timestamps.size());
  // Non-paralyzable: expected kept rate r / (1 + r tau).
  const double kept = static_cast<double>(d.timestamps.size());
  CHECK(kept == Approx(1.5e6 / (1.0 + 1.5e6 * 22e-9)).epsilon(0.01));
  CHECK(g2_estimate(bin_counts(d, 30e-9), 0).g2[0] < 1.0);
  CHECK(apply_dead_time(s, 0.0).timestamps == s.timestamps);
}

TEST_CASE("time-tag files round-trip and report bad lines", "[g2][io]") {
  const auto s = gen_poisson(1e4, 0.05, 3);
  std::ostringstream os;
  write_timetags(os, s);
  const auto path = temp_file("recoil_tags.txt", "# header\n" + os.str());
  const auto back = read_timetags(path, 0.05);
  CHECK(back.timestamps == s.timestamps);
  CHECK(back.duration == 0.05);
  CHECK(read_timetags(path).duration > s.timestamps.back());

  auto error_line = [](const std::string& text) -> std::size_t {
    const auto p = temp_file("recoil_bad_tags.txt", text);
    try {
      read_timetags(p);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(error_line("0.1\n0.2\nx\n") == 3);
  CHECK(error_line("0.1\n\n0.05\n") == 3);
  CHECK(error_line("0.1\n0.1\n") == 2);
  CHECK(error_line("-1\n") == 1);
  CHECK_THROWS_AS(read_timetags(std::filesystem::temp_directory_path() / "does_not_exist.txt"), IoError);
  CHECK_THROWS_AS(read_timetags(path, 0.01), DomainError);
}

TEST_CASE("g2 CSV columns", "[g2][io]") {
  std::ostringstream os;
  write_csv(os, g2_estimate(bin_counts(toy_stream(), 1.0), 2, ZeroLag::printed));
  CHECK(os.str() == "tau_s,g2,defined_flag\n0,1.5,1\n1,0.75,1\n2,0.2222222222222222,1\n");
}
