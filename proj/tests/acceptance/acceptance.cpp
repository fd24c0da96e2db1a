// Acceptance checks: prints one PASS/FAIL line per criterion and exits
// nonzero when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "oracles.hpp"
#include "recoil/cavity.hpp"
#include "recoil/equilibrium.hpp"
#include "recoil/gain.hpp"
#include "recoil/photon_stats.hpp"
#include "recoil/rate_model.hpp"
#include "recoil/spectra.hpp"

using namespace recoil;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << std::setw(2) << id << "  " << name << "  ["
            << o.detail << "; " << std::fixed << std::setprecision(2) << secs << " s]" << std::endl;
  std::cout.unsetf(std::ios::fixed);
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

unsigned threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// Shared between criteria 4 and 5.
struct SweepAnalysis {
  SystemParams params = default_params();
  SweepSolution solution;
  std::vector<Branch> branches;
  HysteresisTrace up, down;
  const Branch* pinned = nullptr;
  const Branch* pulled = nullptr;
  double pinned_min_pc = 0.0;
  double pulled_median_pc = 0.0;
};

double median_abs_pulling(const Branch& b) {
  std::vector<double> v;
  for (const auto& s : pulling_coefficient(b)) v.push_back(std::abs(s.p_c));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
  return v[v.size() / 2];
}

double min_abs_pulling(const Branch& b) {
  double m = 1e300;
  for (const auto& s : pulling_coefficient(b)) m = std::min(m, std::abs(s.p_c));
  return m;
}

double branch_span(const Branch& b) { return std::abs(b.points.back().delta_ca - b.points.front().delta_ca); }

double min_depletion(const Branch& b, const SystemParams& p) {
  double m = 1e300;
  for (const auto& d : depletion(b, p)) m = std::min(m, d.fraction);
  return m;
}

SweepAnalysis analyse_sweep() {
  SweepAnalysis a;
  a.solution = solve_sweep({-6e6, 2e6, 1e3, SweepDirection::up}, a.params, threads());
  a.branches = link_branches(a.solution);
  a.up = classify_zones(hysteresis_walk(a.solution, SweepDirection::up, a.params), a.params);
  a.down = classify_zones(hysteresis_walk(a.solution, SweepDirection::down, a.params), a.params);

  // Pinned: the long stable branch with the weakest pulling somewhere along it.
  for (const auto& b : a.branches) {
    if (!b.stable || b.points.size() < 3 || branch_span(b) < 1e6) continue;
    const double pc = min_abs_pulling(b);
    if (!a.pinned || pc < a.pinned_min_pc) {
      a.pinned = &b;
      a.pinned_min_pc = pc;
    }
  }
  for (const auto& b : a.branches) {
    if (!b.stable || &b == a.pinned || b.points.size() < 3) continue;
    const double pc = median_abs_pulling(b);
    if (!a.pulled || pc > a.pulled_median_pc) {
      a.pulled = &b;
      a.pulled_median_pc = pc;
    }
  }
  return a;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

}  // namespace

int main() {
  criterion(1, "single-atom light shift 12(2) Hz", [] {
    const double u0 = single_atom_light_shift(3.5e3, 1e6, 7.5e3);
    return Outcome{std::abs(u0 - 12.0) <= 2.0 && std::abs(u0 - 12.2) < 0.1, "U0 = " + fmt(u0, 4) + " Hz"};
  });

  criterion(2, "unlased steady state R/gamma_loss", [] {
    const auto p = default_params();
    const double n = p.unlased_atom_number();
    const double rounded = std::round(n / 1e5) * 1e5;
    const bool exact = std::abs(n - 2e7 / 19.0) <= 1e-9 * n;
    return Outcome{exact && rounded == 1.1e6,
                   "R/gamma = " + fmt(n, 7) + " atoms, rounds to " + fmt(rounded, 2)};
  });

  criterion(3, "RIR gain peak at 10 uK in [42.5, 57.5] kHz", [] {
    const auto peak = rir_peak(1e-5);
    return Outcome{peak.delta_f_hz >= 42.5e3 && peak.delta_f_hz <= 57.5e3,
                   "argmax = " + fmt(peak.delta_f_hz / 1e3, 5) + " kHz"};
  });

  SweepAnalysis sweep;
  criterion(4, "zones, hysteresis, pinning and pulling over [-6, 2] MHz", [&] {
    const auto start = std::chrono::steady_clock::now();
    sweep = analyse_sweep();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const int zones_up = count_lasing_zones(sweep.up);
    const int zones_down = count_lasing_zones(sweep.down);
    const bool differing = sweep.up.jump_locations != sweep.down.jump_locations && !sweep.up.jump_locations.empty();
    const bool pinned = sweep.pinned && sweep.pinned_min_pc < 0.1;
    const bool pulled = sweep.pulled && sweep.pulled_median_pc >= 0.5;
    std::string detail = "zones up/down " + std::to_string(zones_up) + "/" + std::to_string(zones_down) +
                         ", jumps up " + std::to_string(sweep.up.jump_locations.size()) + " down " +
                         std::to_string(sweep.down.jump_locations.size());
    if (sweep.pinned)
      detail += ", pinned branch span " + fmt(branch_span(*sweep.pinned) / 1e6, 3) + " MHz min|p_c| " +
                fmt(sweep.pinned_min_pc, 3);
    if (sweep.pulled) detail += ", other branch median|p_c| " + fmt(sweep.pulled_median_pc, 3);
    detail += ", sweep " + fmt(secs, 3) + " s";
    return Outcome{zones_up >= 3 && zones_down >= 3 && differing && pinned && pulled && secs < 60.0, detail};
  });

  criterion(5, "pinning: dressed within Gamma_RIR of gain peak while N varies >= 2x", [&] {
    if (!sweep.pinned) return Outcome{false, "no pinned branch from criterion 4"};
    const auto& p = sweep.params;
    const auto& pts = sweep.pinned->points;
    double best_ratio = 0.0, best_lo = 0.0, best_hi = 0.0;
    std::string best_line;
    for (const auto& line : p.pump_lines) {
      const double centre = gain_centre(line, p);
      for (std::size_t i = 0; i < pts.size();) {
        if (std::abs(pts[i].delta_dressed - centre) > p.gamma_rir) {
          ++i;
          continue;
        }
        double n_min = pts[i].n_star, n_max = pts[i].n_star;
        std::size_t j = i;
        while (j < pts.size() && std::abs(pts[j].delta_dressed - centre) <= p.gamma_rir) {
          n_min = std::min(n_min, pts[j].n_star);
          n_max = std::max(n_max, pts[j].n_star);
          ++j;
        }
        if (n_max / n_min > best_ratio) {
          best_ratio = n_max / n_min;
          best_lo = pts[i].delta_ca;
          best_hi = pts[j - 1].delta_ca;
          best_line = line.label;
        }
        i = j;
      }
    }
    const double depl = min_depletion(*sweep.pinned, p);
    return Outcome{best_ratio >= 2.0 && depl < 0.5,
                   "N ratio " + fmt(best_ratio, 4) + " near the " + best_line + " gain peak over delta_ca [" +
                       fmt(best_lo / 1e6, 4) + ", " + fmt(best_hi / 1e6, 4) + "] MHz, min N/(R/gamma) " +
                       fmt(depl, 3)};
  });

  criterion(6, "find_equilibria vs 1e6-point brute force and ODE stability, 100 draws", [] {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> delta(-3e6, 2e6);
    int count_mismatch = 0, position_mismatch = 0, stability_mismatch = 0, multi = 0, roots_total = 0;
    double worst = 0.0;
    for (int draw = 0; draw < 100; ++draw) {
      const auto p = oracle::random_params(rng);
      const double d = delta(rng);
      const auto roots = find_equilibria(d, p);
      const auto reference = oracle::brute_roots(d, p, 1'000'000);
      if (roots.size() != reference.size()) {
        ++count_mismatch;
        continue;
      }
      if (roots.size() > 1) ++multi;
      for (std::size_t i = 0; i < roots.size(); ++i) {
        ++roots_total;
        const double rel = std::abs(roots[i].n_star - reference[i]) / reference[i];
        worst = std::max(worst, rel);
        if (rel > 1e-3) ++position_mismatch;
        if (roots[i].stable != oracle::ode_stable(roots[i].n_star, d, p, reference)) ++stability_mismatch;
      }
    }
    return Outcome{count_mismatch == 0 && position_mismatch == 0 && stability_mismatch == 0,
                   std::to_string(roots_total) + " roots (" + std::to_string(multi) +
                       " multistable draws), count/position/stability mismatches " +
                       std::to_string(count_mismatch) + "/" + std::to_string(position_mismatch) + "/" +
                       std::to_string(stability_mismatch) + ", worst rel err " + fmt(worst, 2)};
  });

  criterion(7, "g2 estimator: Poisson, dead time, toy record", [] {
    const auto poisson = gen_poisson(1.5e6, 10.0, 7);
    const double g0 = g2_estimate(bin_counts(poisson, 300e-9), 0).g2[0];

    const auto short_record = gen_poisson(1.5e6, 1.0, 8);
    const double g0_dead = g2_estimate(bin_counts(apply_dead_time(short_record, 22e-9), 30e-9), 0).g2[0];

    const PhotonStream toy{{0.5, 1.2, 1.7, 2.5}, 4.0, 0};
    const auto t = g2_estimate(bin_counts(toy, 1.0), 1, ZeroLag::printed);
    const bool toy_ok = t.g2[0] == 1.5 && t.g2[1] == 0.75;
    return Outcome{std::abs(g0 - 1.0) <= 0.05 && g0_dead < 1.0 && toy_ok,
                   "Poisson g2(0) = " + fmt(g0, 5) + ", dead-time g2(0) = " + fmt(g0_dead, 4) +
                       ", toy = " + fmt(t.g2[0]) + "/" + fmt(t.g2[1])};
  });

  criterion(8, "modulated light g2 = 1 + 0.125 cos(2 pi f tau)", [] {
    const double f = 1e4, bin = 2e-6, rate = 1e6, duration = 10.0;
    const auto stream = gen_modulated(rate, f, 0.5, duration, 9);
    const auto bins = bin_counts(stream, bin);
    const Eigen::Index lags = 60;  // 120 us, past one period
    const auto g2 = g2_estimate(bins, lags);

    // Block bootstrap of the statistical error.
    const int blocks = 20;
    const Eigen::Index per = bins.i_max() / blocks;
    std::vector<Eigen::VectorXd> block_g2;
    for (int k = 0; k < blocks; ++k) {
      BinnedCounts part;
      part.bin_width = bin;
      part.counts = bins.counts.segment(k * per, per);
      block_g2.push_back(g2_estimate(part, lags).g2);
    }
    bool within = true;
    std::string detail;
    for (Eigen::Index lag : {0, 12, 25, 38, 50}) {
      double mean = 0.0, var = 0.0;
      for (const auto& b : block_g2) mean += b[lag] / blocks;
      for (const auto& b : block_g2) var += (b[lag] - mean) * (b[lag] - mean) / (blocks - 1);
      const double sigma = std::sqrt(var / blocks);
      const double tau = static_cast<double>(lag) * bin;
      const double model = 1.0 + 0.125 * std::cos(kTwoPi * f * tau);
      const double z = (g2.g2[lag] - model) / sigma;
      within = within && std::abs(z) < 3.0;
      detail += "tau=" + fmt(tau * 1e6, 3) + "us z=" + fmt(z, 2) + " ";
    }
    // Oscillation frequency from a least-squares cosine scan over 5-20 kHz.
    double best_f = 0.0, best_score = -1e300;
    for (double trial = 5e3; trial <= 2e4; trial += 10.0) {
      double score = 0.0;
      for (Eigen::Index lag = 0; lag <= lags; ++lag)
        score += (g2.g2[lag] - 1.0) * std::cos(kTwoPi * trial * static_cast<double>(lag) * bin);
      if (score > best_score) {
        best_score = score;
        best_f = trial;
      }
    }
    const double period_us = 1e6 / best_f;
    detail += "period " + fmt(period_us, 4) + " us";
    return Outcome{within && std::abs(period_us - 100.0) < 3.0, detail};
  });

  criterion(9, "7 kHz Lorentzian recovered; pure tone resolution-limited", [] {
    std::vector<double> widths;
    bool each = true;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto fit = fit_lorentzian_fwhm(estimate_psd(synth_field(7e3, 1e5, 1.0, 1e6, seed), 4096));
      widths.push_back(fit.fwhm);
      each = each && std::abs(fit.fwhm / 7e3 - 1.0) <= 0.15;
    }
    std::vector<double> sorted = widths;
    std::sort(sorted.begin(), sorted.end());
    const double median = 0.5 * (sorted[9] + sorted[10]);
    const auto tone = fit_lorentzian_fwhm(estimate_psd(synth_field(0.0, 1e5, 1.0, 1e6, 1), 4096));
    return Outcome{each && std::abs(median / 7e3 - 1.0) <= 0.10 && tone.resolution_limited,
                   "range [" + fmt(sorted.front(), 5) + ", " + fmt(sorted.back(), 5) + "] Hz, median " +
                       fmt(median, 5) + " Hz, tone fwhm " + fmt(tone.fwhm, 4) + " Hz flagged " +
                       (tone.resolution_limited ? "yes" : "no")};
  });

  criterion(10, "Doppler difference 2 v / lambda", [] {
    const auto d = doppler_difference(0.01);
    const double closed = 2.0 * 0.01 / 689e-9;
    bool symmetric = true;
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> v(-0.01, 0.01);
    for (int i = 0; i < 1000; ++i) {
      const double a = v(rng), b = v(rng);
      symmetric = symmetric && doppler_difference(-a).delta_f_hz == -doppler_difference(a).delta_f_hz;
      symmetric = symmetric && std::abs(doppler_difference(a + b).delta_f_hz - doppler_difference(a).delta_f_hz -
                                        doppler_difference(b).delta_f_hz) < 1e-6;
    }
    return Outcome{std::abs(d.delta_f_hz / closed - 1.0) <= 1e-3 && std::abs(d.delta_f_hz / 29.0e3 - 1.0) <= 1e-3 &&
                       symmetric,
                   "delta_f(0.01 m/s) = " + fmt(d.delta_f_hz, 6) + " Hz, closed form " + fmt(closed, 6) + " Hz"};
  });

  criterion(11, "repeated CLI runs with a fixed seed are byte-identical", [] {
    const fs::path root = fs::temp_directory_path() / "recoil_acceptance_determinism";
    fs::remove_all(root);
    const std::vector<std::string> commands = {
        "gain-curve",
        "sweep --start -3e6 --end 1e6 --step 1e4",
        "dynamics --before -1e6 --after -1.1e6",
        "g2 --gen modulated --duration 1 --bin 1e-6",
        "spectrum --fwhm 7e3 --duration 0.5",
        "doppler",
    };
    for (const char* run : {"a", "b"}) {
      for (const auto& c : commands) {
        const std::string line = std::string(RECOIL_LASE_EXE) + " --seed 1234 --out-dir " + (root / run).string() +
                                 " " + c + " > /dev/null 2>&1";
        if (std::system(line.c_str()) != 0) return Outcome{false, "command failed: " + c};
      }
    }
    int compared = 0, differing = 0;
    for (const auto& entry : fs::directory_iterator(root / "a")) {
      if (entry.path().extension() != ".csv") continue;
      ++compared;
      if (slurp(entry.path()) != slurp(root / "b" / entry.path().filename())) ++differing;
    }
    return Outcome{compared >= 7 && differing == 0,
                   std::to_string(compared) + " CSV files compared, " + std::to_string(differing) + " differ"};
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
