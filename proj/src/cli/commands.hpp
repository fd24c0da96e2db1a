#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "recoil/config.hpp"

namespace recoil::cli {

/// State shared by one invocation.
struct RunContext {
  std::string command;
  SystemParams params;
  std::optional<SweepSpec> sweep;
  std::filesystem::path out_dir;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::vector<std::filesystem::path> outputs;
  std::ostream* out = nullptr;

  /// out_dir / name, recorded for the manifest.
  std::filesystem::path output(const std::string& name);
};

struct GainCurveOptions {
  std::optional<double> temperature;
  std::optional<double> n_recoil;
  double df_min = -3e5;
  double df_max = 3e5;
  long points = 1201;
};

struct SweepOptions {
  std::optional<double> start;
  std::optional<double> end;
  std::optional<double> step;
  std::string direction = "both";
};

struct DynamicsOptions {
  double before = 0.0;
  double after = 0.0;
  double t_end = 0.05;
  std::optional<double> initial_n;
};

struct G2Options {
  std::optional<std::string> input;
  std::optional<double> record_duration;
  std::string gen = "poisson";
  double rate = 1.5e6;
  double duration = 1.0;
  double mod_freq = 1e4;
  double depth = 0.5;
  double coherence_time = 1e-6;
  double dead_time = 0.0;
  double bin = 300e-9;
  double tau_max = 2e-4;
  std::string zero_lag = "distinct";
  bool write_timetags = false;
};

struct SpectrumOptions {
  std::optional<std::string> input;
  double fwhm = 7e3;
  double f0 = 1e5;
  double duration = 1.0;
  double sample_rate = 1e6;
  long segment = 4096;
  double overlap = 0.5;
  bool write_field = false;
};

struct DopplerOptions {
  std::optional<double> velocity;
  std::optional<double> lattice_detuning;
  double v_max = 0.02;
  long points = 81;
};

void cmd_gain_curve(RunContext& ctx, const GainCurveOptions& opt);
void cmd_sweep(RunContext& ctx, const SweepOptions& opt);
void cmd_dynamics(RunContext& ctx, const DynamicsOptions& opt);
void cmd_g2(RunContext& ctx, const G2Options& opt);
void cmd_spectrum(RunContext& ctx, const SpectrumOptions& opt);
void cmd_doppler(RunContext& ctx, const DopplerOptions& opt);

}  // namespace recoil::cli
