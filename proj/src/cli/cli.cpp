#include <CLI11.hpp>

#include <chrono>
#include <functional>
#include <iostream>
#include <system_error>
#include <thread>

#include "commands.hpp"
#include "recoil/cli.hpp"
#include "recoil/csv.hpp"
#include "recoil/errors.hpp"

namespace recoil {

namespace {

struct GlobalOptions {
  std::optional<std::string> config;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

void prepare_out_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory '" + dir.string() + "'" + (ec ? ": " + ec.message() : ""));
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Recoil-gain lasing model: equilibria, dynamics and photon statistics", "recoil-lase"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--config", global.config, "INI config file (default: $" + std::string(kConfigEnvVar) + ")");
  app.add_option("--out-dir", global.out_dir, "Directory for CSV/JSON outputs")->capture_default_str();
  app.add_option("--seed", global.seed, "RNG seed for generated data")->capture_default_str();
  app.add_option("--threads", global.threads, "Worker threads (0: all cores)")->capture_default_str();

  std::function<void(cli::RunContext&)> action;

  cli::GainCurveOptions gain;
  auto* gain_cmd = app.add_subcommand("gain-curve", "Sample the recoil gain curve and locate its peak");
  gain_cmd->add_option("--temperature", gain.temperature, "Radial temperature, K");
  gain_cmd->add_option("--n-recoil", gain.n_recoil, "Recoil order");
  gain_cmd->add_option("--df-min", gain.df_min, "Lowest frequency difference, Hz")->capture_default_str();
  gain_cmd->add_option("--df-max", gain.df_max, "Highest frequency difference, Hz")->capture_default_str();
  gain_cmd->add_option("--points", gain.points, "Grid points")->capture_default_str();
  gain_cmd->callback([&] { action = [&](cli::RunContext& c) { cli::cmd_gain_curve(c, gain); }; });

  cli::SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Equilibrium branches, hysteresis and zones over a detuning sweep");
  sweep_cmd->add_option("--start", sweep.start, "First cavity detuning, Hz");
  sweep_cmd->add_option("--end", sweep.end, "Last cavity detuning, Hz");
  sweep_cmd->add_option("--step", sweep.step, "Detuning step, Hz");
  sweep_cmd->add_option("--direction", sweep.direction, "up, down or both")
      ->check(CLI::IsMember({"up", "down", "both"}))
      ->capture_default_str();
  sweep_cmd->callback([&] { action = [&](cli::RunContext& c) { cli::cmd_sweep(c, sweep); }; });

  cli::DynamicsOptions dyn;
  auto* dyn_cmd = app.add_subcommand("dynamics", "Response of N and the dressed cavity to a detuning step");
  dyn_cmd->add_option("--before", dyn.before, "Cavity detuning before the step, Hz")->required();
  dyn_cmd->add_option("--after", dyn.after, "Cavity detuning after the step, Hz")->required();
  dyn_cmd->add_option("--t-end", dyn.t_end, "Integration time, s")->capture_default_str();
  dyn_cmd->add_option("--initial-n", dyn.initial_n, "Start on the stable root nearest this atom number");
  dyn_cmd->callback([&] { action = [&](cli::RunContext& c) { cli::cmd_dynamics(c, dyn); }; });

  cli::G2Options g2;
  auto* g2_cmd = app.add_subcommand("g2", "Second-order correlation of a photon record");
  g2_cmd->add_option("--input", g2.input, "Time-tag file, one timestamp (s) per line; overrides --gen");
  g2_cmd->add_option("--record-duration", g2.record_duration, "Record length for --input, s");
  g2_cmd->add_option("--gen", g2.gen, "Generator: poisson, modulated or thermal")
      ->check(CLI::IsMember({"poisson", "modulated", "thermal"}))
      ->capture_default_str();
  g2_cmd->add_option("--rate", g2.rate, "Mean count rate, 1/s")->capture_default_str();
  g2_cmd->add_option("--duration", g2.duration, "Generated record length, s")->capture_default_str();
  g2_cmd->add_option("--mod-freq", g2.mod_freq, "Modulation frequency, Hz")->capture_default_str();
  g2_cmd->add_option("--depth", g2.depth, "Modulation depth")->capture_default_str();
  g2_cmd->add_option("--coherence-time", g2.coherence_time, "Thermal coherence time, s")->capture_default_str();
  g2_cmd->add_option("--dead-time", g2.dead_time, "Detector dead time, s")->capture_default_str();
  g2_cmd->add_option("--bin", g2.bin, "Bin width, s")->capture_default_str();
  g2_cmd->add_option("--tau-max", g2.tau_max, "Largest lag, s")->capture_default_str();
  g2_cmd->add_option("--zero-lag", g2.zero_lag, "Zero-lag numerator: distinct or printed")
      ->check(CLI::IsMember({"distinct", "printed"}))
      ->capture_default_str();
  g2_cmd->add_flag("--write-timetags", g2.write_timetags, "Also write the (dead-time filtered) record");
  g2_cmd->callback([&] { action = [&](cli::RunContext& c) { cli::cmd_g2(c, g2); }; });

  cli::SpectrumOptions spec;
  auto* spec_cmd = app.add_subcommand("spectrum", "Power spectrum and Lorentzian linewidth of a beat note");
  spec_cmd->add_option("--input", spec.input, "Field file written by --write-field");
  spec_cmd->add_option("--fwhm", spec.fwhm, "Injected Lorentzian FWHM, Hz")->capture_default_str();
  spec_cmd->add_option("--f0", spec.f0, "Beat frequency, Hz")->capture_default_str();
  spec_cmd->add_option("--duration", spec.duration, "Record length, s")->capture_default_str();
  spec_cmd->add_option("--sample-rate", spec.sample_rate, "Sample rate, 1/s")->capture_default_str();
  spec_cmd->add_option("--segment", spec.segment, "Welch segment length, samples")->capture_default_str();
  spec_cmd->add_option("--overlap", spec.overlap, "Welch segment overlap fraction")->capture_default_str();
  spec_cmd->add_flag("--write-field", spec.write_field, "Also write the synthesized field");
  spec_cmd->callback([&] { action = [&](cli::RunContext& c) { cli::cmd_spectrum(c, spec); }; });

  cli::DopplerOptions dop;
  auto* dop_cmd = app.add_subcommand("doppler", "Counter-propagating frequency difference from transport velocity");
  auto* v_opt = dop_cmd->add_option("--velocity", dop.velocity, "Transport velocity, m/s (default 0.01)");
  dop_cmd->add_option("--lattice-detuning", dop.lattice_detuning, "Moving-lattice detuning, Hz")->excludes(v_opt);
  dop_cmd->add_option("--v-max", dop.v_max, "Velocity range of the CSV, m/s")->capture_default_str();
  dop_cmd->add_option("--points", dop.points, "Velocity points in the CSV")->capture_default_str();
  dop_cmd->callback([&] { action = [&](cli::RunContext& c) { cli::cmd_doppler(c, dop); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const auto started = std::chrono::steady_clock::now();
  cli::RunContext ctx;
  ctx.command = app.get_subcommands().front()->get_name();
  ctx.out = &out;
  ctx.seed = global.seed;
  ctx.threads = global.threads > 0 ? global.threads : std::max(1u, std::thread::hardware_concurrency());
  ctx.out_dir = global.out_dir;

  auto write_run_manifest = [&] {
    RunManifest m;
    m.command = ctx.command;
    m.params_digest = params_digest(ctx.params);
    m.seed = ctx.seed;
    m.output_paths = ctx.outputs;
    m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    auto os = open_output(ctx.out_dir / (ctx.command + ".manifest.json"));
    write_manifest(os, m);
  };

  bool context_ready = false;
  try {
    if (const auto path = resolve_config_path(global.config)) {
      auto file = read_config(*path);
      ctx.params = std::move(file.params);
      ctx.sweep = file.sweep;
    } else {
      ctx.params = default_params();
    }
    prepare_out_dir(ctx.out_dir);
    context_ready = true;
    action(ctx);
    write_run_manifest();
    return kExitOk;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    if (context_ready) {
      try {
        write_run_manifest();
      } catch (const std::exception&) {
      }
    }
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace recoil
