#include "commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "recoil/csv.hpp"
#include "recoil/dynamics.hpp"
#include "recoil/equilibrium.hpp"
#include "recoil/errors.hpp"
#include "recoil/gain.hpp"
#include "recoil/photon_stats.hpp"
#include "recoil/spectra.hpp"

namespace recoil::cli {

using json = nlohmann::ordered_json;

std::filesystem::path RunContext::output(const std::string& name) {
  auto path = out_dir / name;
  outputs.push_back(path);
  return path;
}

namespace {

template <class Fn>
void write_file(const std::filesystem::path& path, Fn&& fn, bool binary = false) {
  auto os = open_output(path, binary);
  fn(os);
  os.close();
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

void emit_summary(RunContext& ctx, const std::string& name, const json& summary) {
  const auto text = summary.dump(2);
  write_file(ctx.output(name), [&](std::ostream& os) { os << text << '\n'; });
  *ctx.out << text << '\n';
}

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

double median_abs(std::vector<double> v) {
  for (auto& x : v) x = std::abs(x);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
  return v[v.size() / 2];
}

json zone_table(const HysteresisTrace& trace) {
  json j;
  j["lasing_zone_count"] = count_lasing_zones(trace);
  j["jump_locations_hz"] = trace.jump_locations;
  auto& zones = j["zones"] = json::array();
  for (const auto& z : summarize_zones(trace)) {
    zones.push_back({{"zone_id", z.id},
                     {"delta_ca_begin_hz", z.delta_ca_begin},
                     {"delta_ca_end_hz", z.delta_ca_end},
                     {"dressed_min_hz", z.dressed_min},
                     {"dressed_max_hz", z.dressed_max},
                     {"n_min_atoms", z.n_min},
                     {"n_max_atoms", z.n_max},
                     {"mean_pulling", z.mean_pulling}});
  }
  return j;
}

}  // namespace

void cmd_gain_curve(RunContext& ctx, const GainCurveOptions& opt) {
  if (opt.temperature) ctx.params.temperature = *opt.temperature;
  if (opt.n_recoil) ctx.params.n_recoil = *opt.n_recoil;
  require(opt.points >= 2, "--points must be at least 2");
  require(opt.df_max > opt.df_min, "--df-max must exceed --df-min");

  const double lambda = PhysicalConstants::lambda_689;
  const auto grid = linear_grid(opt.df_min, opt.df_max, opt.points);
  const auto curve = sample_gain_curve(ctx.params.temperature, lambda, ctx.params.n_recoil, grid);
  const auto peak = rir_peak(ctx.params.temperature, lambda, ctx.params.n_recoil);
  write_file(ctx.output("gain_curve.csv"), [&](std::ostream& os) { write_csv(os, curve); });

  json s;
  s["temperature_k"] = ctx.params.temperature;
  s["n_recoil"] = ctx.params.n_recoil;
  s["peak_hz"] = peak.delta_f_hz;
  s["peak_gain"] = peak.gain;
  s["positive_lobe_fwhm_hz"] = positive_lobe_fwhm(ctx.params.temperature, lambda, ctx.params.n_recoil);
  s["points"] = opt.points;
  emit_summary(ctx, "gain_curve.json", s);
}

void cmd_sweep(RunContext& ctx, const SweepOptions& opt) {
  SweepSpec spec = ctx.sweep.value_or(SweepSpec{});
  if (opt.start) spec.delta_ca_start = *opt.start;
  if (opt.end) spec.delta_ca_end = *opt.end;
  if (opt.step) spec.step = *opt.step;
  require(std::isfinite(spec.delta_ca_start) && std::isfinite(spec.delta_ca_end), "sweep bounds must be finite");
  require(spec.delta_ca_start != spec.delta_ca_end, "degenerate sweep window: start equals end");
  require(spec.step > 0.0 && std::isfinite(spec.step), "--step must be > 0");

  std::vector<SweepDirection> directions;
  if (opt.direction == "up" || opt.direction == "both") directions.push_back(SweepDirection::up);
  if (opt.direction == "down" || opt.direction == "both") directions.push_back(SweepDirection::down);
  require(!directions.empty(), "--direction must be up, down or both");

  spec.direction = SweepDirection::up;
  const auto solution = solve_sweep(spec, ctx.params, ctx.threads);
  const auto branches = link_branches(solution);
  write_file(ctx.output("branches.csv"), [&](std::ostream& os) { write_csv(os, branches); });

  json s;
  s["sweep"] = {{"start_hz", spec.delta_ca_start}, {"end_hz", spec.delta_ca_end}, {"step_hz", spec.step}};
  auto& by_direction = s["directions"] = json::object();
  for (auto dir : directions) {
    auto trace = classify_zones(hysteresis_walk(solution, dir, ctx.params), ctx.params);
    assign_branch_ids(trace, branches);
    const std::string name(to_string(dir));
    write_file(ctx.output("sweep_" + name + ".csv"), [&](std::ostream& os) { write_csv(os, trace); });
    by_direction[name] = zone_table(trace);
  }

  auto& table = s["branches"] = json::array();
  for (const auto& b : branches) {
    json row = {{"branch_id", b.id},
                {"stable", b.stable},
                {"delta_ca_begin_hz", b.points.front().delta_ca},
                {"delta_ca_end_hz", b.points.back().delta_ca},
                {"points", b.points.size()}};
    if (b.points.size() >= 3) {
      std::vector<double> p;
      for (const auto& sample : pulling_coefficient(b)) p.push_back(sample.p_c);
      row["min_abs_pulling"] = std::abs(*std::min_element(p.begin(), p.end(), [](double a, double c) {
        return std::abs(a) < std::abs(c);
      }));
      row["median_abs_pulling"] = median_abs(p);
    }
    double min_fraction = 1e300;
    for (const auto& d : depletion(b, ctx.params)) min_fraction = std::min(min_fraction, d.fraction);
    row["min_depletion_fraction"] = min_fraction;
    table.push_back(std::move(row));
  }
  emit_summary(ctx, "zones.json", s);
}

void cmd_dynamics(RunContext& ctx, const DynamicsOptions& opt) {
  require(opt.t_end > 0.0, "--t-end must be > 0");
  const auto r = step_response(opt.before, opt.after, ctx.params, opt.t_end, opt.initial_n);
  write_file(ctx.output("dynamics.csv"), [&](std::ostream& os) { write_csv(os, r.trajectory); });

  json s;
  s["delta_before_hz"] = opt.before;
  s["delta_after_hz"] = opt.after;
  s["t_end_s"] = opt.t_end;
  s["initial_n_atoms"] = r.initial.n_star;
  s["settled_n_atoms"] = r.settled.n_star;
  s["early_window_s"] = kEarlyWindow;
  s["early_dressed_shift_hz"] = r.early_dressed_shift;
  s["max_early_excursion_hz"] = r.max_early_excursion;
  s["steady_dressed_shift_hz"] = r.steady_dressed_shift;
  s["changed_branch"] = r.changed_branch;
  emit_summary(ctx, "dynamics.json", s);
}

void cmd_g2(RunContext& ctx, const G2Options& opt) {
  PhotonStream stream;
  std::string source;
  if (opt.input) {
    stream = read_timetags(*opt.input, opt.record_duration);
    source = "file";
  } else if (opt.gen == "poisson") {
    stream = gen_poisson(opt.rate, opt.duration, ctx.seed);
    source = opt.gen;
  } else if (opt.gen == "modulated") {
    stream = gen_modulated(opt.rate, opt.mod_freq, opt.depth, opt.duration, ctx.seed);
    source = opt.gen;
  } else if (opt.gen == "thermal") {
    stream = gen_thermal(opt.rate, opt.coherence_time, opt.duration, ctx.seed);
    source = opt.gen;
  } else {
    throw DomainError("--gen must be poisson, modulated or thermal");
  }
  require(stream.duration > 0.0, "photon record is empty");

  ZeroLag zero_lag;
  if (opt.zero_lag == "distinct") zero_lag = ZeroLag::distinct_pairs;
  else if (opt.zero_lag == "printed") zero_lag = ZeroLag::printed;
  else throw DomainError("--zero-lag must be distinct or printed");

  if (opt.dead_time > 0.0) stream = apply_dead_time(stream, opt.dead_time);
  if (opt.write_timetags)
    write_file(ctx.output("timetags.txt"), [&](std::ostream& os) { write_timetags(os, stream); });

  const auto bins = bin_counts(stream, opt.bin);
  require(opt.tau_max >= 0.0, "--tau-max must be >= 0");
  const auto tau_bins = std::min<Eigen::Index>(std::llround(opt.tau_max / opt.bin), bins.i_max() - 1);
  const auto result = g2_estimate(bins, tau_bins, zero_lag);
  write_file(ctx.output("g2.csv"), [&](std::ostream& os) { write_csv(os, result); });

  json s;
  s["source"] = source;
  s["photon_count"] = stream.timestamps.size();
  s["duration_s"] = stream.duration;
  s["rate_hz"] = static_cast<double>(stream.timestamps.size()) / stream.duration;
  s["bin_s"] = opt.bin;
  s["dead_time_s"] = opt.dead_time;
  s["zero_lag"] = opt.zero_lag;
  s["tau_max_s"] = result.tau[result.tau.size() - 1];
  if (result.defined.front()) s["g2_zero"] = result.g2[0];
  else s["g2_zero"] = nullptr;
  emit_summary(ctx, "g2.json", s);
}

void cmd_spectrum(RunContext& ctx, const SpectrumOptions& opt) {
  FieldTrace trace;
  if (opt.input) {
    trace = read_field(*opt.input);
  } else {
    trace = synth_field(opt.fwhm, opt.f0, opt.duration, opt.sample_rate, ctx.seed);
  }
  if (opt.write_field)
    write_file(ctx.output("field.bin"), [&](std::ostream& os) { write_field(os, trace); }, true);

  const auto spectrum = estimate_psd(trace, opt.segment, opt.overlap);
  write_file(ctx.output("spectrum.csv"), [&](std::ostream& os) { write_csv(os, spectrum); });

  json s;
  if (!opt.input) s["fwhm_injected_hz"] = opt.fwhm;
  s["sample_rate_hz"] = trace.sample_rate;
  s["duration_s"] = trace.duration();
  s["bin_width_hz"] = spectrum.bin_width;
  s["resolution_bandwidth_hz"] = spectrum.resolution_bandwidth;
  s["mean_power"] = spectrum.psd.sum() * spectrum.bin_width;
  try {
    const auto fit = fit_lorentzian_fwhm(spectrum);
    s["fit_ok"] = true;
    s["f_center_hz"] = fit.f_center;
    s["fwhm_hz"] = fit.fwhm;
    s["amplitude_per_hz"] = fit.amplitude;
    s["floor_per_hz"] = fit.floor;
    s["relative_residual"] = fit.residual;
    s["points_above_half"] = fit.points_above_half;
    s["resolution_limited"] = fit.resolution_limited;
  } catch (const NumericalError& e) {
    s["fit_ok"] = false;
    s["fit_error"] = e.what();
    emit_summary(ctx, "spectrum.json", s);
    throw;
  }
  emit_summary(ctx, "spectrum.json", s);
}

void cmd_doppler(RunContext& ctx, const DopplerOptions& opt) {
  require(opt.points >= 2, "--points must be at least 2");
  require(opt.v_max > 0.0, "--v-max must be > 0");
  const double lambda = PhysicalConstants::lambda_689;
  const double v = opt.lattice_detuning ? transport_velocity(*opt.lattice_detuning) : opt.velocity.value_or(1e-2);
  const auto shift = doppler_difference(v, lambda);

  const auto grid = linear_grid(-opt.v_max, opt.v_max, opt.points);
  write_file(ctx.output("doppler.csv"), [&](std::ostream& os) {
    write_csv_header(os, {"velocity_m_per_s", "delta_f_hz", "out_of_model"});
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
      const auto d = doppler_difference(grid[i], lambda);
      os << format_number(grid[i]) << ',' << format_number(d.delta_f_hz) << ',' << (d.out_of_model ? 1 : 0) << '\n';
    }
  });

  json s;
  if (opt.lattice_detuning) s["lattice_detuning_hz"] = *opt.lattice_detuning;
  s["velocity_m_per_s"] = v;
  s["delta_f_hz"] = shift.delta_f_hz;
  s["out_of_model"] = shift.out_of_model;
  s["lambda_m"] = lambda;
  emit_summary(ctx, "doppler.json", s);
}

}  // namespace recoil::cli
