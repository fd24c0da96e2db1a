#include <algorithm>
#include <cmath>

#include "recoil/csv.hpp"
#include "recoil/dynamics.hpp"
#include "recoil/equilibrium.hpp"
#include "recoil/errors.hpp"

namespace recoil {

namespace {

TracePoint to_trace_point(const EquilibriumPoint& e) {
  TracePoint p;
  p.delta_ca = e.delta_ca;
  p.n = e.n_star;
  p.m = e.m_star;
  p.delta_dressed = e.delta_dressed;
  p.stable = e.stable;
  return p;
}

const EquilibriumPoint* nearest_stable(const std::vector<EquilibriumPoint>& roots, double n) {
  const EquilibriumPoint* best = nullptr;
  for (const auto& r : roots)
    if (r.stable && (!best || std::abs(r.n_star - n) < std::abs(best->n_star - n))) best = &r;
  return best;
}

/// True when an unstable root separates n and candidate, i.e. they lie in
/// different basins of attraction.
bool separated_by_unstable(const std::vector<EquilibriumPoint>& roots, double n, double candidate) {
  const double lo = std::min(n, candidate);
  const double hi = std::max(n, candidate);
  return std::any_of(roots.begin(), roots.end(),
                     [&](const EquilibriumPoint& r) { return !r.stable && r.n_star > lo && r.n_star < hi; });
}

}  // namespace

HysteresisTrace hysteresis_walk(const SweepSolution& solution, SweepDirection direction,
                                const SystemParams& params, const HysteresisOptions& options) {
  HysteresisTrace trace;
  trace.direction = direction;
  const std::size_t count = solution.delta_ca.size();
  if (count == 0) return trace;

  const bool ascending = count < 2 || solution.delta_ca.front() < solution.delta_ca.back();
  const bool reverse = ascending != (direction == SweepDirection::up);
  auto index = [&](std::size_t k) { return reverse ? count - 1 - k : k; };

  const double start_n = options.initial_n.value_or(params.unlased_atom_number());
  const EquilibriumPoint* current = nearest_stable(solution.roots[index(0)], start_n);
  if (!current) throw NumericalError("hysteresis_walk: no stable equilibrium at the first sweep step");
  trace.points.push_back(to_trace_point(*current));

  for (std::size_t k = 1; k < count; ++k) {
    const auto& roots = solution.roots[index(k)];
    const double delta = solution.delta_ca[index(k)];
    const double n = trace.points.back().n;

    const EquilibriumPoint* next = nearest_stable(roots, n);
    const bool continuous = next && std::abs(next->n_star - n) <= options.rel_jump * n &&
                            !separated_by_unstable(roots, n, next->n_star);
    if (!continuous) {
      const auto rest = settle(n, delta, params, options.settle_rel_rate, options.max_time_factor);
      next = nearest_stable(roots, rest.n);
      if (!next) throw NumericalError("hysteresis_walk: no stable equilibrium to land on");
      trace.jump_locations.push_back(delta);
    }
    trace.points.push_back(to_trace_point(*next));
  }
  return trace;
}

HysteresisTrace hysteresis_sweep(const SweepSpec& spec, const SystemParams& params, unsigned threads,
                                 const HysteresisOptions& options) {
  return hysteresis_walk(solve_sweep(spec, params, threads), spec.direction, params, options);
}

void write_csv(std::ostream& os, const std::vector<Branch>& branches) {
  write_csv_header(os, {"delta_ca_hz", "N", "M", "delta_dressed_hz", "stable", "zone_id", "branch_id"});
  for (const auto& b : branches)
    for (const auto& p : b.points)
      os << format_number(p.delta_ca) << ',' << format_number(p.n_star) << ',' << format_number(p.m_star) << ','
         << format_number(p.delta_dressed) << ',' << (p.stable ? 1 : 0) << ",0," << b.id << '\n';
}

void write_csv(std::ostream& os, const HysteresisTrace& trace) {
  write_csv_header(os, {"delta_ca_hz", "N", "M", "delta_dressed_hz", "stable", "zone_id", "branch_id"});
  for (const auto& p : trace.points)
    os << format_number(p.delta_ca) << ',' << format_number(p.n) << ',' << format_number(p.m) << ','
       << format_number(p.delta_dressed) << ',' << (p.stable ? 1 : 0) << ',' << p.zone_id << ','
       << p.branch_id << '\n';
}

}  // namespace recoil
