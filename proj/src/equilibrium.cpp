#include "recoil/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>
#include <tuple>

#include "recoil/errors.hpp"
#include "recoil/rate_model.hpp"

namespace recoil {

namespace {

constexpr double kInvPhi = 0.6180339887498949;

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

double bisect_root(double lo, double hi, double r_lo, double delta_ca, const SystemParams& params,
                   double rel_tol) {
  const int s_lo = sign_of(r_lo);
  for (int i = 0; i < 400 && hi - lo > rel_tol * lo; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double r = atom_rate(mid, delta_ca, params);
    if (r == 0.0) return mid;
    if (sign_of(r) == s_lo) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Golden-section extremum of dN/dt on [lo, hi] in log N. `minimize` selects
/// a minimum (positive rate side) or a maximum (negative side).
std::pair<double, double> rate_extremum(double lo, double hi, bool minimize, double delta_ca,
                                        const SystemParams& params) {
  const double sgn = minimize ? 1.0 : -1.0;
  auto f = [&](double log_n) { return sgn * atom_rate(std::exp(log_n), delta_ca, params); };
  double a = std::log(lo);
  double b = std::log(hi);
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < 80 && b - a > 1e-12; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  const double x = std::exp(0.5 * (a + b));
  return {x, atom_rate(x, delta_ca, params)};
}

}  // namespace

EquilibriumPoint make_equilibrium_point(double atom_number, double delta_ca, const SystemParams& params,
                                        double slope_rel_step) {
  EquilibriumPoint p;
  p.delta_ca = delta_ca;
  p.n_star = atom_number;
  p.m_star = photon_number(atom_number, delta_ca, params);
  p.delta_dressed = dressed_detuning(atom_number, delta_ca, params);
  const double h = slope_rel_step * atom_number;
  p.slope = (atom_rate(atom_number + h, delta_ca, params) - atom_rate(atom_number - h, delta_ca, params)) /
            (2.0 * h);
  p.stable = p.slope < 0.0;
  return p;
}

std::vector<EquilibriumPoint> find_equilibria(double delta_ca, const SystemParams& params,
                                              const RootSearchOptions& options) {
  const int k = std::max(options.grid_points, 3);
  const double n_lo = options.n_min;
  const double n_hi = options.n_max_factor * params.unlased_atom_number();
  const double log_lo = std::log(n_lo);
  const double log_step = (std::log(n_hi) - log_lo) / (k - 1);

  std::vector<double> n(k);
  std::vector<double> r(k);
  for (int i = 0; i < k; ++i) {
    n[i] = i == k - 1 ? n_hi : std::exp(log_lo + i * log_step);
    r[i] = atom_rate(n[i], delta_ca, params);
  }

  std::vector<double> roots;
  for (int i = 0; i + 1 < k; ++i) {
    if (r[i] == 0.0) {
      roots.push_back(n[i]);
      continue;
    }
    if (r[i + 1] != 0.0 && sign_of(r[i]) != sign_of(r[i + 1]))
      roots.push_back(bisect_root(n[i], n[i + 1], r[i], delta_ca, params, options.rel_tol));
  }
  if (r[k - 1] == 0.0) roots.push_back(n[k - 1]);

  // A tangent-close root pair can sit between two nodes without a sign
  // change; it shows up as a local extremum of the sampled rate.
  for (int i = 1; i + 1 < k; ++i) {
    const int s = sign_of(r[i]);
    if (s == 0 || sign_of(r[i - 1]) != s || sign_of(r[i + 1]) != s) continue;
    const bool local_min = r[i] <= r[i - 1] && r[i] <= r[i + 1];
    const bool local_max = r[i] >= r[i - 1] && r[i] >= r[i + 1];
    if ((s > 0 && !local_min) || (s < 0 && !local_max)) continue;
    const auto [n_ext, r_ext] = rate_extremum(n[i - 1], n[i + 1], s > 0, delta_ca, params);
    if (sign_of(r_ext) == s) continue;
    if (r_ext == 0.0) {
      roots.push_back(n_ext);
      continue;
    }
    roots.push_back(bisect_root(n[i - 1], n_ext, r[i - 1], delta_ca, params, options.rel_tol));
    roots.push_back(bisect_root(n_ext, n[i + 1], r_ext, delta_ca, params, options.rel_tol));
  }

  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [&](double a, double b) { return b - a <= 10.0 * options.rel_tol * b; }),
              roots.end());
  if (roots.empty()) {
    std::ostringstream msg;
    msg << "find_equilibria: no sign change of dN/dt on [" << n_lo << ", " << n_hi
        << "] at delta_ca = " << delta_ca << " Hz (rate at ends " << r.front() << ", " << r.back() << ")";
    throw NumericalError(msg.str());
  }

  std::vector<EquilibriumPoint> points;
  points.reserve(roots.size());
  for (double root : roots) points.push_back(make_equilibrium_point(root, delta_ca, params, options.slope_rel_step));
  return points;
}

std::vector<double> sweep_grid(const SweepSpec& spec) {
  if (!(std::isfinite(spec.step) && spec.step > 0.0)) throw DomainError("sweep step must be > 0");
  if (!std::isfinite(spec.delta_ca_start) || !std::isfinite(spec.delta_ca_end))
    throw DomainError("sweep bounds must be finite");
  if (spec.delta_ca_start == spec.delta_ca_end) throw DomainError("degenerate sweep window: start equals end");
  const double lo = std::min(spec.delta_ca_start, spec.delta_ca_end);
  const double hi = std::max(spec.delta_ca_start, spec.delta_ca_end);
  const auto steps = static_cast<std::size_t>(std::floor((hi - lo) / spec.step + 1e-9));
  std::vector<double> grid(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) grid[i] = lo + static_cast<double>(i) * spec.step;
  if (spec.direction == SweepDirection::down) std::reverse(grid.begin(), grid.end());
  return grid;
}

SweepSolution solve_sweep(const SweepSpec& spec, const SystemParams& params, unsigned threads,
                          const RootSearchOptions& options) {
  SweepSolution solution;
  solution.delta_ca = sweep_grid(spec);
  const std::size_t count = solution.delta_ca.size();
  solution.roots.resize(count);

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      solution.roots[i] = find_equilibria(solution.delta_ca[i], params, options);
  };
  if (threads == 1) {
    work(0, count);
    return solution;
  }

  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t chunk = (count + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    pool.emplace_back([&, t, begin, end] {
      try {
        work(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return solution;
}

std::vector<Branch> link_branches(const SweepSolution& solution, double rel_jump) {
  std::vector<Branch> branches;
  std::vector<std::size_t> open;  // indices into branches

  for (std::size_t step = 0; step < solution.roots.size(); ++step) {
    const auto& roots = solution.roots[step];
    std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
    for (std::size_t b = 0; b < open.size(); ++b) {
      const auto& last = branches[open[b]].points.back();
      for (std::size_t r = 0; r < roots.size(); ++r) {
        if (roots[r].stable != last.stable) continue;
        const double rel = std::abs(roots[r].n_star - last.n_star) / last.n_star;
        if (rel <= rel_jump) candidates.emplace_back(rel, b, r);
      }
    }
    std::sort(candidates.begin(), candidates.end());

    std::vector<bool> branch_taken(open.size(), false);
    std::vector<bool> root_taken(roots.size(), false);
    std::vector<std::size_t> next_open;
    for (const auto& [rel, b, r] : candidates) {
      if (branch_taken[b] || root_taken[r]) continue;
      branch_taken[b] = root_taken[r] = true;
      branches[open[b]].points.push_back(roots[r]);
      next_open.push_back(open[b]);
    }
    for (std::size_t r = 0; r < roots.size(); ++r) {
      if (root_taken[r]) continue;
      Branch fresh;
      fresh.id = static_cast<int>(branches.size());
      fresh.stable = roots[r].stable;
      fresh.points.push_back(roots[r]);
      next_open.push_back(branches.size());
      branches.push_back(std::move(fresh));
    }
    open = std::move(next_open);
  }
  return branches;
}

std::vector<Branch> sweep_branches(const SweepSpec& spec, const SystemParams& params, unsigned threads) {
  return link_branches(solve_sweep(spec, params, threads));
}

HysteresisTrace classify_zones(HysteresisTrace trace, double jump_threshold, double m_min) {
  if (trace.points.empty()) return trace;
  int next_id = 0;
  bool previous_dark = true;
  for (std::size_t i = 0; i < trace.points.size(); ++i) {
    auto& p = trace.points[i];
    if (p.m < m_min) {
      p.zone_id = 0;
      previous_dark = true;
      continue;
    }
    const bool discontinuous =
        i > 0 && std::abs(p.delta_dressed - trace.points[i - 1].delta_dressed) > jump_threshold;
    if (previous_dark || discontinuous) ++next_id;
    p.zone_id = next_id;
    previous_dark = false;
  }
  return trace;
}

HysteresisTrace classify_zones(HysteresisTrace trace, const SystemParams& params) {
  return classify_zones(std::move(trace), 2.0 * params.gamma_rir);
}

std::vector<Zone> summarize_zones(const HysteresisTrace& trace) {
  std::vector<Zone> zones;
  const auto& pts = trace.points;
  for (std::size_t i = 0; i < pts.size();) {
    std::size_t j = i;
    while (j + 1 < pts.size() && pts[j + 1].zone_id == pts[i].zone_id) ++j;
    Zone z;
    z.id = pts[i].zone_id;
    z.first = i;
    z.last = j;
    z.delta_ca_begin = pts[i].delta_ca;
    z.delta_ca_end = pts[j].delta_ca;
    z.dressed_min = z.dressed_max = pts[i].delta_dressed;
    z.n_min = z.n_max = pts[i].n;
    for (std::size_t k = i; k <= j; ++k) {
      z.dressed_min = std::min(z.dressed_min, pts[k].delta_dressed);
      z.dressed_max = std::max(z.dressed_max, pts[k].delta_dressed);
      z.n_min = std::min(z.n_min, pts[k].n);
      z.n_max = std::max(z.n_max, pts[k].n);
    }
    const double span = pts[j].delta_ca - pts[i].delta_ca;
    z.mean_pulling = span != 0.0 ? (pts[j].delta_dressed - pts[i].delta_dressed) / span : 0.0;
    zones.push_back(z);
    i = j + 1;
  }
  return zones;
}

int count_lasing_zones(const HysteresisTrace& trace) {
  std::vector<int> ids;
  for (const auto& p : trace.points)
    if (p.zone_id != 0) ids.push_back(p.zone_id);
  std::sort(ids.begin(), ids.end());
  return static_cast<int>(std::unique(ids.begin(), ids.end()) - ids.begin());
}

void assign_branch_ids(HysteresisTrace& trace, const std::vector<Branch>& branches) {
  for (auto& p : trace.points) {
    p.branch_id = -1;
    for (const auto& b : branches) {
      const auto it = std::find_if(b.points.begin(), b.points.end(), [&](const EquilibriumPoint& e) {
        return e.delta_ca == p.delta_ca && e.n_star == p.n;
      });
      if (it != b.points.end()) {
        p.branch_id = b.id;
        break;
      }
    }
  }
}

std::vector<PullingSample> pulling_coefficient(const Branch& branch) {
  const auto& pts = branch.points;
  if (pts.size() < 3) throw DomainError("pulling_coefficient: branch needs at least 3 points");
  std::vector<PullingSample> out(pts.size());
  const std::size_t last = pts.size() - 1;
  for (std::size_t i = 0; i <= last; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i == last ? last : i + 1;
    out[i] = {pts[i].delta_ca,
              (pts[b].delta_dressed - pts[a].delta_dressed) / (pts[b].delta_ca - pts[a].delta_ca)};
  }
  return out;
}

std::vector<DepletionSample> depletion(const Branch& branch, const SystemParams& params) {
  std::vector<DepletionSample> out;
  out.reserve(branch.points.size());
  const double reference = params.unlased_atom_number();
  for (const auto& p : branch.points) out.push_back({p.delta_ca, p.n_star / reference});
  return out;
}

}  // namespace recoil
