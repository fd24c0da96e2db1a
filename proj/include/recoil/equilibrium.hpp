#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

#include "recoil/config.hpp"

namespace recoil {

/// Steady state of the atom-number rate equation at one cavity detuning.
struct EquilibriumPoint {
  double delta_ca = 0.0;
  double n_star = 0.0;
  double m_star = 0.0;
  double delta_dressed = 0.0;
  bool stable = false;
  double slope = 0.0;  // d(dN/dt)/dN at n_star, 1/s
};

struct RootSearchOptions {
  int grid_points = 4000;      // logarithmic grid over [n_min, n_max_factor R / gamma_loss]
  double n_min = 1.0;
  double n_max_factor = 2.0;
  double rel_tol = 1e-10;      // bisection stop, relative in N
  double slope_rel_step = 1e-6;
};

/// Evaluates M, the dressed detuning and the stability of a known root.
EquilibriumPoint make_equilibrium_point(double atom_number, double delta_ca, const SystemParams& params,
                                        double slope_rel_step = 1e-6);

/// All roots of dN/dt = 0, ascending in N. Sign changes on the grid are
/// bracketed directly; root pairs hidden between two grid nodes are found by
/// locating the local extremum of dN/dt and testing its sign.
std::vector<EquilibriumPoint> find_equilibria(double delta_ca, const SystemParams& params,
                                              const RootSearchOptions& options = {});

/// Sweep grid in traversal order.
std::vector<double> sweep_grid(const SweepSpec& spec);

/// Root sets at every sweep step, in traversal order.
struct SweepSolution {
  std::vector<double> delta_ca;
  std::vector<std::vector<EquilibriumPoint>> roots;
};

/// Solves every step; steps are independent and distributed over `threads`.
SweepSolution solve_sweep(const SweepSpec& spec, const SystemParams& params, unsigned threads = 1,
                          const RootSearchOptions& options = {});

/// Continuous family of equilibria with uniform stability.
struct Branch {
  int id = 0;
  bool stable = false;
  std::vector<EquilibriumPoint> points;
};

inline constexpr double kBranchJumpThreshold = 0.2;

/// Links roots of adjacent steps by nearest N among roots of equal stability,
/// accepting links with |dN| / N <= rel_jump. Unmatched roots open new
/// branches; unmatched branches terminate.
std::vector<Branch> link_branches(const SweepSolution& solution, double rel_jump = kBranchJumpThreshold);

std::vector<Branch> sweep_branches(const SweepSpec& spec, const SystemParams& params, unsigned threads = 1);

struct TracePoint {
  double delta_ca = 0.0;
  double n = 0.0;
  double m = 0.0;
  double delta_dressed = 0.0;
  bool stable = true;
  int zone_id = 0;
  int branch_id = -1;
};

struct HysteresisTrace {
  SweepDirection direction = SweepDirection::up;
  std::vector<TracePoint> points;
  std::vector<double> jump_locations;  // Hz, delta_ca at which a jump landed
};

struct HysteresisOptions {
  double rel_jump = kBranchJumpThreshold;
  double settle_rel_rate = 1e-9;   // |dN/dt| / N < settle_rel_rate * gamma_loss
  double max_time_factor = 1e4;    // give up after max_time_factor / gamma_loss seconds
  std::optional<double> initial_n; // start on the stable root nearest this N (default R / gamma_loss)
};

/// Quasi-static walk over the sweep in `direction`: follow the stable root
/// nearest the current N; when none lies within the jump threshold, integrate
/// the rate equation from the current N and land on the stable root it relaxes to.
HysteresisTrace hysteresis_walk(const SweepSolution& solution, SweepDirection direction,
                                const SystemParams& params, const HysteresisOptions& options = {});

/// Walk in `spec.direction`.
HysteresisTrace hysteresis_sweep(const SweepSpec& spec, const SystemParams& params, unsigned threads = 1,
                                 const HysteresisOptions& options = {});

/// Splits the trace into zones at dressed-detuning discontinuities larger
/// than `jump_threshold` (Hz). Points with M below `m_min` are dark (zone 0);
/// lasing zones are numbered 1, 2, ... in traversal order.
HysteresisTrace classify_zones(HysteresisTrace trace, double jump_threshold, double m_min = 1.0);

/// Default threshold 2 Gamma_RIR.
HysteresisTrace classify_zones(HysteresisTrace trace, const SystemParams& params);

struct Zone {
  int id = 0;
  std::size_t first = 0;  // trace indices, inclusive
  std::size_t last = 0;
  double delta_ca_begin = 0.0;
  double delta_ca_end = 0.0;
  double dressed_min = 0.0;
  double dressed_max = 0.0;
  double n_min = 0.0;
  double n_max = 0.0;
  double mean_pulling = 0.0;  // (dressed_end - dressed_begin) / (delta_end - delta_begin)
};

/// Contiguous runs of one zone id, in traversal order.
std::vector<Zone> summarize_zones(const HysteresisTrace& trace);

/// Number of distinct nonzero zone ids.
int count_lasing_zones(const HysteresisTrace& trace);

/// Tags trace points with the id of the branch holding the same root.
void assign_branch_ids(HysteresisTrace& trace, const std::vector<Branch>& branches);

struct PullingSample {
  double delta_ca;
  double p_c;
};

/// d(delta_dressed)/d(delta_ca) along the branch: central differences inside,
/// one-sided at the ends. Needs at least three points.
std::vector<PullingSample> pulling_coefficient(const Branch& branch);

struct DepletionSample {
  double delta_ca;
  double fraction;  // N* / (R / gamma_loss)
};

std::vector<DepletionSample> depletion(const Branch& branch, const SystemParams& params);

/// Columns: delta_ca_hz, N, M, delta_dressed_hz, stable, zone_id, branch_id.
void write_csv(std::ostream& os, const std::vector<Branch>& branches);
void write_csv(std::ostream& os, const HysteresisTrace& trace);

}  // namespace recoil
