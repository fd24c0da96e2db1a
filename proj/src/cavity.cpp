#include "recoil/cavity.hpp"

#include <algorithm>

namespace recoil {

namespace {

DressedBranch branch_of(double value, double delta_ca) {
  if (value <= std::min(delta_ca, 0.0)) return DressedBranch::lower;
  if (value >= std::max(delta_ca, 0.0)) return DressedBranch::upper;
  throw DomainError("dressed detuning lies inside the avoided-crossing gap; not on either branch");
}

}  // namespace

DressedCavityResult dressed_cavity(double delta_ca, double g, double n_eff, DressedBranch branch) {
  return {delta_ca, n_eff, branch, dressed_cavity_detuning(delta_ca, g, n_eff, branch)};
}

std::string_view to_string(DressedBranch b) { return b == DressedBranch::lower ? "lower" : "upper"; }

double infer_excited_fraction(double delta_ca, double g, double atom_number, double delta_dressed_lasing,
                              double delta_dressed_probe) {
  if (atom_number < 0.0) throw DomainError("atom number must be >= 0");
  const auto branch = branch_of(delta_dressed_probe, delta_ca);
  if (branch_of(delta_dressed_lasing, delta_ca) != branch)
    throw DomainError("lasing and probe dressed detunings lie on different branches");

  const double offset = delta_dressed_lasing - delta_dressed_probe;
  if (offset == 0.0) return 0.0;

  const double reference = dressed_cavity_detuning(delta_ca, g, atom_number, branch);
  auto residual = [&](double f) {
    return dressed_cavity_detuning(delta_ca, g, atom_number * (1.0 - 2.0 * f), branch) - reference - offset;
  };

  double lo = 0.0;
  double hi = 0.5;
  const double r_lo = residual(lo);
  const double r_hi = residual(hi);
  if ((r_lo > 0.0) == (r_hi > 0.0))
    throw InconsistencyError("dressed-frequency offset cannot be produced by an excited fraction in [0, 0.5)");
  while (hi - lo > 1e-8) {
    const double mid = 0.5 * (lo + hi);
    if ((residual(mid) > 0.0) == (r_lo > 0.0)) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace recoil
