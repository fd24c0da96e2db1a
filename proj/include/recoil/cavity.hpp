#pragma once

#include <cmath>
#include <string_view>

#include "recoil/errors.hpp"

namespace recoil {

// Dispersive atom-cavity coupling. All detunings are measured from the atomic
// resonance (m_J = 0) and given in Hz.

enum class DressedBranch { lower, upper };

/// U0 = g^2 delta_ca / (delta_ca^2 + gamma_atom^2).
template <typename Scalar>
Scalar single_atom_light_shift(Scalar g, Scalar delta_ca, Scalar gamma_atom) {
  if (!(gamma_atom > Scalar(0))) throw DomainError("gamma_atom must be > 0");
  return g * g * delta_ca / (delta_ca * delta_ca + gamma_atom * gamma_atom);
}

template <typename Scalar>
Scalar collective_shift(Scalar atom_number, Scalar u0) {
  if (atom_number < Scalar(0)) throw DomainError("atom number must be >= 0");
  return atom_number * u0;
}

/// True when the collective shift exceeds the cavity linewidth, the regime in
/// which the atoms strongly reshape the cavity resonance.
template <typename Scalar>
bool exceeds_cavity_linewidth(Scalar shift, Scalar kappa) {
  using std::abs;
  return abs(shift) > kappa;
}

/// Inversion-corrected coupling number N_g - N_e = N (1 - 2 f_e).
template <typename Scalar>
Scalar effective_atom_number(Scalar atom_number, Scalar excited_fraction) {
  if (!(excited_fraction >= Scalar(0) && excited_fraction < Scalar(0.5)))
    throw DomainError("excited_fraction must lie in [0, 0.5)");
  return atom_number * (Scalar(1) - Scalar(2) * excited_fraction);
}

/// Normal-mode (avoided crossing) detuning of the atom-dressed cavity:
/// (delta_ca -+ sqrt(delta_ca^2 + 4 g^2 N_eff)) / 2.
template <typename Scalar>
Scalar dressed_cavity_detuning(Scalar delta_ca, Scalar g, Scalar n_eff,
                               DressedBranch branch = DressedBranch::lower) {
  using std::sqrt;
  if (n_eff < Scalar(0)) throw DomainError("N_eff must be >= 0");
  const Scalar root = sqrt(delta_ca * delta_ca + Scalar(4) * g * g * n_eff);
  return branch == DressedBranch::lower ? Scalar(0.5) * (delta_ca - root) : Scalar(0.5) * (delta_ca + root);
}

/// d(delta_dressed)/d(delta_ca) at fixed N_eff.
template <typename Scalar>
Scalar dressed_cavity_slope(Scalar delta_ca, Scalar g, Scalar n_eff,
                            DressedBranch branch = DressedBranch::lower) {
  using std::sqrt;
  const Scalar root = sqrt(delta_ca * delta_ca + Scalar(4) * g * g * n_eff);
  if (root == Scalar(0)) return Scalar(0.5);
  const Scalar s = delta_ca / root;
  return branch == DressedBranch::lower ? Scalar(0.5) * (Scalar(1) - s) : Scalar(0.5) * (Scalar(1) + s);
}

struct DressedCavityResult {
  double delta_ca;
  double n_eff;
  DressedBranch branch;
  double delta_dressed;
};

DressedCavityResult dressed_cavity(double delta_ca, double g, double n_eff,
                                   DressedBranch branch = DressedBranch::lower);

/// Excited fraction during lasing from the offset between the dressed
/// resonance seen while lasing and the one probed after the excited state has
/// decayed (f_e = 0). Bisection on [0, 0.5) to 1e-6.
///
/// Throws DomainError when the two values are not on the same branch, and
/// InconsistencyError when the offset lies outside what f_e in [0, 0.5) can produce.
double infer_excited_fraction(double delta_ca, double g, double atom_number, double delta_dressed_lasing,
                              double delta_dressed_probe);

std::string_view to_string(DressedBranch b);

}  // namespace recoil
