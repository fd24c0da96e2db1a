#pragma once

#include "recoil/config.hpp"

namespace recoil {

// Atom-number feedback loop: the lattice is loaded at rate R and loses atoms
// by single-body loss and by lasing; the intracavity photon number is slaved
// to N through the dressed cavity resonance.
//
//   dN/dt = R - gamma_loss N - gamma_L M(N) N
//   M(N)  = sum_j w_j M0 N / (1 + (delta'_j / (Gamma_RIR / 2))^2)
//   delta'_j = delta_dressed(delta_ca, N) - (pump_j + delta_RIR)

/// Atom number entering the avoided crossing: N, or N (1 - 2 f_e) when the
/// excited-fraction correction is switched on.
double coupling_atom_number(double atom_number, const SystemParams& params);

/// Lower-branch dressed cavity detuning for `atom_number` atoms.
double dressed_detuning(double atom_number, double delta_ca, const SystemParams& params);

/// Centre of the recoil gain driven by `line`.
double gain_centre(const PumpLine& line, const SystemParams& params);

double photon_number(double atom_number, double delta_ca, const SystemParams& params);

/// dN/dt in atoms/s.
double atom_rate(double atom_number, double delta_ca, const SystemParams& params);

}  // namespace recoil
