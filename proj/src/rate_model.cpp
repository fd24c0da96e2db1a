#include "recoil/rate_model.hpp"

#include "recoil/cavity.hpp"
#include "recoil/errors.hpp"

namespace recoil {

double coupling_atom_number(double atom_number, const SystemParams& params) {
  return params.excited_fraction_in_loop ? effective_atom_number(atom_number, params.excited_fraction)
                                         : atom_number;
}

double dressed_detuning(double atom_number, double delta_ca, const SystemParams& params) {
  return dressed_cavity_detuning(delta_ca, params.g, coupling_atom_number(atom_number, params),
                                 DressedBranch::lower);
}

double gain_centre(const PumpLine& line, const SystemParams& params) {
  return line.detuning_hz + params.delta_rir;
}

double photon_number(double atom_number, double delta_ca, const SystemParams& params) {
  if (atom_number < 0.0) throw DomainError("photon_number: atom number must be >= 0");
  const double dressed = dressed_detuning(atom_number, delta_ca, params);
  const double half_width = 0.5 * params.gamma_rir;
  double lorentzian_sum = 0.0;
  for (const auto& line : params.pump_lines) {
    const double x = (dressed - gain_centre(line, params)) / half_width;
    lorentzian_sum += line.weight / (1.0 + x * x);
  }
  return params.m0 * atom_number * lorentzian_sum;
}

double atom_rate(double atom_number, double delta_ca, const SystemParams& params) {
  const double m = photon_number(atom_number, delta_ca, params);
  return params.loading_rate - params.gamma_loss * atom_number - params.gamma_lasing * m * atom_number;
}

}  // namespace recoil
