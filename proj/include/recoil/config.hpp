#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace recoil {

/// One cooling beam acting as a recoil-gain pump.
struct PumpLine {
  std::string label;
  double detuning_hz = 0.0;  // pump frequency minus m_J = 0 atomic resonance
  double weight = 1.0;

  bool operator==(const PumpLine&) const = default;
};

/// Model constants. Every frequency is an ordinary frequency in Hz; values
/// quoted as 2*pi*X are stored as X.
///
/// `gamma_lasing` multiplies M*N in the atom-number rate equation and is
/// therefore carried in 1/(photon s), although it is usually quoted per photon
/// per atom.
struct SystemParams {
  double loading_rate = 2e7;        // R, atoms/s
  double gamma_loss = 19.0;         // single-body loss, 1/s
  double gamma_lasing = 8.93e-6;    // lasing-induced loss, 1/(photon s)
  double m0 = 1045.0;               // reference intracavity photons per atom
  double g = 3.5e3;                 // single-atom coupling, Hz
  double kappa = 5e4;               // cavity FWHM, Hz
  double gamma_atom = 7.5e3;        // 3P1 linewidth, Hz
  double gamma_rir = 5e4;           // recoil gain FWHM, Hz
  double delta_rir = 1e5;           // recoil gain shift, Hz
  double temperature = 1e-5;        // radial temperature, K
  double excited_fraction = 0.3;    // N_e / N during lasing
  bool excited_fraction_in_loop = false;
  std::vector<PumpLine> pump_lines;
  double n_recoil = 1.0;

  /// R / gamma_loss: steady state without lasing.
  double unlased_atom_number() const { return loading_rate / gamma_loss; }

  bool operator==(const SystemParams&) const = default;
};

enum class SweepDirection { up, down };

/// Cavity-detuning sweep. The grid covers [min(start, end), max(start, end)]
/// in increments of `step`; `direction` fixes the traversal order.
struct SweepSpec {
  double delta_ca_start = -6e6;
  double delta_ca_end = 2e6;
  double step = 1e3;
  SweepDirection direction = SweepDirection::up;

  bool operator==(const SweepSpec&) const = default;
};

struct ConfigFile {
  SystemParams params;
  std::optional<SweepSpec> sweep;
};

/// Parameter set measured for the 88Sr ring-cavity experiment. The two pump
/// lines are the 3D molasses and the slowing beam, referenced to the m_J = 0
/// resonance (Zeeman-shifted m_J = -1 line sits at -1.2 MHz).
SystemParams default_params();

/// Throws ParseError naming the offending field.
void validate(const SystemParams& params);
void validate(const SweepSpec& sweep);

ConfigFile parse_config(std::string_view text);
ConfigFile read_config(const std::filesystem::path& path);
SystemParams load_config(const std::filesystem::path& path);

/// Writes a config that `parse_config` reads back to identical values.
void write_config(std::ostream& os, const SystemParams& params,
                  const std::optional<SweepSpec>& sweep = std::nullopt);
std::string to_config_string(const SystemParams& params,
                             const std::optional<SweepSpec>& sweep = std::nullopt);

/// Environment variable naming the default config file.
inline constexpr const char* kConfigEnvVar = "RECOIL_LASE_CONFIG";

/// Explicit path wins over the environment variable; empty when neither is set.
std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::string>& flag);

std::string_view to_string(SweepDirection d);

}  // namespace recoil
