#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "recoil/config.hpp"

namespace recoil {

/// Process exit status of `recoil-lase`.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitIo = 2,
  kExitNumerical = 3,
};

/// Written as `<command>.manifest.json` next to the outputs of every run.
struct RunManifest {
  std::string command;
  std::string params_digest;
  std::uint64_t seed = 0;
  std::vector<std::filesystem::path> output_paths;
  double wall_time = 0.0;  // s
};

/// 64-bit FNV-1a of the canonical config text, as 16 hex digits. Equal
/// parameter sets always give equal digests.
std::string params_digest(const SystemParams& params);

void write_manifest(std::ostream& os, const RunManifest& manifest);

/// Entry point of the command-line tool; returns an ExitCode.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace recoil
