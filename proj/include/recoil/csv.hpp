#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

namespace recoil {

/// Shortest round-trip decimal representation; independent of the C locale.
std::string format_number(double value);

/// Locale-independent parse of the whole token. Empty on failure.
std::optional<double> parse_number(std::string_view token);

/// Opens `path` for writing, throwing IoError on failure.
std::ofstream open_output(const std::filesystem::path& path, bool binary = false);

void write_csv_header(std::ostream& os, std::initializer_list<std::string_view> columns);

}  // namespace recoil
