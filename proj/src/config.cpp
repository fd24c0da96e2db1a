#include "recoil/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "recoil/constants.hpp"
#include "recoil/csv.hpp"
#include "recoil/errors.hpp"

namespace recoil {

namespace {

struct Entry {
  std::string value;
  std::size_t line;
};

struct Section {
  std::string name;
  std::size_t line;
  std::map<std::string, Entry> entries;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return true;
}

std::vector<Section> tokenize(std::string_view text) {
  std::vector<Section> sections;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (auto hash = raw.find_first_of("#;"); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", line_no);
      const auto name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) throw ParseError("empty section name", line_no);
      for (const auto& s : sections)
        if (s.name == name) throw ParseError("duplicate section [" + std::string(name) + "]", line_no);
      sections.push_back({std::string(name), line_no, {}});
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
    if (sections.empty()) throw ParseError("key outside of any section", line_no);
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!valid_identifier(key))
      throw ParseError("invalid key '" + std::string(key) + "' (lowercase snake case expected)", line_no);
    if (value.empty()) throw ParseError("missing value for '" + std::string(key) + "'", line_no);
    auto& entries = sections.back().entries;
    if (entries.count(std::string(key)))
      throw ParseError("duplicate key '" + std::string(key) + "'", line_no);
    entries.emplace(std::string(key), Entry{std::string(value), line_no});
  }
  return sections;
}

class SectionReader {
 public:
  SectionReader(const Section& section, std::initializer_list<std::string_view> allowed)
      : section_(section) {
    for (const auto& [key, entry] : section.entries) {
      bool known = false;
      for (auto a : allowed) known = known || a == key;
      if (!known)
        throw ParseError("unknown key '" + key + "' in [" + section.name + "]", entry.line, key);
    }
    angular_ = boolean("angular").value_or(false);
  }

  std::optional<double> number(const std::string& key) const {
    auto it = section_.entries.find(key);
    if (it == section_.entries.end()) return std::nullopt;
    auto v = parse_number(it->second.value);
    if (!v || !std::isfinite(*v))
      throw ParseError("'" + key + "' is not a finite number: " + it->second.value, it->second.line, key);
    return *v;
  }

  /// Frequency field; divided by 2*pi when the section is flagged angular.
  std::optional<double> frequency(const std::string& key) const {
    auto v = number(key);
    if (v && angular_) *v /= kTwoPi;
    return v;
  }

  std::optional<bool> boolean(const std::string& key) const {
    auto it = section_.entries.find(key);
    if (it == section_.entries.end()) return std::nullopt;
    if (it->second.value == "true") return true;
    if (it->second.value == "false") return false;
    throw ParseError("'" + key + "' must be true or false", it->second.line, key);
  }

  std::optional<std::string> text(const std::string& key) const {
    auto it = section_.entries.find(key);
    if (it == section_.entries.end()) return std::nullopt;
    return it->second.value;
  }

  double required_frequency(const std::string& key) const {
    auto v = frequency(key);
    if (!v)
      throw ParseError("missing mandatory field '" + key + "' in [" + section_.name + "]", section_.line, key);
    return *v;
  }

  std::size_t line_of(const std::string& key) const {
    auto it = section_.entries.find(key);
    return it == section_.entries.end() ? section_.line : it->second.line;
  }

 private:
  const Section& section_;
  bool angular_ = false;
};

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ParseError(field + " " + message, 0, field);
}

}  // namespace

SystemParams default_params() {
  SystemParams p;
  p.pump_lines = {
      {"molasses_3d", -2.1e6, 1.0},
      {"slowing", -2.8e6, 1.0},
  };
  return p;
}

void validate(const SystemParams& p) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  require(positive(p.loading_rate), "R", "(loading_rate) must be > 0");
  require(positive(p.gamma_loss), "gamma_loss", "must be > 0");
  require(positive(p.gamma_lasing), "gamma_L", "(gamma_lasing) must be > 0");
  require(positive(p.m0), "M0", "(m0) must be > 0");
  require(positive(p.g), "g", "must be > 0");
  require(positive(p.kappa), "kappa", "must be > 0");
  require(positive(p.gamma_atom), "gamma_atom", "must be > 0");
  require(positive(p.gamma_rir), "Gamma_RIR", "(gamma_rir) must be > 0");
  require(std::isfinite(p.delta_rir), "delta_RIR", "(delta_rir) must be finite");
  require(positive(p.temperature), "T", "(temperature) must be > 0");
  require(positive(p.n_recoil), "n_recoil", "must be > 0");
  require(std::isfinite(p.excited_fraction) && p.excited_fraction >= 0.0 && p.excited_fraction < 0.5,
          "excited_fraction", "must lie in [0, 0.5)");
  require(!p.pump_lines.empty(), "pump_lines", "must not be empty");
  for (const auto& line : p.pump_lines) {
    require(std::isfinite(line.detuning_hz), "pumps." + line.label + ".detuning", "must be finite");
    require(std::isfinite(line.weight) && line.weight >= 0.0, "pumps." + line.label + ".weight",
            "must be >= 0");
  }
}

void validate(const SweepSpec& s) {
  require(std::isfinite(s.step) && s.step > 0.0, "sweep.step", "must be > 0");
  require(std::isfinite(s.delta_ca_start) && std::isfinite(s.delta_ca_end), "sweep.start",
          "and sweep.end must be finite");
  require(s.delta_ca_start != s.delta_ca_end, "sweep.end", "must differ from sweep.start");
}

std::string_view to_string(SweepDirection d) { return d == SweepDirection::up ? "up" : "down"; }

ConfigFile parse_config(std::string_view text) {
  const auto sections = tokenize(text);
  ConfigFile cfg;
  cfg.params = default_params();
  std::vector<PumpLine> pumps;
  std::map<std::string, std::size_t> field_lines;

  for (const auto& section : sections) {
    if (section.name == "rates") {
      SectionReader r(section, {"loading_rate", "gamma_loss", "gamma_lasing", "m0", "excited_fraction",
                                "excited_fraction_in_loop"});
      auto& p = cfg.params;
      p.loading_rate = r.number("loading_rate").value_or(p.loading_rate);
      p.gamma_loss = r.number("gamma_loss").value_or(p.gamma_loss);
      p.gamma_lasing = r.number("gamma_lasing").value_or(p.gamma_lasing);
      p.m0 = r.number("m0").value_or(p.m0);
      p.excited_fraction = r.number("excited_fraction").value_or(p.excited_fraction);
      p.excited_fraction_in_loop = r.boolean("excited_fraction_in_loop").value_or(p.excited_fraction_in_loop);
      field_lines["R"] = r.line_of("loading_rate");
      field_lines["gamma_loss"] = r.line_of("gamma_loss");
      field_lines["gamma_L"] = r.line_of("gamma_lasing");
      field_lines["M0"] = r.line_of("m0");
      field_lines["excited_fraction"] = r.line_of("excited_fraction");
    } else if (section.name == "cavity") {
      SectionReader r(section, {"angular", "g", "kappa", "gamma_atom"});
      auto& p = cfg.params;
      p.g = r.frequency("g").value_or(p.g);
      p.kappa = r.frequency("kappa").value_or(p.kappa);
      p.gamma_atom = r.frequency("gamma_atom").value_or(p.gamma_atom);
      field_lines["g"] = r.line_of("g");
      field_lines["kappa"] = r.line_of("kappa");
      field_lines["gamma_atom"] = r.line_of("gamma_atom");
    } else if (section.name == "gain") {
      SectionReader r(section, {"angular", "gamma_rir", "delta_rir", "temperature", "n_recoil"});
      auto& p = cfg.params;
      p.gamma_rir = r.frequency("gamma_rir").value_or(p.gamma_rir);
      p.delta_rir = r.frequency("delta_rir").value_or(p.delta_rir);
      p.temperature = r.number("temperature").value_or(p.temperature);
      p.n_recoil = r.number("n_recoil").value_or(p.n_recoil);
      field_lines["Gamma_RIR"] = r.line_of("gamma_rir");
      field_lines["delta_RIR"] = r.line_of("delta_rir");
      field_lines["T"] = r.line_of("temperature");
      field_lines["n_recoil"] = r.line_of("n_recoil");
    } else if (section.name.rfind("pumps.", 0) == 0) {
      const auto label = section.name.substr(6);
      if (!valid_identifier(label))
        throw ParseError("invalid pump label '" + label + "'", section.line);
      SectionReader r(section, {"angular", "detuning", "weight"});
      PumpLine line{label, r.required_frequency("detuning"), r.number("weight").value_or(1.0)};
      field_lines["pumps." + label + ".detuning"] = r.line_of("detuning");
      field_lines["pumps." + label + ".weight"] = r.line_of("weight");
      pumps.push_back(std::move(line));
    } else if (section.name == "sweep") {
      SectionReader r(section, {"angular", "start", "end", "step", "direction"});
      SweepSpec s;
      s.delta_ca_start = r.required_frequency("start");
      s.delta_ca_end = r.required_frequency("end");
      s.step = r.required_frequency("step");
      if (auto d = r.text("direction")) {
        if (*d == "up") s.direction = SweepDirection::up;
        else if (*d == "down") s.direction = SweepDirection::down;
        else throw ParseError("direction must be 'up' or 'down'", r.line_of("direction"), "direction");
      }
      try {
        validate(s);
      } catch (const ParseError& e) {
        throw ParseError(e.what(), r.line_of(e.field().substr(e.field().find('.') + 1)), e.field());
      }
      cfg.sweep = s;
    } else {
      throw ParseError("unknown section [" + section.name + "]", section.line);
    }
  }

  // Explicit pump sections replace the default pair.
  if (!pumps.empty()) cfg.params.pump_lines = std::move(pumps);

  try {
    validate(cfg.params);
  } catch (const ParseError& e) {
    auto it = field_lines.find(e.field());
    throw ParseError(e.what(), it == field_lines.end() ? 0 : it->second, e.field());
  }
  return cfg;
}

ConfigFile read_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

SystemParams load_config(const std::filesystem::path& path) { return read_config(path).params; }

void write_config(std::ostream& os, const SystemParams& p, const std::optional<SweepSpec>& sweep) {
  const auto num = [](double v) { return format_number(v); };
  os << "[rates]\n"
     << "loading_rate = " << num(p.loading_rate) << '\n'
     << "gamma_loss = " << num(p.gamma_loss) << '\n'
     << "gamma_lasing = " << num(p.gamma_lasing) << '\n'
     << "m0 = " << num(p.m0) << '\n'
     << "excited_fraction = " << num(p.excited_fraction) << '\n'
     << "excited_fraction_in_loop = " << (p.excited_fraction_in_loop ? "true" : "false") << '\n'
     << "\n[cavity]\n"
     << "g = " << num(p.g) << '\n'
     << "kappa = " << num(p.kappa) << '\n'
     << "gamma_atom = " << num(p.gamma_atom) << '\n'
     << "\n[gain]\n"
     << "gamma_rir = " << num(p.gamma_rir) << '\n'
     << "delta_rir = " << num(p.delta_rir) << '\n'
     << "temperature = " << num(p.temperature) << '\n'
     << "n_recoil = " << num(p.n_recoil) << '\n';
  for (const auto& line : p.pump_lines) {
    os << "\n[pumps." << line.label << "]\n"
       << "detuning = " << num(line.detuning_hz) << '\n'
       << "weight = " << num(line.weight) << '\n';
  }
  if (sweep) {
    os << "\n[sweep]\n"
       << "start = " << num(sweep->delta_ca_start) << '\n'
       << "end = " << num(sweep->delta_ca_end) << '\n'
       << "step = " << num(sweep->step) << '\n'
       << "direction = " << to_string(sweep->direction) << '\n';
  }
}

std::string to_config_string(const SystemParams& params, const std::optional<SweepSpec>& sweep) {
  std::ostringstream os;
  write_config(os, params, sweep);
  return os.str();
}

std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return std::filesystem::path(*flag);
  if (const char* env = std::getenv(kConfigEnvVar); env != nullptr && *env != '\0')
    return std::filesystem::path(env);
  return std::nullopt;
}

}  // namespace recoil
