#include "tma/experiment_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace tma {

ConfigError::ConfigError(const std::string& source, int line, const std::string& field, const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) +
                         (field.empty() ? std::string() : ": " + field) + ": " + message),
      line_(line),
      field_(field) {}

ArrayConfig ExperimentConfig::array_config() const {
  ArrayConfig a;
  a.n_elements = elements;
  a.n_subcarriers = subcarriers;
  a.theta0 = deg_to_rad(theta0_deg);
  a.modulation = ModulationScheme::from_name(modulation);
  a.f0 = f0_hz;
  a.fs = fs_hz;
  return a;
}

SwitchingPattern ExperimentConfig::pattern() const { return SwitchingPattern{delta_tau, tau_on}; }

double ExperimentConfig::theta_e() const {
  if (!theta_e_deg) throw std::invalid_argument("config has no attack.theta_e_deg");
  return deg_to_rad(*theta_e_deg);
}

AttackSearchSpace ExperimentConfig::search_space() const { return search_space_at(theta_e()); }

AttackSearchSpace ExperimentConfig::search_space_at(double theta_e) const {
  AttackSearchSpace s;
  s.max_elements = max_elements > 0 ? max_elements : elements + 2;
  s.l_steps = l_steps;
  s.epsilon = epsilon;
  s.modulation = ModulationScheme::from_name(modulation);
  s.theta0 = deg_to_rad(theta0_deg);
  s.theta_e = theta_e;
  return s;
}

std::string format_roundtrip(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw std::invalid_argument("expected a number, got '" + v + "'");
  }
  return out;
}

template <typename Int>
Int parse_int(const std::string& v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw std::invalid_argument("expected an integer, got '" + v + "'");
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i];
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"array.elements", [](ExperimentConfig& c, const std::string& v) { c.elements = parse_int<int>(v); }},
      {"array.subcarriers", [](ExperimentConfig& c, const std::string& v) { c.subcarriers = parse_int<int>(v); }},
      {"array.theta0_deg", [](ExperimentConfig& c, const std::string& v) { c.theta0_deg = parse_double(v); }},
      {"array.modulation",
       [](ExperimentConfig& c, const std::string& v) { c.modulation = ModulationScheme::from_name(v).name(); }},
      {"array.f0_hz", [](ExperimentConfig& c, const std::string& v) { c.f0_hz = parse_double(v); }},
      {"array.fs_hz", [](ExperimentConfig& c, const std::string& v) { c.fs_hz = parse_double(v); }},
      {"pattern.delta_tau", [](ExperimentConfig& c, const std::string& v) { c.delta_tau = parse_fraction(v); }},
      {"pattern.tau_on",
       [](ExperimentConfig& c, const std::string& v) {
         c.tau_on.clear();
         for (const auto& item : split_list(v)) c.tau_on.push_back(parse_fraction(item));
       }},
      {"attack.theta_e_deg", [](ExperimentConfig& c, const std::string& v) { c.theta_e_deg = parse_double(v); }},
      {"attack.max_elements", [](ExperimentConfig& c, const std::string& v) { c.max_elements = parse_int<int>(v); }},
      {"attack.l_steps", [](ExperimentConfig& c, const std::string& v) { c.l_steps = parse_int<int>(v); }},
      {"attack.epsilon", [](ExperimentConfig& c, const std::string& v) { c.epsilon = parse_double(v); }},
      {"attack.mode",
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "first") c.mode = SearchMode::first_match;
         else if (v == "exhaustive") c.mode = SearchMode::exhaustive;
         else throw std::invalid_argument("expected 'first' or 'exhaustive', got '" + v + "'");
       }},
      {"defense.multipliers",
       [](ExperimentConfig& c, const std::string& v) {
         c.multipliers.clear();
         for (const auto& item : split_list(v)) c.multipliers.push_back(parse_int<int>(item));
       }},
      {"defense.theta_r_deg", [](ExperimentConfig& c, const std::string& v) { c.theta_r_deg = parse_double(v); }},
      {"sweep.start_deg", [](ExperimentConfig& c, const std::string& v) { c.sweep_start_deg = parse_double(v); }},
      {"sweep.stop_deg", [](ExperimentConfig& c, const std::string& v) { c.sweep_stop_deg = parse_double(v); }},
      {"sweep.step_deg", [](ExperimentConfig& c, const std::string& v) { c.sweep_step_deg = parse_double(v); }},
      {"sweep.defied_start_deg", [](ExperimentConfig& c, const std::string& v) { c.defied_start_deg = parse_double(v); }},
      {"sweep.defied_stop_deg", [](ExperimentConfig& c, const std::string& v) { c.defied_stop_deg = parse_double(v); }},
      {"run.symbols", [](ExperimentConfig& c, const std::string& v) { c.symbols = parse_int<std::uint64_t>(v); }},
      {"run.seed", [](ExperimentConfig& c, const std::string& v) { c.seed = parse_int<std::uint64_t>(v); }},
      {"run.probe_symbol",
       [](ExperimentConfig& c, const std::string& v) {
         std::vector<int> idx;
         for (const auto& item : split_list(v)) idx.push_back(parse_int<int>(item));
         c.probe_symbol = std::move(idx);
       }},
      {"run.out_dir", [](ExperimentConfig& c, const std::string& v) { c.out_dir = v; }},
  };
  return table;
}

// Semantic checks after all keys are read; each names the offending field.
void validate(const ExperimentConfig& c, const std::string& source, const std::map<std::string, int>& lines) {
  auto fail = [&](const std::string& field, const std::string& msg) {
    const auto it = lines.find(field);
    throw ConfigError(source, it == lines.end() ? 0 : it->second, field, msg);
  };
  for (const char* required : {"array.elements", "array.subcarriers", "array.theta0_deg", "pattern.delta_tau",
                               "pattern.tau_on"}) {
    if (!lines.count(required)) fail(required, "missing required field");
  }
  try {
    c.array_config().validate();
  } catch (const std::invalid_argument& e) {
    fail(c.elements < 2 ? "array.elements" : c.subcarriers < 2 ? "array.subcarriers"
                                           : c.fs_hz <= 0 ? "array.fs_hz" : "array.theta0_deg",
         e.what());
  }
  const auto v = validate_pattern(c.pattern(), c.elements);
  if (!v.valid()) fail(v.delta_out_of_range || v.zero_on_time ? "pattern.delta_tau" : "pattern.tau_on", v.violations.front());
  if (c.theta_e_deg && !(*c.theta_e_deg >= 0.0 && *c.theta_e_deg <= 180.0)) fail("attack.theta_e_deg", "must lie in [0, 180]");
  if (c.max_elements != 0 && (c.max_elements < 2 || c.max_elements > 20)) fail("attack.max_elements", "must lie in [2, 20]");
  if (c.l_steps < 1) fail("attack.l_steps", "must be >= 1");
  if (!(c.epsilon > 0.0)) fail("attack.epsilon", "must be > 0");
  if (std::find(c.multipliers.begin(), c.multipliers.end(), 0) != c.multipliers.end() || c.multipliers.empty()) {
    fail("defense.multipliers", "multipliers must be nonzero and non-empty");
  }
  if (!(c.sweep_step_deg > 0.0)) fail("sweep.step_deg", "must be > 0");
  if (c.symbols < 1) fail("run.symbols", "must be >= 1");
  if (c.probe_symbol) {
    const int q = ModulationScheme::from_name(c.modulation).order();
    if (static_cast<int>(c.probe_symbol->size()) != c.subcarriers) fail("run.probe_symbol", "needs one index per subcarrier");
    for (int i : *c.probe_symbol) {
      if (i < 0 || i >= q) fail("run.probe_symbol", "constellation index out of range");
    }
  }
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  ExperimentConfig cfg;
  std::map<std::string, int> lines;
  std::string section;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(source, line_no, "", "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      static const char* known[] = {"array", "pattern", "attack", "defense", "sweep", "run"};
      if (std::none_of(std::begin(known), std::end(known), [&](const char* s) { return section == s; })) {
        throw ConfigError(source, line_no, section, "unknown section");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(source, line_no, "", "expected 'key = value'");
    if (section.empty()) throw ConfigError(source, line_no, "", "key outside of any section");
    const std::string field = section + "." + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(field);
    if (it == setters().end()) throw ConfigError(source, line_no, field, "unknown field");
    if (lines.count(field)) throw ConfigError(source, line_no, field, "duplicate field");
    try {
      it->second(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(source, line_no, field, e.what());
    }
    lines[field] = line_no;
  }
  validate(cfg, source, lines);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "", "cannot open config file");
  return parse_config(in, path);
}

std::string echo_config(const ExperimentConfig& c) {
  std::ostringstream o;
  auto fr = [](const std::vector<Fraction>& v) {
    std::vector<std::string> s;
    for (const auto& f : v) s.push_back(format_fraction(f));
    return join(s);
  };
  auto ints = [](const auto& v) {
    std::vector<std::string> s;
    for (const auto& i : v) s.push_back(std::to_string(i));
    return join(s);
  };
  o << "[array]\n"
    << "elements = " << c.elements << "\n"
    << "subcarriers = " << c.subcarriers << "\n"
    << "theta0_deg = " << format_roundtrip(c.theta0_deg) << "\n"
    << "modulation = " << c.modulation << "\n"
    << "f0_hz = " << format_roundtrip(c.f0_hz) << "\n"
    << "fs_hz = " << format_roundtrip(c.fs_hz) << "\n\n"
    << "[pattern]\n"
    << "delta_tau = " << format_fraction(c.delta_tau) << "\n"
    << "tau_on = " << fr(c.tau_on) << "\n\n"
    << "[attack]\n";
  if (c.theta_e_deg) o << "theta_e_deg = " << format_roundtrip(*c.theta_e_deg) << "\n";
  o << "max_elements = " << c.max_elements << "\n"
    << "l_steps = " << c.l_steps << "\n"
    << "epsilon = " << format_roundtrip(c.epsilon) << "\n"
    << "mode = " << (c.mode == SearchMode::first_match ? "first" : "exhaustive") << "\n\n"
    << "[defense]\n"
    << "multipliers = " << ints(c.multipliers) << "\n";
  if (c.theta_r_deg) o << "theta_r_deg = " << format_roundtrip(*c.theta_r_deg) << "\n";
  o << "\n[sweep]\n"
    << "start_deg = " << format_roundtrip(c.sweep_start_deg) << "\n"
    << "stop_deg = " << format_roundtrip(c.sweep_stop_deg) << "\n"
    << "step_deg = " << format_roundtrip(c.sweep_step_deg) << "\n";
  if (c.defied_start_deg) o << "defied_start_deg = " << format_roundtrip(*c.defied_start_deg) << "\n";
  if (c.defied_stop_deg) o << "defied_stop_deg = " << format_roundtrip(*c.defied_stop_deg) << "\n";
  o << "\n[run]\n"
    << "symbols = " << c.symbols << "\n"
    << "seed = " << c.seed << "\n";
  if (c.probe_symbol) o << "probe_symbol = " << ints(*c.probe_symbol) << "\n";
  o << "out_dir = " << c.out_dir << "\n";
  return o.str();
}

}  // namespace tma
