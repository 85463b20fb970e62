#pragma once

// Experiment description read by the command-line tool. Text format:
//
//   # comment
//   [array]
//   elements = 4
//   subcarriers = 6
//   theta0_deg = 60
//   modulation = QPSK
//   [pattern]
//   delta_tau = 1/4
//   tau_on = 0, 1/4, 1/2, 3/4
//   ...
//
// Angles are degrees here and radians everywhere else.

#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tma/attack.hpp"
#include "tma/defense.hpp"
#include "tma/tma_core.hpp"

namespace tma {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& field, const std::string& message);

  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

struct ExperimentConfig {
  // [array]
  int elements = 0;
  int subcarriers = 0;
  double theta0_deg = 0.0;
  std::string modulation = "BPSK";
  double f0_hz = 0.0;
  double fs_hz = 1.0;

  // [pattern]
  Fraction delta_tau;
  std::vector<Fraction> tau_on;

  // [attack]
  std::optional<double> theta_e_deg;
  int max_elements = 0;  // 0: elements + 2
  int l_steps = 10000;
  double epsilon = 1e-5;
  SearchMode mode = SearchMode::first_match;

  // [defense]
  std::vector<int> multipliers{1, -1};
  std::optional<double> theta_r_deg;  // picks the feasible plan nearest to this angle

  // [sweep]
  double sweep_start_deg = 0.0;
  double sweep_stop_deg = 180.0;
  double sweep_step_deg = 1.0;
  std::optional<double> defied_start_deg;
  std::optional<double> defied_stop_deg;

  // [run]
  std::uint64_t symbols = 10000;
  std::uint64_t seed = 1;
  std::optional<std::vector<int>> probe_symbol;  // constellation indices of the eavesdropped symbol
  std::string out_dir = "out";

  ArrayConfig array_config() const;
  SwitchingPattern pattern() const;
  /// Requires theta_e_deg.
  AttackSearchSpace search_space() const;
  AttackSearchSpace search_space_at(double theta_e) const;
  double theta_e() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses and validates. Throws ConfigError naming the line and field.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Canonical text form; parse_config(echo_config(c)) == c.
std::string echo_config(const ExperimentConfig& config);

/// Shortest decimal form that parses back to the same double.
std::string format_roundtrip(double v);

}  // namespace tma
