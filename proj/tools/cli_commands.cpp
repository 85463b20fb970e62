#include "cli_commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include "tma/ber_harness.hpp"
#include "tma/defense.hpp"
#include "tma/report_writer.hpp"
#include "tma/tma_core.hpp"

namespace tma::cli {

namespace {

using Files = std::vector<std::pair<std::string, std::string>>;

struct Outcome {
  ExitCode code = ExitCode::ok;
  Files files;
};

SymbolVector probe_symbol(const ExperimentConfig& c) {
  const auto scheme = ModulationScheme::from_name(c.modulation);
  if (c.probe_symbol) return symbols_from_indices(*c.probe_symbol, scheme);
  return draw_symbol(scheme, c.subcarriers, c.seed, 0);
}

std::string deg(double rad) { return format_sig6(rad_to_deg(rad)); }

Outcome cmd_transmit(const ExperimentConfig& c, std::ostream& out) {
  const auto array = c.array_config();
  const double theta = c.theta_e_deg ? c.theta_e() : array.theta0;
  const auto t = mixing_matrix(array, c.pattern(), theta);
  const auto s = probe_symbol(c);
  const auto y = transmit(t, s);
  out << "direction: " << deg(theta) << " deg\n";
  out << "mixing matrix (" << t.n_subcarriers() << "x" << t.n_subcarriers() << "):\n";
  for (int i = 0; i < t.n_subcarriers(); ++i) {
    out << "  ";
    for (int k = 0; k < t.n_subcarriers(); ++k) out << (k ? "  " : "") << format_complex(t(i, k));
    out << '\n';
  }
  out << "symbols: " << format_symbols(s) << '\n';
  out << "received:";
  for (const auto& v : y.samples) out << ' ' << format_complex(v);
  out << '\n';
  return {ExitCode::ok, {{"mixing_matrix.csv", to_csv(matrix_table(t))}, {"received.csv", to_csv(received_table(y))}}};
}

Outcome cmd_attack(const ExperimentConfig& c, std::ostream& out) {
  const auto array = c.array_config();
  const auto space = c.search_space();
  const auto t = mixing_matrix(array, c.pattern(), space.theta_e);
  const auto y = transmit(t, probe_symbol(c));
  const auto result = grid_search_defy(y, space, c.mode);
  out << "worst-case evaluations: " << search_cost(space, c.subcarriers) << '\n';
  out << "evaluations: " << result.evaluations << '\n';
  out << "candidates: " << result.candidates.size() << '\n';
  for (const auto& cand : result.candidates) {
    out << "  N=" << cand.n_hat << " delta_tau=" << format_fraction(cand.pattern_hat.delta_tau) << " tau=["
        << format_tau_list(cand.pattern_hat.tau_on) << "] S=[" << format_symbols(cand.s_hat)
        << "] residual=" << format_sig6(cand.residual) << '\n';
  }
  Outcome o{ExitCode::ok, {{"candidates.csv", to_csv(candidate_table(result.candidates))}}};
  if (result.exhausted()) {
    out << "search exhausted\n";
    o.code = ExitCode::search_exhausted;
  }
  return o;
}

// The requested theta_r picks the nearest feasible plan; otherwise the first
// plan that keeps both directions inside the half space.
std::optional<RotationPlan> choose_plan(const ExperimentConfig& c, const std::vector<RotationPlan>& plans) {
  const auto array = c.array_config();
  std::optional<RotationPlan> best;
  double best_gap = std::numeric_limits<double>::infinity();
  for (const auto& p : plans) {
    try {
      apply_rotation(array, c.theta_e(), p);
    } catch (const HalfSpaceViolation&) {
      continue;
    }
    if (!c.theta_r_deg) return p;
    const double gap = std::abs(rad_to_deg(p.theta_r) - *c.theta_r_deg);
    if (gap < best_gap) {
      best_gap = gap;
      best = p;
    }
  }
  return best;
}

Outcome cmd_defend(const ExperimentConfig& c, std::ostream& out) {
  const auto array = c.array_config();
  const auto pattern = c.pattern();
  const double theta_e = c.theta_e();
  const auto plans = rotation_plans(array.theta0, theta_e, c.elements, c.multipliers);
  Outcome o;
  o.files.emplace_back("rotation_plans.csv", to_csv(rotation_table(plans)));
  out << "rotation plans:\n";
  for (const auto& p : plans) {
    out << "  c=" << p.multiplier << ' ' << (p.branch == RotationBranch::principal ? "principal " : "supplement")
        << " theta_r = " << deg(p.theta_r) << " deg\n";
  }
  const auto plan = choose_plan(c, plans);
  if (!plan) {
    out << "no feasible rotation keeps both directions in [0, 180] deg\n";
    o.code = ExitCode::defense_failed;
    return o;
  }
  const auto rotated = apply_rotation(array, theta_e, *plan);
  out << "theta_r = " << deg(plan->theta_r) << " deg\n";
  out << "rotated theta0 = " << deg(rotated.config.theta0) << " deg, theta_e = " << deg(rotated.theta_e) << " deg\n";

  const auto t = mixing_matrix(rotated.config, pattern, rotated.theta_e);
  out << "rank at theta_e: " << numerical_rank(t) << " of " << c.subcarriers << '\n';
  out << "structure: " << to_string(structural_classify(t, c.elements)) << '\n';
  const auto dc = check_design_conditions(rotated.config, pattern, rotated.theta_e);
  out << "conditions: max|V'_m!=0(theta0)|=" << format_sig6(dc.max_offdiag_at_theta0)
      << " |V'_0(theta0)|=" << format_sig6(dc.v0_at_theta0) << " |V'_0(theta_e)|=" << format_sig6(dc.v0_at_theta_e)
      << " |V'_-1(theta_e)|=" << format_sig6(dc.vm1_at_theta_e) << '\n';

  auto space = c.search_space();
  space.theta0 = rotated.config.theta0;
  space.theta_e = rotated.theta_e;
  const auto s = probe_symbol(c);
  const CandidateSolution actual{c.elements, pattern, s, 0.0};
  const auto amb = analyze_ambiguity(transmit(t, s), space, actual);

  const auto defended = measure_defended(array, pattern, theta_e, *plan, c.symbols, c.search_space(), c.seed);
  // The actual row reports what a naive eavesdropper sees with no defense.
  const auto undefied = measure_undefied(array, pattern, theta_e, c.symbols, c.seed);

  std::vector<CandidateSolution> rows{actual};
  std::vector<double> bers{undefied.ber};
  std::vector<std::string> roles{"actual"};
  for (std::size_t i = 0; i < amb.candidates.size(); ++i) {
    rows.push_back(amb.candidates[i]);
    double ber = std::numeric_limits<double>::quiet_NaN();
    for (const auto& pc : defended.per_candidate) {
      if (same_pattern(pc.candidate, amb.candidates[i])) ber = pc.ber;
    }
    bers.push_back(ber);
    roles.push_back(to_string(amb.cause_labels[i]));
  }
  out << "ambiguity: " << amb.candidates.size() << " candidates, " << amb.distinct_symbol_vectors
      << " symbol vectors, " << amb.distinct_patterns << " patterns\n";
  for (std::size_t i = 0; i < amb.candidates.size(); ++i) {
    const auto& cand = amb.candidates[i];
    out << "  " << to_string(amb.cause_labels[i]) << " N=" << cand.n_hat << " delta_tau="
        << format_fraction(cand.pattern_hat.delta_tau) << " tau=[" << format_tau_list(cand.pattern_hat.tau_on)
        << "] S=[" << format_symbols(cand.s_hat) << "] ber=" << format_sig6(bers[i + 1]) << '\n';
  }
  out << "defended BER = " << format_sig6(defended.ber) << '\n';
  o.files.emplace_back("ambiguity.csv", to_csv(candidate_table(rows, bers, roles)));
  o.files.emplace_back("defended_ber.csv", to_csv(ber_table({defended})));
  if (defended.defense_failed) {
    out << "defense failed: the search left a single candidate\n";
    o.code = ExitCode::defense_failed;
  }
  return o;
}

Outcome cmd_ber(const ExperimentConfig& c, std::ostream& out) {
  const auto array = c.array_config();
  const auto pattern = c.pattern();
  const double theta_e = c.theta_e();
  std::vector<BerReport> reports;
  reports.push_back(measure_undefied(array, pattern, theta_e, c.symbols, c.seed));
  Outcome o;
  try {
    reports.push_back(measure_defied(array, pattern, theta_e, c.symbols, c.search_space(), c.seed));
  } catch (const SearchExhausted& e) {
    out << e.what() << '\n';
    o.code = ExitCode::search_exhausted;
  }
  if (c.theta_r_deg) {
    if (const auto plan = choose_plan(c, rotation_plans(array.theta0, theta_e, c.elements, c.multipliers))) {
      reports.push_back(measure_defended(array, pattern, theta_e, *plan, c.symbols, c.search_space(), c.seed));
      if (reports.back().defense_failed && o.code == ExitCode::ok) o.code = ExitCode::defense_failed;
    }
  }
  for (const auto& r : reports) {
    out << to_string(r.scenario) << " BER at " << format_sig6(r.direction_deg) << " deg: " << format_sig6(r.ber) << " ("
        << r.n_errors << "/" << r.n_bits << ")\n";
  }
  o.files.emplace_back("ber.csv", to_csv(ber_table(reports)));
  return o;
}

Outcome cmd_sweep(const ExperimentConfig& c, std::ostream& out) {
  const auto array = c.array_config();
  SweepSpec spec;
  for (double d : angle_grid_deg(c.sweep_start_deg, c.sweep_stop_deg, c.sweep_step_deg)) spec.thetas.push_back(deg_to_rad(d));
  if (c.defied_start_deg && c.defied_stop_deg) {
    spec.defied_lo = deg_to_rad(*c.defied_start_deg);
    spec.defied_hi = deg_to_rad(*c.defied_stop_deg);
  }
  const auto space = c.search_space_at(array.theta0);
  const auto rows = sweep_directions(array, c.pattern(), spec, c.symbols, space, c.seed);
  std::size_t defied = 0, exhausted = 0;
  double worst_defied = 0.0;
  for (const auto& r : rows) {
    if (r.defied) {
      ++defied;
      worst_defied = std::max(worst_defied, r.defied->ber);
    }
    if (r.defied_exhausted) ++exhausted;
  }
  out << rows.size() << " directions, " << defied << " with a defied run";
  if (defied) out << ", max defied BER " << format_sig6(worst_defied);
  if (exhausted) out << ", " << exhausted << " searches exhausted";
  out << '\n';
  return {ExitCode::ok, {{"sweep.csv", to_csv(sweep_table(rows))}, {"sweep.dat", to_plot_data(sweep_plot(rows))}}};
}

}  // namespace

void write_outputs(const std::string& dir, const ExperimentConfig& config, const Files& files) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
  write_text_file((std::filesystem::path(dir) / "config_echo.cfg").string(), echo_config(config));
  for (const auto& [name, contents] : files) write_text_file((std::filesystem::path(dir) / name).string(), contents);
}

ExitCode run_subcommand(const std::string& name, const std::string& config_path, const Overrides& overrides,
                        std::ostream& out, std::ostream& err) {
  ExperimentConfig config;
  try {
    config = load_config(config_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  }
  if (overrides.out_dir) config.out_dir = *overrides.out_dir;
  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.mode) config.mode = *overrides.mode;
  if (overrides.symbols) config.symbols = *overrides.symbols;

  const bool needs_theta_e = name == "attack" || name == "defend" || name == "ber";
  if (needs_theta_e && !config.theta_e_deg) {
    err << "config error: " << config_path << ": attack.theta_e_deg: required by '" << name << "'\n";
    return ExitCode::config_error;
  }
  try {
    Outcome o;
    if (name == "transmit") o = cmd_transmit(config, out);
    else if (name == "attack") o = cmd_attack(config, out);
    else if (name == "defend") o = cmd_defend(config, out);
    else if (name == "ber") o = cmd_ber(config, out);
    else if (name == "sweep") o = cmd_sweep(config, out);
    else {
      err << "unknown subcommand '" << name << "'\n";
      return ExitCode::config_error;
    }
    write_outputs(config.out_dir, config, o.files);
    return o.code;
  } catch (const SearchExhausted& e) {
    err << "search exhausted: " << e.what() << '\n';
    return ExitCode::search_exhausted;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return ExitCode::failure;
  }
}

}  // namespace tma::cli
