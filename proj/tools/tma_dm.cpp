// tma-dm: batch front-end for mixing-matrix dumps, grid-search attacks,
// rotation defenses, BER measurements and direction sweeps.

#include <CLI11.hpp>

#include <iostream>

#include "cli_commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Time-modulated-array directional modulation: attack and defense experiments"};
  app.require_subcommand(1);

  std::string config;
  tma::cli::Overrides ov;
  std::string mode;
  std::string out;
  std::uint64_t seed = 0;
  std::uint64_t symbols = 0;

  const char* names[][2] = {
      {"transmit", "Dump the mixing matrix and one received vector"},
      {"attack", "Run the grid search on one received symbol"},
      {"defend", "Rotation plans, rank/structure report, ambiguity analysis, defended BER"},
      {"ber", "Undefied / defied (/ defended) BER at the eavesdropper direction"},
      {"sweep", "BER versus direction, CSV and plot data"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : names) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "Experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory (overrides run.out_dir)");
    sub->add_option("--seed", seed, "PRNG seed (overrides run.seed)");
    sub->add_option("--mode", mode, "Search mode")->check(CLI::IsMember({"first", "exhaustive"}));
    sub->add_option("--symbols", symbols, "Monte-Carlo OFDM symbols (overrides run.symbols)")->check(CLI::PositiveNumber);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(tma::cli::ExitCode::config_error);
  }

  for (auto* sub : subs) {
    if (!sub->parsed()) continue;
    if (sub->count("--out")) ov.out_dir = out;
    if (sub->count("--seed")) ov.seed = seed;
    if (sub->count("--symbols")) ov.symbols = symbols;
    if (sub->count("--mode")) ov.mode = mode == "first" ? tma::SearchMode::first_match : tma::SearchMode::exhaustive;
    return static_cast<int>(tma::cli::run_subcommand(sub->get_name(), config, ov, std::cout, std::cerr));
  }
  return static_cast<int>(tma::cli::ExitCode::config_error);
}
