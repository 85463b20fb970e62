#pragma once

// Noise-free Monte-Carlo bit error rates at an eavesdropper direction for
// three eavesdroppers: naive slicing (undefied), grid search followed by
// inversion (defied), and grid search against a rotated array (defended).
//
// Symbol t draws its bits from substream(seed, 1, t), so reports are identical
// across worker counts and a longer run extends a shorter one.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tma/attack.hpp"
#include "tma/defense.hpp"
#include "tma/rng.hpp"
#include "tma/tma_core.hpp"

namespace tma {

enum class Scenario { undefied, defied, defended };

std::string to_string(Scenario s);

struct CandidateBer {
  CandidateSolution candidate;
  std::uint64_t n_bits = 0;
  std::uint64_t n_errors = 0;
  double ber = 0.0;
};

struct BerReport {
  Scenario scenario = Scenario::undefied;
  double direction_deg = 0.0;
  std::uint64_t n_bits = 0;
  std::uint64_t n_errors = 0;
  double ber = 0.0;
  std::vector<CandidateBer> per_candidate;
  std::uint64_t seed = 0;
  bool defense_failed = false;
  std::optional<RotationPlan> rotation;
};

struct MonteCarloOptions {
  int threads = 0;  // 0: TMA_DM_THREADS or hardware concurrency
};

/// Random symbol t of a run.
SymbolVector draw_symbol(const ModulationScheme& scheme, int n_subcarriers, std::uint64_t seed, std::uint64_t t);

/// Slices the output at theta with the legitimate gain delta_tau * sqrt(N/K).
BerReport measure_undefied(const ArrayConfig& config, const SwitchingPattern& pattern, double theta,
                           std::uint64_t n_symbols, std::uint64_t seed, const MonteCarloOptions& options = {});

/// First-match search on symbol 0, then decodes every symbol with the
/// recovered matrix: exact solve plus slicing when it has full rank,
/// decode_with_candidate otherwise. Throws SearchExhausted if nothing matches.
/// The search directions are taken from config.theta0 and theta_e.
BerReport measure_defied(const ArrayConfig& config, const SwitchingPattern& pattern, double theta_e,
                         std::uint64_t n_symbols, const AttackSearchSpace& space, std::uint64_t seed,
                         const MonteCarloOptions& options = {});

/// All symbol vectors S with residual(Y, T S) <= epsilon; one is drawn
/// uniformly when several pass, the minimum-residual vector when none does.
SymbolVector decode_with_candidate(const MixingMatrix& t_hat, const ReceivedVector& y, const ModulationScheme& scheme,
                                   double epsilon, SplitMix64& rng);

/// Rotates the array, runs the exhaustive search on symbol 0 at the rotated
/// eavesdropper direction and decodes the stream once per distinct candidate
/// pattern. The report's BER is the uniform mean over candidates;
/// defense_failed is set when only one candidate survives.
BerReport measure_defended(const ArrayConfig& config, const SwitchingPattern& pattern, double theta_e,
                           const RotationPlan& plan, std::uint64_t n_symbols, const AttackSearchSpace& space,
                           std::uint64_t seed, const MonteCarloOptions& options = {});

struct SweepRow {
  double theta_deg = 0.0;
  BerReport undefied;
  std::optional<BerReport> defied;  // only inside the defied window
  bool defied_exhausted = false;
};

struct SweepSpec {
  std::vector<double> thetas;        // radians
  double defied_lo = 1.0;            // radians; empty window when lo > hi
  double defied_hi = 0.0;
};

std::vector<SweepRow> sweep_directions(const ArrayConfig& config, const SwitchingPattern& pattern,
                                       const SweepSpec& sweep, std::uint64_t n_symbols,
                                       const AttackSearchSpace& space, std::uint64_t seed,
                                       const MonteCarloOptions& options = {});

/// start, start + step, ... while <= stop (with a half-step guard against rounding).
std::vector<double> angle_grid_deg(double start_deg, double stop_deg, double step_deg);

}  // namespace tma
