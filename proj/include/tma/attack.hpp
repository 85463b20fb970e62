#pragma once

// Exhaustive grid-search recovery of the switching pattern and symbols from
// one received OFDM symbol at a known eavesdropper direction.
//
// Loop nest, outermost first:
//   element count N^  = 2 .. M
//   switch-on slots     all N^! permutations of {0 .. N^-1}, lexicographic
//   ON duration         l / L for l = 0 .. L
//   symbol vector       all Q^K constellation-index vectors, lexicographic
// A hypothesis is accepted when ||Y - T^ S^||_2 / sqrt(K) <= epsilon.

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "tma/modulation.hpp"
#include "tma/tma_core.hpp"

namespace tma {

struct AttackSearchSpace {
  int max_elements = 2;  // M
  int l_steps = 1;       // L
  double epsilon = 1e-5;
  ModulationScheme modulation = ModulationScheme::bpsk();
  double theta0 = 0.0;   // radians, known to the eavesdropper
  double theta_e = 0.0;  // radians

  void validate() const;
};

enum class SearchMode { first_match, exhaustive };

struct CandidateSolution {
  int n_hat = 0;
  SwitchingPattern pattern_hat;
  SymbolVector s_hat;
  double residual = 0.0;
};

struct SearchOptions {
  int threads = 0;  // 0: TMA_DM_THREADS or hardware concurrency
};

struct SearchResult {
  std::vector<CandidateSolution> candidates;  // canonical loop order
  std::uint64_t evaluations = 0;              // symbol-vector hypotheses actually visited
  /// Hypotheses the sequential loop visits up to and including the first
  /// accepted one; equals search_cost when nothing is accepted.
  std::uint64_t evaluations_to_first_match = 0;

  bool exhausted() const { return candidates.empty(); }
};

/// Thrown where a caller needs a first match and the search found none.
class SearchExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double residual(std::span<const cplx> y, std::span<const cplx> y_hat);
double residual(const ReceivedVector& y, const ReceivedVector& y_hat);

/// Calls visit(slots) for every permutation of {0 .. N-1} in lexicographic order.
void for_each_tau_permutation(int n, const std::function<void(std::span<const int>)>& visit);
/// All N! switch-on assignments tau_n = slot_n / N, lexicographic in the slots.
std::vector<std::vector<Fraction>> tau_permutations(int n);
/// The index-th lexicographic permutation of {0 .. N-1}.
std::vector<int> permutation_at(int n, std::uint64_t index);

/// Worst-case hypothesis count sum_{N'=2..M} N'! (L+1) Q^K.
/// Throws std::overflow_error if it does not fit in 64 bits.
std::uint64_t search_cost(const AttackSearchSpace& space, int n_subcarriers);

SearchResult grid_search_defy(const ReceivedVector& y, const AttackSearchSpace& space, SearchMode mode,
                              const SearchOptions& options = {});

/// Mixing matrix a candidate implies at the eavesdropper direction.
MixingMatrix candidate_matrix(const CandidateSolution& c, const AttackSearchSpace& space, int n_subcarriers);

}  // namespace tma
