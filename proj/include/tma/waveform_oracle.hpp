#pragma once

// Time-domain reference for the mixing matrix. The switched array output is
// demodulated per subcarrier by integrating over one modulation period in
// closed form, one ON interval at a time. Nothing here goes through the
// Fourier-series generators of tma_core, so the two paths check each other.

#include <vector>

#include "tma/modulation.hpp"
#include "tma/tma_core.hpp"

namespace tma::oracle {

/// Half-open ON interval in normalized period units.
struct Interval {
  double start = 0.0;
  double end = 0.0;

  double length() const { return end - start; }
};

struct SwitchingTimeline {
  std::vector<std::vector<Interval>> elements;  // ON intervals per element, inside [0, 1)

  int n_elements() const { return static_cast<int>(elements.size()); }
};

/// One interval per element; split in two when the ON window wraps past 1.
SwitchingTimeline build_timeline(const SwitchingPattern& pattern);

/// Y_i for 1-based subcarrier i: the product of the OFDM waveform, element
/// weights and switching functions, correlated against subcarrier i over one
/// period. Throws std::out_of_range for i outside [1, K].
cplx demodulated_subcarrier(int i, const ArrayConfig& config, const SwitchingTimeline& timeline,
                            std::span<const cplx> symbols, double theta);

/// Column k is the response to the k-th unit symbol vector. Throws
/// std::logic_error if the result is not Toeplitz to 1e-9.
MixingMatrix oracle_mixing_matrix(const ArrayConfig& config, const SwitchingPattern& pattern, double theta);

}  // namespace tma::oracle
