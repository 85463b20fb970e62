#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tma {

using cplx = std::complex<double>;

/// Gray-coded unit-average-power constellation.
///
/// Point index doubles as the bit label read MSB first, so the lexicographic
/// constellation-index order used by the attack search is also bit order.
///
///   BPSK : 0 -> +1, 1 -> -1
///   QPSK : b0 selects the in-phase sign, b1 the quadrature sign, scaled 1/sqrt(2)
///   16QAM: b0b1 select the in-phase level, b2b3 the quadrature level,
///          00 -> +3, 01 -> +1, 11 -> -1, 10 -> -3, scaled 1/sqrt(10)
class ModulationScheme {
 public:
  static ModulationScheme bpsk();
  static ModulationScheme qpsk();
  static ModulationScheme qam16();

  /// Accepts Q in {2, 4, 16}; throws std::invalid_argument otherwise.
  static ModulationScheme from_order(int order);
  /// Accepts "BPSK", "QPSK", "16QAM" (case-insensitive).
  static ModulationScheme from_name(std::string_view name);

  int order() const { return static_cast<int>(points_.size()); }
  int bits_per_symbol() const { return bits_per_symbol_; }
  std::span<const cplx> points() const { return points_; }
  const cplx& point(int index) const { return points_.at(static_cast<std::size_t>(index)); }
  std::string name() const;

  /// Bits of constellation point `index`, MSB first.
  std::vector<std::uint8_t> bits_of(int index) const;
  /// Hamming distance between the labels of two points.
  int bit_distance(int a, int b) const;

  friend bool operator==(const ModulationScheme& a, const ModulationScheme& b) {
    return a.order() == b.order();
  }

 private:
  ModulationScheme(int bits_per_symbol, std::vector<cplx> points);

  int bits_per_symbol_;
  std::vector<cplx> points_;
};

/// One OFDM symbol: a constellation point per subcarrier.
struct SymbolVector {
  std::vector<cplx> symbols;
  std::vector<int> indices;              ///< constellation index per subcarrier
  std::vector<std::uint8_t> source_bits; ///< K * log2(Q) bits, MSB first per subcarrier

  std::size_t size() const { return symbols.size(); }
};

/// Maps bits to Gray-coded points. Throws std::invalid_argument unless
/// bits.size() == K * log2(Q).
SymbolVector modulate(std::span<const std::uint8_t> bits, const ModulationScheme& scheme,
                      int n_subcarriers);

/// Builds a SymbolVector from constellation indices.
SymbolVector symbols_from_indices(std::span<const int> indices, const ModulationScheme& scheme);

/// Minimum-distance decision on samples / gain. Ties go to the lowest index.
/// Throws std::invalid_argument on zero gain.
SymbolVector slice(std::span<const cplx> samples, cplx gain, const ModulationScheme& scheme);

/// Bit errors between two symbol vectors of the same scheme.
int count_bit_errors(const SymbolVector& a, const SymbolVector& b, const ModulationScheme& scheme);

}  // namespace tma
