#include "tma/modulation.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tma {

namespace {

// Gray level for a two-bit in-phase or quadrature label of 16QAM.
double qam16_level(int two_bits) {
  switch (two_bits) {
    case 0b00: return 3.0;
    case 0b01: return 1.0;
    case 0b11: return -1.0;
    default: return -3.0;  // 0b10
  }
}

}  // namespace

ModulationScheme::ModulationScheme(int bits_per_symbol, std::vector<cplx> points)
    : bits_per_symbol_(bits_per_symbol), points_(std::move(points)) {}

ModulationScheme ModulationScheme::bpsk() { return ModulationScheme(1, {cplx(1.0, 0.0), cplx(-1.0, 0.0)}); }

ModulationScheme ModulationScheme::qpsk() {
  const double a = 1.0 / std::sqrt(2.0);
  std::vector<cplx> pts;
  for (int idx = 0; idx < 4; ++idx) {
    const int b0 = (idx >> 1) & 1;
    const int b1 = idx & 1;
    pts.emplace_back(a * (1 - 2 * b0), a * (1 - 2 * b1));
  }
  return ModulationScheme(2, std::move(pts));
}

ModulationScheme ModulationScheme::qam16() {
  const double a = 1.0 / std::sqrt(10.0);
  std::vector<cplx> pts;
  for (int idx = 0; idx < 16; ++idx) {
    pts.emplace_back(a * qam16_level((idx >> 2) & 0b11), a * qam16_level(idx & 0b11));
  }
  return ModulationScheme(4, std::move(pts));
}

ModulationScheme ModulationScheme::from_order(int order) {
  switch (order) {
    case 2: return bpsk();
    case 4: return qpsk();
    case 16: return qam16();
    default: throw std::invalid_argument("unsupported modulation order " + std::to_string(order));
  }
}

ModulationScheme ModulationScheme::from_name(std::string_view name) {
  std::string upper;
  for (char c : name) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (upper == "BPSK") return bpsk();
  if (upper == "QPSK") return qpsk();
  if (upper == "16QAM" || upper == "QAM16") return qam16();
  throw std::invalid_argument("unknown modulation '" + std::string(name) + "'");
}

std::string ModulationScheme::name() const {
  switch (order()) {
    case 2: return "BPSK";
    case 4: return "QPSK";
    default: return "16QAM";
  }
}

std::vector<std::uint8_t> ModulationScheme::bits_of(int index) const {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(bits_per_symbol_));
  for (int b = 0; b < bits_per_symbol_; ++b) {
    out[static_cast<std::size_t>(b)] = static_cast<std::uint8_t>((index >> (bits_per_symbol_ - 1 - b)) & 1);
  }
  return out;
}

int ModulationScheme::bit_distance(int a, int b) const {
  return std::popcount(static_cast<unsigned>(a ^ b));
}

SymbolVector modulate(std::span<const std::uint8_t> bits, const ModulationScheme& scheme, int n_subcarriers) {
  const auto bps = static_cast<std::size_t>(scheme.bits_per_symbol());
  if (n_subcarriers < 1 || bits.size() != static_cast<std::size_t>(n_subcarriers) * bps) {
    throw std::invalid_argument("modulate: expected " + std::to_string(n_subcarriers * scheme.bits_per_symbol()) +
                                " bits, got " + std::to_string(bits.size()));
  }
  SymbolVector out;
  out.source_bits.assign(bits.begin(), bits.end());
  out.indices.reserve(static_cast<std::size_t>(n_subcarriers));
  out.symbols.reserve(static_cast<std::size_t>(n_subcarriers));
  for (std::size_t k = 0; k < static_cast<std::size_t>(n_subcarriers); ++k) {
    int idx = 0;
    for (std::size_t b = 0; b < bps; ++b) {
      const auto bit = bits[k * bps + b];
      if (bit > 1) throw std::invalid_argument("modulate: bit values must be 0 or 1");
      idx = (idx << 1) | bit;
    }
    out.indices.push_back(idx);
    out.symbols.push_back(scheme.point(idx));
  }
  return out;
}

SymbolVector symbols_from_indices(std::span<const int> indices, const ModulationScheme& scheme) {
  SymbolVector out;
  for (int idx : indices) {
    if (idx < 0 || idx >= scheme.order()) throw std::invalid_argument("constellation index out of range");
    out.indices.push_back(idx);
    out.symbols.push_back(scheme.point(idx));
    const auto b = scheme.bits_of(idx);
    out.source_bits.insert(out.source_bits.end(), b.begin(), b.end());
  }
  return out;
}

SymbolVector slice(std::span<const cplx> samples, cplx gain, const ModulationScheme& scheme) {
  if (gain == cplx(0.0, 0.0)) throw std::invalid_argument("slice: zero gain");
  std::vector<int> decided;
  decided.reserve(samples.size());
  const auto pts = scheme.points();
  for (const cplx& y : samples) {
    const cplx z = y / gain;
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < scheme.order(); ++c) {
      const double d = std::norm(z - pts[static_cast<std::size_t>(c)]);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    decided.push_back(best);
  }
  return symbols_from_indices(decided, scheme);
}

int count_bit_errors(const SymbolVector& a, const SymbolVector& b, const ModulationScheme& scheme) {
  if (a.indices.size() != b.indices.size()) throw std::invalid_argument("count_bit_errors: length mismatch");
  int errors = 0;
  for (std::size_t k = 0; k < a.indices.size(); ++k) errors += scheme.bit_distance(a.indices[k], b.indices[k]);
  return errors;
}

}  // namespace tma
