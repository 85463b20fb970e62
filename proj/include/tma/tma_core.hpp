#pragma once

// Analytic model of a time-modulated-array OFDM transmitter: Fourier
// coefficients of the ON-OFF switching functions, the harmonic generators
// V'_m, and the K x K Toeplitz mixing matrix they induce at a direction.

#include <Eigen/Dense>
#include <boost/rational.hpp>

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tma/modulation.hpp"

namespace tma {

using Fraction = boost::rational<std::int64_t>;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;

/// Generators with magnitude below this fraction of the largest one are
/// treated as structurally zero.
inline constexpr double kStructuralZeroTol = 1e-10;

inline double to_double(const Fraction& f) {
  return static_cast<double>(f.numerator()) / static_cast<double>(f.denominator());
}

// Array geometry and OFDM numerology. Angles are radians.
struct ArrayConfig {
  int n_elements = 0;
  int n_subcarriers = 0;
  double theta0 = 0.0;
  ModulationScheme modulation = ModulationScheme::bpsk();
  double f0 = 0.0;  // first-subcarrier frequency, Hz (waveform oracle only)
  double fs = 1.0;  // subcarrier spacing, Hz (waveform oracle only)

  /// Throws std::invalid_argument if N < 2, K < 2, theta0 outside [0, pi] or fs <= 0.
  void validate() const;
};

/// Per-element normalized switch-on instants plus the shared normalized ON
/// duration. Stored as exact fractions so grid membership is exact.
struct SwitchingPattern {
  Fraction delta_tau;
  std::vector<Fraction> tau_on;

  int size() const { return static_cast<int>(tau_on.size()); }
  double delta_tau_value() const { return to_double(delta_tau); }
  std::vector<double> tau_on_values() const;

  /// tau_on[n] = slots[n] / N, where slots is a permutation of 0..N-1.
  static SwitchingPattern from_slots(std::span<const int> slots, Fraction delta_tau);
  /// tau_on[n] = n / N.
  static SwitchingPattern canonical(int n_elements, Fraction delta_tau);

  /// Slot indices h-1 such that tau_on[n] = slot / N. Throws if off-grid.
  std::vector<int> slots() const;

  friend bool operator==(const SwitchingPattern&, const SwitchingPattern&) = default;
};

struct PatternValidation {
  bool wrong_length = false;
  bool delta_out_of_range = false;
  bool off_grid = false;        // some tau_on not in {(h-1)/N}
  bool duplicate_instants = false;
  bool zero_on_time = false;
  std::vector<std::string> violations;

  bool valid() const { return violations.empty(); }
};

/// Checks the three switching-pattern choice rules for an N-element array.
PatternValidation validate_pattern(const SwitchingPattern& pattern, int n_elements);

/// True when every off-diagonal generator vanishes at theta0 for a K-subcarrier
/// system. Beyond the choice rules this needs N * delta_tau to be an integer
/// whenever K > N, since harmonics at multiples of N do not cancel otherwise.
bool preserves_directional_modulation(const SwitchingPattern& pattern, int n_subcarriers);

/// Toeplitz mixing matrix at one direction.
class MixingMatrix {
 public:
  /// generators[m + K - 1] = V'_m for m in [-(K-1), K-1]; entries use 1/sqrt(N K).
  MixingMatrix(int n_elements, std::vector<cplx> generators, double theta);
  /// Wraps dense entries; generators are read back from the first row and column.
  static MixingMatrix from_entries(int n_elements, CMatrix entries, double theta);

  int n_subcarriers() const { return static_cast<int>(entries_.rows()); }
  int n_elements() const { return n_elements_; }
  double direction() const { return theta_; }
  const CMatrix& entries() const { return entries_; }
  std::span<const cplx> generators() const { return generators_; }
  /// V'_m, zero outside the band.
  cplx generator(int m) const;
  cplx operator()(int i, int k) const { return entries_(i, k); }

 private:
  MixingMatrix() = default;

  int n_elements_ = 0;
  double theta_ = 0.0;
  std::vector<cplx> generators_;
  CMatrix entries_;
};

struct ReceivedVector {
  std::vector<cplx> samples;
  double direction = 0.0;

  std::size_t size() const { return samples.size(); }
};

/// Unnormalized sinc, sin(x)/x, with the series limit used near zero.
double sinc(double x);

/// Fourier coefficient a_mn of a unit square wave that is ON over
/// [tau_on, tau_on + delta_tau) of each period.
cplx harmonic_coefficient(int m, double tau_on, double delta_tau);

/// Element weight steering the main beam to theta0; n is 1-based.
cplx steering_weight(int n, double theta0);

/// Harmonic generator V'_m at direction theta.
cplx v_prime(int m, const ArrayConfig& config, const SwitchingPattern& pattern, double theta);

MixingMatrix mixing_matrix(const ArrayConfig& config, const SwitchingPattern& pattern, double theta);

/// Noise-free Y = T * S.
ReceivedVector transmit(const MixingMatrix& t, const SymbolVector& s);
ReceivedVector transmit(const MixingMatrix& t, std::span<const cplx> s);

/// Diagonal gain delta_tau * sqrt(N / K) seen at the desired direction.
double legitimate_gain(const ArrayConfig& config, const SwitchingPattern& pattern);

/// (-pi, pi] wrap.
double wrap_angle(double radians);
inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

std::string format_fraction(const Fraction& f);
/// Parses "p/q", an integer, or a decimal with up to 9 fractional digits.
Fraction parse_fraction(const std::string& text);

}  // namespace tma
