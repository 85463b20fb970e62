#include "tma/waveform_oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace tma::oracle {

namespace {

constexpr double kToeplitzTol = 1e-9;

// Integral of exp(j 2 pi nu u) over [a, b).
cplx integrate_tone(double nu, double a, double b) {
  if (nu == 0.0) return {b - a, 0.0};
  const double w = 2.0 * kPi * nu;
  return (std::polar(1.0, w * b) - std::polar(1.0, w * a)) / cplx(0.0, w);
}

}  // namespace

SwitchingTimeline build_timeline(const SwitchingPattern& pattern) {
  SwitchingTimeline tl;
  const double dt = pattern.delta_tau_value();
  for (const auto& t : pattern.tau_on) {
    std::vector<Interval> on;
    const double start = to_double(t);
    if (dt > 0.0) {
      if (pattern.delta_tau == Fraction(1)) {
        on.push_back({0.0, 1.0});
      } else if (t + pattern.delta_tau > 1) {
        on.push_back({start, 1.0});
        on.push_back({0.0, to_double(t + pattern.delta_tau - 1)});
      } else {
        on.push_back({start, to_double(t + pattern.delta_tau)});
      }
    }
    tl.elements.push_back(std::move(on));
  }
  return tl;
}

cplx demodulated_subcarrier(int i, const ArrayConfig& config, const SwitchingTimeline& timeline,
                            std::span<const cplx> symbols, double theta) {
  const int k_count = config.n_subcarriers;
  if (i < 1 || i > k_count) throw std::out_of_range("subcarrier index " + std::to_string(i) + " outside [1, K]");
  if (static_cast<int>(symbols.size()) != k_count) throw std::invalid_argument("symbol vector length differs from K");
  if (timeline.n_elements() != config.n_elements) throw std::invalid_argument("timeline element count differs from N");

  const double f_i = config.f0 + (i - 1) * config.fs;
  const double cos_theta = std::cos(theta);
  const double cos_theta0 = std::cos(config.theta0);
  cplx acc{0.0, 0.0};
  for (int n = 0; n < config.n_elements; ++n) {
    // Element weight steering to theta0, times the propagation phase toward theta.
    const cplx weight = std::polar(1.0, -n * kPi * cos_theta0) * std::polar(1.0, n * kPi * cos_theta);
    cplx element{0.0, 0.0};
    for (const Interval& on : timeline.elements[static_cast<std::size_t>(n)]) {
      for (int k = 1; k <= k_count; ++k) {
        const double f_k = config.f0 + (k - 1) * config.fs;
        const double nu = (f_k - f_i) / config.fs;
        element += symbols[static_cast<std::size_t>(k - 1)] * integrate_tone(nu, on.start, on.end);
      }
    }
    acc += weight * element;
  }
  return acc / std::sqrt(static_cast<double>(config.n_elements) * k_count);
}

MixingMatrix oracle_mixing_matrix(const ArrayConfig& config, const SwitchingPattern& pattern, double theta) {
  config.validate();
  if (pattern.size() != config.n_elements) throw std::invalid_argument("pattern length differs from element count");
  const int k_count = config.n_subcarriers;
  const auto timeline = build_timeline(pattern);
  CMatrix entries(k_count, k_count);
  std::vector<cplx> unit(static_cast<std::size_t>(k_count), cplx(0.0, 0.0));
  for (int k = 0; k < k_count; ++k) {
    unit[static_cast<std::size_t>(k)] = 1.0;
    for (int i = 1; i <= k_count; ++i) entries(i - 1, k) = demodulated_subcarrier(i, config, timeline, unit, theta);
    unit[static_cast<std::size_t>(k)] = 0.0;
  }
  for (int i = 1; i < k_count; ++i) {
    for (int k = 1; k < k_count; ++k) {
      if (std::abs(entries(i, k) - entries(i - 1, k - 1)) > kToeplitzTol) {
        throw std::logic_error("oracle mixing matrix is not Toeplitz at (" + std::to_string(i) + ", " +
                               std::to_string(k) + ")");
      }
    }
  }
  return MixingMatrix::from_entries(config.n_elements, std::move(entries), theta);
}

}  // namespace tma::oracle
