#include "tma/tma_core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <stdexcept>

namespace tma {

void ArrayConfig::validate() const {
  if (n_elements < 2) throw std::invalid_argument("array needs at least 2 elements");
  if (n_subcarriers < 2) throw std::invalid_argument("OFDM symbol needs at least 2 subcarriers");
  if (!(theta0 >= 0.0 && theta0 <= kPi)) throw std::invalid_argument("theta0 must lie in [0, pi]");
  if (!(fs > 0.0)) throw std::invalid_argument("subcarrier spacing must be positive");
}

std::vector<double> SwitchingPattern::tau_on_values() const {
  std::vector<double> out;
  out.reserve(tau_on.size());
  for (const auto& t : tau_on) out.push_back(to_double(t));
  return out;
}

SwitchingPattern SwitchingPattern::from_slots(std::span<const int> slots, Fraction delta_tau) {
  SwitchingPattern p;
  p.delta_tau = delta_tau;
  const auto n = static_cast<std::int64_t>(slots.size());
  for (int s : slots) p.tau_on.emplace_back(s, n);
  return p;
}

SwitchingPattern SwitchingPattern::canonical(int n_elements, Fraction delta_tau) {
  std::vector<int> slots(static_cast<std::size_t>(n_elements));
  for (int n = 0; n < n_elements; ++n) slots[static_cast<std::size_t>(n)] = n;
  return from_slots(slots, delta_tau);
}

std::vector<int> SwitchingPattern::slots() const {
  const auto n = static_cast<std::int64_t>(tau_on.size());
  std::vector<int> out;
  for (const auto& t : tau_on) {
    const Fraction s = t * n;
    if (s.denominator() != 1) throw std::invalid_argument("switch-on instant " + format_fraction(t) + " is off-grid");
    out.push_back(static_cast<int>(s.numerator()));
  }
  return out;
}

PatternValidation validate_pattern(const SwitchingPattern& pattern, int n_elements) {
  PatternValidation v;
  if (pattern.size() != n_elements) {
    v.wrong_length = true;
    v.violations.push_back("expected " + std::to_string(n_elements) + " switch-on instants, got " +
                           std::to_string(pattern.size()));
  }
  if (pattern.delta_tau < 0 || pattern.delta_tau > 1) {
    v.delta_out_of_range = true;
    v.violations.push_back("ON duration " + format_fraction(pattern.delta_tau) + " outside [0, 1]");
  }
  for (const auto& t : pattern.tau_on) {
    const Fraction slot = t * static_cast<std::int64_t>(n_elements);
    if (slot.denominator() != 1 || slot < 0 || slot >= n_elements) {
      v.off_grid = true;
      v.violations.push_back("switch-on instant " + format_fraction(t) + " not in {(h-1)/" +
                             std::to_string(n_elements) + "}");
    }
  }
  std::set<Fraction> seen;
  for (const auto& t : pattern.tau_on) {
    if (!seen.insert(t).second) {
      v.duplicate_instants = true;
      v.violations.push_back("duplicate switch-on instant " + format_fraction(t));
    }
  }
  if ((pattern.delta_tau * static_cast<std::int64_t>(pattern.size())).numerator() == 0) {
    v.zero_on_time = true;
    v.violations.push_back("zero total ON time");
  }
  return v;
}

bool preserves_directional_modulation(const SwitchingPattern& pattern, int n_subcarriers) {
  const auto n = pattern.size();
  if (!validate_pattern(pattern, n).valid()) return false;
  if (n_subcarriers <= n) return true;
  return (pattern.delta_tau * static_cast<std::int64_t>(n)).denominator() == 1;
}

MixingMatrix::MixingMatrix(int n_elements, std::vector<cplx> generators, double theta)
    : n_elements_(n_elements), theta_(theta), generators_(std::move(generators)) {
  if (generators_.empty() || generators_.size() % 2 == 0) {
    throw std::invalid_argument("mixing matrix needs 2K-1 generators");
  }
  if (n_elements_ < 1) throw std::invalid_argument("mixing matrix needs a positive element count");
  const int k = static_cast<int>((generators_.size() + 1) / 2);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_elements_) * k);
  entries_.resize(k, k);
  for (int i = 0; i < k; ++i) {
    for (int c = 0; c < k; ++c) entries_(i, c) = scale * generators_[static_cast<std::size_t>(i - c + k - 1)];
  }
}

MixingMatrix MixingMatrix::from_entries(int n_elements, CMatrix entries, double theta) {
  if (entries.rows() != entries.cols() || entries.rows() < 1) {
    throw std::invalid_argument("mixing matrix must be square");
  }
  MixingMatrix out;
  out.n_elements_ = n_elements;
  out.theta_ = theta;
  const auto k = static_cast<int>(entries.rows());
  const double unscale = std::sqrt(static_cast<double>(n_elements) * k);
  out.generators_.resize(static_cast<std::size_t>(2 * k - 1));
  for (int m = -(k - 1); m <= k - 1; ++m) {
    const cplx e = m >= 0 ? entries(m, 0) : entries(0, -m);
    out.generators_[static_cast<std::size_t>(m + k - 1)] = unscale * e;
  }
  out.entries_ = std::move(entries);
  return out;
}

cplx MixingMatrix::generator(int m) const {
  const int k = n_subcarriers();
  if (m <= -k || m >= k) return {0.0, 0.0};
  return generators_[static_cast<std::size_t>(m + k - 1)];
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

cplx harmonic_coefficient(int m, double tau_on, double delta_tau) {
  const double md = static_cast<double>(m);
  const double amplitude = delta_tau * sinc(md * kPi * delta_tau);
  return std::polar(amplitude, -md * kPi * (2.0 * tau_on + delta_tau));
}

cplx steering_weight(int n, double theta0) {
  return std::polar(1.0, -static_cast<double>(n - 1) * kPi * std::cos(theta0));
}

namespace {

// Element n (0-based) contributes a_mn * exp(j n pi (cos theta - cos theta0));
// the combined steering/propagation phase is formed from the cosine
// difference so it is exactly zero at theta0.
cplx v_prime_impl(int m, double cos_diff, double delta_tau, std::span<const double> tau) {
  cplx sum{0.0, 0.0};
  for (std::size_t n = 0; n < tau.size(); ++n) {
    sum += harmonic_coefficient(m, tau[n], delta_tau) * std::polar(1.0, static_cast<double>(n) * kPi * cos_diff);
  }
  return sum;
}

}  // namespace

cplx v_prime(int m, const ArrayConfig& config, const SwitchingPattern& pattern, double theta) {
  if (pattern.size() != config.n_elements) throw std::invalid_argument("pattern length differs from element count");
  const auto tau = pattern.tau_on_values();
  return v_prime_impl(m, std::cos(theta) - std::cos(config.theta0), pattern.delta_tau_value(), tau);
}

MixingMatrix mixing_matrix(const ArrayConfig& config, const SwitchingPattern& pattern, double theta) {
  config.validate();
  if (pattern.size() != config.n_elements) throw std::invalid_argument("pattern length differs from element count");
  const int k = config.n_subcarriers;
  const auto tau = pattern.tau_on_values();
  const double cos_diff = std::cos(theta) - std::cos(config.theta0);
  const double dt = pattern.delta_tau_value();
  std::vector<cplx> gens(static_cast<std::size_t>(2 * k - 1));
  for (int m = -(k - 1); m <= k - 1; ++m) gens[static_cast<std::size_t>(m + k - 1)] = v_prime_impl(m, cos_diff, dt, tau);
  return MixingMatrix(config.n_elements, std::move(gens), theta);
}

ReceivedVector transmit(const MixingMatrix& t, std::span<const cplx> s) {
  if (static_cast<Eigen::Index>(s.size()) != t.entries().cols()) {
    throw std::invalid_argument("transmit: symbol vector length " + std::to_string(s.size()) +
                                " does not match " + std::to_string(t.entries().cols()) + " subcarriers");
  }
  const Eigen::Map<const Eigen::VectorXcd> sv(s.data(), static_cast<Eigen::Index>(s.size()));
  const Eigen::VectorXcd y = t.entries() * sv;
  return ReceivedVector{std::vector<cplx>(y.data(), y.data() + y.size()), t.direction()};
}

ReceivedVector transmit(const MixingMatrix& t, const SymbolVector& s) { return transmit(t, std::span<const cplx>(s.symbols)); }

double legitimate_gain(const ArrayConfig& config, const SwitchingPattern& pattern) {
  return pattern.delta_tau_value() * std::sqrt(static_cast<double>(config.n_elements) / config.n_subcarriers);
}

double wrap_angle(double radians) {
  double r = std::remainder(radians, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

std::string format_fraction(const Fraction& f) {
  if (f.denominator() == 1) return std::to_string(f.numerator());
  return std::to_string(f.numerator()) + "/" + std::to_string(f.denominator());
}

Fraction parse_fraction(const std::string& text) {
  auto parse_int = [&](std::string_view s) {
    std::int64_t v = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || s.empty()) throw std::invalid_argument("bad number '" + text + "'");
    return v;
  };
  std::string_view s(text);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (const auto slash = s.find('/'); slash != std::string_view::npos) {
    const auto den = parse_int(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
    return Fraction(parse_int(s.substr(0, slash)), den);
  }
  if (const auto dot = s.find('.'); dot != std::string_view::npos) {
    const auto frac = s.substr(dot + 1);
    if (frac.size() > 9) throw std::invalid_argument("too many decimals in '" + text + "'");
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const bool neg = !s.empty() && s.front() == '-';
    auto whole_text = s.substr(0, dot);
    if (neg) whole_text.remove_prefix(1);
    const std::int64_t whole = whole_text.empty() ? 0 : parse_int(whole_text);
    const std::int64_t part = frac.empty() ? 0 : parse_int(frac);
    const Fraction mag(whole * den + part, den);
    return neg ? -mag : mag;
  }
  return Fraction(parse_int(s));
}

}  // namespace tma
