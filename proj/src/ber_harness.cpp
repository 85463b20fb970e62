#include "tma/ber_harness.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <mutex>
#include <random>

#include "tma/parallel.hpp"

namespace tma {

namespace {

constexpr std::uint64_t kBitStream = 1;
constexpr std::uint64_t kDecodeStream = 2;
constexpr std::uint64_t kSymbolChunk = 512;

double ratio(std::uint64_t errors, std::uint64_t bits) {
  return bits == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(bits);
}

// Sums per-symbol error counts over [0, n_symbols); counts are integers, so the
// total does not depend on how chunks are split across workers.
template <typename PerSymbol>
std::uint64_t count_errors(std::uint64_t n_symbols, const MonteCarloOptions& options, PerSymbol&& per_symbol) {
  std::mutex m;
  std::uint64_t total = 0;
  parallel_chunks(n_symbols, worker_count(options.threads), kSymbolChunk, [&](std::uint64_t b, std::uint64_t e) {
    std::uint64_t local = 0;
    for (std::uint64_t t = b; t < e; ++t) local += static_cast<std::uint64_t>(per_symbol(t));
    std::lock_guard lock(m);
    total += local;
  });
  return total;
}

AttackSearchSpace aimed(AttackSearchSpace space, double theta0, double theta_e) {
  space.theta0 = theta0;
  space.theta_e = theta_e;
  return space;
}

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::undefied: return "undefied";
    case Scenario::defied: return "defied";
    default: return "defended";
  }
}

SymbolVector draw_symbol(const ModulationScheme& scheme, int n_subcarriers, std::uint64_t seed, std::uint64_t t) {
  auto rng = substream(seed, kBitStream, t);
  const auto n_bits = static_cast<std::size_t>(n_subcarriers * scheme.bits_per_symbol());
  std::vector<std::uint8_t> bits(n_bits);
  std::uint64_t word = 0;
  for (std::size_t b = 0; b < n_bits; ++b) {
    if (b % 64 == 0) word = rng();
    bits[b] = static_cast<std::uint8_t>((word >> (63 - b % 64)) & 1);
  }
  return modulate(bits, scheme, n_subcarriers);
}

BerReport measure_undefied(const ArrayConfig& config, const SwitchingPattern& pattern, double theta,
                           std::uint64_t n_symbols, std::uint64_t seed, const MonteCarloOptions& options) {
  if (n_symbols < 1) throw std::invalid_argument("measure_undefied needs at least one symbol");
  const auto t = mixing_matrix(config, pattern, theta);
  const cplx gain(legitimate_gain(config, pattern), 0.0);
  const auto& scheme = config.modulation;
  const int k = config.n_subcarriers;

  BerReport r;
  r.scenario = Scenario::undefied;
  r.direction_deg = rad_to_deg(theta);
  r.seed = seed;
  r.n_bits = n_symbols * static_cast<std::uint64_t>(k * scheme.bits_per_symbol());
  r.n_errors = count_errors(n_symbols, options, [&](std::uint64_t i) {
    const auto s = draw_symbol(scheme, k, seed, i);
    const auto y = transmit(t, s);
    return count_bit_errors(slice(y.samples, gain, scheme), s, scheme);
  });
  r.ber = ratio(r.n_errors, r.n_bits);
  return r;
}

SymbolVector decode_with_candidate(const MixingMatrix& t_hat, const ReceivedVector& y, const ModulationScheme& scheme,
                                   double epsilon, SplitMix64& rng) {
  const int k = t_hat.n_subcarriers();
  if (static_cast<int>(y.size()) != k) throw std::invalid_argument("decode_with_candidate: length mismatch");
  const int q = scheme.order();
  const auto pts = scheme.points();
  const auto& e = t_hat.entries();

  std::vector<int> digits(static_cast<std::size_t>(k), 0);
  std::vector<std::vector<int>> matches;
  std::vector<int> best;
  double best_r = std::numeric_limits<double>::infinity();
  std::vector<cplx> y_hat(static_cast<std::size_t>(k));
  for (;;) {
    for (int i = 0; i < k; ++i) {
      cplx acc{0.0, 0.0};
      for (int c = 0; c < k; ++c) acc += e(i, c) * pts[static_cast<std::size_t>(digits[static_cast<std::size_t>(c)])];
      y_hat[static_cast<std::size_t>(i)] = acc;
    }
    const double r = residual(y.samples, y_hat);
    if (r <= epsilon) matches.push_back(digits);
    if (r < best_r) {
      best_r = r;
      best = digits;
    }
    int pos = k - 1;
    while (pos >= 0 && ++digits[static_cast<std::size_t>(pos)] == q) digits[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) break;
  }
  if (matches.empty()) return symbols_from_indices(best, scheme);
  if (matches.size() == 1) return symbols_from_indices(matches.front(), scheme);
  std::uniform_int_distribution<std::size_t> pick(0, matches.size() - 1);
  return symbols_from_indices(matches[pick(rng)], scheme);
}

namespace {

// Errors over the stream when the eavesdropper decodes with t_hat. A full-rank
// estimate is inverted exactly and sliced; a deficient one falls back to the
// residual-matching decoder, drawing its tie-breaks from `decode_stream`.
std::uint64_t decode_stream_errors(const MixingMatrix& t_true, const MixingMatrix& t_hat, const ModulationScheme& scheme,
                                   double epsilon, std::uint64_t n_symbols, std::uint64_t seed,
                                   std::uint64_t decode_stream, const MonteCarloOptions& options) {
  const int k = t_true.n_subcarriers();
  const bool full_rank = numerical_rank(t_hat) == k;
  const Eigen::FullPivLU<CMatrix> lu(t_hat.entries());
  return count_errors(n_symbols, options, [&](std::uint64_t i) {
    const auto s = draw_symbol(scheme, k, seed, i);
    const auto y = transmit(t_true, s);
    SymbolVector decided;
    if (full_rank) {
      const Eigen::Map<const Eigen::VectorXcd> yv(y.samples.data(), k);
      const Eigen::VectorXcd est = lu.solve(yv);
      decided = slice(std::span<const cplx>(est.data(), static_cast<std::size_t>(k)), cplx(1.0, 0.0), scheme);
    } else {
      auto rng = substream(seed, decode_stream, i);
      decided = decode_with_candidate(t_hat, y, scheme, epsilon, rng);
    }
    return count_bit_errors(decided, s, scheme);
  });
}

}  // namespace

BerReport measure_defied(const ArrayConfig& config, const SwitchingPattern& pattern, double theta_e,
                         std::uint64_t n_symbols, const AttackSearchSpace& space, std::uint64_t seed,
                         const MonteCarloOptions& options) {
  if (n_symbols < 1) throw std::invalid_argument("measure_defied needs at least one symbol");
  const auto& scheme = config.modulation;
  const int k = config.n_subcarriers;
  const auto search_space = aimed(space, config.theta0, theta_e);
  const auto t_true = mixing_matrix(config, pattern, theta_e);

  const auto y0 = transmit(t_true, draw_symbol(scheme, k, seed, 0));
  auto found = grid_search_defy(y0, search_space, SearchMode::first_match, SearchOptions{options.threads});
  if (found.exhausted()) {
    throw SearchExhausted("grid search found no hypothesis within epsilon at theta_e = " +
                          std::to_string(rad_to_deg(theta_e)) + " deg");
  }
  const auto& cand = found.candidates.front();
  const auto t_hat = candidate_matrix(cand, search_space, k);

  BerReport r;
  r.scenario = Scenario::defied;
  r.direction_deg = rad_to_deg(theta_e);
  r.seed = seed;
  r.n_bits = n_symbols * static_cast<std::uint64_t>(k * scheme.bits_per_symbol());
  r.n_errors = decode_stream_errors(t_true, t_hat, scheme, search_space.epsilon, n_symbols, seed, kDecodeStream, options);
  r.ber = ratio(r.n_errors, r.n_bits);
  r.per_candidate.push_back(CandidateBer{cand, r.n_bits, r.n_errors, r.ber});
  return r;
}

BerReport measure_defended(const ArrayConfig& config, const SwitchingPattern& pattern, double theta_e,
                           const RotationPlan& plan, std::uint64_t n_symbols, const AttackSearchSpace& space,
                           std::uint64_t seed, const MonteCarloOptions& options) {
  if (n_symbols < 1) throw std::invalid_argument("measure_defended needs at least one symbol");
  const auto rotated = apply_rotation(config, theta_e, plan);
  const auto& scheme = config.modulation;
  const int k = config.n_subcarriers;
  const auto search_space = aimed(space, rotated.config.theta0, rotated.theta_e);
  const auto t_true = mixing_matrix(rotated.config, pattern, rotated.theta_e);

  const auto y0 = transmit(t_true, draw_symbol(scheme, k, seed, 0));
  const auto found = grid_search_defy(y0, search_space, SearchMode::exhaustive, SearchOptions{options.threads});
  if (found.exhausted()) throw SearchExhausted("exhaustive search found no hypothesis at the rotated geometry");

  BerReport r;
  r.scenario = Scenario::defended;
  r.direction_deg = rad_to_deg(theta_e);
  r.seed = seed;
  r.rotation = plan;
  const std::uint64_t stream_bits = n_symbols * static_cast<std::uint64_t>(k * scheme.bits_per_symbol());

  // Candidates sharing a pattern share the matrix, so each distinct pattern is
  // decoded once with its own tie-break stream.
  std::vector<std::size_t> group_of(found.candidates.size());
  std::vector<std::size_t> representatives;
  for (std::size_t c = 0; c < found.candidates.size(); ++c) {
    std::size_t g = 0;
    while (g < representatives.size() && !same_pattern(found.candidates[representatives[g]], found.candidates[c])) ++g;
    if (g == representatives.size()) representatives.push_back(c);
    group_of[c] = g;
  }
  std::vector<std::uint64_t> group_errors;
  for (std::size_t g = 0; g < representatives.size(); ++g) {
    const auto t_hat = candidate_matrix(found.candidates[representatives[g]], search_space, k);
    group_errors.push_back(decode_stream_errors(t_true, t_hat, scheme, search_space.epsilon, n_symbols, seed,
                                                kDecodeStream + 1 + g, options));
  }
  for (std::size_t c = 0; c < found.candidates.size(); ++c) {
    const auto errors = group_errors[group_of[c]];
    r.per_candidate.push_back(CandidateBer{found.candidates[c], stream_bits, errors, ratio(errors, stream_bits)});
    r.n_bits += stream_bits;
    r.n_errors += errors;
  }
  r.ber = ratio(r.n_errors, r.n_bits);
  r.defense_failed = found.candidates.size() == 1;
  return r;
}

std::vector<SweepRow> sweep_directions(const ArrayConfig& config, const SwitchingPattern& pattern,
                                       const SweepSpec& sweep, std::uint64_t n_symbols,
                                       const AttackSearchSpace& space, std::uint64_t seed,
                                       const MonteCarloOptions& options) {
  std::vector<SweepRow> rows;
  rows.reserve(sweep.thetas.size());
  for (double theta : sweep.thetas) {
    SweepRow row;
    row.theta_deg = rad_to_deg(theta);
    row.undefied = measure_undefied(config, pattern, theta, n_symbols, seed, options);
    if (theta >= sweep.defied_lo - 1e-12 && theta <= sweep.defied_hi + 1e-12) {
      try {
        row.defied = measure_defied(config, pattern, theta, n_symbols, space, seed, options);
      } catch (const SearchExhausted&) {
        row.defied_exhausted = true;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> angle_grid_deg(double start_deg, double stop_deg, double step_deg) {
  if (!(step_deg > 0.0)) throw std::invalid_argument("sweep step must be positive");
  std::vector<double> out;
  for (std::int64_t i = 0;; ++i) {
    const double v = std::round((start_deg + static_cast<double>(i) * step_deg) * 1e9) / 1e9;
    if (v > stop_deg + 0.5 * step_deg * 1e-6) break;
    out.push_back(v);
  }
  return out;
}

}  // namespace tma
