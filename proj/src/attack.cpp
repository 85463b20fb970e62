#include "tma/attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>

#include "tma/parallel.hpp"

namespace tma {

void AttackSearchSpace::validate() const {
  if (max_elements < 2) throw std::invalid_argument("search needs max_elements >= 2");
  if (max_elements > 20) throw std::invalid_argument("max_elements above 20 overflows the permutation index");
  if (l_steps < 1) throw std::invalid_argument("search needs l_steps >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("search needs epsilon > 0");
  if (!(theta0 >= 0.0 && theta0 <= kPi) || !(theta_e >= 0.0 && theta_e <= kPi)) {
    throw std::invalid_argument("search directions must lie in [0, pi]");
  }
}

double residual(std::span<const cplx> y, std::span<const cplx> y_hat) {
  if (y.size() != y_hat.size()) throw std::invalid_argument("residual: length mismatch");
  if (y.empty()) throw std::invalid_argument("residual: empty vectors");
  double sq = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sq += std::norm(y[i] - y_hat[i]);
  return std::sqrt(sq / static_cast<double>(y.size()));
}

double residual(const ReceivedVector& y, const ReceivedVector& y_hat) { return residual(y.samples, y_hat.samples); }

void for_each_tau_permutation(int n, const std::function<void(std::span<const int>)>& visit) {
  if (n < 1) throw std::invalid_argument("permutation size must be positive");
  std::vector<int> slots(static_cast<std::size_t>(n));
  std::iota(slots.begin(), slots.end(), 0);
  do {
    visit(slots);
  } while (std::next_permutation(slots.begin(), slots.end()));
}

std::vector<std::vector<Fraction>> tau_permutations(int n) {
  std::vector<std::vector<Fraction>> out;
  for_each_tau_permutation(n, [&](std::span<const int> slots) {
    std::vector<Fraction> tau;
    tau.reserve(slots.size());
    for (int s : slots) tau.emplace_back(s, n);
    out.push_back(std::move(tau));
  });
  return out;
}

namespace {

std::uint64_t factorial(int n) {
  std::uint64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
  return f;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw std::overflow_error("search cost exceeds 64 bits");
  return out;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw std::overflow_error("search cost exceeds 64 bits");
  return out;
}

std::uint64_t symbol_space_size(int q, int k) {
  std::uint64_t s = 1;
  for (int i = 0; i < k; ++i) s = checked_mul(s, static_cast<std::uint64_t>(q));
  return s;
}

struct Hit {
  std::uint64_t perm = 0;
  int l = 0;
  std::uint64_t symbol_index = 0;
  std::vector<int> digits;
  double residual = 0.0;
};

// Scans every (l, S) for one slot permutation, in loop order. Returns the
// accepted hypotheses; stops after the first when first_only is set.
class PermutationScanner {
 public:
  PermutationScanner(const ReceivedVector& y, const AttackSearchSpace& space)
      : y_(y), space_(space), k_(static_cast<int>(y.size())), q_(space.modulation.order()),
        prefix_(static_cast<std::size_t>(k_ + 1), std::vector<cplx>(static_cast<std::size_t>(k_))),
        contrib_(static_cast<std::size_t>(k_ * q_), std::vector<cplx>(static_cast<std::size_t>(k_))),
        digits_(static_cast<std::size_t>(k_)) {}

  std::uint64_t evaluations() const { return evaluations_; }

  void scan(int n_hat, std::uint64_t perm, std::span<const int> slots, bool first_only, std::vector<Hit>& hits) {
    const ArrayConfig cfg{n_hat, k_, space_.theta0, space_.modulation, 0.0, 1.0};
    const std::uint64_t per_matrix = symbol_space_size(q_, k_);
    for (int l = 0; l <= space_.l_steps; ++l) {
      const auto pattern = SwitchingPattern::from_slots(slots, Fraction(l, space_.l_steps));
      if (!validate_pattern(pattern, n_hat).valid()) {
        // Zero ON time radiates nothing; its symbol loop is rejected wholesale.
        evaluations_ += per_matrix;
        continue;
      }
      const auto t_hat = mixing_matrix(cfg, pattern, space_.theta_e);
      if (scan_symbols(t_hat, perm, l, first_only, hits) && first_only) return;
    }
  }

 private:
  // Odometer over constellation indices (subcarrier 1 most significant) with
  // cached partial sums prefix_[j] = sum_{k<j} T[:, k] * s_k.
  bool scan_symbols(const MixingMatrix& t_hat, std::uint64_t perm, int l, bool first_only, std::vector<Hit>& hits) {
    const auto pts = space_.modulation.points();
    const auto& e = t_hat.entries();
    for (int k = 0; k < k_; ++k) {
      for (int c = 0; c < q_; ++c) {
        auto& col = contrib_[static_cast<std::size_t>(k * q_ + c)];
        for (int i = 0; i < k_; ++i) col[static_cast<std::size_t>(i)] = e(i, k) * pts[static_cast<std::size_t>(c)];
      }
    }
    std::fill(digits_.begin(), digits_.end(), 0);
    std::fill(prefix_[0].begin(), prefix_[0].end(), cplx(0.0, 0.0));
    const double threshold_sq = space_.epsilon * space_.epsilon * k_;
    bool found = false;
    int dirty = 0;  // first position whose prefix must be rebuilt
    for (std::uint64_t sidx = 0;; ++sidx) {
      for (int j = dirty; j < k_; ++j) {
        const auto& col = contrib_[static_cast<std::size_t>(j * q_ + digits_[static_cast<std::size_t>(j)])];
        const auto& prev = prefix_[static_cast<std::size_t>(j)];
        auto& next = prefix_[static_cast<std::size_t>(j + 1)];
        for (int i = 0; i < k_; ++i) next[static_cast<std::size_t>(i)] = prev[static_cast<std::size_t>(i)] + col[static_cast<std::size_t>(i)];
      }
      ++evaluations_;
      const auto& y_hat = prefix_[static_cast<std::size_t>(k_)];
      double sq = 0.0;
      for (int i = 0; i < k_; ++i) sq += std::norm(y_.samples[static_cast<std::size_t>(i)] - y_hat[static_cast<std::size_t>(i)]);
      if (sq <= threshold_sq) {
        const double r = std::sqrt(sq / k_);
        if (r <= space_.epsilon) {
          hits.push_back(Hit{perm, l, sidx, digits_, r});
          found = true;
          if (first_only) return true;
        }
      }
      int pos = k_ - 1;
      while (pos >= 0 && ++digits_[static_cast<std::size_t>(pos)] == q_) {
        digits_[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
      dirty = pos;
    }
    return found;
  }

  const ReceivedVector& y_;
  const AttackSearchSpace& space_;
  int k_;
  int q_;
  std::vector<std::vector<cplx>> prefix_;
  std::vector<std::vector<cplx>> contrib_;
  std::vector<int> digits_;
  std::uint64_t evaluations_ = 0;
};

}  // namespace

std::vector<int> permutation_at(int n, std::uint64_t index) {
  if (n < 1 || n > 20) throw std::invalid_argument("permutation size must be in [1, 20]");
  if (index >= factorial(n)) throw std::out_of_range("permutation index out of range");
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> out;
  out.reserve(pool.size());
  for (int remaining = n; remaining > 0; --remaining) {
    const std::uint64_t block = factorial(remaining - 1);
    const auto pick = static_cast<std::size_t>(index / block);
    index %= block;
    out.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

std::uint64_t search_cost(const AttackSearchSpace& space, int n_subcarriers) {
  if (space.max_elements < 2 || space.l_steps < 1 || n_subcarriers < 1) {
    throw std::invalid_argument("search_cost: invalid search space");
  }
  const std::uint64_t per_pattern = checked_mul(static_cast<std::uint64_t>(space.l_steps) + 1,
                                                symbol_space_size(space.modulation.order(), n_subcarriers));
  std::uint64_t total = 0;
  std::uint64_t fact = 1;
  for (int n = 2; n <= space.max_elements; ++n) {
    fact = checked_mul(fact, static_cast<std::uint64_t>(n));
    total = checked_add(total, checked_mul(fact, per_pattern));
  }
  return total;
}

SearchResult grid_search_defy(const ReceivedVector& y, const AttackSearchSpace& space, SearchMode mode,
                              const SearchOptions& options) {
  space.validate();
  const int k = static_cast<int>(y.size());
  if (k < 2) throw std::invalid_argument("received vector needs at least 2 subcarriers");
  const bool first_only = mode == SearchMode::first_match;
  const int workers = worker_count(options.threads);
  const std::uint64_t per_matrix = symbol_space_size(space.modulation.order(), k);
  const auto steps = static_cast<std::uint64_t>(space.l_steps) + 1;

  SearchResult result;
  std::uint64_t visited_before_level = 0;
  bool found = false;
  for (int n_hat = 2; n_hat <= space.max_elements; ++n_hat) {
    const std::uint64_t perms = factorial(n_hat);
    std::vector<Hit> level_hits;
    std::mutex merge;
    std::atomic<std::uint64_t> best_perm{std::numeric_limits<std::uint64_t>::max()};
    std::atomic<std::uint64_t> evaluations{0};
    const std::uint64_t chunk = std::max<std::uint64_t>(1, perms / (static_cast<std::uint64_t>(workers) * 16));

    parallel_chunks(perms, workers, chunk, [&](std::uint64_t begin, std::uint64_t end) {
      PermutationScanner scanner(y, space);
      std::vector<Hit> local;
      auto slots = permutation_at(n_hat, begin);
      for (std::uint64_t p = begin; p < end; ++p) {
        if (first_only && p > best_perm.load()) break;
        const std::size_t before = local.size();
        scanner.scan(n_hat, p, slots, first_only, local);
        if (first_only && local.size() > before) {
          std::uint64_t cur = best_perm.load();
          while (p < cur && !best_perm.compare_exchange_weak(cur, p)) {
          }
          break;
        }
        std::next_permutation(slots.begin(), slots.end());
      }
      evaluations += scanner.evaluations();
      std::lock_guard lock(merge);
      level_hits.insert(level_hits.end(), std::make_move_iterator(local.begin()), std::make_move_iterator(local.end()));
    });

    result.evaluations += evaluations.load();
    std::sort(level_hits.begin(), level_hits.end(), [](const Hit& a, const Hit& b) {
      if (a.perm != b.perm) return a.perm < b.perm;
      if (a.l != b.l) return a.l < b.l;
      return a.symbol_index < b.symbol_index;
    });
    for (const Hit& h : level_hits) {
      const auto slots = permutation_at(n_hat, h.perm);
      CandidateSolution c;
      c.n_hat = n_hat;
      c.pattern_hat = SwitchingPattern::from_slots(slots, Fraction(h.l, space.l_steps));
      c.s_hat = symbols_from_indices(h.digits, space.modulation);
      c.residual = h.residual;
      result.candidates.push_back(std::move(c));
      if (first_only) break;
    }
    if (!found && !level_hits.empty()) {
      const Hit& h = level_hits.front();
      result.evaluations_to_first_match =
          visited_before_level + (h.perm * steps + static_cast<std::uint64_t>(h.l)) * per_matrix + h.symbol_index + 1;
      found = true;
      if (first_only) return result;
    }
    visited_before_level += perms * steps * per_matrix;
  }
  if (!found) result.evaluations_to_first_match = visited_before_level;
  return result;
}

MixingMatrix candidate_matrix(const CandidateSolution& c, const AttackSearchSpace& space, int n_subcarriers) {
  const ArrayConfig cfg{c.n_hat, n_subcarriers, space.theta0, space.modulation, 0.0, 1.0};
  return mixing_matrix(cfg, c.pattern_hat, space.theta_e);
}

}  // namespace tma
