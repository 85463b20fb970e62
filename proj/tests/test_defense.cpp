#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "test_support.hpp"
#include "tma/defense.hpp"

using namespace tma;

namespace {

ArrayConfig config(int n, int k, double theta0, const ModulationScheme& q = ModulationScheme::bpsk()) {
  ArrayConfig c;
  c.n_elements = n;
  c.n_subcarriers = k;
  c.theta0 = theta0;
  c.modulation = q;
  return c;
}

AttackSearchSpace space(int m, int l, const ModulationScheme& q, double theta0, double theta_e) {
  AttackSearchSpace s;
  s.max_elements = m;
  s.l_steps = l;
  s.modulation = q;
  s.theta0 = theta0;
  s.theta_e = theta_e;
  return s;
}

bool some_branch_near(const RotationSolution& sol, double deg, double tol) {
  for (const auto& p : sol.plans) {
    if (std::abs(rad_to_deg(p.theta_r) - deg) <= tol) return true;
  }
  return false;
}

// Rank by Gaussian elimination with partial pivoting.
int elimination_rank(CMatrix a, double tol) {
  const int rows = static_cast<int>(a.rows()), cols = static_cast<int>(a.cols());
  const double scale = std::max(1e-300, a.cwiseAbs().maxCoeff());
  int rank = 0;
  for (int c = 0; c < cols && rank < rows; ++c) {
    int piv = rank;
    for (int r = rank + 1; r < rows; ++r) {
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    }
    if (std::abs(a(piv, c)) <= tol * scale) continue;
    a.row(piv).swap(a.row(rank));
    for (int r = rank + 1; r < rows; ++r) a.row(r) -= (a(r, c) / a(rank, c)) * a.row(rank);
    ++rank;
  }
  return rank;
}

// theta in [0, pi] with cos(theta) = cos(theta0) + d.
double direction_with_offset(double theta0, double d) { return std::acos(std::cos(theta0) + d); }

}  // namespace

TEST_CASE("rotation angle: closed form on known geometries") {
  auto sol = solve_rotation_angle(deg_to_rad(80), deg_to_rad(40), 4, 1);
  REQUIRE(sol.feasible());
  CHECK(sol.plans.size() == 2);
  CHECK(some_branch_near(sol, -13.03, 0.01));
  CHECK(some_branch_near(solve_rotation_angle(deg_to_rad(90), deg_to_rad(50), 3, 1), 32.94, 0.01));
  CHECK(some_branch_near(solve_rotation_angle(deg_to_rad(60), deg_to_rad(30), 5, 1), 5.60, 0.01));

  sol = solve_rotation_angle(deg_to_rad(60), deg_to_rad(61), 2, 1);
  CHECK_FALSE(sol.feasible());
  CHECK(std::abs(sol.arcsine_argument) == doctest::Approx(57.3).epsilon(1e-3));

  CHECK_THROWS_AS(solve_rotation_angle(1.0, 1.0, 4, 1), std::invalid_argument);
  CHECK_THROWS_AS(solve_rotation_angle(1.0, 0.5, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(solve_rotation_angle(1.0, 0.5, 4, 0), std::invalid_argument);
}

TEST_CASE("rotation angle: substitution check on random geometries") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, kPi);
  int feasible = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const double t0 = u(rng), te = u(rng);
    const int n = std::uniform_int_distribution<int>(2, 8)(rng);
    for (int c : {1, -1, 2, -2, 3}) {
      const auto sol = solve_rotation_angle(t0, te, n, c);
      for (const auto& p : sol.plans) {
        ++feasible;
        CHECK(p.multiplier == c);
        CHECK(p.theta_r > -kPi);
        CHECK(p.theta_r <= kPi);
        CHECK(std::abs(std::cos(te + p.theta_r) - std::cos(t0 + p.theta_r) - 2.0 * c / n) <= 1e-10);
        CHECK(p.condition_error <= 1e-10);
      }
      CHECK(sol.feasible() == (std::abs(sol.arcsine_argument) <= 1.0));
    }
  }
  CHECK(feasible > 500);
}

TEST_CASE("rotation plans collect both multipliers") {
  const auto plans = rotation_plans(deg_to_rad(80), deg_to_rad(40), 4);
  CHECK(plans.size() == 4);
  CHECK(plans[0].multiplier == 1);
  CHECK(plans[3].multiplier == -1);
}

TEST_CASE("apply_rotation") {
  const auto c = config(4, 2, deg_to_rad(80));
  const auto sol = solve_rotation_angle(c.theta0, deg_to_rad(40), 4, 1);
  const RotationPlan* plan = nullptr;
  for (const auto& p : sol.plans) {
    if (std::abs(rad_to_deg(p.theta_r) + 13.03) < 0.01) plan = &p;
  }
  REQUIRE(plan != nullptr);
  const auto r = apply_rotation(c, deg_to_rad(40), *plan);
  CHECK(std::abs(rad_to_deg(r.config.theta0) - 66.97) <= 0.01);
  CHECK(std::abs(rad_to_deg(r.theta_e) - 26.97) <= 0.01);
  CHECK(std::cos(r.theta_e) - std::cos(r.config.theta0) == doctest::Approx(0.5).epsilon(1e-12));

  const auto id = apply_rotation(c, deg_to_rad(40), RotationPlan{});
  CHECK(id.config.theta0 == c.theta0);
  CHECK(id.theta_e == deg_to_rad(40));

  const auto c5 = config(4, 2, deg_to_rad(120));
  bool found = false;
  for (const auto& p : solve_rotation_angle(c5.theta0, deg_to_rad(80), 4, 1).plans) {
    if (std::abs(rad_to_deg(p.theta_r) - 33.03) < 0.01) {
      found = true;
      const auto g = apply_rotation(c5, deg_to_rad(80), p);
      CHECK(std::abs(rad_to_deg(g.config.theta0) - 153.03) <= 0.01);
      CHECK(std::cos(g.theta_e) - std::cos(g.config.theta0) == doctest::Approx(0.5).epsilon(1e-12));
    }
  }
  CHECK(found);

  RotationPlan far;
  far.theta_r = deg_to_rad(120);
  CHECK_THROWS_AS(apply_rotation(c, deg_to_rad(40), far), HalfSpaceViolation);
}

TEST_CASE("legitimate link survives rotation") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, kPi);
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 60; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 6)(rng);
    const int k = std::uniform_int_distribution<int>(2, 6)(rng);
    const auto p = testing::random_pattern(n, rng);
    if (!preserves_directional_modulation(p, k)) continue;
    const auto c = config(n, k, u(rng));
    const double te = u(rng);
    for (const auto& plan : rotation_plans(c.theta0, te, n)) {
      RotatedGeometry g;
      try {
        g = apply_rotation(c, te, plan);
      } catch (const HalfSpaceViolation&) {
        continue;
      }
      const auto t = mixing_matrix(g.config, p, g.config.theta0);
      CHECK(testing::max_abs_diff(t.entries(), legitimate_gain(c, p) * CMatrix::Identity(k, k)) < 1e-12);
      ++checked;
    }
  }
  CHECK(checked >= 20);
}

TEST_CASE("design conditions") {
  const auto c = config(4, 3, deg_to_rad(66.9662));
  const auto p = SwitchingPattern::canonical(4, Fraction(1, 4));
  auto r = check_design_conditions(c, p, deg_to_rad(120));
  CHECK(r.offdiag_vanishes_at_theta0());
  CHECK(r.v0_at_theta0 == doctest::Approx(1.0));
  CHECK(r.diagonal_nonzero_at_theta0());
  CHECK(r.tolerance == doctest::Approx(1e-10));
  CHECK_FALSE(r.diagonal_vanishes_at_theta_e());

  r = check_design_conditions(c, p, direction_with_offset(c.theta0, 0.5));
  CHECK(r.diagonal_vanishes_at_theta_e());
  CHECK(r.superdiagonal_vanishes_at_theta_e());
  CHECK(r.all_hold());

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, kPi);
  for (int t = 0; t < 20; ++t) {
    const double te = u(rng);
    const double d = std::cos(te) - std::cos(c.theta0);
    if (std::abs(std::remainder(d * 4 / 2, 1.0)) < 1e-3) continue;
    CHECK(check_design_conditions(c, p, te).v0_at_theta_e > 1e-10);
  }
}

TEST_CASE("numerical rank") {
  const auto c = config(4, 3, deg_to_rad(66.9662));
  const auto p = SwitchingPattern::canonical(4, Fraction(1, 4));
  CHECK(numerical_rank(mixing_matrix(c, p, c.theta0)) == 3);
  CHECK(numerical_rank(mixing_matrix(c, p, direction_with_offset(c.theta0, 0.5))) == 2);

  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, kPi);
  for (int trial = 0; trial < 60; ++trial) {
    const int k = std::uniform_int_distribution<int>(2, 4)(rng);
    const int n = std::uniform_int_distribution<int>(2, 5)(rng);
    const auto t = mixing_matrix(config(n, k, u(rng)), testing::random_pattern(n, rng), u(rng));
    CHECK(numerical_rank(t) == elimination_rank(t.entries(), 1e-9));
    // products of thin random factors have known lower rank
    const int r = std::uniform_int_distribution<int>(1, k)(rng);
    CMatrix a(k, r), b(r, k);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < r; ++j) {
        a(i, j) = {g(rng), g(rng)};
        b(j, i) = {g(rng), g(rng)};
      }
    }
    const auto low = MixingMatrix::from_entries(n, a * b, 0.0);
    CHECK(numerical_rank(low) == r);
    CHECK(elimination_rank(a * b, 1e-9) == r);
  }
}

TEST_CASE("structural classification") {
  const auto p4 = SwitchingPattern::canonical(4, Fraction(1, 4));
  const auto c = config(4, 2, deg_to_rad(66.9662));
  CHECK(structural_classify(mixing_matrix(c, p4, c.theta0), 4).kind == StructureKind::diagonal);

  const auto t = mixing_matrix(c, p4, direction_with_offset(c.theta0, 0.5));
  const auto s = structural_classify(t, 4);
  CHECK(s == StructureClass{StructureKind::single_offset, 1});
  CHECK(to_string(s) == "single_offset(1)");
  CHECK(std::abs(t(0, 0)) < 1e-12);
  CHECK(std::abs(t(0, 1)) < 1e-12);
  CHECK(std::abs(t(1, 1)) < 1e-12);
  CHECK(std::abs(t(1, 0) - t.generator(1) / std::sqrt(8.0)) < 1e-15);
  CHECK(std::abs(t.generator(1)) > 0.1);

  const auto c3 = config(3, 4, deg_to_rad(80));
  const auto t3 = mixing_matrix(c3, SwitchingPattern::canonical(3, Fraction(1, 3)), direction_with_offset(c3.theta0, 2.0 / 3));
  CHECK(std::abs(t3.generator(1)) > 0.1);
  CHECK(std::abs(t3.generator(-2)) > 0.1);
  CHECK(structural_classify(t3, 3).kind == StructureKind::general);
  CHECK(to_string(structural_classify(t3, 3)) == "general");
}

TEST_CASE("survival rule: only harmonics congruent to 1 mod N remain") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, kPi);
  for (int n = 2; n <= 8; ++n) {
    for (int k = 2; k <= 8; ++k) {
      for (int d = 1; d <= n; ++d) {
        // a theta0 whose shifted cosine stays inside [-1, 1]
        double t0;
        do t0 = u(rng);
        while (std::cos(t0) + 2.0 / n > 1.0);
        const auto c = config(n, k, t0);
        const auto p = SwitchingPattern::canonical(n, Fraction(d, n));
        const double te = direction_with_offset(t0, 2.0 / n);
        const auto t = mixing_matrix(c, p, te);
        for (int m = -(k - 1); m <= k - 1; ++m) {
          const int r = ((m - 1) % n + n) % n;
          if (r != 0) CHECK(std::abs(t.generator(m)) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("rank drops by one whenever the structure is single_offset(1)") {
  std::mt19937_64 rng(6);
  int hits = 0;
  for (int n = 2; n <= 8; ++n) {
    for (int k = 2; k <= 8; ++k) {
      for (int d = 1; d <= n; ++d) {
        const auto c = config(n, k, std::acos(-0.9));
        const auto p = SwitchingPattern::canonical(n, Fraction(d, n));
        const auto t = mixing_matrix(c, p, direction_with_offset(c.theta0, 2.0 / n));
        const auto s = structural_classify(t, n);
        if (s == StructureClass{StructureKind::single_offset, 1}) {
          ++hits;
          CHECK(numerical_rank(t) == k - 1);
          const auto y = transmit(t, testing::random_symbols(ModulationScheme::qpsk(), k, rng));
          CHECK(std::abs(y.samples[0]) < 1e-12);
        }
      }
    }
  }
  CHECK(hits > 20);
}

TEST_CASE("single_offset(1) leaves at least Q symbol vectors per matching pattern") {
  std::mt19937_64 rng(7);
  for (const auto& q : {ModulationScheme::bpsk(), ModulationScheme::qpsk()}) {
    const auto c = config(4, 2, deg_to_rad(66.9662), q);
    const auto p = SwitchingPattern::canonical(4, Fraction(2, 4));
    const double te = direction_with_offset(c.theta0, 0.5);
    REQUIRE(structural_classify(mixing_matrix(c, p, te), 4) == StructureClass{StructureKind::single_offset, 1});
    const auto y = transmit(mixing_matrix(c, p, te), testing::random_symbols(q, 2, rng));
    const auto r = grid_search_defy(y, space(4, 4, q, c.theta0, te), SearchMode::exhaustive);
    std::map<std::pair<Fraction, std::vector<Fraction>>, std::set<std::vector<int>>> per_pattern;
    for (const auto& cand : r.candidates) per_pattern[{cand.pattern_hat.delta_tau, cand.pattern_hat.tau_on}].insert(cand.s_hat.indices);
    REQUIRE(per_pattern.count({p.delta_tau, p.tau_on}) == 1);
    for (const auto& [pat, vecs] : per_pattern) {
      const SwitchingPattern sp{pat.first, pat.second};
      if (structural_classify(mixing_matrix(config(int(pat.second.size()), 2, c.theta0, q), sp, te),
                              int(pat.second.size())).kind == StructureKind::single_offset) {
        CHECK(vecs.size() >= static_cast<std::size_t>(q.order()));
      }
    }
  }
}

TEST_CASE("ambiguity analysis on the three-element example") {
  const auto c = config(3, 2, deg_to_rad(80));
  const SwitchingPattern p{Fraction(1, 3), {Fraction(2, 3), Fraction(0), Fraction(1, 3)}};
  const auto plan = solve_rotation_angle(c.theta0, deg_to_rad(40), 3, 1).plans.at(0);
  const auto g = apply_rotation(c, deg_to_rad(40), plan);
  const std::vector<int> idx{1, 1};
  const auto s = symbols_from_indices(idx, c.modulation);
  const auto y = transmit(mixing_matrix(g.config, p, g.theta_e), s);
  const auto rep = analyze_ambiguity(y, space(3, 3, c.modulation, g.config.theta0, g.theta_e), {3, p, s, 0.0});
  REQUIRE(rep.candidates.size() == 4);
  CHECK(rep.ambiguous());
  CHECK(rep.distinct_symbol_vectors == 4);
  CHECK(rep.distinct_patterns == 2);
  const SwitchingPattern flipped{Fraction(2, 3), {Fraction(0), Fraction(1, 3), Fraction(2, 3)}};
  std::multiset<std::string> labels;
  for (std::size_t i = 0; i < 4; ++i) {
    labels.insert(to_string(rep.cause_labels[i]));
    const auto& cand = rep.candidates[i];
    if (cand.pattern_hat == p) {
      CHECK(rep.cause_labels[i] == AmbiguityCause::rank_deficiency);
      CHECK(cand.s_hat.indices[0] == 1);
    } else {
      CHECK(cand.pattern_hat == flipped);
      CHECK(rep.cause_labels[i] == AmbiguityCause::pattern_non_uniqueness);
      CHECK(cand.s_hat.indices[0] == 0);
    }
  }
  CHECK(labels.count("rank_deficiency") == 2);
  CHECK(labels.count("pattern_non_uniqueness") == 2);

  // the sign flip that lets the second pattern explain Y
  const cplx v_true = v_prime(1, g.config, p, g.theta_e);
  const cplx v_flip = v_prime(1, g.config, flipped, g.theta_e);
  CHECK(std::abs(v_flip + v_true) < 1e-12);
  CHECK(std::abs(v_true) == doctest::Approx(0.8270).epsilon(1e-4));
}

TEST_CASE("no ambiguity without rotation") {
  std::mt19937_64 rng(8);
  const auto q = ModulationScheme::qpsk();
  const auto c = config(4, 4, deg_to_rad(60), q);
  const auto p = SwitchingPattern::canonical(4, Fraction(1, 4));
  const double te = deg_to_rad(110);
  const auto s = testing::random_symbols(q, 4, rng);
  const auto rep = analyze_ambiguity(transmit(mixing_matrix(c, p, te), s), space(4, 20, q, c.theta0, te), {4, p, s, 0.0});
  REQUIRE(rep.candidates.size() == 1);
  CHECK_FALSE(rep.ambiguous());
  CHECK(rep.cause_labels[0] == AmbiguityCause::actual);
  CHECK(rep.candidates[0].s_hat.indices == s.indices);
}

TEST_CASE("pattern comparison") {
  CandidateSolution a{3, SwitchingPattern::canonical(3, Fraction(1, 3)), {}, 0.0};
  auto b = a;
  b.s_hat.indices = {1, 0};
  CHECK(same_pattern(a, b));
  b.pattern_hat.delta_tau = Fraction(2, 3);
  CHECK_FALSE(same_pattern(a, b));
}
