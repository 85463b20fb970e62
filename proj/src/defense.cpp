#include "tma/defense.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <set>

namespace tma {

namespace {

constexpr double kConditionTol = 1e-10;

double condition_lhs(double theta0, double theta_e, double theta_r) {
  return std::cos(theta_e + theta_r) - std::cos(theta0 + theta_r);
}

}  // namespace

RotationSolution solve_rotation_angle(double theta0, double theta_e, int n_elements, int multiplier) {
  if (theta0 == theta_e) throw std::invalid_argument("rotation undefined when theta0 equals theta_e");
  if (n_elements < 2) throw std::invalid_argument("rotation needs N >= 2");
  if (multiplier == 0) throw std::invalid_argument("rotation multiplier must be nonzero");

  // cos A - cos B = -2 sin((A+B)/2) sin((A-B)/2) with A = theta_e + theta_r, B = theta0 + theta_r.
  const double target = 2.0 * multiplier / n_elements;
  const double half_sum = 0.5 * (theta_e + theta0);
  const double g = -target / (2.0 * std::sin(0.5 * (theta_e - theta0)));

  RotationSolution sol;
  sol.arcsine_argument = g;
  if (!(std::abs(g) <= 1.0)) return sol;

  const double a = std::asin(g);
  const std::pair<RotationBranch, double> branches[] = {
      {RotationBranch::principal, a - half_sum},
      {RotationBranch::supplement, kPi - a - half_sum},
  };
  for (const auto& [branch, raw] : branches) {
    RotationPlan p;
    p.theta_r = wrap_angle(raw);
    p.multiplier = multiplier;
    p.branch = branch;
    p.condition_error = std::abs(condition_lhs(theta0, theta_e, p.theta_r) - target);
    if (p.condition_error > kConditionTol) {
      throw std::logic_error("rotation angle fails substitution check");
    }
    sol.plans.push_back(p);
  }
  return sol;
}

std::vector<RotationPlan> rotation_plans(double theta0, double theta_e, int n_elements,
                                         const std::vector<int>& multipliers) {
  std::vector<RotationPlan> out;
  for (int c : multipliers) {
    const auto sol = solve_rotation_angle(theta0, theta_e, n_elements, c);
    out.insert(out.end(), sol.plans.begin(), sol.plans.end());
  }
  return out;
}

RotatedGeometry apply_rotation(const ArrayConfig& config, double theta_e, const RotationPlan& plan) {
  RotatedGeometry g{config, theta_e + plan.theta_r};
  g.config.theta0 = config.theta0 + plan.theta_r;
  auto inside = [](double t) { return t >= 0.0 && t <= kPi; };
  if (!inside(g.config.theta0) || !inside(g.theta_e)) {
    throw HalfSpaceViolation("rotation by " + std::to_string(rad_to_deg(plan.theta_r)) +
                             " deg moves theta0 to " + std::to_string(rad_to_deg(g.config.theta0)) +
                             " deg and theta_e to " + std::to_string(rad_to_deg(g.theta_e)) +
                             " deg, outside [0, 180]");
  }
  return g;
}

DesignConditionReport check_design_conditions(const ArrayConfig& config, const SwitchingPattern& pattern,
                                              double theta_e) {
  config.validate();
  DesignConditionReport r;
  const int k = config.n_subcarriers;
  for (int m = -(k - 1); m <= k - 1; ++m) {
    if (m == 0) continue;
    r.max_offdiag_at_theta0 = std::max(r.max_offdiag_at_theta0, std::abs(v_prime(m, config, pattern, config.theta0)));
  }
  r.v0_at_theta0 = std::abs(v_prime(0, config, pattern, config.theta0));
  r.v0_at_theta_e = std::abs(v_prime(0, config, pattern, theta_e));
  r.vm1_at_theta_e = std::abs(v_prime(-1, config, pattern, theta_e));
  r.tolerance = 1e-10 * config.n_elements * pattern.delta_tau_value();
  return r;
}

int numerical_rank(const MixingMatrix& t, double tol) {
  const Eigen::JacobiSVD<CMatrix> svd(t.entries());
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol * sv(0)) ++rank;
  }
  return rank;
}

StructureClass structural_classify(const MixingMatrix& t, int n_elements, double tol) {
  const int k = t.n_subcarriers();
  double peak = 0.0;
  for (const cplx& g : t.generators()) peak = std::max(peak, std::abs(g));
  if (peak == 0.0) return {StructureKind::general, 0};

  std::vector<int> live;
  for (int m = -(k - 1); m <= k - 1; ++m) {
    if (std::abs(t.generator(m)) > tol * peak) live.push_back(m);
  }
  if (live.size() != 1) return {StructureKind::general, 0};
  const int m0 = live.front();
  if (m0 == 0) return {StructureKind::diagonal, 0};
  for (int m = -(k - 1); m <= k - 1; ++m) {
    if (m != m0 && ((m - m0) % n_elements) == 0) return {StructureKind::general, 0};
  }
  return {StructureKind::single_offset, m0};
}

std::string to_string(StructureClass s) {
  switch (s.kind) {
    case StructureKind::diagonal: return "diagonal";
    case StructureKind::single_offset: return "single_offset(" + std::to_string(s.offset) + ")";
    default: return "general";
  }
}

std::string to_string(AmbiguityCause c) {
  switch (c) {
    case AmbiguityCause::actual: return "actual";
    case AmbiguityCause::rank_deficiency: return "rank_deficiency";
    default: return "pattern_non_uniqueness";
  }
}

bool same_pattern(const CandidateSolution& a, const CandidateSolution& b) {
  return a.n_hat == b.n_hat && a.pattern_hat == b.pattern_hat;
}

AmbiguityReport analyze_ambiguity(const ReceivedVector& y, const AttackSearchSpace& space,
                                  const CandidateSolution& actual, const SearchOptions& options) {
  AmbiguityReport report;
  report.candidates = grid_search_defy(y, space, SearchMode::exhaustive, options).candidates;

  const auto with_actual_pattern = std::count_if(report.candidates.begin(), report.candidates.end(),
                                                 [&](const CandidateSolution& c) { return same_pattern(c, actual); });
  std::set<std::vector<int>> symbols;
  std::set<std::pair<int, std::vector<Fraction>>> patterns;
  for (const auto& c : report.candidates) {
    symbols.insert(c.s_hat.indices);
    auto key = c.pattern_hat.tau_on;
    key.push_back(c.pattern_hat.delta_tau);
    patterns.emplace(c.n_hat, std::move(key));
    if (!same_pattern(c, actual)) {
      report.cause_labels.push_back(AmbiguityCause::pattern_non_uniqueness);
    } else if (with_actual_pattern > 1) {
      report.cause_labels.push_back(AmbiguityCause::rank_deficiency);
    } else {
      report.cause_labels.push_back(AmbiguityCause::actual);
    }
  }
  report.distinct_symbol_vectors = static_cast<int>(symbols.size());
  report.distinct_patterns = static_cast<int>(patterns.size());
  return report;
}

}  // namespace tma
