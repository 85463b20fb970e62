#pragma once

// Defenses that make the grid search ambiguous: rotate the array so the
// eavesdropper sees cos(theta_e') - cos(theta0') = 2c/N, then inspect the
// resulting mixing matrix and the set of hypotheses the attack accepts.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tma/attack.hpp"
#include "tma/tma_core.hpp"

namespace tma {

enum class RotationBranch { principal, supplement };

struct RotationPlan {
  double theta_r = 0.0;  // radians, wrapped to (-pi, pi]
  int multiplier = 1;    // c in cos(theta_e + theta_r) - cos(theta0 + theta_r) = 2c/N
  RotationBranch branch = RotationBranch::principal;
  double condition_error = 0.0;  // |lhs - 2c/N| after substitution
};

struct RotationSolution {
  std::vector<RotationPlan> plans;  // both branches when feasible, none otherwise
  double arcsine_argument = 0.0;    // infeasible when its magnitude exceeds 1

  bool feasible() const { return !plans.empty(); }
};

/// Closed-form rotation for one multiplier c. Throws std::invalid_argument if
/// theta0 == theta_e, N < 2 or c == 0.
RotationSolution solve_rotation_angle(double theta0, double theta_e, int n_elements, int multiplier = 1);

/// Feasible plans over several multipliers, in the order given.
std::vector<RotationPlan> rotation_plans(double theta0, double theta_e, int n_elements,
                                         const std::vector<int>& multipliers = {1, -1});

class HalfSpaceViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct RotatedGeometry {
  ArrayConfig config;  // theta0 replaced by theta0 + theta_r
  double theta_e = 0.0;
};

/// Shifts both directions into the rotated array frame. Throws
/// HalfSpaceViolation if either leaves [0, pi].
RotatedGeometry apply_rotation(const ArrayConfig& config, double theta_e, const RotationPlan& plan);

struct DesignConditionReport {
  double max_offdiag_at_theta0 = 0.0;  // max_{m != 0} |V'_m(theta0)|
  double v0_at_theta0 = 0.0;           // |V'_0(theta0)|
  double v0_at_theta_e = 0.0;          // |V'_0(theta_e)|
  double vm1_at_theta_e = 0.0;         // |V'_{-1}(theta_e)|
  double tolerance = 0.0;              // 1e-10 * N * delta_tau

  bool offdiag_vanishes_at_theta0() const { return max_offdiag_at_theta0 <= tolerance; }
  bool diagonal_nonzero_at_theta0() const { return v0_at_theta0 > tolerance; }
  bool diagonal_vanishes_at_theta_e() const { return v0_at_theta_e <= tolerance; }
  bool superdiagonal_vanishes_at_theta_e() const { return vm1_at_theta_e <= tolerance; }
  bool all_hold() const {
    return offdiag_vanishes_at_theta0() && diagonal_nonzero_at_theta0() && diagonal_vanishes_at_theta_e() &&
           superdiagonal_vanishes_at_theta_e();
  }
};

/// Evaluates, without solving, the conditions for DM at theta0 together with a
/// rank-deficient matrix at theta_e.
DesignConditionReport check_design_conditions(const ArrayConfig& config, const SwitchingPattern& pattern,
                                              double theta_e);

/// Singular values above tol * sigma_max.
int numerical_rank(const MixingMatrix& t, double tol = 1e-9);

enum class StructureKind { diagonal, single_offset, general };

struct StructureClass {
  StructureKind kind = StructureKind::general;
  int offset = 0;  // meaningful for single_offset

  friend bool operator==(const StructureClass&, const StructureClass&) = default;
};

/// diagonal: only V'_0 survives. single_offset(m0): the only surviving
/// generator is V'_m0 and no other m = m0 (mod N) lies inside the band.
StructureClass structural_classify(const MixingMatrix& t, int n_elements, double tol = kStructuralZeroTol);

std::string to_string(StructureClass s);

enum class AmbiguityCause { actual, rank_deficiency, pattern_non_uniqueness };

std::string to_string(AmbiguityCause c);

struct AmbiguityReport {
  std::vector<CandidateSolution> candidates;
  std::vector<AmbiguityCause> cause_labels;
  int distinct_symbol_vectors = 0;
  int distinct_patterns = 0;

  bool ambiguous() const { return distinct_symbol_vectors >= 2; }
};

bool same_pattern(const CandidateSolution& a, const CandidateSolution& b);

/// Exhaustive search on Y, then labels each candidate against the actual one.
/// Candidates with the actual pattern are rank_deficiency when that pattern
/// admits several symbol vectors, actual when it admits only one; any other
/// pattern is pattern_non_uniqueness.
AmbiguityReport analyze_ambiguity(const ReceivedVector& y, const AttackSearchSpace& space,
                                  const CandidateSolution& actual, const SearchOptions& options = {});

}  // namespace tma
