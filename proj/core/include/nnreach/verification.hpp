#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "nnreach/dynamics.hpp"
#include "nnreach/grid.hpp"
#include "nnreach/hj_solver.hpp"
#include "nnreach/scene.hpp"
#include "nnreach/shapes.hpp"

namespace nnreach {

enum class Verdict { completely_safe, completely_unsafe, partially_safe };
std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

/// FRT-based classification against a set of obstacles.
struct Classification {
  bool unsafe = false;
  std::vector<bool> per_obstacle;
  /// Earliest snapshot time at which each obstacle is touched; NaN if never.
  std::vector<double> first_contact_time;
};

/// Unsafe iff some snapshot's zero-sublevel mask shares a node with an
/// obstacle's mask. Obstacles are checked one primitive at a time.
Classification classify_policy(const TubeResult& frt, const ShapeSet& obstacles, const GridPtr& grid);

/// zero_sublevel(brt_final) AND mask(initial).
Mask unsafe_initial_states(const ScalarField& brt_final, const ShapeSet& initial);
/// Union of the per-obstacle BRT masks, then intersected with mask(initial).
Mask unsafe_initial_states(const std::vector<ScalarField>& brt_finals, const ShapeSet& initial);

/// NOT(unsafe) AND initial.
Mask safe_initial_states(const Mask& unsafe, const Mask& initial);

struct VerificationReport {
  Verdict verdict = Verdict::completely_safe;
  std::vector<bool> frt_intersects_obstacle;
  Mask initial_mask;
  Mask safe_mask;
  Mask unsafe_mask;
  double safe_fraction = 1.0;
  /// Pointwise union (min) of the per-obstacle BRT final fields.
  ScalarField brt_union;
  ShapeSet initial_set;
  nlohmann::json provenance = nlohmann::json::object();
};

/// Builds the partition report from BRT final fields. Throws
/// std::invalid_argument when the initial set covers no grid node.
VerificationReport make_report(const std::vector<ScalarField>& brt_finals, const ShapeSet& initial,
                               std::vector<bool> frt_flags = {});

/// True iff s lies in the initial set and the interpolated BRT value at s is
/// positive. Throws std::invalid_argument for s outside the initial set.
bool is_state_safe(const VerificationReport& report, const Eigen::VectorXd& s);

/// Checks the partition identities; returns an empty string when they hold.
std::string check_partition(const VerificationReport& report);

nlohmann::json report_to_json(const VerificationReport& report);

struct FrtAnalysis {
  TubeResult frt;
  Classification classification;
};
FrtAnalysis analyze_frt(const ClosedLoopSystem& sys, const Scene& scene, SolverConfig config);

struct SafeSetAnalysis {
  std::vector<TubeResult> brts;
  VerificationReport report;
};
/// One BRT per obstacle primitive, unioned.
SafeSetAnalysis analyze_safe_set(const ClosedLoopSystem& sys, const Scene& scene, SolverConfig config);

}  // namespace nnreach
