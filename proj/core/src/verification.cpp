#include "nnreach/verification.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nnreach {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::completely_safe: return "completely_safe";
    case Verdict::completely_unsafe: return "completely_unsafe";
    case Verdict::partially_safe: return "partially_safe";
  }
  return "unknown";
}

Verdict verdict_from_string(const std::string& s) {
  if (s == "completely_safe") return Verdict::completely_safe;
  if (s == "completely_unsafe") return Verdict::completely_unsafe;
  if (s == "partially_safe") return Verdict::partially_safe;
  throw std::invalid_argument("unknown verdict '" + s + "'");
}

Classification classify_policy(const TubeResult& frt, const ShapeSet& obstacles, const GridPtr& grid) {
  if (frt.snapshots.empty()) throw std::invalid_argument("classify_policy: empty tube");
  for (const auto& snap : frt.snapshots)
    if (!same_grid(snap.field.grid_ptr(), grid)) throw std::invalid_argument("classify_policy: grid mismatch");
  Classification c;
  c.per_obstacle.assign(obstacles.size(), false);
  c.first_contact_time.assign(obstacles.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t o = 0; o < obstacles.size(); ++o) {
    const Mask obs = zero_sublevel_mask(level_set_from_shapes(grid, obstacles.subset(o)));
    for (const auto& snap : frt.snapshots) {
      if (mask_and(zero_sublevel_mask(snap.field), obs).any()) {
        c.per_obstacle[o] = true;
        c.first_contact_time[o] = snap.time;
        break;
      }
    }
    c.unsafe = c.unsafe || c.per_obstacle[o];
  }
  return c;
}

Mask unsafe_initial_states(const ScalarField& brt_final, const ShapeSet& initial) {
  return unsafe_initial_states(std::vector<ScalarField>{brt_final}, initial);
}

Mask unsafe_initial_states(const std::vector<ScalarField>& brt_finals, const ShapeSet& initial) {
  if (brt_finals.empty()) throw std::invalid_argument("unsafe_initial_states: no BRT fields");
  const GridPtr& grid = brt_finals.front().grid_ptr();
  Mask reach = zero_sublevel_mask(brt_finals.front());
  for (std::size_t i = 1; i < brt_finals.size(); ++i) {
    if (!same_grid(brt_finals[i].grid_ptr(), grid)) throw std::invalid_argument("unsafe_initial_states: grid mismatch");
    reach = mask_or(reach, zero_sublevel_mask(brt_finals[i]));
  }
  return mask_and(reach, zero_sublevel_mask(level_set_from_shapes(grid, initial)));
}

Mask safe_initial_states(const Mask& unsafe, const Mask& initial) { return mask_and(mask_not(unsafe), initial); }

VerificationReport make_report(const std::vector<ScalarField>& brt_finals, const ShapeSet& initial,
                               std::vector<bool> frt_flags) {
  if (brt_finals.empty()) throw std::invalid_argument("make_report: no BRT fields");
  VerificationReport r;
  r.brt_union = brt_finals.front();
  for (std::size_t i = 1; i < brt_finals.size(); ++i) r.brt_union = field_union(r.brt_union, brt_finals[i]);
  r.initial_set = initial;
  r.initial_mask = zero_sublevel_mask(level_set_from_shapes(r.brt_union.grid_ptr(), initial));
  const std::size_t n0 = r.initial_mask.count();
  if (n0 == 0) throw std::invalid_argument("make_report: initial set covers no grid node");
  r.unsafe_mask = unsafe_initial_states(brt_finals, initial);
  r.safe_mask = safe_initial_states(r.unsafe_mask, r.initial_mask);
  const std::size_t ns = r.safe_mask.count();
  r.safe_fraction = static_cast<double>(ns) / static_cast<double>(n0);
  r.verdict = ns == n0 ? Verdict::completely_safe : (ns == 0 ? Verdict::completely_unsafe : Verdict::partially_safe);
  r.frt_intersects_obstacle = std::move(frt_flags);
  return r;
}

bool is_state_safe(const VerificationReport& report, const Eigen::VectorXd& s) {
  std::vector<double> x(s.data(), s.data() + s.size());
  if (signed_distance(report.initial_set, x) > 0.0)
    throw std::invalid_argument("is_state_safe: state lies outside the initial set");
  return interpolate(report.brt_union, x) > 0.0;
}

std::string check_partition(const VerificationReport& r) {
  if (mask_and(r.safe_mask, r.unsafe_mask).any()) return "safe and unsafe masks overlap";
  if (!(mask_or(r.safe_mask, r.unsafe_mask) == r.initial_mask)) return "safe and unsafe masks do not cover the initial set";
  const double frac = static_cast<double>(r.safe_mask.count()) / static_cast<double>(r.initial_mask.count());
  if (frac != r.safe_fraction) return "safe_fraction inconsistent with masks";
  return {};
}

nlohmann::json report_to_json(const VerificationReport& r) {
  nlohmann::json j;
  j["verdict"] = to_string(r.verdict);
  j["frt_intersects_obstacle"] = r.frt_intersects_obstacle;
  j["safe_fraction"] = r.safe_fraction;
  j["initial_cells"] = r.initial_mask.count();
  j["safe_cells"] = r.safe_mask.count();
  j["unsafe_cells"] = r.unsafe_mask.count();
  j["provenance"] = r.provenance;
  return j;
}

FrtAnalysis analyze_frt(const ClosedLoopSystem& sys, const Scene& scene, SolverConfig config) {
  config.direction = Direction::forward;
  FrtAnalysis a;
  a.frt = solve_frt(scene.initial_set, sys, config, scene.grid);
  if (!scene.obstacles.empty()) a.classification = classify_policy(a.frt, scene.obstacles, scene.grid);
  return a;
}

SafeSetAnalysis analyze_safe_set(const ClosedLoopSystem& sys, const Scene& scene, SolverConfig config) {
  config.direction = Direction::backward;
  SafeSetAnalysis a;
  std::vector<ScalarField> finals;
  if (scene.obstacles.empty()) {
    // Nothing to avoid: a field that is positive everywhere.
    finals.emplace_back(scene.grid, std::numeric_limits<double>::max(), -config.horizon);
  } else {
    for (std::size_t o = 0; o < scene.obstacles.size(); ++o) {
      a.brts.push_back(solve_brt(scene.obstacles.subset(o), sys, config, scene.grid));
      finals.push_back(a.brts.back().final_field());
    }
  }
  a.report = make_report(finals, scene.initial_set);
  return a;
}

}  // namespace nnreach
