#pragma once

#include <vector>

#include <Eigen/Dense>

#include "nnreach/dynamics.hpp"
#include "nnreach/error_bounds.hpp"
#include "nnreach/grid.hpp"
#include "nnreach/shapes.hpp"

namespace nnreach {

/// How the disturbance treats the target. reach_goal: the disturbance
/// maximises the Hamiltonian (it fights reaching a desired set).
/// reach_unsafe: it minimises the Hamiltonian (it helps reach an unsafe set,
/// which is the conservative choice for safety analysis).
enum class TargetMode { reach_goal, reach_unsafe };
enum class Direction { backward, forward };

struct SolverConfig {
  double horizon = 10.0;
  double cfl_factor = 0.5;
  TargetMode target_mode = TargetMode::reach_unsafe;
  Direction direction = Direction::backward;
  int snapshot_stride = 10;
  /// Stop once max |dV| per step falls below this. Negative selects
  /// 1e-6 * grid diameter; zero disables early stopping.
  double convergence_eps = -1.0;

  void validate() const;
};

struct Snapshot {
  /// Seconds; negative for backward tubes (t in [-T, 0]).
  double time = 0.0;
  ScalarField field;
};

struct TubeDiagnostics {
  int steps = 0;
  std::vector<double> dt_history;
  double max_abs_hamiltonian = 0.0;
  bool stopped_early = false;
  Eigen::VectorXd alpha;
};

/// Time-ordered level-set snapshots; the first is the initial/terminal
/// condition and the last is the final time.
struct TubeResult {
  std::vector<Snapshot> snapshots;
  SolverConfig config;
  TubeDiagnostics diagnostics;

  const ScalarField& final_field() const { return snapshots.back().field; }
  Mask final_mask() const { return zero_sublevel_mask(final_field()); }
};

/// One-sided differences per dimension. Boundary nodes use a linearly
/// extrapolated ghost node, so p_minus == p_plus there.
struct UpwindGradients {
  std::vector<ScalarField> minus;
  std::vector<ScalarField> plus;
};
UpwindGradients upwind_gradients(const ScalarField& field);

/// argmax (reach_goal) or argmin (reach_unsafe) of p.d over the box; p_i == 0
/// gives d_i = 0.
Eigen::VectorXd optimal_disturbance(const Eigen::VectorXd& p, const DisturbanceBounds& bounds, TargetMode mode);

/// p.f + p.d* for a given nominal rate f; with symmetric bounds this is
/// p.f +/- sum |p_i| d_i.
double hamiltonian(const Eigen::VectorXd& p, const Eigen::VectorXd& nominal_rate, const DisturbanceBounds& bounds,
                   TargetMode mode);
double analytic_hamiltonian(const Eigen::VectorXd& state, const Eigen::VectorXd& p, const ClosedLoopSystem& sys,
                            TargetMode mode);

/// alpha_i = max over grid nodes of |f_i(s)| + max(d_upper_i, -d_lower_i).
Eigen::VectorXd dissipation_coefficients(const ClosedLoopSystem& sys, const Grid& grid);

/// H((p- + p+)/2) - sum alpha_i (p+_i - p-_i) / 2.
double lax_friedrichs(const Eigen::VectorXd& p_minus, const Eigen::VectorXd& p_plus, const Eigen::VectorXd& nominal_rate,
                      const DisturbanceBounds& bounds, TargetMode mode, const Eigen::VectorXd& alpha);
double lax_friedrichs_H(const Eigen::VectorXd& state, const Eigen::VectorXd& p_minus, const Eigen::VectorXd& p_plus,
                        const ClosedLoopSystem& sys, TargetMode mode, const Eigen::VectorXd& alpha);

/// Rate of change of V per unit |t| at one node as used by the solver.
///
/// Backward tubes are integrated in reversed time tau = -t, where the
/// terminal-value equation dV/dt + min{0, H} = 0 becomes
/// dV/dtau = min{0, H} = -max{0, -H}; -H is the Hamiltonian of the reversed
/// velocity -f with the opposite disturbance sense, and the Lax-Friedrichs
/// flux is applied to it. Forward tubes use the velocity f with the
/// disturbance sense that grows the set (for reach_unsafe). In both cases
/// the returned rate is <= 0.
double scheme_rate(const Eigen::VectorXd& p_minus, const Eigen::VectorXd& p_plus, const Eigen::VectorXd& nominal_rate,
                   const DisturbanceBounds& bounds, const SolverConfig& config, const Eigen::VectorXd& alpha);

/// dt = cfl_factor / sum_i alpha_i / spacing_i; horizon / 100 when alpha = 0.
double cfl_dt(const SolverConfig& config, const Eigen::VectorXd& alpha, const Grid& grid);

/// One two-stage TVD Runge-Kutta step of size dt (>= 0, in |t|). Throws
/// NumericalError when dt exceeds the CFL limit or the result is not finite.
ScalarField step(const ScalarField& field, const ClosedLoopSystem& sys, const SolverConfig& config, double dt);

/// Integrates the level-set equation from `initial` for config.horizon
/// seconds in config.direction.
TubeResult solve_tube(const ScalarField& initial, const ClosedLoopSystem& sys, const SolverConfig& config);

/// Backward reachable tube of `target`: V(s, 0) = l(s), integrated to -T.
TubeResult solve_brt(const ShapeSet& target, const ClosedLoopSystem& sys, const SolverConfig& config,
                     const GridPtr& grid);
/// Forward reachable tube of `initial`, integrated to +T.
TubeResult solve_frt(const ShapeSet& initial, const ClosedLoopSystem& sys, const SolverConfig& config,
                     const GridPtr& grid);

}  // namespace nnreach
