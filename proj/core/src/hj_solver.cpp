#include "nnreach/hj_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nnreach/errors.hpp"

namespace nnreach {

namespace {

enum class Sense { maximize, minimize };

Sense sense_of(TargetMode mode) { return mode == TargetMode::reach_goal ? Sense::maximize : Sense::minimize; }
Sense flip(Sense s) { return s == Sense::maximize ? Sense::minimize : Sense::maximize; }

// p_i d*_i for the chosen sense.
inline double disturbance_term(double p, double upper, double lower, Sense sense) {
  if (p == 0.0) return 0.0;
  const double a = p * upper;
  const double b = p * lower;
  return sense == Sense::maximize ? std::max(a, b) : std::min(a, b);
}

void check_dims(const Eigen::VectorXd& p, const Eigen::VectorXd& f, const DisturbanceBounds& bounds) {
  if (p.size() != f.size() || p.size() != bounds.dims())
    throw std::invalid_argument("hamiltonian: dimension mismatch");
}

// Precomputed node velocities and disturbance sense of the evolution
// Hamiltonian for one solve.
class Evolution {
 public:
  Evolution(const ClosedLoopSystem& sys, const GridPtr& grid, const SolverConfig& config)
      : grid_(grid), bounds_(sys.bounds()), n_(grid->dims()) {
    if (sys.state_dim() != n_) throw std::invalid_argument("solver: system and grid dimensions differ");
    if (bounds_.dims() != n_) throw std::invalid_argument("solver: disturbance bounds dimension mismatch");
    bounds_.validate();
    const double sign = config.direction == Direction::backward ? -1.0 : 1.0;
    sense_ = flip(sense_of(config.target_mode));

    const std::size_t N = grid->num_nodes();
    Eigen::MatrixXd states(n_, static_cast<Eigen::Index>(N));
    std::vector<double> x(n_);
    for (std::size_t k = 0; k < N; ++k) {
      grid->node_coordinates(k, x);
      for (int d = 0; d < n_; ++d) states(d, static_cast<Eigen::Index>(k)) = x[d];
    }
    velocity_ = sign * sys.nominal_rate_batch(states);
    if (!velocity_.allFinite()) throw NumericalError("solver: non-finite nominal rate");

    alpha_.resize(n_);
    for (int d = 0; d < n_; ++d)
      alpha_[d] = velocity_.row(d).cwiseAbs().maxCoeff() + std::max(bounds_.upper[d], -bounds_.lower[d]);
  }

  const Eigen::VectorXd& alpha() const { return alpha_; }

  // dV/dtau at every node; records max |E| into *max_h.
  void rate(const ScalarField& V, std::vector<double>& out, double* max_h) const {
    const Grid& g = *grid_;
    const std::size_t N = g.num_nodes();
    out.assign(N, 0.0);
    const auto vals = V.values();
    double hmax = 0.0;
#pragma omp parallel for schedule(static) reduction(max : hmax)
    for (long long kk = 0; kk < static_cast<long long>(N); ++kk) {
      const std::size_t k = static_cast<std::size_t>(kk);
      std::size_t rem = k;
      double e = 0.0;
      double diss = 0.0;
      for (int d = 0; d < n_; ++d) {
        const std::size_t st = g.stride(d);
        const int i = static_cast<int>(rem / st);
        rem %= st;
        const int cnt = g.count(d);
        const double h = g.spacing(d);
        double pm, pp;
        if (cnt == 1) {
          pm = pp = 0.0;
        } else if (i == 0) {
          pm = pp = (vals[k + st] - vals[k]) / h;
        } else if (i == cnt - 1) {
          pm = pp = (vals[k] - vals[k - st]) / h;
        } else {
          pm = (vals[k] - vals[k - st]) / h;
          pp = (vals[k + st] - vals[k]) / h;
        }
        const double pbar = 0.5 * (pm + pp);
        e += velocity_(d, static_cast<Eigen::Index>(k)) * pbar +
             disturbance_term(pbar, bounds_.upper[d], bounds_.lower[d], sense_);
        diss += alpha_[d] * (pp - pm) * 0.5;
      }
      const double lf = e - diss;
      hmax = std::max(hmax, std::abs(e));
      out[k] = -std::max(0.0, lf);
    }
    if (max_h) *max_h = std::max(*max_h, hmax);
  }

  double cfl(const SolverConfig& config) const { return cfl_dt(config, alpha_, *grid_); }

  ScalarField advance(const ScalarField& V, double dt, double* max_h) const {
    const std::size_t N = V.size();
    std::vector<double> k1, k2;
    rate(V, k1, max_h);
    std::vector<double> v1(N);
    for (std::size_t i = 0; i < N; ++i) v1[i] = V[i] + dt * k1[i];
    ScalarField stage(grid_, 0.0, V.time_tag());
    std::copy(v1.begin(), v1.end(), stage.values().begin());
    rate(stage, k2, max_h);
    ScalarField out(grid_, 0.0, V.time_tag());
    auto ov = out.values();
    bool finite = true;
    for (std::size_t i = 0; i < N; ++i) {
      // Heun average; both stages are non-increasing so V never grows.
      ov[i] = std::min(V[i], 0.5 * (V[i] + v1[i] + dt * k2[i]));
      if (!std::isfinite(ov[i])) finite = false;
    }
    if (!finite) throw NumericalError("solver: value function became non-finite");
    return out;
  }

 private:
  GridPtr grid_;
  DisturbanceBounds bounds_;
  int n_;
  Sense sense_;
  Eigen::MatrixXd velocity_;
  Eigen::VectorXd alpha_;
};

}  // namespace

void SolverConfig::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("solver: horizon must be positive");
  if (!(cfl_factor > 0.0) || cfl_factor > 1.0) throw std::invalid_argument("solver: cfl_factor must be in (0, 1]");
  if (snapshot_stride < 1) throw std::invalid_argument("solver: snapshot_stride must be >= 1");
  if (!std::isfinite(convergence_eps)) throw std::invalid_argument("solver: convergence_eps must be finite");
}

UpwindGradients upwind_gradients(const ScalarField& field) {
  const Grid& g = field.grid();
  const int n = g.dims();
  UpwindGradients out;
  for (int d = 0; d < n; ++d) {
    out.minus.emplace_back(field.grid_ptr(), 0.0, field.time_tag());
    out.plus.emplace_back(field.grid_ptr(), 0.0, field.time_tag());
  }
  std::vector<int> idx(n);
  for (std::size_t k = 0; k < g.num_nodes(); ++k) {
    g.multi_index(k, idx);
    for (int d = 0; d < n; ++d) {
      const std::size_t st = g.stride(d);
      const int cnt = g.count(d);
      const double h = g.spacing(d);
      double pm = 0.0, pp = 0.0;
      if (cnt > 1) {
        if (idx[d] == 0) {
          pm = pp = (field[k + st] - field[k]) / h;
        } else if (idx[d] == cnt - 1) {
          pm = pp = (field[k] - field[k - st]) / h;
        } else {
          pm = (field[k] - field[k - st]) / h;
          pp = (field[k + st] - field[k]) / h;
        }
      }
      out.minus[d][k] = pm;
      out.plus[d][k] = pp;
    }
  }
  return out;
}

Eigen::VectorXd optimal_disturbance(const Eigen::VectorXd& p, const DisturbanceBounds& bounds, TargetMode mode) {
  if (p.size() != bounds.dims()) throw std::invalid_argument("optimal_disturbance: dimension mismatch");
  const Sense s = sense_of(mode);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    const bool pick_upper = (p[i] > 0.0) == (s == Sense::maximize);
    d[i] = pick_upper ? bounds.upper[i] : bounds.lower[i];
  }
  return d;
}

double hamiltonian(const Eigen::VectorXd& p, const Eigen::VectorXd& nominal_rate, const DisturbanceBounds& bounds,
                   TargetMode mode) {
  check_dims(p, nominal_rate, bounds);
  const Sense s = sense_of(mode);
  double h = p.dot(nominal_rate);
  for (Eigen::Index i = 0; i < p.size(); ++i) h += disturbance_term(p[i], bounds.upper[i], bounds.lower[i], s);
  return h;
}

double analytic_hamiltonian(const Eigen::VectorXd& state, const Eigen::VectorXd& p, const ClosedLoopSystem& sys,
                            TargetMode mode) {
  return hamiltonian(p, sys.nominal_rate(state), sys.bounds(), mode);
}

Eigen::VectorXd dissipation_coefficients(const ClosedLoopSystem& sys, const Grid& grid) {
  auto g = std::make_shared<const Grid>(grid);
  SolverConfig cfg;
  return Evolution(sys, g, cfg).alpha();
}

double lax_friedrichs(const Eigen::VectorXd& p_minus, const Eigen::VectorXd& p_plus, const Eigen::VectorXd& nominal_rate,
                      const DisturbanceBounds& bounds, TargetMode mode, const Eigen::VectorXd& alpha) {
  if (p_minus.size() != p_plus.size() || alpha.size() != p_minus.size())
    throw std::invalid_argument("lax_friedrichs: dimension mismatch");
  const Eigen::VectorXd pbar = 0.5 * (p_minus + p_plus);
  return hamiltonian(pbar, nominal_rate, bounds, mode) - 0.5 * alpha.dot(p_plus - p_minus);
}

double lax_friedrichs_H(const Eigen::VectorXd& state, const Eigen::VectorXd& p_minus, const Eigen::VectorXd& p_plus,
                        const ClosedLoopSystem& sys, TargetMode mode, const Eigen::VectorXd& alpha) {
  return lax_friedrichs(p_minus, p_plus, sys.nominal_rate(state), sys.bounds(), mode, alpha);
}

double scheme_rate(const Eigen::VectorXd& p_minus, const Eigen::VectorXd& p_plus, const Eigen::VectorXd& nominal_rate,
                   const DisturbanceBounds& bounds, const SolverConfig& config, const Eigen::VectorXd& alpha) {
  const double sign = config.direction == Direction::backward ? -1.0 : 1.0;
  // The flipped sense expressed as a TargetMode for the shared kernel.
  const TargetMode evo = config.target_mode == TargetMode::reach_goal ? TargetMode::reach_unsafe : TargetMode::reach_goal;
  const double e = lax_friedrichs(p_minus, p_plus, sign * nominal_rate, bounds, evo, alpha);
  return -std::max(0.0, e);
}

double cfl_dt(const SolverConfig& config, const Eigen::VectorXd& alpha, const Grid& grid) {
  if (alpha.size() != grid.dims()) throw std::invalid_argument("cfl_dt: dimension mismatch");
  double s = 0.0;
  for (int d = 0; d < grid.dims(); ++d)
    if (grid.count(d) > 1) s += alpha[d] / grid.spacing(d);
  if (s <= 0.0) return config.horizon / 100.0;
  return config.cfl_factor / s;
}

ScalarField step(const ScalarField& field, const ClosedLoopSystem& sys, const SolverConfig& config, double dt) {
  config.validate();
  if (!(dt >= 0.0)) throw std::invalid_argument("step: dt must be non-negative");
  Evolution evo(sys, field.grid_ptr(), config);
  const double limit = evo.cfl(config);
  if (evo.alpha().sum() > 0.0 && dt > limit * (1.0 + 1e-9))
    throw NumericalError("step: dt " + std::to_string(dt) + " violates the CFL limit " + std::to_string(limit));
  ScalarField out = evo.advance(field, dt, nullptr);
  const double sgn = config.direction == Direction::backward ? -1.0 : 1.0;
  out.set_time_tag(field.time_tag() + sgn * dt);
  return out;
}

TubeResult solve_tube(const ScalarField& initial, const ClosedLoopSystem& sys, const SolverConfig& config) {
  config.validate();
  if (!initial.all_finite()) throw NumericalError("solve_tube: initial value function is not finite");
  Evolution evo(sys, initial.grid_ptr(), config);
  const double sgn = config.direction == Direction::backward ? -1.0 : 1.0;
  const double eps = config.convergence_eps < 0.0 ? 1e-6 * initial.grid().diameter() : config.convergence_eps;
  const double dt_max = evo.cfl(config);

  TubeResult res;
  res.config = config;
  res.diagnostics.alpha = evo.alpha();
  ScalarField V = initial;
  V.set_time_tag(0.0);
  res.snapshots.push_back({0.0, V});

  double tau = 0.0;
  int steps = 0;
  bool last_saved = true;
  while (tau < config.horizon * (1.0 - 1e-12)) {
    const double dt = std::min(dt_max, config.horizon - tau);
    ScalarField next = evo.advance(V, dt, &res.diagnostics.max_abs_hamiltonian);
    double change = 0.0;
    for (std::size_t i = 0; i < V.size(); ++i) change = std::max(change, std::abs(next[i] - V[i]));
    tau += dt;
    ++steps;
    res.diagnostics.dt_history.push_back(dt);
    V = std::move(next);
    V.set_time_tag(sgn * tau);
    last_saved = false;
    if (steps % config.snapshot_stride == 0) {
      res.snapshots.push_back({sgn * tau, V});
      last_saved = true;
    }
    if (eps > 0.0 && change < eps) {
      res.diagnostics.stopped_early = true;
      break;
    }
  }
  if (res.diagnostics.stopped_early && tau < config.horizon) {
    // Stationary from here on: the remaining interval adds nothing.
    tau = config.horizon;
    V.set_time_tag(sgn * tau);
    last_saved = false;
  }
  if (!last_saved) res.snapshots.push_back({sgn * tau, V});
  res.diagnostics.steps = steps;
  return res;
}

TubeResult solve_brt(const ShapeSet& target, const ClosedLoopSystem& sys, const SolverConfig& config,
                     const GridPtr& grid) {
  SolverConfig c = config;
  c.direction = Direction::backward;
  return solve_tube(level_set_from_shapes(grid, target), sys, c);
}

TubeResult solve_frt(const ShapeSet& initial, const ClosedLoopSystem& sys, const SolverConfig& config,
                     const GridPtr& grid) {
  SolverConfig c = config;
  c.direction = Direction::forward;
  return solve_tube(level_set_from_shapes(grid, initial), sys, c);
}

}  // namespace nnreach
