#include "nnreach/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>

namespace nnreach {

namespace {

std::vector<double> as_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd rk4(const ClosedLoopSystem& sys, const Eigen::VectorXd& s, const Eigen::VectorXd& d, double dt) {
  const Eigen::VectorXd k1 = sys.rate(s, d);
  const Eigen::VectorXd k2 = sys.rate(s + 0.5 * dt * k1, d);
  const Eigen::VectorXd k3 = sys.rate(s + 0.5 * dt * k2, d);
  const Eigen::VectorXd k4 = sys.rate(s + dt * k3, d);
  return s + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Eigen::VectorXd choose_disturbance(const RolloutOptions& opt, const DisturbanceBounds& b, const Eigen::VectorXd& s,
                                   std::mt19937_64& rng) {
  const auto n = b.dims();
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  switch (opt.strategy) {
    case DisturbanceStrategy::zero:
      break;
    case DisturbanceStrategy::uniform_random: {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (int i = 0; i < n; ++i) d[i] = b.lower[i] + u(rng) * (b.upper[i] - b.lower[i]);
      break;
    }
    case DisturbanceStrategy::worst_case: {
      if (!opt.value) break;
      const auto x = as_vec(s);
      if (!opt.value->grid().contains(x)) break;
      const auto g = interpolate_gradient(*opt.value, x);
      Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(g.data(), n);
      d = optimal_disturbance(p, b, TargetMode::reach_unsafe);
      break;
    }
  }
  return d;
}

}  // namespace

std::string to_string(DisturbanceStrategy s) {
  switch (s) {
    case DisturbanceStrategy::zero: return "zero";
    case DisturbanceStrategy::uniform_random: return "uniform_random";
    case DisturbanceStrategy::worst_case: return "worst_case";
  }
  return "unknown";
}

DisturbanceStrategy disturbance_strategy_from_string(const std::string& s) {
  if (s == "zero") return DisturbanceStrategy::zero;
  if (s == "uniform_random") return DisturbanceStrategy::uniform_random;
  if (s == "worst_case") return DisturbanceStrategy::worst_case;
  throw std::invalid_argument("unknown disturbance strategy '" + s + "'");
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(a), hi(a), lo(b), hi(b), lo(c), hi(c)};
  return std::mt19937_64(seq);
}

Trajectory rollout(const ClosedLoopSystem& sys, const Eigen::VectorXd& s0, double horizon, double dt,
                   const RolloutOptions& opt) {
  if (!(dt > 0.0)) throw std::invalid_argument("rollout: dt must be positive");
  if (!(horizon >= 0.0)) throw std::invalid_argument("rollout: horizon must be non-negative");
  if (s0.size() != sys.state_dim()) throw std::invalid_argument("rollout: state dimension mismatch");
  auto rng = make_stream(opt.seed, 0x726f6c6c);
  Trajectory tr;
  Eigen::VectorXd s = s0;
  double t = 0.0;
  const int steps = static_cast<int>(std::ceil(horizon / dt - 1e-9));
  for (int k = 0;; ++k) {
    const auto x = as_vec(s);
    tr.times.push_back(t);
    tr.states.push_back(s);
    tr.actions.push_back(sys.policy().action(s));
    if (opt.obstacles && signed_distance(*opt.obstacles, x) <= 0.0) tr.hit_obstacle = true;
    if (opt.goal && signed_distance(*opt.goal, x) <= 0.0) tr.reached_goal = true;
    if (opt.domain && !opt.domain->contains(x)) tr.left_domain = true;
    const bool stop = tr.hit_obstacle || tr.reached_goal || tr.left_domain || k >= steps;
    const Eigen::VectorXd d = stop ? Eigen::VectorXd::Zero(s.size()) : choose_disturbance(opt, sys.bounds(), s, rng);
    tr.disturbances.push_back(d);
    if (stop) {
      tr.horizon_exhausted = k >= steps && !(tr.hit_obstacle || tr.reached_goal || tr.left_domain);
      break;
    }
    const double h = std::min(dt, horizon - t);
    s = rk4(sys, s, d, h);
    t = (k + 1 == steps) ? horizon : t + h;
  }
  return tr;
}

Eigen::VectorXd sample_in_shape(const ShapeSet& shape, std::mt19937_64& rng) {
  std::vector<double> lo, hi;
  shape.bounding_box(lo, hi);
  std::vector<std::uniform_real_distribution<double>> dist;
  for (std::size_t i = 0; i < lo.size(); ++i) dist.emplace_back(lo[i], hi[i]);
  std::vector<double> x(lo.size());
  for (int attempt = 0; attempt < 100000; ++attempt) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = dist[i](rng);
    if (signed_distance(shape, x) <= 0.0) return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  }
  throw std::runtime_error("sample_in_shape: rejection sampling failed");
}

double MonteCarloResult::safe_fraction() const {
  if (safe.empty()) return 0.0;
  std::size_t n = 0;
  for (bool b : safe) n += b ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(safe.size());
}

MonteCarloResult mc_ground_truth(const ClosedLoopSystem& sys, const ShapeSet& initial, const ShapeSet& obstacles,
                                 const MonteCarloConfig& cfg) {
  if (cfg.num_samples < 1) throw std::invalid_argument("mc_ground_truth: num_samples must be >= 1");
  if (cfg.num_disturbance_draws < 0) throw std::invalid_argument("mc_ground_truth: negative draw count");
  MonteCarloResult res;
  res.samples.resize(cfg.num_samples);
  for (int i = 0; i < cfg.num_samples; ++i) {
    auto rng = make_stream(cfg.seed, 1, static_cast<std::uint64_t>(i));
    res.samples[i] = sample_in_shape(initial, rng);
  }
  std::vector<char> safe(cfg.num_samples, 1);
  if (obstacles.empty()) {
    res.safe.assign(safe.begin(), safe.end());
    return res;
  }
  // With zero bounds every uniform draw reproduces the zero-disturbance rollout.
  const bool zero_bounds = sys.bounds().upper.isZero(0.0) && sys.bounds().lower.isZero(0.0);
  const int draws = zero_bounds && cfg.include_zero_draw ? 0 : cfg.num_disturbance_draws;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < cfg.num_samples; ++i) {
    RolloutOptions opt;
    opt.obstacles = obstacles;
    opt.domain = cfg.domain;
    if (cfg.include_zero_draw) {
      opt.strategy = DisturbanceStrategy::zero;
      if (rollout(sys, res.samples[i], cfg.horizon, cfg.dt, opt).hit_obstacle) {
        safe[i] = 0;
        continue;
      }
    }
    opt.strategy = DisturbanceStrategy::uniform_random;
    for (int d = 0; d < draws; ++d) {
      // Stream depends only on (seed, i, d).
      auto rng = make_stream(cfg.seed, 2, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(d));
      opt.seed = rng();
      if (rollout(sys, res.samples[i], cfg.horizon, cfg.dt, opt).hit_obstacle) {
        safe[i] = 0;
        break;
      }
    }
  }
  res.safe.assign(safe.begin(), safe.end());
  return res;
}

void write_mc_csv(const MonteCarloResult& mc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  if (mc.samples.empty()) return;
  const auto n = mc.samples.front().size();
  for (Eigen::Index i = 0; i < n; ++i) out << 's' << i << ',';
  out << "safe\n" << std::setprecision(17);
  for (std::size_t k = 0; k < mc.samples.size(); ++k) {
    for (Eigen::Index i = 0; i < n; ++i) out << mc.samples[k][i] << ',';
    out << (mc.safe[k] ? 1 : 0) << '\n';
  }
}

std::pair<double, Eigen::VectorXd> corner_extremum(const Eigen::VectorXd& p, const DisturbanceBounds& bounds,
                                                    TargetMode mode) {
  const auto n = p.size();
  if (n != bounds.dims()) throw std::invalid_argument("corner_extremum: dimension mismatch");
  if (n > 10) throw std::invalid_argument("corner_extremum: at most 10 dimensions");
  const bool maximize = mode == TargetMode::reach_goal;
  Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
  double best_value = 0.0;
  Eigen::VectorXd d(n);
  for (long mask = 0; mask < (1L << n); ++mask) {
    for (Eigen::Index i = 0; i < n; ++i) d[i] = (mask >> i) & 1 ? bounds.upper[i] : bounds.lower[i];
    const double v = p.dot(d);
    if (maximize ? v > best_value : v < best_value) {
      best_value = v;
      best = d;
    }
  }
  return {best_value, best};
}

Mask exhaustive_brt_small(const ClosedLoopSystem& sys, const ShapeSet& target, const GridPtr& grid, double horizon,
                          double dt) {
  const int n = grid->dims();
  if (n > 2) throw std::invalid_argument("exhaustive_brt_small: at most 2 dimensions");
  for (int d = 0; d < n; ++d)
    if (grid->count(d) > 41) throw std::invalid_argument("exhaustive_brt_small: at most 41 nodes per dimension");
  if (!(dt > 0.0)) throw std::invalid_argument("exhaustive_brt_small: dt must be positive");
  const auto& b = sys.bounds();
  std::vector<Eigen::VectorXd> candidates{Eigen::VectorXd::Zero(n)};
  for (long mask = 0; mask < (1L << n); ++mask) {
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d[i] = (mask >> i) & 1 ? b.upper[i] : b.lower[i];
    candidates.push_back(d);
  }
  const int steps = static_cast<int>(std::ceil(horizon / dt - 1e-9));
  Mask out(grid, false);
  const auto N = static_cast<long long>(grid->num_nodes());
#pragma omp parallel for schedule(dynamic)
  for (long long k = 0; k < N; ++k) {
    Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(grid->node_coordinates(static_cast<std::size_t>(k)).data(), n);
    double t = 0.0;
    bool hit = signed_distance(target, as_vec(s)) <= 0.0;
    for (int step = 0; step < steps && !hit; ++step) {
      const double h = std::min(dt, horizon - t);
      double best = std::numeric_limits<double>::infinity();
      Eigen::VectorXd next = s;
      for (const auto& d : candidates) {
        const Eigen::VectorXd cand = rk4(sys, s, d, h);
        const double sd = signed_distance(target, as_vec(cand));
        if (sd < best) {
          best = sd;
          next = cand;
        }
      }
      s = next;
      t += h;
      hit = best <= 0.0;
    }
    if (hit) out.bits[static_cast<std::size_t>(k)] = 1;
  }
  return out;
}

bool near_zero_level(const ScalarField& field, std::span<const double> point) {
  const Grid& g = field.grid();
  const int n = g.dims();
  if (static_cast<int>(point.size()) != n) throw std::invalid_argument("near_zero_level: dimension mismatch");
  int lo[kMaxDims], hi[kMaxDims], idx[kMaxDims];
  for (int d = 0; d < n; ++d) {
    const double u = (point[d] - g.lo()[d]) / g.spacing(d);
    lo[d] = std::clamp(static_cast<int>(std::floor(u - 1.0)), 0, g.count(d) - 1);
    hi[d] = std::clamp(static_cast<int>(std::ceil(u + 1.0)), 0, g.count(d) - 1);
    idx[d] = lo[d];
  }
  bool neg = false, pos = false;
  while (true) {
    const double v = field[g.flat_index(std::span<const int>(idx, static_cast<std::size_t>(n)))];
    (v <= 0.0 ? neg : pos) = true;
    if (neg && pos) return true;
    int d = 0;
    while (d < n && ++idx[d] > hi[d]) {
      idx[d] = lo[d];
      ++d;
    }
    if (d == n) return false;
  }
}

McAgreement compare_with_mc(const VerificationReport& report, const MonteCarloResult& mc) {
  McAgreement a;
  for (std::size_t i = 0; i < mc.samples.size(); ++i) {
    const Eigen::VectorXd& s = mc.samples[i];
    const bool level_safe = is_state_safe(report, s);
    ++a.samples;
    if (level_safe == mc.safe[i]) {
      ++a.agree;
      continue;
    }
    const bool near = near_zero_level(report.brt_union, std::span<const double>(s.data(), static_cast<std::size_t>(s.size())));
    if (near) ++a.near_boundary;
    if (level_safe) {
      ++a.optimistic;
      if (!near) ++a.unexplained;
    } else {
      ++a.conservative;
    }
  }
  return a;
}

nlohmann::json agreement_to_json(const McAgreement& a) {
  return {{"samples", a.samples},         {"agree", a.agree},
          {"agreement", a.agreement()},   {"conservative", a.conservative},
          {"optimistic", a.optimistic},   {"near_boundary", a.near_boundary},
          {"unexplained", a.unexplained}};
}

}  // namespace nnreach
