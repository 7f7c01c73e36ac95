#include "nnreach/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nnreach/oracle.hpp"

namespace nnreach {

namespace {

Eigen::VectorXd uniform_in(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd x(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i) x[i] = lo[i] + u(rng) * (hi[i] - lo[i]);
  return x;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

bool inside_box(const Eigen::VectorXd& s, const std::vector<double>& lo, const std::vector<double>& hi) {
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] < lo[i] || s[i] > hi[i]) return false;
  return true;
}

nlohmann::json training_to_json(const TrainingConfig& t) {
  return {{"hidden", t.hidden},
          {"hidden_activation", to_string(t.hidden_activation)},
          {"output_activation", to_string(t.output_activation)},
          {"scale_factor", t.scale_factor},
          {"learning_rate", t.learning_rate},
          {"batch_size", t.batch_size},
          {"epochs", t.epochs},
          {"train_fraction", t.train_fraction},
          {"normalize_inputs", t.normalize_inputs}};
}

TrainingConfig training_from_json(const nlohmann::json& j, TrainingConfig t) {
  t.hidden = j.value("hidden", t.hidden);
  if (j.contains("hidden_activation")) t.hidden_activation = activation_from_string(j.at("hidden_activation"));
  if (j.contains("output_activation")) t.output_activation = activation_from_string(j.at("output_activation"));
  t.scale_factor = j.value("scale_factor", t.scale_factor);
  t.learning_rate = j.value("learning_rate", t.learning_rate);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.epochs = j.value("epochs", t.epochs);
  t.train_fraction = j.value("train_fraction", t.train_fraction);
  t.normalize_inputs = j.value("normalize_inputs", t.normalize_inputs);
  return t;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::string to_string(EnvKind env) { return env == EnvKind::true_land ? "true_land" : "true_air"; }

EnvKind env_from_string(const std::string& s) {
  if (s == "true_land" || s == "land") return EnvKind::true_land;
  if (s == "true_air" || s == "air" || s == "aerial") return EnvKind::true_air;
  throw std::invalid_argument("unknown env '" + s + "'");
}

int env_state_dim(EnvKind env) { return env == EnvKind::true_land ? 2 : 3; }

ActionBounds env_action_bounds(EnvKind env) { return env == EnvKind::true_land ? ActionBounds::land() : ActionBounds::air(); }

Eigen::VectorXd env_rate(EnvKind env, const Eigen::VectorXd& s, const Eigen::VectorXd& a) {
  return env == EnvKind::true_land ? true_land_rate(s, a) : true_air_rate(s, a);
}

Eigen::VectorXd env_step(EnvKind env, const Eigen::VectorXd& s, const Eigen::VectorXd& a, double dt) {
  const Eigen::VectorXd k1 = env_rate(env, s, a);
  const Eigen::VectorXd k2 = env_rate(env, s + 0.5 * dt * k1, a);
  const Eigen::VectorXd k3 = env_rate(env, s + 0.5 * dt * k2, a);
  const Eigen::VectorXd k4 = env_rate(env, s + dt * k3, a);
  return s + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double Reward::operator()(const Eigen::VectorXd& next_state, const Eigen::VectorXd& action) const {
  double r = -weights.goal * (next_state - goal_center).norm() - weights.action * action.squaredNorm();
  if (!obstacles.empty() && weights.obstacle != 0.0) {
    const std::vector<double> x = to_std(next_state);
    r -= weights.obstacle * std::max(0.0, weights.margin - signed_distance(obstacles, x));
  }
  return r;
}

RewardFn as_reward_fn(const Reward& reward) {
  return [reward](const Eigen::VectorXd& s, const Eigen::VectorXd& a, int) { return reward(s, a); };
}

void MpcConfig::validate() const {
  if (horizon < 1 || candidates < 1) throw std::invalid_argument("mpc: horizon and candidates must be >= 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("mpc: gamma must be in [0, 1)");
}

MpcDecision mpc_plan(const MlpModel& model, const RewardFn& reward, const Eigen::VectorXd& state,
                     const MpcConfig& config, const ActionBounds& bounds, std::mt19937_64& rng) {
  config.validate();
  const int n = static_cast<int>(state.size());
  const int m = bounds.dims();
  if (model.input_dim() != n + m || model.output_dim() != n) throw std::invalid_argument("mpc: model shape mismatch");
  const int M = config.candidates;
  const int H = config.horizon;
  MpcDecision dec;
  dec.sequences.resize(M, H * m);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < M; ++k)
    for (int t = 0; t < H; ++t)
      for (int i = 0; i < m; ++i)
        dec.sequences(k, t * m + i) = bounds.lower[i] + u(rng) * (bounds.upper[i] - bounds.lower[i]);

  Eigen::MatrixXd S = state.replicate(1, M);
  Eigen::MatrixXd in(n + m, M);
  dec.returns.assign(M, 0.0);
  double discount = 1.0;
  for (int t = 0; t < H; ++t) {
    in.topRows(n) = S;
    in.bottomRows(m) = dec.sequences.middleCols(t * m, m).transpose();
    S += model.forward_batch(in);
    for (int k = 0; k < M; ++k) {
      const Eigen::VectorXd a = dec.sequences.row(k).segment(t * m, m).transpose();
      dec.returns[k] += discount * reward(S.col(k), a, t);
    }
    discount *= config.gamma;
  }
  dec.best = static_cast<int>(std::max_element(dec.returns.begin(), dec.returns.end()) - dec.returns.begin());
  dec.action = dec.sequences.row(dec.best).head(m).transpose();
  return dec;
}

Eigen::VectorXd mpc_action(const MlpModel& model, const RewardFn& reward, const Eigen::VectorXd& state,
                           const MpcConfig& config, const ActionBounds& bounds, std::mt19937_64& rng) {
  return mpc_plan(model, reward, state, config, bounds, rng).action;
}

TransitionDataset collect_random_data(EnvKind env, const ActionBounds& bounds, const std::vector<double>& lo,
                                      const std::vector<double>& hi, int n, double dt_env, std::mt19937_64& rng) {
  const int sd = env_state_dim(env);
  if (n < 1) throw std::invalid_argument("collect_random_data: N must be >= 1");
  if (static_cast<int>(lo.size()) != sd || static_cast<int>(hi.size()) != sd)
    throw std::invalid_argument("collect_random_data: domain dimension mismatch");
  if (!(dt_env > 0.0)) throw std::invalid_argument("collect_random_data: dt_env must be positive");
  TransitionDataset data(sd, bounds.dims());
  const Eigen::VectorXd l = to_eigen(lo), h = to_eigen(hi);
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd s = uniform_in(l, h, rng);
    const Eigen::VectorXd a = uniform_in(bounds.lower, bounds.upper, rng);
    data.add({s, a, env_step(env, s, a, dt_env) - s});
  }
  return data;
}

TransitionDataset collect_policy_data(EnvKind env, const Policy& policy, const ShapeSet& starts,
                                      const std::vector<double>& lo, const std::vector<double>& hi, int n,
                                      double dt_env, int rollout_length, double explore, std::mt19937_64& rng) {
  if (n < 1 || rollout_length < 1) throw std::invalid_argument("collect_policy_data: counts must be >= 1");
  const int sd = env_state_dim(env);
  const ActionBounds& bounds = policy.bounds();
  TransitionDataset data(sd, bounds.dims());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd s = sample_in_shape(starts, rng);
  int age = 0;
  while (static_cast<int>(data.size()) < n) {
    Eigen::VectorXd a = u(rng) < explore ? uniform_in(bounds.lower, bounds.upper, rng) : policy.action(s);
    const Eigen::VectorXd next = env_step(env, s, a, dt_env);
    data.add({s, a, next - s});
    s = next;
    if (++age >= rollout_length || !inside_box(s, lo, hi)) {
      s = sample_in_shape(starts, rng);
      age = 0;
    }
  }
  return data;
}

DistillResult fit_policy(const std::vector<Eigen::VectorXd>& states, const std::vector<Eigen::VectorXd>& labels,
                         const ActionBounds& bounds, const TrainingConfig& training, std::uint64_t seed) {
  if (states.size() < 100) throw std::invalid_argument("distill_policy: at least 100 state samples required");
  if (labels.size() != states.size()) throw std::invalid_argument("distill_policy: label count mismatch");
  const int n = static_cast<int>(states.front().size());
  const int m = bounds.dims();
  const Eigen::Index N = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXd X(n, N), Y(m, N);
  for (Eigen::Index k = 0; k < N; ++k) {
    X.col(k) = states[k];
    Y.col(k) = labels[k];
  }
  ModelMeta meta{n, m, 0.0, "policy"};
  DistillResult res;

  std::vector<Eigen::Index> perm(N);
  std::iota(perm.begin(), perm.end(), 0);
  auto rng = make_stream(seed, 0x706f6c);
  std::shuffle(perm.begin(), perm.end(), rng);
  const Eigen::Index ntrain = static_cast<Eigen::Index>(std::llround(0.8 * static_cast<double>(N)));
  Eigen::MatrixXd Xt(n, ntrain), Yt(m, ntrain), Xv(n, N - ntrain), Yv(m, N - ntrain);
  for (Eigen::Index k = 0; k < N; ++k) {
    if (k < ntrain) {
      Xt.col(k) = X.col(perm[k]);
      Yt.col(k) = Y.col(perm[k]);
    } else {
      Xv.col(k - ntrain) = X.col(perm[k]);
      Yv.col(k - ntrain) = Y.col(perm[k]);
    }
  }

  const Eigen::VectorXd spread = Y.rowwise().maxCoeff() - Y.rowwise().minCoeff();
  MlpModel model;
  if (spread.maxCoeff() <= 1e-12) {
    res.degenerate_targets = true;
    res.warnings.push_back("all policy targets are identical; fitted a constant policy");
    const Eigen::VectorXd c = Y.col(0);
    Eigen::VectorXd scale = (training.scale_factor * c.cwiseAbs()).cwiseMax(1.0);
    std::vector<int> sizes{n};
    sizes.insert(sizes.end(), training.hidden.begin(), training.hidden.end());
    sizes.push_back(m);
    model = MlpModel(sizes, training.hidden_activation, Activation::tanh, scale, meta);
    model.biases(model.num_layers() - 1) = (c.array() / scale.array()).atanh().matrix();
  } else {
    TrainingConfig cfg = training;
    cfg.seed = seed;
    model = fit_mlp(Xt, Yt, Xv, Yv, cfg, meta).model;
  }
  res.policy = Policy::mlp(std::move(model), bounds);

  auto error = [&](const Eigen::MatrixXd& Xs, const Eigen::MatrixXd& Ys) {
    if (Xs.cols() == 0) return 0.0;
    const Eigen::MatrixXd A = res.policy.action_batch(Xs);
    const Eigen::VectorXd range = bounds.range().cwiseMax(1e-12);
    double total = 0.0;
    for (Eigen::Index k = 0; k < Xs.cols(); ++k)
      total += ((A.col(k) - Ys.col(k)).cwiseAbs().array() / range.array()).mean();
    return total / static_cast<double>(Xs.cols());
  };
  res.train_error = error(Xt, Yt);
  res.heldout_error = error(Xv, Yv);
  return res;
}

DistillResult distill_policy(const MlpModel& model, const RewardFn& reward, const std::vector<Eigen::VectorXd>& states,
                             const MpcConfig& mpc, const ActionBounds& bounds, const TrainingConfig& training,
                             std::uint64_t seed) {
  if (states.size() < 100) throw std::invalid_argument("distill_policy: at least 100 state samples required");
  std::vector<Eigen::VectorXd> labels(states.size());
#pragma omp parallel for schedule(dynamic)
  for (long long k = 0; k < static_cast<long long>(states.size()); ++k) {
    auto rng = make_stream(seed, 0x6d7063, static_cast<std::uint64_t>(k));
    labels[k] = mpc_action(model, reward, states[k], mpc, bounds, rng);
  }
  return fit_policy(states, labels, bounds, training, seed);
}

void TrainRunConfig::validate() const {
  if (initial_samples < 1 || iterations < 0 || samples_per_iteration < 1 || rollout_length < 1 || distill_states < 100)
    throw std::invalid_argument("train config: counts must be positive (distill_states >= 100)");
  if (!(dt_env > 0.0)) throw std::invalid_argument("train config: dt_env must be positive");
  if (!(k_sigma > 0.0)) throw std::invalid_argument("train config: k_sigma must be positive");
  if (!(explore >= 0.0 && explore <= 1.0)) throw std::invalid_argument("train config: explore must be in [0, 1]");
  mpc.validate();
}

nlohmann::json train_config_to_json(const TrainRunConfig& c) {
  return {{"env", to_string(c.env)},
          {"initial_samples", c.initial_samples},
          {"iterations", c.iterations},
          {"samples_per_iteration", c.samples_per_iteration},
          {"rollout_length", c.rollout_length},
          {"explore", c.explore},
          {"distill_states", c.distill_states},
          {"dt_env", c.dt_env},
          {"k_sigma", c.k_sigma},
          {"mpc", {{"horizon", c.mpc.horizon}, {"candidates", c.mpc.candidates}, {"gamma", c.mpc.gamma}}},
          {"reward",
           {{"goal", c.reward.goal}, {"obstacle", c.reward.obstacle}, {"margin", c.reward.margin}, {"action", c.reward.action}}},
          {"model_training", training_to_json(c.model_training)},
          {"policy_training", training_to_json(c.policy_training)},
          {"seed", c.seed}};
}

TrainRunConfig train_config_from_json(const nlohmann::json& j) {
  TrainRunConfig c;
  try {
    if (j.contains("env")) c.env = env_from_string(j.at("env").get<std::string>());
    c.initial_samples = j.value("initial_samples", c.initial_samples);
    c.iterations = j.value("iterations", c.iterations);
    c.samples_per_iteration = j.value("samples_per_iteration", c.samples_per_iteration);
    c.rollout_length = j.value("rollout_length", c.rollout_length);
    c.explore = j.value("explore", c.explore);
    c.distill_states = j.value("distill_states", c.distill_states);
    c.dt_env = j.value("dt_env", c.dt_env);
    c.k_sigma = j.value("k_sigma", c.k_sigma);
    if (j.contains("mpc")) {
      const auto& m = j.at("mpc");
      c.mpc.horizon = m.value("horizon", c.mpc.horizon);
      c.mpc.candidates = m.value("candidates", c.mpc.candidates);
      c.mpc.gamma = m.value("gamma", c.mpc.gamma);
    }
    if (j.contains("reward")) {
      const auto& r = j.at("reward");
      c.reward.goal = r.value("goal", c.reward.goal);
      c.reward.obstacle = r.value("obstacle", c.reward.obstacle);
      c.reward.margin = r.value("margin", c.reward.margin);
      c.reward.action = r.value("action", c.reward.action);
    }
    if (j.contains("model_training")) c.model_training = training_from_json(j.at("model_training"), c.model_training);
    if (j.contains("policy_training")) c.policy_training = training_from_json(j.at("policy_training"), c.policy_training);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

TrainArtifacts train_loop(const TrainRunConfig& config, const Scene& scene) {
  config.validate();
  const EnvKind env = config.env;
  if (scene.grid->dims() != env_state_dim(env)) throw std::invalid_argument("train_loop: scene and env dimensions differ");
  if (scene.goal_set.empty()) throw std::invalid_argument("train_loop: scene has no goal set");
  const ActionBounds bounds = env_action_bounds(env);
  const std::vector<double>& lo = scene.grid->lo();
  const std::vector<double>& hi = scene.grid->hi();

  std::vector<double> glo, ghi;
  scene.goal_set.bounding_box(glo, ghi);
  Reward reward{0.5 * (to_eigen(glo) + to_eigen(ghi)), scene.obstacles, config.reward};
  const RewardFn reward_fn = as_reward_fn(reward);

  TrainArtifacts art;
  auto data_rng = make_stream(config.seed, 11);
  art.dataset = collect_random_data(env, bounds, lo, hi, config.initial_samples, config.dt_env, data_rng);

  auto fit_round = [&](int k) {
    TrainingConfig mt = config.model_training;
    mt.seed = config.seed * 1000 + static_cast<std::uint64_t>(k);
    FitResult fit = train_dynamics_model(art.dataset, mt, config.dt_env);
    const ResidualStats stats = residual_stats(residual_list(fit.model, art.dataset));

    auto state_rng = make_stream(config.seed, 12, static_cast<std::uint64_t>(k));
    std::vector<Eigen::VectorXd> states(config.distill_states);
    for (auto& s : states) s = uniform_in(to_eigen(lo), to_eigen(hi), state_rng);
    TrainingConfig pt = config.policy_training;
    DistillResult dist = distill_policy(fit.model, reward_fn, states, config.mpc, bounds, pt,
                                        config.seed * 1000 + 500 + static_cast<std::uint64_t>(k));

    IterationLog log;
    log.iteration = k;
    log.dataset_size = art.dataset.size();
    log.train_error = fit.train_error;
    log.validation_error = fit.validation_error;
    log.residual_mean = stats.mean;
    log.residual_sd = stats.sd;
    log.policy_heldout_error = dist.heldout_error;
    art.iterations.push_back(log);
    art.model = std::move(fit.model);
    art.policy = std::move(dist.policy);
    art.residual_stats = stats;
  };

  for (int k = 0; k < config.iterations; ++k) {
    fit_round(k);
    auto rng = make_stream(config.seed, 13, static_cast<std::uint64_t>(k));
    const std::size_t before = art.dataset.size();
    art.dataset.append(collect_policy_data(env, art.policy, scene.initial_set, lo, hi, config.samples_per_iteration,
                                           config.dt_env, config.rollout_length, config.explore, rng));
    if (art.dataset.size() <= before) throw std::logic_error("train_loop: dataset did not grow");
  }
  fit_round(config.iterations);

  art.bounds = k_sigma_bounds(art.residual_stats, config.k_sigma, config.dt_env);
  art.coverage = coverage_check(art.bounds, residual_list(art.model, art.dataset));

  nlohmann::json iters = nlohmann::json::array();
  for (const auto& it : art.iterations) {
    iters.push_back({{"iteration", it.iteration},
                     {"dataset_size", it.dataset_size},
                     {"train_error", it.train_error},
                     {"validation_error", it.validation_error},
                     {"residual_mean", to_std(it.residual_mean)},
                     {"residual_sd", to_std(it.residual_sd)},
                     {"policy_heldout_error", it.policy_heldout_error}});
  }
  art.log = {{"config", train_config_to_json(config)},
             {"iterations", iters},
             {"bounds_upper", to_std(art.bounds.upper)},
             {"coverage", art.coverage}};
  return art;
}

}  // namespace nnreach
