#include "nnreach/dynamics.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "nnreach/errors.hpp"
#include "nnreach/model_io.hpp"
#include "nnreach/scene.hpp"

namespace nnreach {

Eigen::VectorXd ActionBounds::clip(const Eigen::VectorXd& a) const { return a.cwiseMax(lower).cwiseMin(upper); }

void ActionBounds::clip_columns(Eigen::MatrixXd& actions) const {
  actions = actions.cwiseMax(lower.replicate(1, actions.cols())).cwiseMin(upper.replicate(1, actions.cols()));
}

ActionBounds ActionBounds::land() {
  ActionBounds b;
  b.lower = Eigen::Vector2d(0.0, -std::numbers::pi);
  b.upper = Eigen::Vector2d(1.0, std::numbers::pi);
  return b;
}

ActionBounds ActionBounds::air() {
  ActionBounds b;
  b.lower = Eigen::Vector3d(0.0, -std::numbers::pi, -std::numbers::pi);
  b.upper = Eigen::Vector3d(1.0, std::numbers::pi, std::numbers::pi);
  return b;
}

ActionBounds ActionBounds::defaults_for(int action_dim) {
  if (action_dim == 2) return land();
  if (action_dim == 3) return air();
  ActionBounds b;
  b.lower = Eigen::VectorXd::Constant(action_dim, -1.0);
  b.upper = Eigen::VectorXd::Constant(action_dim, 1.0);
  return b;
}

// ---------------------------------------------------------------------------

namespace {

void check_bounds(const ActionBounds& b) {
  if (b.lower.size() != b.upper.size() || b.lower.size() == 0) {
    throw std::invalid_argument("policy: action bounds must be nonempty with equal lengths");
  }
  for (Eigen::Index i = 0; i < b.lower.size(); ++i) {
    if (!(b.lower[i] <= b.upper[i])) throw std::invalid_argument("policy: action lower bound exceeds upper bound");
  }
}

Eigen::VectorXd tabulated_action(const Policy::Tabulated& t, const Eigen::VectorXd& s) {
  const Grid& g = *t.grid;
  const int n = g.dims();
  int base[kMaxDims];
  double frac[kMaxDims];
  for (int d = 0; d < n; ++d) {
    const double u = std::clamp((s[d] - g.lo()[d]) / g.spacing(d), 0.0, static_cast<double>(g.count(d) - 1));
    const int i = std::min(static_cast<int>(std::floor(u)), g.count(d) - 2);
    base[d] = i;
    frac[d] = u - i;
  }
  Eigen::VectorXd a = Eigen::VectorXd::Zero(t.actions.front().size());
  for (int c = 0; c < (1 << n); ++c) {
    double w = 1.0;
    std::size_t flat = 0;
    for (int d = 0; d < n; ++d) {
      const int bit = (c >> d) & 1;
      w *= bit ? frac[d] : 1.0 - frac[d];
      flat += static_cast<std::size_t>(base[d] + bit) * g.stride(d);
    }
    if (w != 0.0) a += w * t.actions[flat];
  }
  return a;
}

}  // namespace

Policy Policy::mlp(MlpModel model, ActionBounds bounds) {
  check_bounds(bounds);
  if (model.output_dim() != bounds.dims()) throw std::invalid_argument("policy: model output does not match action bounds");
  Policy p;
  p.impl_ = Mlp{std::move(model)};
  p.bounds_ = std::move(bounds);
  return p;
}

Policy Policy::constant(Eigen::VectorXd action, ActionBounds bounds) {
  check_bounds(bounds);
  if (action.size() != bounds.dims()) throw std::invalid_argument("policy: action does not match action bounds");
  Policy p;
  p.impl_ = Constant{std::move(action)};
  p.bounds_ = std::move(bounds);
  return p;
}

Policy Policy::tabulated(GridPtr grid, std::vector<Eigen::VectorXd> actions, ActionBounds bounds) {
  check_bounds(bounds);
  if (!grid || actions.size() != grid->num_nodes()) throw std::invalid_argument("policy: one action per grid node required");
  for (const auto& a : actions) {
    if (a.size() != bounds.dims()) throw std::invalid_argument("policy: tabulated action has wrong dimension");
  }
  Policy p;
  p.impl_ = Tabulated{std::move(grid), std::move(actions)};
  p.bounds_ = std::move(bounds);
  return p;
}

int Policy::state_dim() const {
  if (const auto* m = std::get_if<Mlp>(&impl_)) return m->model.input_dim();
  if (const auto* t = std::get_if<Tabulated>(&impl_)) return t->grid->dims();
  return 0;
}

Eigen::VectorXd Policy::action(const Eigen::VectorXd& state) const {
  if (const auto* m = std::get_if<Mlp>(&impl_)) return bounds_.clip(m->model.forward(state));
  if (const auto* c = std::get_if<Constant>(&impl_)) return bounds_.clip(c->action);
  const auto& t = std::get<Tabulated>(impl_);
  if (state.size() != t.grid->dims()) throw std::invalid_argument("policy: state dimension mismatch");
  return bounds_.clip(tabulated_action(t, state));
}

Eigen::MatrixXd Policy::action_batch(const Eigen::MatrixXd& states) const {
  Eigen::MatrixXd a;
  if (const auto* m = std::get_if<Mlp>(&impl_)) {
    a = m->model.forward_batch(states);
  } else if (const auto* c = std::get_if<Constant>(&impl_)) {
    a = c->action.replicate(1, states.cols());
  } else {
    const auto& t = std::get<Tabulated>(impl_);
    a.resize(bounds_.dims(), states.cols());
    for (Eigen::Index k = 0; k < states.cols(); ++k) a.col(k) = tabulated_action(t, states.col(k));
  }
  bounds_.clip_columns(a);
  return a;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd true_land_rate(const Eigen::VectorXd& state, const Eigen::VectorXd& action) {
  if (state.size() != 2 || action.size() != 2) throw std::invalid_argument("true_land_rate: expects s=[x,y], a=[v,psi]");
  return Eigen::Vector2d(action[0] * std::cos(action[1]), action[0] * std::sin(action[1]));
}

Eigen::VectorXd true_air_rate(const Eigen::VectorXd& state, const Eigen::VectorXd& action) {
  if (state.size() != 3 || action.size() != 3) {
    throw std::invalid_argument("true_air_rate: expects s=[x,y,z], a=[v,psi,phi]");
  }
  const double v = action[0], psi = action[1], phi = action[2];
  return Eigen::Vector3d(v * std::cos(phi) * std::cos(psi), v * std::cos(phi) * std::sin(psi), v * std::sin(phi));
}

ClosedLoopSystem::ClosedLoopSystem(PlantKind plant, std::optional<MlpModel> model, Policy policy,
                                   DisturbanceBounds bounds)
    : plant_(plant), model_(std::move(model)), policy_(std::move(policy)), bounds_(std::move(bounds)) {
  switch (plant_) {
    case PlantKind::learned:
      if (!model_) throw std::invalid_argument("system: learned plant requires a model");
      state_dim_ = model_->meta().state_dim;
      if (model_->meta().action_dim != policy_.action_dim()) {
        throw std::invalid_argument("system: model action dimension does not match policy");
      }
      if (model_->input_dim() != state_dim_ + policy_.action_dim() || model_->output_dim() != state_dim_) {
        throw std::invalid_argument("system: model layout does not match its meta");
      }
      break;
    case PlantKind::true_land:
      state_dim_ = 2;
      if (policy_.action_dim() != 2) throw std::invalid_argument("system: land plant needs 2D actions");
      break;
    case PlantKind::true_air:
      state_dim_ = 3;
      if (policy_.action_dim() != 3) throw std::invalid_argument("system: air plant needs 3D actions");
      break;
  }
  if (policy_.state_dim() != 0 && policy_.state_dim() != state_dim_) {
    throw std::invalid_argument("system: policy state dimension does not match plant");
  }
  if (bounds_.dims() != state_dim_) throw std::invalid_argument("system: disturbance bounds dimension mismatch");
  bounds_.validate();
}

ClosedLoopSystem ClosedLoopSystem::learned(MlpModel model, Policy policy, DisturbanceBounds bounds) {
  return ClosedLoopSystem(PlantKind::learned, std::move(model), std::move(policy), std::move(bounds));
}

ClosedLoopSystem ClosedLoopSystem::true_land(Policy policy, DisturbanceBounds bounds) {
  return ClosedLoopSystem(PlantKind::true_land, std::nullopt, std::move(policy), std::move(bounds));
}

ClosedLoopSystem ClosedLoopSystem::true_air(Policy policy, DisturbanceBounds bounds) {
  return ClosedLoopSystem(PlantKind::true_air, std::nullopt, std::move(policy), std::move(bounds));
}

ClosedLoopSystem ClosedLoopSystem::with_bounds(DisturbanceBounds bounds) const {
  return ClosedLoopSystem(plant_, model_, policy_, std::move(bounds));
}

Eigen::VectorXd ClosedLoopSystem::plant_rate(const Eigen::VectorXd& state, const Eigen::VectorXd& action) const {
  switch (plant_) {
    case PlantKind::learned: {
      Eigen::VectorXd in(state.size() + action.size());
      in << state, action;
      return model_->forward(in) / model_->meta().dt_env;
    }
    case PlantKind::true_land:
      return true_land_rate(state, action);
    case PlantKind::true_air:
      return true_air_rate(state, action);
  }
  return {};
}

Eigen::VectorXd ClosedLoopSystem::nominal_rate(const Eigen::VectorXd& state) const {
  if (state.size() != state_dim_) throw std::invalid_argument("system: state dimension mismatch");
  if (!state.allFinite()) throw std::invalid_argument("system: non-finite state");
  return plant_rate(state, policy_.action(state));
}

Eigen::MatrixXd ClosedLoopSystem::nominal_rate_batch(const Eigen::MatrixXd& states) const {
  const Eigen::MatrixXd actions = policy_.action_batch(states);
  switch (plant_) {
    case PlantKind::learned: {
      Eigen::MatrixXd in(states.rows() + actions.rows(), states.cols());
      in.topRows(states.rows()) = states;
      in.bottomRows(actions.rows()) = actions;
      return model_->forward_batch(in) / model_->meta().dt_env;
    }
    case PlantKind::true_land: {
      Eigen::MatrixXd r(2, states.cols());
      r.row(0) = actions.row(0).array() * actions.row(1).array().cos();
      r.row(1) = actions.row(0).array() * actions.row(1).array().sin();
      return r;
    }
    case PlantKind::true_air: {
      Eigen::MatrixXd r(3, states.cols());
      const Eigen::ArrayXXd v = actions.row(0).array();
      const Eigen::ArrayXXd cphi = actions.row(2).array().cos();
      r.row(0) = v * cphi * actions.row(1).array().cos();
      r.row(1) = v * cphi * actions.row(1).array().sin();
      r.row(2) = v * actions.row(2).array().sin();
      return r;
    }
  }
  return {};
}

Eigen::VectorXd ClosedLoopSystem::rate(const Eigen::VectorXd& state, const Eigen::VectorXd& d) const {
  if (d.size() != state_dim_) throw std::invalid_argument("system: disturbance dimension mismatch");
  if (!bounds_.contains(d)) throw std::invalid_argument("system: disturbance outside the bounded error set");
  return nominal_rate(state) + d;
}

ClosedLoopSystem constant_rate_system(const Eigen::VectorXd& rate, DisturbanceBounds bounds, double dt_env) {
  const int n = static_cast<int>(rate.size());
  ModelMeta meta{n, 1, dt_env, "dynamics"};
  ActionBounds ab;
  ab.lower = Eigen::VectorXd::Zero(1);
  ab.upper = Eigen::VectorXd::Zero(1);
  return ClosedLoopSystem::learned(constant_output_model(rate * dt_env, meta), Policy::constant(Eigen::VectorXd::Zero(1), ab),
                                   std::move(bounds));
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json policy_to_json(const Policy& policy) {
  const ActionBounds& b = policy.bounds();
  if (const auto* m = std::get_if<Policy::Mlp>(&policy.impl())) {
    nlohmann::json j = model_to_json(m->model);
    j["meta"]["role"] = "policy";
    j["meta"]["action_lower"] = to_std(b.lower);
    j["meta"]["action_upper"] = to_std(b.upper);
    return j;
  }
  if (const auto* c = std::get_if<Policy::Constant>(&policy.impl())) {
    return {{"kind", "constant"}, {"action", to_std(c->action)}, {"lower", to_std(b.lower)}, {"upper", to_std(b.upper)}};
  }
  const auto& t = std::get<Policy::Tabulated>(policy.impl());
  nlohmann::json actions = nlohmann::json::array();
  for (const auto& a : t.actions) actions.push_back(to_std(a));
  return {{"kind", "tabulated"},
          {"grid", grid_to_json(*t.grid)},
          {"actions", actions},
          {"lower", to_std(b.lower)},
          {"upper", to_std(b.upper)}};
}

Policy policy_from_json(const nlohmann::json& j) {
  try {
    if (j.contains("kind")) {
      const std::string kind = j.at("kind").get<std::string>();
      ActionBounds b;
      if (kind == "constant") {
        const auto a = to_eigen(j.at("action").get<std::vector<double>>());
        b = j.contains("lower") ? ActionBounds{to_eigen(j.at("lower").get<std::vector<double>>()),
                                               to_eigen(j.at("upper").get<std::vector<double>>())}
                                : ActionBounds::defaults_for(static_cast<int>(a.size()));
        return Policy::constant(a, b);
      }
      if (kind == "tabulated") {
        GridPtr g = grid_from_json(j.at("grid"));
        std::vector<Eigen::VectorXd> actions;
        for (const auto& a : j.at("actions")) actions.push_back(to_eigen(a.get<std::vector<double>>()));
        if (actions.empty()) throw FormatError("policy: tabulated policy without actions");
        b = j.contains("lower") ? ActionBounds{to_eigen(j.at("lower").get<std::vector<double>>()),
                                               to_eigen(j.at("upper").get<std::vector<double>>())}
                                : ActionBounds::defaults_for(static_cast<int>(actions.front().size()));
        return Policy::tabulated(std::move(g), std::move(actions), b);
      }
      throw FormatError("policy: unknown kind '" + kind + "'");
    }
    MlpModel model = model_from_json(j);
    model.meta().role = "policy";
    const auto& meta = j.at("meta");
    ActionBounds b = meta.contains("action_lower")
                         ? ActionBounds{to_eigen(meta.at("action_lower").get<std::vector<double>>()),
                                        to_eigen(meta.at("action_upper").get<std::vector<double>>())}
                         : ActionBounds::defaults_for(model.output_dim());
    return Policy::mlp(std::move(model), std::move(b));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("policy: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("policy: ") + e.what());
  }
}

void save_policy(const Policy& policy, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << policy_to_json(policy).dump(1) << '\n';
}

Policy load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("policy: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("policy: " + path.string() + ": " + e.what());
  }
  return policy_from_json(j);
}

}  // namespace nnreach
