#include "nnreach/model_io.hpp"

#include <fstream>
#include <stdexcept>

#include "nnreach/errors.hpp"

namespace nnreach {

nlohmann::json model_to_json(const MlpModel& model) {
  nlohmann::json j;
  j["layer_sizes"] = model.layer_sizes();
  j["hidden_activation"] = to_string(model.hidden_activation());
  j["output_activation"] = to_string(model.output_activation());
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (int l = 0; l < model.num_layers(); ++l) {
    const Eigen::MatrixXd& w = model.weights(l);
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      std::vector<double> row(w.cols());
      for (Eigen::Index c = 0; c < w.cols(); ++c) row[c] = w(r, c);
      rows.push_back(row);
    }
    weights.push_back(rows);
    const Eigen::VectorXd& b = model.biases(l);
    biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  }
  j["weights"] = weights;
  j["biases"] = biases;
  const Eigen::VectorXd& s = model.output_scale();
  j["output_scale"] = std::vector<double>(s.data(), s.data() + s.size());
  const ModelMeta& m = model.meta();
  j["meta"] = {{"n", m.state_dim}, {"m", m.action_dim}, {"dt_env", m.dt_env}, {"role", m.role}};
  return j;
}

MlpModel model_from_json(const nlohmann::json& j) {
  try {
    const auto sizes = j.at("layer_sizes").get<std::vector<int>>();
    const auto& jm = j.at("meta");
    ModelMeta meta{jm.at("n").get<int>(), jm.at("m").get<int>(), jm.at("dt_env").get<double>(),
                   jm.value("role", std::string("dynamics"))};
    const auto scale = j.at("output_scale").get<std::vector<double>>();
    MlpModel model(sizes, activation_from_string(j.at("hidden_activation").get<std::string>()),
                   activation_from_string(j.at("output_activation").get<std::string>()),
                   Eigen::Map<const Eigen::VectorXd>(scale.data(), static_cast<Eigen::Index>(scale.size())), meta);
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (weights.size() != static_cast<std::size_t>(model.num_layers()) ||
        biases.size() != static_cast<std::size_t>(model.num_layers())) {
      throw FormatError("model: number of weight/bias arrays does not match layer_sizes");
    }
    for (int l = 0; l < model.num_layers(); ++l) {
      Eigen::MatrixXd& w = model.weights(l);
      const auto& rows = weights[l];
      if (rows.size() != static_cast<std::size_t>(w.rows())) {
        throw FormatError("model: layer " + std::to_string(l) + " weight rows disagree with layer_sizes");
      }
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        const auto row = rows[r].get<std::vector<double>>();
        if (row.size() != static_cast<std::size_t>(w.cols())) {
          throw FormatError("model: layer " + std::to_string(l) + " weight columns disagree with layer_sizes");
        }
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = row[c];
      }
      const auto b = biases[l].get<std::vector<double>>();
      if (b.size() != static_cast<std::size_t>(model.biases(l).size())) {
        throw FormatError("model: layer " + std::to_string(l) + " bias length disagrees with layer_sizes");
      }
      model.biases(l) = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    }
    if (sizes.front() != meta.input_dim() || sizes.back() != meta.output_dim()) {
      throw FormatError("model: layer_sizes do not match meta input/output layout");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("model: ") + e.what());
  }
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << model_to_json(model).dump(1) << '\n';
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("model: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("model: " + path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace nnreach
