#include "mcsadapt/regress/model.hpp"

#include <fstream>

#include "mcsadapt/error.hpp"

namespace mcsadapt::regress {

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kLinear: return "linear";
    case ModelKind::kQrf: return "qrf";
    case ModelKind::kGbt: return "gbt";
    case ModelKind::kMlp: return "mlp";
  }
  return "gbt";
}

ModelKind model_kind_from_string(std::string_view s) {
  if (s == "linear") return ModelKind::kLinear;
  if (s == "qrf") return ModelKind::kQrf;
  if (s == "gbt") return ModelKind::kGbt;
  if (s == "mlp") return ModelKind::kMlp;
  throw ConfigError("unknown model kind '" + std::string(s) + "'");
}

ModelConfig ModelConfig::defaults(ModelKind kind, LossMode loss) {
  ModelConfig c;
  c.kind = kind;
  c.loss = loss;
  switch (kind) {
    case ModelKind::kLinear: c.params = LinearParams{}; break;
    case ModelKind::kQrf: c.params = QrfParams{}; break;
    case ModelKind::kGbt: c.params = GbtParams{}; break;
    case ModelKind::kMlp: c.params = MlpParams{}; break;
  }
  return c;
}

namespace {

nlohmann::json params_json(const ModelConfig& c) {
  return std::visit(
      [](const auto& p) -> nlohmann::json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LinearParams>) {
          return {{"epochs", p.sgd.epochs}, {"lr0", p.sgd.lr0}, {"decay", p.sgd.decay}};
        } else if constexpr (std::is_same_v<T, QrfParams>) {
          return {{"n_trees", p.n_trees},   {"max_depth", p.max_depth},
                  {"min_leaf", p.min_leaf}, {"mtry", p.mtry},
                  {"bootstrap", p.bootstrap}};
        } else if constexpr (std::is_same_v<T, GbtParams>) {
          return {{"n_rounds", p.n_rounds},   {"learning_rate", p.learning_rate},
                  {"max_depth", p.max_depth}, {"min_leaf", p.min_leaf},
                  {"subsample", p.subsample}};
        } else {
          return {{"layers", p.layers},
                  {"activation", std::string(to_string(p.activation))},
                  {"l1", p.l1},
                  {"l2", p.l2},
                  {"adam",
                   {{"alpha", p.adam.alpha},
                    {"beta1", p.adam.beta1},
                    {"beta2", p.adam.beta2},
                    {"epsilon", p.adam.epsilon}}},
                  {"epochs", p.epochs},
                  {"batch_size", p.batch_size}};
        }
      },
      c.params);
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

nlohmann::json to_json(const ModelConfig& c) {
  return {{"kind", std::string(to_string(c.kind))}, {"loss", to_json(c.loss)},
          {"params", params_json(c)}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  try {
    const ModelKind kind = model_kind_from_string(j.at("kind").get<std::string>());
    const LossMode loss = j.contains("loss") ? loss_from_json(j.at("loss")) : LossMode::mse();
    ModelConfig c = ModelConfig::defaults(kind, loss);
    const nlohmann::json p = j.value("params", nlohmann::json::object());
    switch (kind) {
      case ModelKind::kLinear: {
        auto& lp = std::get<LinearParams>(c.params);
        read(p, "epochs", lp.sgd.epochs);
        read(p, "lr0", lp.sgd.lr0);
        read(p, "decay", lp.sgd.decay);
        break;
      }
      case ModelKind::kQrf: {
        auto& qp = std::get<QrfParams>(c.params);
        read(p, "n_trees", qp.n_trees);
        read(p, "max_depth", qp.max_depth);
        read(p, "min_leaf", qp.min_leaf);
        read(p, "mtry", qp.mtry);
        read(p, "bootstrap", qp.bootstrap);
        break;
      }
      case ModelKind::kGbt: {
        auto& gp = std::get<GbtParams>(c.params);
        read(p, "n_rounds", gp.n_rounds);
        read(p, "learning_rate", gp.learning_rate);
        read(p, "max_depth", gp.max_depth);
        read(p, "min_leaf", gp.min_leaf);
        read(p, "subsample", gp.subsample);
        break;
      }
      case ModelKind::kMlp: {
        auto& mp = std::get<MlpParams>(c.params);
        read(p, "layers", mp.layers);
        if (p.contains("activation")) {
          mp.activation = activation_from_string(p.at("activation").get<std::string>());
        }
        read(p, "l1", mp.l1);
        read(p, "l2", mp.l2);
        read(p, "epochs", mp.epochs);
        read(p, "batch_size", mp.batch_size);
        if (p.contains("adam")) {
          const auto& a = p.at("adam");
          read(a, "alpha", mp.adam.alpha);
          read(a, "beta1", mp.adam.beta1);
          read(a, "beta2", mp.adam.beta2);
          read(a, "epsilon", mp.adam.epsilon);
        }
        break;
      }
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
}

TrainedModel fit(const ModelConfig& config, const FeatureMatrix& train, std::uint64_t seed,
                 unsigned threads) {
  train.validate();
  TrainedModel m;
  m.config = config;
  m.seed = seed;
  m.input_dim = train.d();

  auto standardized = [&]() {
    m.standardization = Standardizer::fit(train.x);
    return FeatureMatrix{m.standardization->transform(train.x), train.y};
  };

  switch (config.kind) {
    case ModelKind::kLinear: {
      const auto& lp = std::get<LinearParams>(config.params);
      if (config.loss.kind == LossMode::Kind::kMse) {
        m.params = fit_linear_ols(train);
      } else {
        const double tau =
            config.loss.kind == LossMode::Kind::kQuantile ? config.loss.tau : 0.5;
        m.params = fit_linear_sgd_quantile(standardized(), tau, lp.sgd, seed);
      }
      break;
    }
    case ModelKind::kQrf:
      m.params = fit_qrf(train, std::get<QrfParams>(config.params), seed, threads);
      break;
    case ModelKind::kGbt:
      m.params = fit_gbt(train, config.loss, std::get<GbtParams>(config.params), seed);
      break;
    case ModelKind::kMlp:
      m.params = fit_mlp(standardized(), config.loss, std::get<MlpParams>(config.params), seed);
      break;
  }
  return m;
}

std::vector<double> predict(const TrainedModel& model, const Matrix& rows) {
  if (rows.cols() != model.input_dim && rows.rows() > 0) {
    throw ContractError("predict: model expects " + std::to_string(model.input_dim) +
                        " features, got " + std::to_string(rows.cols()));
  }
  std::vector<double> out(rows.rows());
  std::vector<double> buf(model.input_dim);
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    std::span<const double> x = rows.row(r);
    if (model.standardization) {
      model.standardization->transform_row(x, buf);
      x = buf;
    }
    out[r] = std::visit(
        [&](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, QrfModel>) {
            return p.predict(x, model.config.loss);
          } else if constexpr (std::is_same_v<T, Mlp>) {
            return p.forward(x);
          } else {
            return p.predict(x);
          }
        },
        model.params);
  }
  return out;
}

nlohmann::json to_json(const TrainedModel& model) {
  nlohmann::json j = {{"version", TrainedModel::kFormatVersion},
                      {"config", to_json(model.config)},
                      {"seed", model.seed},
                      {"input_dim", model.input_dim},
                      {"feature_names", model.feature_names}};
  j["standardization"] =
      model.standardization ? to_json(*model.standardization) : nlohmann::json(nullptr);
  j["parameters"] = std::visit(
      [](const auto& p) -> nlohmann::json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Mlp>) {
          return p.to_json();
        } else {
          return to_json(p);
        }
      },
      model.params);
  return j;
}

TrainedModel model_from_json(const nlohmann::json& j) {
  try {
    if (!j.contains("version")) throw DataError("model file: missing version");
    const int version = j.at("version").get<int>();
    if (version != TrainedModel::kFormatVersion) {
      throw DataError("model file: unsupported version " + std::to_string(version));
    }
    TrainedModel m;
    m.config = model_config_from_json(j.at("config"));
    m.seed = j.at("seed").get<std::uint64_t>();
    m.input_dim = j.at("input_dim").get<std::size_t>();
    m.feature_names = j.value("feature_names", std::vector<std::string>{});
    if (!j.at("standardization").is_null()) {
      m.standardization = standardizer_from_json(j.at("standardization"));
    }
    const auto& p = j.at("parameters");
    switch (m.config.kind) {
      case ModelKind::kLinear: m.params = linear_from_json(p); break;
      case ModelKind::kQrf: m.params = qrf_from_json(p); break;
      case ModelKind::kGbt: m.params = gbt_from_json(p); break;
      case ModelKind::kMlp: m.params = Mlp::from_json(p); break;
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
}

void save_model(const std::string& path, const TrainedModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write model file: " + path);
  out << to_json(model).dump() << '\n';
}

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  return model_from_json(j);
}

}  // namespace mcsadapt::regress
