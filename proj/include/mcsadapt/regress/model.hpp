#pragma once

// Uniform training and inference interface over the four regressor kinds,
// plus the self-describing model file.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mcsadapt/matrix.hpp"
#include "mcsadapt/regress/gbt.hpp"
#include "mcsadapt/regress/linear.hpp"
#include "mcsadapt/regress/loss.hpp"
#include "mcsadapt/regress/mlp.hpp"
#include "mcsadapt/regress/qrf.hpp"
#include "mcsadapt/regress/standardizer.hpp"

namespace mcsadapt::regress {

enum class ModelKind { kLinear, kQrf, kGbt, kMlp };

std::string_view to_string(ModelKind k);
/// Accepts linear|qrf|gbt|mlp. Throws ConfigError otherwise.
ModelKind model_kind_from_string(std::string_view s);

/// Linear regression uses ordinary least squares for MSE and SGD on the
/// pinball loss otherwise (tau = 0.5 for MAE).
struct LinearParams {
  SgdParams sgd;
};

struct ModelConfig {
  ModelKind kind = ModelKind::kGbt;
  LossMode loss = LossMode::mse();
  std::variant<LinearParams, QrfParams, GbtParams, MlpParams> params = GbtParams{};

  static ModelConfig defaults(ModelKind kind, LossMode loss);
};

nlohmann::json to_json(const ModelConfig& c);
/// Missing hyperparameters take their defaults. Throws ConfigError.
ModelConfig model_config_from_json(const nlohmann::json& j);

struct TrainedModel {
  static constexpr int kFormatVersion = 1;

  ModelConfig config;
  std::optional<Standardizer> standardization;
  std::uint64_t seed = 0;
  std::size_t input_dim = 0;
  std::vector<std::string> feature_names;
  std::variant<LinearModel, QrfModel, GbtModel, Mlp> params;

  ModelKind kind() const noexcept { return config.kind; }
  const LossMode& loss() const noexcept { return config.loss; }
};

/// Standardization statistics come from `train` only.
TrainedModel fit(const ModelConfig& config, const FeatureMatrix& train, std::uint64_t seed,
                 unsigned threads = 1);

/// Throws ContractError when the column count differs from training.
std::vector<double> predict(const TrainedModel& model, const Matrix& rows);

nlohmann::json to_json(const TrainedModel& model);
/// Throws DataError on a missing or unsupported version.
TrainedModel model_from_json(const nlohmann::json& j);
void save_model(const std::string& path, const TrainedModel& model);
TrainedModel load_model(const std::string& path);

}  // namespace mcsadapt::regress
