#pragma once

// Fully connected feed-forward network with a single linear output, trained
// by backpropagation and Adam.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mcsadapt/matrix.hpp"
#include "mcsadapt/random.hpp"
#include "mcsadapt/regress/loss.hpp"

namespace mcsadapt::regress {

enum class Activation { kRelu, kTanh, kSigmoid };

std::string_view to_string(Activation a);
/// Throws ConfigError for unknown names.
Activation activation_from_string(std::string_view s);

struct AdamParams {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(std::size_t n, AdamParams params) : params_(params), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> weights, std::span<const double> grad);

 private:
  AdamParams params_;
  std::vector<double> m_;
  std::vector<double> v_;
  long long t_ = 0;
};

class Mlp {
 public:
  Mlp() = default;
  /// `hidden` may be empty, which yields a linear model.
  Mlp(std::size_t inputs, std::vector<int> hidden, Activation activation);

  /// Uniform He (ReLU) or Glorot (tanh, sigmoid) weights, zero biases.
  void initialize(Rng& rng);

  double forward(std::span<const double> x) const;

  /// Mean loss over `rows` plus l1*sum|w| + l2*sum w^2 over weights (biases
  /// excluded); writes d/dparams into `grad`.
  double loss_and_gradient(const Matrix& x, std::span<const double> y,
                           std::span<const std::size_t> rows, const LossMode& loss, double l1,
                           double l2, std::vector<double>& grad) const;

  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }
  double& output_bias() { return params_.back(); }

  std::size_t inputs() const noexcept { return sizes_.empty() ? 0 : sizes_.front(); }
  const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
  Activation activation() const noexcept { return activation_; }

  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& j);

 private:
  double activate(double z) const;
  double activate_derivative(double z, double a) const;
  void build_offsets();

  std::vector<std::size_t> sizes_;  // inputs, hidden..., 1
  Activation activation_ = Activation::kRelu;
  std::vector<double> params_;
  std::vector<std::size_t> weight_offset_;
  std::vector<std::size_t> bias_offset_;
};

struct MlpParams {
  std::vector<int> layers = {64, 64};
  Activation activation = Activation::kRelu;
  double l1 = 0.0;
  double l2 = 0.0;
  AdamParams adam;
  int epochs = 30;
  int batch_size = 128;
};

/// Expects standardized features. The output bias starts at the loss-optimal
/// constant of the targets. Throws TrainingError when the loss turns NaN.
Mlp fit_mlp(const FeatureMatrix& data, const LossMode& loss, const MlpParams& params,
            std::uint64_t seed);

}  // namespace mcsadapt::regress
