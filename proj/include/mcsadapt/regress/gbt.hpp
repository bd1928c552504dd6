#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

#include "mcsadapt/matrix.hpp"
#include "mcsadapt/regress/loss.hpp"
#include "mcsadapt/regress/tree.hpp"

namespace mcsadapt::regress {

struct GbtParams {
  int n_rounds = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  int min_leaf = 1;
  double subsample = 1.0;
};

struct GbtModel {
  double base = 0.0;
  std::vector<RegressionTree> trees;
  /// Per tree, per leaf: the already shrunk additive update.
  std::vector<std::vector<double>> leaf_values;

  double predict(std::span<const double> x) const;
};

/// Gradient boosting. Stage 0 is the loss-optimal constant; each round fits a
/// tree to the negative gradients and then replaces every leaf by the
/// loss-optimal constant of the residuals it holds, shrunk by learning_rate.
/// `on_round(round, predictions)` observes the training fit after each round.
using RoundObserver = std::function<void(int, std::span<const double>)>;

GbtModel fit_gbt(const FeatureMatrix& data, const LossMode& loss, const GbtParams& params,
                 std::uint64_t seed, const RoundObserver& on_round = {});

nlohmann::json to_json(const GbtModel& m);
GbtModel gbt_from_json(const nlohmann::json& j);

}  // namespace mcsadapt::regress
