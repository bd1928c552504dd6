#pragma once

// Quantile regression forest: bagged CART trees whose leaves keep every
// training target, so a prediction is a quantile of the weighted targets of
// the leaves an input falls into.

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "mcsadapt/matrix.hpp"
#include "mcsadapt/regress/loss.hpp"
#include "mcsadapt/regress/tree.hpp"

namespace mcsadapt::regress {

struct QrfParams {
  int n_trees = 100;
  int max_depth = 12;
  int min_leaf = 5;
  int mtry = 0;  // 0 = max(1, d / 3)
  bool bootstrap = true;
};

struct QrfModel {
  std::vector<RegressionTree> trees;
  /// Per tree, per leaf: sorted training targets (with bootstrap multiplicity).
  std::vector<std::vector<std::vector<double>>> leaf_targets;

  /// Conditional tau-quantile: each tree carries weight 1/n_trees spread
  /// evenly over its leaf targets. Throws DomainError unless tau in (0, 1).
  double predict_quantile(std::span<const double> x, double tau) const;
  /// Mean of the same weighted distribution (regular random forest).
  double predict_mean(std::span<const double> x) const;
  double predict(std::span<const double> x, const LossMode& loss) const;
};

/// Trees are grown in parallel; each tree's RNG derives from `seed` and its
/// index, so the model does not depend on `threads`.
QrfModel fit_qrf(const FeatureMatrix& data, const QrfParams& params, std::uint64_t seed,
                 unsigned threads = 1);

nlohmann::json to_json(const QrfModel& m);
QrfModel qrf_from_json(const nlohmann::json& j);

}  // namespace mcsadapt::regress
