#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "mcsadapt/matrix.hpp"

namespace mcsadapt::regress {

struct LinearModel {
  double intercept = 0.0;
  std::vector<double> coef;

  double predict(std::span<const double> x) const;
};

/// Least squares with an intercept via the normal equations. A ridge jitter
/// of 1e-9 is added when the Gram matrix is rank deficient; throws
/// NumericalError naming the dependent columns if that does not help.
LinearModel fit_linear_ols(const FeatureMatrix& data);

/// Inverse-time learning-rate decay per epoch: lr0 / (1 + decay * epoch).
struct SgdParams {
  int epochs = 30;
  double lr0 = 0.05;
  double decay = 0.1;
};

/// Per-sample subgradient descent on the mean pinball loss. Expects
/// standardized features. Starts from intercept = mean target, zero slopes.
/// Throws TrainingError if the loss becomes non-finite.
LinearModel fit_linear_sgd_quantile(const FeatureMatrix& data, double tau,
                                    const SgdParams& params, std::uint64_t seed);

nlohmann::json to_json(const LinearModel& m);
LinearModel linear_from_json(const nlohmann::json& j);

}  // namespace mcsadapt::regress
