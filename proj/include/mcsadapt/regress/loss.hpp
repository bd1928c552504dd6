#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace mcsadapt::regress {

/// Pinball (quantile) loss: tau*(y - yhat) if y >= yhat, else
/// (1 - tau)*(yhat - y). Throws DomainError unless tau in (0, 1).
double pinball_loss(double y, double yhat, double tau);

/// Smallest value whose normalized cumulative weight reaches tau.
/// Throws ContractError on empty input, mismatched lengths, negative weights
/// or zero total weight; DomainError unless tau in [0, 1].
double weighted_quantile(std::span<const double> values, std::span<const double> weights,
                         double tau);

/// Unweighted step-convention quantile.
double empirical_quantile(std::span<const double> values, double tau);

double mean(std::span<const double> values);

struct LossMode {
  enum class Kind { kQuantile, kMse, kMae };

  Kind kind = Kind::kMse;
  double tau = 0.5;

  static LossMode quantile(double tau);
  static LossMode mse() { return {Kind::kMse, 0.5}; }
  static LossMode mae() { return {Kind::kMae, 0.5}; }

  /// Quantile: pinball; MSE: (y - yhat)^2; MAE: |y - yhat|.
  double value(double y, double yhat) const;

  /// d value / d yhat. At the kink the y < yhat branch is taken.
  double gradient(double y, double yhat) const;

  /// Constant minimizing the summed loss over `values` (quantile tau, mean or
  /// median). Takes a copy; the input is reordered.
  double optimal_constant(std::vector<double> values) const;

  std::string name() const;
};

nlohmann::json to_json(const LossMode& loss);
/// Throws ConfigError on unknown kinds or tau outside (0, 1).
LossMode loss_from_json(const nlohmann::json& j);

}  // namespace mcsadapt::regress
