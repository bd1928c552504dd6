#include "mcsadapt/regress/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mcsadapt/error.hpp"

namespace mcsadapt::regress {

namespace {

void check_tau_open(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw DomainError("quantile tau must lie in (0, 1), got " + std::to_string(tau));
  }
}

// Relative slack so that e.g. ten weights of 0.1 reach tau = 0.1 after one
// step despite rounding.
constexpr double kCdfSlack = 1e-12;

}  // namespace

double pinball_loss(double y, double yhat, double tau) {
  check_tau_open(tau);
  return y >= yhat ? tau * (y - yhat) : (1.0 - tau) * (yhat - y);
}

double weighted_quantile(std::span<const double> values, std::span<const double> weights,
                         double tau) {
  if (values.empty()) throw ContractError("weighted_quantile: empty input");
  if (values.size() != weights.size()) {
    throw ContractError("weighted_quantile: values and weights differ in length");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("weighted_quantile: tau outside [0, 1]");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ContractError("weighted_quantile: negative weight");
    total += w;
  }
  if (!(total > 0.0)) throw ContractError("weighted_quantile: zero total weight");
  const double goal = tau * total * (1.0 - kCdfSlack);
  double cum = 0.0;
  for (std::size_t i : order) {
    cum += weights[i];
    if (weights[i] > 0.0 && cum >= goal) return values[i];
  }
  // only reachable through rounding at tau = 1
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (weights[*it] > 0.0) return values[*it];
  }
  return values[order.back()];
}

double empirical_quantile(std::span<const double> values, double tau) {
  if (values.empty()) throw ContractError("empirical_quantile: empty input");
  if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("empirical_quantile: tau outside [0, 1]");
  std::vector<double> v(values.begin(), values.end());
  const double n = static_cast<double>(v.size());
  auto k = static_cast<std::size_t>(std::ceil(tau * n * (1.0 - kCdfSlack)));
  k = std::clamp<std::size_t>(k, 1, v.size());
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end());
  return v[k - 1];
}

double mean(std::span<const double> values) {
  if (values.empty()) throw ContractError("mean: empty input");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

LossMode LossMode::quantile(double tau) {
  check_tau_open(tau);
  return {Kind::kQuantile, tau};
}

double LossMode::value(double y, double yhat) const {
  switch (kind) {
    case Kind::kQuantile: return pinball_loss(y, yhat, tau);
    case Kind::kMse: return (y - yhat) * (y - yhat);
    case Kind::kMae: return std::abs(y - yhat);
  }
  return 0.0;
}

double LossMode::gradient(double y, double yhat) const {
  switch (kind) {
    case Kind::kQuantile: return y > yhat ? -tau : 1.0 - tau;
    case Kind::kMse: return 2.0 * (yhat - y);
    case Kind::kMae: return y > yhat ? -1.0 : 1.0;
  }
  return 0.0;
}

double LossMode::optimal_constant(std::vector<double> values) const {
  switch (kind) {
    case Kind::kQuantile: return empirical_quantile(values, tau);
    case Kind::kMse: return mean(values);
    case Kind::kMae: return empirical_quantile(values, 0.5);
  }
  return 0.0;
}

std::string LossMode::name() const {
  switch (kind) {
    case Kind::kQuantile: return "quantile";
    case Kind::kMse: return "mse";
    case Kind::kMae: return "mae";
  }
  return "mse";
}

nlohmann::json to_json(const LossMode& loss) {
  nlohmann::json j = {{"kind", loss.name()}};
  if (loss.kind == LossMode::Kind::kQuantile) j["tau"] = loss.tau;
  return j;
}

LossMode loss_from_json(const nlohmann::json& j) {
  const std::string kind = j.is_string() ? j.get<std::string>() : j.value("kind", "");
  if (kind == "mse") return LossMode::mse();
  if (kind == "mae") return LossMode::mae();
  if (kind == "quantile") {
    const double tau = j.is_object() ? j.value("tau", 0.5) : 0.5;
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("loss tau must lie in (0, 1)");
    return LossMode::quantile(tau);
  }
  throw ConfigError("unknown loss kind '" + kind + "'");
}

}  // namespace mcsadapt::regress
