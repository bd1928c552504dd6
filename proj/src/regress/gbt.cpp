#include "mcsadapt/regress/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mcsadapt/error.hpp"
#include "mcsadapt/random.hpp"

namespace mcsadapt::regress {

double GbtModel::predict(std::span<const double> x) const {
  double y = base;
  for (std::size_t t = 0; t < trees.size(); ++t) {
    y += leaf_values[t][static_cast<std::size_t>(trees[t].leaf_of(x))];
  }
  return y;
}

namespace {

// Pseudo-residual for tree structure: the quantile case uses +tau where
// y >= yhat.
double negative_gradient(const LossMode& loss, double y, double yhat) {
  switch (loss.kind) {
    case LossMode::Kind::kQuantile: return y >= yhat ? loss.tau : -(1.0 - loss.tau);
    case LossMode::Kind::kMse: return y - yhat;
    case LossMode::Kind::kMae: return y > yhat ? 1.0 : (y < yhat ? -1.0 : 0.0);
  }
  return 0.0;
}

}  // namespace

GbtModel fit_gbt(const FeatureMatrix& data, const LossMode& loss, const GbtParams& params,
                 std::uint64_t seed, const RoundObserver& on_round) {
  data.validate();
  if (params.n_rounds < 0) throw ConfigError("GBT: n_rounds must be >= 0");
  if (!(params.learning_rate > 0.0 && params.learning_rate <= 1.0)) {
    throw ConfigError("GBT: learning_rate must lie in (0, 1]");
  }
  if (!(params.subsample > 0.0 && params.subsample <= 1.0)) {
    throw ConfigError("GBT: subsample must lie in (0, 1]");
  }
  if (params.max_depth < 0 || params.min_leaf < 1) {
    throw ConfigError("GBT: max_depth >= 0 and min_leaf >= 1 required");
  }
  const std::size_t n = data.n();
  GbtModel model;
  model.base = loss.optimal_constant(data.y);
  std::vector<double> pred(n, model.base);
  std::vector<double> grad(n);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  const TreeParams tp{params.max_depth, params.min_leaf, 0};
  const auto sample_size = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(params.subsample * static_cast<double>(n))));

  for (int round = 0; round < params.n_rounds; ++round) {
    Rng rng(derive_seed(seed, "gbt-round", static_cast<std::uint64_t>(round)));
    std::vector<std::size_t> rows = all;
    if (sample_size < n) {
      for (std::size_t i = 0; i < sample_size; ++i) {
        std::swap(rows[i], rows[i + uniform_index(rng, n - i)]);
      }
      rows.resize(sample_size);
      std::sort(rows.begin(), rows.end());
    }
    for (std::size_t r : rows) grad[r] = negative_gradient(loss, data.y[r], pred[r]);
    GrownTree grown = grow_tree(data.x, grad, rows, tp, rng);

    std::vector<double> values(grown.leaf_rows.size());
    std::vector<double> residuals;
    for (std::size_t l = 0; l < values.size(); ++l) {
      residuals.clear();
      for (std::size_t r : grown.leaf_rows[l]) residuals.push_back(data.y[r] - pred[r]);
      values[l] = params.learning_rate * loss.optimal_constant(residuals);
    }
    for (std::size_t r = 0; r < n; ++r) {
      pred[r] += values[static_cast<std::size_t>(grown.tree.leaf_of(data.x.row(r)))];
    }
    model.trees.push_back(std::move(grown.tree));
    model.leaf_values.push_back(std::move(values));
    if (on_round) on_round(round, pred);
  }
  return model;
}

nlohmann::json to_json(const GbtModel& m) {
  nlohmann::json trees = nlohmann::json::array();
  for (std::size_t t = 0; t < m.trees.size(); ++t) {
    auto j = to_json(m.trees[t]);
    j["leaf_values"] = m.leaf_values[t];
    trees.push_back(std::move(j));
  }
  return {{"base", m.base}, {"trees", trees}};
}

GbtModel gbt_from_json(const nlohmann::json& j) {
  GbtModel m;
  m.base = j.at("base").get<double>();
  for (const auto& t : j.at("trees")) {
    m.trees.push_back(tree_from_json(t));
    m.leaf_values.push_back(t.at("leaf_values").get<std::vector<double>>());
    if (m.leaf_values.back().size() != m.trees.back().leaf_count()) {
      throw DataError("GBT: leaf count mismatch");
    }
  }
  return m;
}

}  // namespace mcsadapt::regress
