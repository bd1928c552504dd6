#include "mcsadapt/regress/qrf.hpp"

#include <algorithm>
#include <numeric>

#include "mcsadapt/error.hpp"
#include "mcsadapt/parallel.hpp"
#include "mcsadapt/random.hpp"

namespace mcsadapt::regress {

double QrfModel::predict_quantile(std::span<const double> x, double tau) const {
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("QRF: tau must lie in (0, 1)");
  std::vector<double> values, weights;
  const double tree_weight = 1.0 / static_cast<double>(trees.size());
  for (std::size_t t = 0; t < trees.size(); ++t) {
    const auto& leaf = leaf_targets[t][static_cast<std::size_t>(trees[t].leaf_of(x))];
    const double w = tree_weight / static_cast<double>(leaf.size());
    for (double v : leaf) {
      values.push_back(v);
      weights.push_back(w);
    }
  }
  return weighted_quantile(values, weights, tau);
}

double QrfModel::predict_mean(std::span<const double> x) const {
  double sum = 0.0;
  for (std::size_t t = 0; t < trees.size(); ++t) {
    const auto& leaf = leaf_targets[t][static_cast<std::size_t>(trees[t].leaf_of(x))];
    sum += std::accumulate(leaf.begin(), leaf.end(), 0.0) / static_cast<double>(leaf.size());
  }
  return sum / static_cast<double>(trees.size());
}

double QrfModel::predict(std::span<const double> x, const LossMode& loss) const {
  switch (loss.kind) {
    case LossMode::Kind::kQuantile: return predict_quantile(x, loss.tau);
    case LossMode::Kind::kMae: return predict_quantile(x, 0.5);
    case LossMode::Kind::kMse: return predict_mean(x);
  }
  return 0.0;
}

QrfModel fit_qrf(const FeatureMatrix& data, const QrfParams& params, std::uint64_t seed,
                 unsigned threads) {
  data.validate();
  if (params.n_trees < 1) throw ConfigError("QRF: n_trees must be >= 1");
  if (params.min_leaf < 1) throw ConfigError("QRF: min_leaf must be >= 1");
  if (params.mtry < 0 || static_cast<std::size_t>(params.mtry) > data.d()) {
    throw ConfigError("QRF: mtry " + std::to_string(params.mtry) + " exceeds " +
                      std::to_string(data.d()) + " features");
  }
  if (data.n() < static_cast<std::size_t>(params.min_leaf)) {
    throw ContractError("QRF: fewer samples than min_leaf");
  }
  TreeParams tp;
  tp.max_depth = params.max_depth;
  tp.min_leaf = params.min_leaf;
  tp.mtry = params.mtry == 0 ? static_cast<int>(std::max<std::size_t>(1, data.d() / 3))
                             : params.mtry;

  QrfModel model;
  model.trees.resize(static_cast<std::size_t>(params.n_trees));
  model.leaf_targets.resize(model.trees.size());
  parallel_for(model.trees.size(), threads, [&](std::size_t t) {
    Rng rng(derive_seed(seed, "qrf-tree", t));
    std::vector<std::size_t> rows(data.n());
    if (params.bootstrap) {
      for (auto& r : rows) r = uniform_index(rng, data.n());
      std::sort(rows.begin(), rows.end());
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    GrownTree grown = grow_tree(data.x, data.y, rows, tp, rng);
    auto& leaves = model.leaf_targets[t];
    leaves.resize(grown.leaf_rows.size());
    for (std::size_t l = 0; l < leaves.size(); ++l) {
      for (std::size_t r : grown.leaf_rows[l]) leaves[l].push_back(data.y[r]);
      std::sort(leaves[l].begin(), leaves[l].end());
    }
    model.trees[t] = std::move(grown.tree);
  });
  return model;
}

nlohmann::json to_json(const QrfModel& m) {
  nlohmann::json trees = nlohmann::json::array();
  for (std::size_t t = 0; t < m.trees.size(); ++t) {
    auto j = to_json(m.trees[t]);
    j["leaf_targets"] = m.leaf_targets[t];
    trees.push_back(std::move(j));
  }
  return {{"trees", trees}};
}

QrfModel qrf_from_json(const nlohmann::json& j) {
  QrfModel m;
  for (const auto& t : j.at("trees")) {
    m.trees.push_back(tree_from_json(t));
    m.leaf_targets.push_back(t.at("leaf_targets").get<std::vector<std::vector<double>>>());
    if (m.leaf_targets.back().size() != m.trees.back().leaf_count()) {
      throw DataError("QRF: leaf count mismatch");
    }
  }
  if (m.trees.empty()) throw DataError("QRF: no trees");
  return m;
}

}  // namespace mcsadapt::regress
