#include "mcsadapt/regress/tree.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

#include "mcsadapt/error.hpp"

namespace mcsadapt::regress {

RegressionTree::RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  for (const auto& n : nodes_) {
    if (n.feature < 0) ++leaf_count_;
  }
}

int RegressionTree::leaf_of(std::span<const double> x) const {
  int i = 0;
  while (nodes_[i].feature >= 0) {
    const auto& n = nodes_[i];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes_[i].leaf;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

Split best_split(const Matrix& x, std::span<const double> target,
                 const std::vector<std::size_t>& rows, std::span<const std::size_t> features,
                 int min_leaf) {
  const std::size_t m = rows.size();
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t r : rows) {
    sum += target[r];
    sumsq += target[r] * target[r];
  }
  const double parent = sum * sum / static_cast<double>(m);
  const double sse = sumsq - parent;
  const double min_gain = 1e-12 * (1.0 + std::max(0.0, sse));

  Split best;
  std::vector<std::pair<double, std::size_t>> order(m);
  const std::size_t lo = static_cast<std::size_t>(min_leaf);
  for (std::size_t f : features) {
    for (std::size_t i = 0; i < m; ++i) order[i] = {x(rows[i], f), i};
    std::sort(order.begin(), order.end());
    double left = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      left += target[rows[order[i].second]];
      const std::size_t nl = i + 1;
      const std::size_t nr = m - nl;
      if (nl < lo) continue;
      if (nr < lo) break;
      const double a = order[i].first;
      const double b = order[i + 1].first;
      if (!(a < b)) continue;
      const double right = sum - left;
      const double gain = left * left / static_cast<double>(nl) +
                          right * right / static_cast<double>(nr) - parent;
      if (gain > min_gain && gain > best.gain) {
        double thr = a + (b - a) / 2.0;
        if (!(thr < b)) thr = a;
        best = {static_cast<int>(f), thr, gain};
      }
    }
  }
  return best;
}

}  // namespace

GrownTree grow_tree(const Matrix& x, std::span<const double> target,
                    std::span<const std::size_t> rows, const TreeParams& params, Rng& rng) {
  if (rows.empty()) throw ContractError("grow_tree: no rows");
  if (params.max_depth < 0) throw ConfigError("tree max_depth must be >= 0");
  if (params.min_leaf < 1) throw ConfigError("tree min_leaf must be >= 1");
  const std::size_t d = x.cols();
  if (params.mtry < 0 || static_cast<std::size_t>(params.mtry) > d) {
    throw ConfigError("mtry " + std::to_string(params.mtry) + " exceeds feature count " +
                      std::to_string(d));
  }
  const std::size_t mtry =
      params.mtry == 0 ? d : static_cast<std::size_t>(params.mtry);

  struct Work {
    int node;
    int depth;
    std::vector<std::size_t> rows;
  };
  std::vector<TreeNode> nodes(1);
  GrownTree out;
  std::vector<Work> stack;
  stack.push_back({0, 0, std::vector<std::size_t>(rows.begin(), rows.end())});
  std::vector<std::size_t> all_features(d);
  std::iota(all_features.begin(), all_features.end(), 0);
  std::vector<std::size_t> features;

  while (!stack.empty()) {
    Work w = std::move(stack.back());
    stack.pop_back();
    Split split;
    const std::size_t min_leaf = static_cast<std::size_t>(params.min_leaf);
    if (w.depth < params.max_depth && w.rows.size() >= 2 * min_leaf) {
      features = all_features;
      if (mtry < d) {
        for (std::size_t i = 0; i < mtry; ++i) {
          const std::size_t j = i + uniform_index(rng, d - i);
          std::swap(features[i], features[j]);
        }
        features.resize(mtry);
      }
      split = best_split(x, target, w.rows, features, params.min_leaf);
    }
    if (split.feature < 0) {
      nodes[w.node].leaf = static_cast<int>(out.leaf_rows.size());
      out.leaf_rows.push_back(std::move(w.rows));
      continue;
    }
    std::vector<std::size_t> left, right;
    for (std::size_t r : w.rows) {
      (x(r, split.feature) <= split.threshold ? left : right).push_back(r);
    }
    const int l = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes.emplace_back();
    nodes[w.node].feature = split.feature;
    nodes[w.node].threshold = split.threshold;
    nodes[w.node].left = l;
    nodes[w.node].right = l + 1;
    stack.push_back({l + 1, w.depth + 1, std::move(right)});
    stack.push_back({l, w.depth + 1, std::move(left)});
  }
  out.tree = RegressionTree(std::move(nodes));
  return out;
}

nlohmann::json to_json(const RegressionTree& tree) {
  nlohmann::json f = nlohmann::json::array(), t = nlohmann::json::array(),
                 l = nlohmann::json::array(), r = nlohmann::json::array(),
                 leaf = nlohmann::json::array();
  for (const auto& n : tree.nodes()) {
    f.push_back(n.feature);
    t.push_back(n.threshold);
    l.push_back(n.left);
    r.push_back(n.right);
    leaf.push_back(n.leaf);
  }
  return {{"feature", f}, {"threshold", t}, {"left", l}, {"right", r}, {"leaf", leaf}};
}

RegressionTree tree_from_json(const nlohmann::json& j) {
  const auto f = j.at("feature").get<std::vector<int>>();
  const auto t = j.at("threshold").get<std::vector<double>>();
  const auto l = j.at("left").get<std::vector<int>>();
  const auto r = j.at("right").get<std::vector<int>>();
  const auto leaf = j.at("leaf").get<std::vector<int>>();
  const std::size_t n = f.size();
  if (t.size() != n || l.size() != n || r.size() != n || leaf.size() != n || n == 0) {
    throw DataError("tree: inconsistent node arrays");
  }
  std::vector<TreeNode> nodes(n);
  for (std::size_t i = 0; i < n; ++i) {
    nodes[i] = {f[i], t[i], l[i], r[i], leaf[i]};
    const bool inner = f[i] >= 0;
    if (inner && (l[i] <= 0 || r[i] <= 0 || static_cast<std::size_t>(l[i]) >= n ||
                  static_cast<std::size_t>(r[i]) >= n)) {
      throw DataError("tree: child index out of range");
    }
  }
  return RegressionTree(std::move(nodes));
}

}  // namespace mcsadapt::regress
