#pragma once

// Binary regression trees grown on variance reduction. Shared by the
// quantile regression forest and gradient boosting.

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "mcsadapt/matrix.hpp"
#include "mcsadapt/random.hpp"

namespace mcsadapt::regress {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int leaf = -1;  // leaf index for leaves
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes);

  /// Leaf index reached by `x`; goes left when x[feature] <= threshold.
  int leaf_of(std::span<const double> x) const;
  std::size_t leaf_count() const noexcept { return leaf_count_; }
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }

 private:
  std::vector<TreeNode> nodes_;
  std::size_t leaf_count_ = 0;
};

struct TreeParams {
  int max_depth = 6;  // 0 grows a single leaf
  int min_leaf = 1;
  int mtry = 0;  // candidate features per node; 0 = all
};

struct GrownTree {
  RegressionTree tree;
  /// Rows of `x` in each leaf, with multiplicity for bootstrap draws.
  std::vector<std::vector<std::size_t>> leaf_rows;
};

/// Grows a tree on rows `rows` of `x` fitting `target` (indexed by row).
GrownTree grow_tree(const Matrix& x, std::span<const double> target,
                    std::span<const std::size_t> rows, const TreeParams& params, Rng& rng);

nlohmann::json to_json(const RegressionTree& tree);
RegressionTree tree_from_json(const nlohmann::json& j);

}  // namespace mcsadapt::regress
