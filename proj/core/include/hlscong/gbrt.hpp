#pragma once

// Gradient boosted regression trees on squared loss.
//
// Stage t fits a regression tree to the residuals y - F_{t-1}(X) with exact
// greedy split search: every midpoint between consecutive distinct values
// of every feature is scored by SSE reduction. Ties keep the lower feature
// index, then the lower threshold. Leaves hold the mean residual; the
// ensemble predicts init + learning_rate * sum(tree outputs).

#include <cstdint>
#include <span>
#include <vector>

#include "hlscong/matrix.hpp"

namespace hlscong {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output
  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double Predict(std::span<const double> x) const;
  int NumSplits() const;
  bool operator==(const RegressionTree&) const = default;
};

struct GbrtParams {
  int n_estimators = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  int min_samples_leaf = 5;
  bool operator==(const GbrtParams&) const = default;
};

struct GbrtModel {
  double init = 0.0;
  GbrtParams params;
  std::vector<RegressionTree> trees;

  double Predict(std::span<const double> x) const;
  bool operator==(const GbrtModel&) const = default;
};

struct GbrtTrace {
  std::vector<double> train_mae;  // after each stage
  std::vector<double> train_mse;
};

// n_estimators >= 1, learning_rate >= 0, max_depth >= 0 and
// min_samples_leaf >= 1; anything else throws UsageError.
GbrtModel FitGbrt(const Matrix& x, std::span<const double> y,
                  const GbrtParams& params, GbrtTrace* trace = nullptr);

}  // namespace hlscong
