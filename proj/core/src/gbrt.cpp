#include "hlscong/gbrt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hlscong/common.hpp"

namespace hlscong {

namespace {

// Splits must beat this SSE reduction; residual noise left after an exact
// fit never splits.
constexpr double kMinGain = 1e-12;

// Column-sorted view of the training matrix, shared by every stage.
struct SortedColumns {
  std::vector<std::vector<std::uint32_t>> order;  // per feature
  std::vector<std::vector<double>> values;  // values in sorted order
  std::vector<char> constant;
};

SortedColumns Presort(const Matrix& x) {
  const std::size_t n = x.rows(), p = x.cols();
  SortedColumns s;
  s.order.resize(p);
  s.values.resize(p);
  s.constant.assign(p, 0);
  for (std::size_t j = 0; j < p; ++j) {
    auto& ord = s.order[j];
    ord.resize(n);
    std::iota(ord.begin(), ord.end(), 0u);
    std::stable_sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) {
      return x(a, j) < x(b, j);
    });
    auto& vals = s.values[j];
    vals.resize(n);
    for (std::size_t k = 0; k < n; ++k) vals[k] = x(ord[k], j);
    s.constant[j] = n == 0 || vals.front() == vals.back();
  }
  return s;
}

struct Candidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

struct Scan {
  double left_sum = 0.0;
  std::int64_t left_count = 0;
  double last = 0.0;
};

double Midpoint(double a, double b) {
  const double m = a + (b - a) / 2.0;
  return m < b ? m : a;
}

// Grows one tree on `resid` level by level. Each level makes one pass over
// every presorted column, scoring all open nodes at once.
RegressionTree GrowTree(const Matrix& x, const SortedColumns& cols,
                        std::span<const double> resid, const GbrtParams& params,
                        std::vector<int>& leaf_of) {
  const std::size_t n = x.rows(), p = x.cols();
  const std::int64_t min_leaf = params.min_samples_leaf;
  RegressionTree tree;
  tree.nodes.emplace_back();
  std::vector<int> node_of(n, 0);  // open node per sample, -1 once in a leaf
  std::vector<int> open = {0};

  auto close_as_leaf = [&](int id, double sum, std::int64_t count) {
    tree.nodes[static_cast<std::size_t>(id)].value =
        count > 0 ? sum / static_cast<double>(count) : 0.0;
  };

  for (int depth = 0; !open.empty(); ++depth) {
    // slot of each open node in this level's arrays
    std::vector<int> slot(tree.nodes.size(), -1);
    for (std::size_t s = 0; s < open.size(); ++s) slot[static_cast<std::size_t>(open[s])] = static_cast<int>(s);
    std::vector<double> sum(open.size(), 0.0);
    std::vector<std::int64_t> count(open.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (node_of[i] < 0) continue;
      const int s = slot[static_cast<std::size_t>(node_of[i])];
      sum[static_cast<std::size_t>(s)] += resid[i];
      ++count[static_cast<std::size_t>(s)];
    }

    std::vector<Candidate> best(open.size());
    if (depth < params.max_depth) {
      std::vector<Scan> scan(open.size());
      for (std::size_t j = 0; j < p; ++j) {
        if (cols.constant[j]) continue;
        std::fill(scan.begin(), scan.end(), Scan{});
        const auto& ord = cols.order[j];
        const auto& vals = cols.values[j];
        for (std::size_t k = 0; k < n; ++k) {
          const std::uint32_t i = ord[k];
          const int nd = node_of[i];
          if (nd < 0) continue;
          const auto s = static_cast<std::size_t>(slot[static_cast<std::size_t>(nd)]);
          Scan& sc = scan[s];
          const double v = vals[k];
          if (sc.left_count >= min_leaf && v != sc.last &&
              count[s] - sc.left_count >= min_leaf) {
            const double right_sum = sum[s] - sc.left_sum;
            const auto nl = static_cast<double>(sc.left_count);
            const auto nr = static_cast<double>(count[s] - sc.left_count);
            const double gain = sc.left_sum * sc.left_sum / nl +
                                right_sum * right_sum / nr -
                                sum[s] * sum[s] / static_cast<double>(count[s]);
            if (gain > best[s].gain && gain > kMinGain) {
              best[s] = {gain, static_cast<int>(j), Midpoint(sc.last, v)};
            }
          }
          sc.left_sum += resid[i];
          ++sc.left_count;
          sc.last = v;
        }
      }
    }

    std::vector<int> next;
    for (std::size_t s = 0; s < open.size(); ++s) {
      const int id = open[s];
      if (best[s].feature < 0) {
        close_as_leaf(id, sum[s], count[s]);
        continue;
      }
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
      node.feature = best[s].feature;
      node.threshold = best[s].threshold;
      node.left = left;
      node.right = left + 1;
      next.push_back(left);
      next.push_back(left + 1);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const int nd = node_of[i];
      if (nd < 0) continue;
      const TreeNode& node = tree.nodes[static_cast<std::size_t>(nd)];
      if (node.feature < 0) {
        leaf_of[i] = nd;
        node_of[i] = -1;
      } else {
        node_of[i] = x(i, static_cast<std::size_t>(node.feature)) <= node.threshold
                         ? node.left
                         : node.right;
      }
    }
    open = std::move(next);
  }
  return tree;
}

}  // namespace

double RegressionTree::Predict(std::span<const double> x) const {
  int id = 0;
  while (true) {
    const TreeNode& n = nodes[static_cast<std::size_t>(id)];
    if (n.feature < 0) return n.value;
    id = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
}

int RegressionTree::NumSplits() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(),
                                        [](const TreeNode& n) { return n.feature >= 0; }));
}

double GbrtModel::Predict(std::span<const double> x) const {
  double f = init;
  for (const auto& t : trees) f += params.learning_rate * t.Predict(x);
  return f;
}

GbrtModel FitGbrt(const Matrix& x, std::span<const double> y,
                  const GbrtParams& params, GbrtTrace* trace) {
  if (params.n_estimators < 1 || !(params.learning_rate >= 0.0) ||
      !std::isfinite(params.learning_rate) || params.max_depth < 0 ||
      params.min_samples_leaf < 1) {
    throw UsageError("gbrt: invalid hyperparameters");
  }
  if (x.rows() != y.size()) throw DataError("gbrt: X and y differ in length");
  if (x.rows() < 2) throw DataError("gbrt: need at least two samples");
  for (double v : y) {
    if (!std::isfinite(v)) throw DataError("gbrt: non-finite target value");
  }
  const std::size_t n = x.rows();

  GbrtModel model;
  model.params = params;
  model.init = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

  const SortedColumns cols = Presort(x);
  std::vector<double> f(n, model.init);
  std::vector<double> resid(n);
  std::vector<int> leaf_of(n, 0);
  for (int t = 0; t < params.n_estimators; ++t) {
    for (std::size_t i = 0; i < n; ++i) resid[i] = y[i] - f[i];
    RegressionTree tree = GrowTree(x, cols, resid, params, leaf_of);
    double abs_sum = 0.0, sq_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      f[i] += params.learning_rate *
              tree.nodes[static_cast<std::size_t>(leaf_of[i])].value;
      const double r = y[i] - f[i];
      abs_sum += std::abs(r);
      sq_sum += r * r;
    }
    if (trace) {
      trace->train_mae.push_back(abs_sum / static_cast<double>(n));
      trace->train_mse.push_back(sq_sum / static_cast<double>(n));
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace hlscong
