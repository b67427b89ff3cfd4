#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "hlscong/common.hpp"
#include "hlscong/gbrt.hpp"
#include "hlscong/lasso.hpp"
#include "hlscong/metrics.hpp"
#include "hlscong/mlp.hpp"
#include "hlscong/rng.hpp"
#include "oracles.hpp"

using namespace hlscong;

namespace {

Matrix RandomMatrix(std::size_t n, std::size_t p, Rng& rng) {
  Matrix x(n, p);
  for (auto& v : x.data()) v = rng.Normal();
  return x;
}

std::vector<double> PredictAll(const GbrtModel& m, const Matrix& x) {
  std::vector<double> out;
  for (std::size_t i = 0; i < x.rows(); ++i) out.push_back(m.Predict(x.row(i)));
  return out;
}

// Reference boosting of depth-1 stumps on a single feature, scoring every
// midpoint directly by SSE.
std::vector<double> NaiveStumpBoost(const std::vector<double>& x, const std::vector<double>& y,
                                    int stages, double lr, int min_leaf) {
  const std::size_t n = x.size();
  std::vector<double> f(n, std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n));
  std::vector<double> xs = x;
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  for (int t = 0; t < stages; ++t) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - f[i];
    double best_sse = 0, best_thr = 0, lv = 0, rv = 0;
    bool found = false;
    double total_mean = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(n);
    double base = 0;
    for (double v : r) base += (v - total_mean) * (v - total_mean);
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
      const double thr = (xs[k] + xs[k + 1]) / 2;
      double sl = 0, sr = 0;
      int nl = 0, nr = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (x[i] <= thr) {
          sl += r[i];
          ++nl;
        } else {
          sr += r[i];
          ++nr;
        }
      }
      if (nl < min_leaf || nr < min_leaf) continue;
      const double ml = sl / nl, mr = sr / nr;
      double sse = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = r[i] - (x[i] <= thr ? ml : mr);
        sse += d * d;
      }
      if (base - sse > 1e-12 && (!found || sse < best_sse - 1e-12)) {
        found = true;
        best_sse = sse;
        best_thr = thr;
        lv = ml;
        rv = mr;
      }
    }
    if (!found) {
      for (std::size_t i = 0; i < n; ++i) f[i] += lr * total_mean;
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) f[i] += lr * (x[i] <= best_thr ? lv : rv);
  }
  return f;
}

}  // namespace

TEST(Metrics, HandExamples) {
  const std::vector<double> y = {0, 10}, h = {5, 0};
  EXPECT_DOUBLE_EQ(Mae(y, h), 7.5);
  EXPECT_DOUBLE_EQ(MedAe(y, h), 7.5);
  const std::vector<double> z = {0, 0, 0}, e = {1, 2, 100};
  EXPECT_NEAR(Mae(z, e), 103.0 / 3.0, 1e-12);
  EXPECT_EQ(MedAe(z, e), 2);
  EXPECT_EQ(Mae(y, y), 0);
  EXPECT_EQ(MedAe(y, y), 0);
  EXPECT_THROW(Mae(y, z), std::invalid_argument);
  EXPECT_THROW(MedAe(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
}

TEST(Metrics, AgreeWithNaive) {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const auto n = static_cast<std::size_t>(rng.UniformInt(1, 50));
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.Uniform(-100, 100);
      b[i] = rng.Uniform(-100, 100);
    }
    EXPECT_NEAR(Mae(a, b), oracle::NaiveMae(a, b), 1e-12);
    EXPECT_NEAR(MedAe(a, b), oracle::NaiveMedAe(a, b), 1e-12);
  }
}

TEST(Lasso, ZeroTarget) {
  Rng rng(2);
  const Matrix x = RandomMatrix(50, 4, rng);
  const std::vector<double> y(50, 0.0);
  const auto m = FitLasso(x, y, {});
  for (double w : m.weights) EXPECT_EQ(w, 0);
  EXPECT_EQ(m.intercept, 0);
}

TEST(Lasso, RecoversSingleCoefficient) {
  Rng rng(3);
  const Matrix x = RandomMatrix(200, 6, rng);
  std::vector<double> y;
  for (std::size_t i = 0; i < x.rows(); ++i) y.push_back(3.0 * x(i, 0));
  const auto m = FitLasso(x, y, {.alpha = 1e-4});
  EXPECT_GE(m.weights[0], 2.9);
  EXPECT_LE(m.weights[0], 3.0);
  for (std::size_t j = 1; j < 6; ++j) EXPECT_LT(std::fabs(m.weights[j]), 0.05);
}

TEST(Lasso, DeactivationThreshold) {
  Rng rng(4);
  const Matrix x = RandomMatrix(80, 5, rng);
  std::vector<double> y;
  for (std::size_t i = 0; i < x.rows(); ++i) y.push_back(x(i, 1) - 2 * x(i, 3) + 0.1 * rng.Normal());

  // Independent threshold: max |x_j' (y - ybar)| / n over centred columns.
  const double n = static_cast<double>(x.rows());
  const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double amax = 0;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double xbar = 0, dot = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) xbar += x(i, j) / n;
    for (std::size_t i = 0; i < x.rows(); ++i) dot += (x(i, j) - xbar) * (y[i] - ybar);
    amax = std::max(amax, std::fabs(dot) / n);
  }
  EXPECT_NEAR(LassoAlphaMax(x, y), amax, 1e-12 * amax);

  const auto off = FitLasso(x, y, {.alpha = amax * 1.0001});
  for (double w : off.weights) EXPECT_EQ(w, 0);
  EXPECT_NEAR(off.intercept, ybar, 1e-12);
  const auto on = FitLasso(x, y, {.alpha = amax * 0.9});
  EXPECT_NE(std::count(on.weights.begin(), on.weights.end(), 0.0), 5);
}

TEST(Lasso, SatisfiesOptimalityConditions) {
  Rng rng(5);
  const Matrix x = RandomMatrix(120, 8, rng);
  std::vector<double> y;
  for (std::size_t i = 0; i < x.rows(); ++i) y.push_back(2 * x(i, 0) + x(i, 5) + rng.Normal());
  const double alpha = 0.05;
  LassoTrace trace;
  const auto m = FitLasso(x, y, {.alpha = alpha, .tol = 1e-12, .max_iter = 10000}, &trace);
  EXPECT_TRUE(trace.converged);
  for (std::size_t s = 1; s < trace.objective.size(); ++s) {
    EXPECT_LE(trace.objective[s], trace.objective[s - 1] + 1e-12);
  }
  const double n = static_cast<double>(x.rows());
  std::vector<double> r(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) r[i] = y[i] - m.Predict(x.row(i));
  EXPECT_NEAR(std::accumulate(r.begin(), r.end(), 0.0) / n, 0, 1e-9);
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double g = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) g += x(i, j) * r[i] / n;
    if (m.weights[j] == 0) {
      EXPECT_LE(std::fabs(g), alpha + 1e-6) << j;
    } else {
      EXPECT_NEAR(g, alpha * (m.weights[j] > 0 ? 1 : -1), 1e-6) << j;
    }
  }
  EXPECT_NEAR(LassoObjective(x, y, m), trace.objective.back(), 1e-9);
}

TEST(Gbrt, ConstantTarget) {
  Rng rng(6);
  const Matrix x = RandomMatrix(30, 3, rng);
  const std::vector<double> y(30, 4.25);
  const auto m = FitGbrt(x, y, {.n_estimators = 5});
  EXPECT_EQ(m.init, 4.25);
  for (const auto& t : m.trees) {
    EXPECT_EQ(t.NumSplits(), 0);
    for (const auto& n : t.nodes) EXPECT_EQ(n.value, 0);
  }
  for (double p : PredictAll(m, x)) EXPECT_EQ(p, 4.25);
}

TEST(Gbrt, StepFunctionMatchesNaiveBoosting) {
  Matrix x(100, 1);
  std::vector<double> xv, y;
  for (int i = 0; i < 100; ++i) {
    x(static_cast<std::size_t>(i), 0) = (i + 0.5) / 100.0;
    xv.push_back((i + 0.5) / 100.0);
    y.push_back(xv.back() > 0.5 ? 1.0 : 0.0);
  }
  GbrtTrace trace;
  const auto m = FitGbrt(x, y, {.n_estimators = 50, .learning_rate = 0.5, .max_depth = 1}, &trace);
  const auto pred = PredictAll(m, x);
  EXPECT_LT(Mae(y, pred), 1e-3);
  for (std::size_t s = 1; s < trace.train_mae.size(); ++s) {
    EXPECT_LE(trace.train_mae[s], trace.train_mae[s - 1]);
  }
  // Once the residuals are ~1e-8 every split gain sits at rounding level, so
  // the stage-by-stage comparison stops early.
  const auto early = PredictAll(FitGbrt(x, y, {.n_estimators = 12, .learning_rate = 0.5, .max_depth = 1}), x);
  const auto ref = NaiveStumpBoost(xv, y, 12, 0.5, 5);
  for (std::size_t i = 0; i < early.size(); ++i) EXPECT_NEAR(early[i], ref[i], 1e-9);
}

TEST(Gbrt, NoisyOneDimensionalMatchesNaive) {
  Rng rng(7);
  std::vector<double> xv, y;
  Matrix x(60, 1);
  for (std::size_t i = 0; i < 60; ++i) {
    xv.push_back(rng.Uniform(0, 10));
    x(i, 0) = xv.back();
    y.push_back(std::sin(xv.back()) + 0.3 * rng.Normal());
  }
  const auto m = FitGbrt(x, y, {.n_estimators = 20, .learning_rate = 0.3, .max_depth = 1, .min_samples_leaf = 3});
  const auto pred = PredictAll(m, x);
  const auto ref = NaiveStumpBoost(xv, y, 20, 0.3, 3);
  for (std::size_t i = 0; i < pred.size(); ++i) EXPECT_NEAR(pred[i], ref[i], 1e-9);
}

TEST(Gbrt, ZeroLearningRatePredictsMean) {
  Rng rng(8);
  const Matrix x = RandomMatrix(40, 2, rng);
  std::vector<double> y;
  for (std::size_t i = 0; i < 40; ++i) y.push_back(x(i, 0) * 3 + 1);
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / 40.0;
  const auto m = FitGbrt(x, y, {.n_estimators = 10, .learning_rate = 0.0});
  for (double p : PredictAll(m, x)) EXPECT_NEAR(p, mean, 1e-12);
}

TEST(Gbrt, PredictionEqualsNaiveWalk) {
  Rng rng(9);
  const Matrix x = RandomMatrix(150, 4, rng);
  std::vector<double> y;
  for (std::size_t i = 0; i < x.rows(); ++i) y.push_back(x(i, 0) * x(i, 1) + std::fabs(x(i, 2)));
  const auto m = FitGbrt(x, y, {.n_estimators = 30, .learning_rate = 0.1, .max_depth = 3});
  const Matrix probe = RandomMatrix(50, 4, rng);
  for (std::size_t i = 0; i < probe.rows(); ++i) {
    const std::vector<double> row(probe.row(i).begin(), probe.row(i).end());
    double f = m.init;
    for (const auto& t : m.trees) f += m.params.learning_rate * oracle::WalkTree(t.nodes, row);
    EXPECT_NEAR(m.Predict(probe.row(i)), f, 1e-12);
  }
}

TEST(Gbrt, TrainMaeNonIncreasingAndLeafSizes) {
  Rng rng(10);
  const Matrix x = RandomMatrix(200, 3, rng);
  std::vector<double> y;
  for (std::size_t i = 0; i < x.rows(); ++i) y.push_back(x(i, 0) > 0 ? 5 : -5);
  GbrtTrace trace;
  const auto m = FitGbrt(x, y, {.n_estimators = 40, .learning_rate = 0.2, .max_depth = 2, .min_samples_leaf = 7}, &trace);
  ASSERT_EQ(trace.train_mae.size(), 40u);
  for (std::size_t s = 1; s < trace.train_mse.size(); ++s) {
    EXPECT_LE(trace.train_mse[s], trace.train_mse[s - 1] + 1e-12);
  }
  for (const auto& t : m.trees) {
    std::vector<int> hits(t.nodes.size(), 0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      std::size_t k = 0;
      while (t.nodes[k].feature >= 0) {
        k = static_cast<std::size_t>(x(i, static_cast<std::size_t>(t.nodes[k].feature)) <= t.nodes[k].threshold
                                         ? t.nodes[k].left
                                         : t.nodes[k].right);
      }
      ++hits[k];
    }
    for (std::size_t k = 0; k < t.nodes.size(); ++k) {
      if (t.nodes[k].feature < 0) EXPECT_GE(hits[k], 7);
    }
  }
}

TEST(Gbrt, DuplicatedColumnChangesNothing) {
  Rng rng(11);
  const Matrix x = RandomMatrix(80, 3, rng);
  std::vector<double> y;
  for (std::size_t i = 0; i < x.rows(); ++i) y.push_back(x(i, 1) + 0.5 * x(i, 2) * x(i, 2));
  Matrix xd(80, 4);
  for (std::size_t i = 0; i < 80; ++i) {
    for (std::size_t j = 0; j < 3; ++j) xd(i, j) = x(i, j);
    xd(i, 3) = x(i, 1);
  }
  const GbrtParams p{.n_estimators = 25, .learning_rate = 0.1, .max_depth = 3};
  const auto a = FitGbrt(x, y, p);
  const auto b = FitGbrt(xd, y, p);
  EXPECT_EQ(PredictAll(a, x), PredictAll(b, xd));
  for (const auto& t : b.trees) {
    for (const auto& n : t.nodes) EXPECT_NE(n.feature, 3);
  }
}

TEST(Gbrt, DepthZeroAndInvalidParams) {
  Rng rng(12);
  const Matrix x = RandomMatrix(20, 2, rng);
  std::vector<double> y(20);
  for (std::size_t i = 0; i < 20; ++i) y[i] = x(i, 0);
  const auto m = FitGbrt(x, y, {.n_estimators = 3, .max_depth = 0});
  for (const auto& t : m.trees) EXPECT_EQ(t.NumSplits(), 0);
  EXPECT_THROW(FitGbrt(x, y, {.n_estimators = 0}), UsageError);
  EXPECT_THROW(FitGbrt(x, y, {.learning_rate = -0.1}), UsageError);
  EXPECT_THROW(FitGbrt(x, y, {.max_depth = -1}), UsageError);
  EXPECT_THROW(FitGbrt(x, y, {.min_samples_leaf = 0}), UsageError);
}

TEST(Mlp, GradientMatchesFiniteDifferences) {
  Rng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    MlpModel m = InitMlp({4, 6, 5, 1}, 100 + static_cast<std::uint64_t>(trial));
    const Matrix x = RandomMatrix(3, 4, rng);
    const std::vector<double> y = {rng.Normal(), rng.Normal(), rng.Normal()};
    const auto lg = MlpLossAndGradient(m, x, y);
    auto theta = m.Parameters();
    ASSERT_EQ(lg.gradient.size(), theta.size());
    double worst = 0;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const double h = 1e-5, keep = theta[k];
      theta[k] = keep + h;
      m.SetParameters(theta);
      const double up = MlpLossAndGradient(m, x, y).loss;
      theta[k] = keep - h;
      m.SetParameters(theta);
      const double down = MlpLossAndGradient(m, x, y).loss;
      theta[k] = keep;
      m.SetParameters(theta);
      const double fd = (up - down) / (2 * h);
      const double denom = std::max({std::fabs(fd), std::fabs(lg.gradient[k]), 1e-6});
      worst = std::max(worst, std::fabs(fd - lg.gradient[k]) / denom);
    }
    EXPECT_LT(worst, 1e-4);
  }
}

TEST(Mlp, ZeroEpochsIsTheInitialisation) {
  Rng rng(14);
  const Matrix x = RandomMatrix(10, 3, rng);
  std::vector<double> y;
  for (std::size_t i = 0; i < 10; ++i) y.push_back(x(i, 0));
  const auto a = FitMlp(x, y, {.hidden = {5}, .epochs = 0}, 42);
  const auto b = FitMlp(x, y, {.hidden = {5}, .epochs = 0}, 42);
  EXPECT_EQ(a, b);
  const MlpModel init = InitMlp({3, 5, 1}, 42);
  EXPECT_EQ(a.weights, init.weights);
  EXPECT_EQ(a.biases, init.biases);
}

TEST(Mlp, LearnsALinearTarget) {
  Rng rng(15);
  const Matrix x = RandomMatrix(100, 3, rng);
  std::vector<double> y;
  for (std::size_t i = 0; i < x.rows(); ++i) y.push_back(2 * x(i, 0) - x(i, 2) + 10);
  const auto m = FitMlp(x, y, {.hidden = {8}, .learning_rate = 1e-2, .epochs = 500, .batch_size = 16}, 3);
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / 100.0;
  double var = 0, mse = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    var += (y[i] - mean) * (y[i] - mean) / 100.0;
    const double e = m.Predict(x.row(i)) - y[i];
    mse += e * e / 100.0;
  }
  EXPECT_LT(mse, var);
  EXPECT_LT(mse, 0.1 * var);
}

TEST(Mlp, DeterministicGivenSeed) {
  Rng rng(16);
  const Matrix x = RandomMatrix(40, 2, rng);
  std::vector<double> y;
  for (std::size_t i = 0; i < x.rows(); ++i) y.push_back(x(i, 0) * x(i, 1));
  const MlpParams p{.hidden = {6, 4}, .epochs = 20, .batch_size = 8};
  EXPECT_EQ(FitMlp(x, y, p, 5), FitMlp(x, y, p, 5));
  EXPECT_NE(FitMlp(x, y, p, 5), FitMlp(x, y, p, 6));
}

TEST(Mlp, DivergenceNamesTheEpoch) {
  Rng rng(17);
  Matrix x = RandomMatrix(30, 2, rng);
  for (auto& v : x.data()) v *= 1e3;
  std::vector<double> y;
  for (std::size_t i = 0; i < x.rows(); ++i) y.push_back(x(i, 0));
  try {
    FitMlp(x, y, {.hidden = {16}, .learning_rate = 10.0, .epochs = 50}, 1);
    FAIL() << "expected divergence";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}
