#include <cmath>
#include <filesystem>
#include <cstring>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "hlscong/model.hpp"
#include "hlscong/rng.hpp"
#include "oracles.hpp"

using namespace hlscong;

namespace {

Matrix RandomMatrix(std::size_t n, std::size_t p, Rng& rng) {
  Matrix x(n, p);
  for (auto& v : x.data()) v = rng.Normal();
  return x;
}

// Matrix in schema width whose target depends on one column only.
std::pair<Matrix, std::vector<double>> SingleFactor(std::size_t causal, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x = RandomMatrix(300, Schema().size(), rng);
  std::vector<double> y;
  for (std::size_t i = 0; i < x.rows(); ++i) y.push_back(x(i, causal) > 0.3 ? 40 : 10 + 5 * x(i, causal));
  return {x, y};
}

}  // namespace

TEST(Model, KindNames) {
  for (ModelKind k : kAllModelKinds) EXPECT_EQ(ParseModelKind(ModelKindName(k)), k);
  EXPECT_EQ(ModelKindDisplayName(ModelKind::kLasso), "Linear");
  EXPECT_EQ(ModelKindDisplayName(ModelKind::kMlp), "ANN");
  EXPECT_EQ(ModelKindDisplayName(ModelKind::kGbrt), "GBRT");
  EXPECT_FALSE(ParseModelKind("svm"));
}

TEST(Model, DefaultGrids) {
  EXPECT_EQ(DefaultGrid(ModelKind::kLasso).size(), 4u);
  EXPECT_EQ(DefaultGrid(ModelKind::kGbrt).size(), 8u);
  EXPECT_EQ(DefaultGrid(ModelKind::kMlp).size(), 4u);
  for (ModelKind k : kAllModelKinds) {
    for (const auto& p : DefaultGrid(k)) {
      EXPECT_EQ(KindOf(p), k);
      EXPECT_EQ(ParamsFromJson(k, ParamsToJson(p)), p);
    }
  }
}

TEST(Model, ScalerOnlyForLinearAndAnn) {
  Rng rng(1);
  const Matrix x = RandomMatrix(40, 3, rng);
  std::vector<double> y(40);
  for (std::size_t i = 0; i < 40; ++i) y[i] = x(i, 0);
  EXPECT_TRUE(FitModel(LassoParams{}, x, y, 1, "fp", Target::kAvg).scaler);
  EXPECT_TRUE(FitModel(MlpParams{.hidden = {4}, .epochs = 2}, x, y, 1, "fp", Target::kAvg).scaler);
  EXPECT_FALSE(FitModel(GbrtParams{.n_estimators = 3}, x, y, 1, "fp", Target::kAvg).scaler);
}

TEST(Model, PredictChecksFingerprint) {
  Rng rng(2);
  const Matrix x = RandomMatrix(30, 2, rng);
  std::vector<double> y(30, 1.0);
  const auto m = FitModel(GbrtParams{.n_estimators = 2}, x, y, 1, "aaaa", Target::kVert);
  EXPECT_THROW(Predict(m, x, "bbbb"), DataError);
  try {
    Predict(m, x, "bbbb");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("aaaa"), std::string::npos);
    EXPECT_NE(msg.find("bbbb"), std::string::npos);
  }
  EXPECT_TRUE(Predict(m, Matrix(0, 2), "aaaa").empty());
}

TEST(Model, RoundTripIsBitIdentical) {
  Rng rng(3);
  const Matrix x = RandomMatrix(120, 5, rng);
  std::vector<double> y;
  for (std::size_t i = 0; i < x.rows(); ++i) y.push_back(std::sin(x(i, 0)) * 7 + x(i, 3) / 3);
  const Matrix probe = RandomMatrix(25, 5, rng);
  const auto dir = std::filesystem::temp_directory_path();
  for (const ModelParams& p : {ModelParams{LassoParams{.alpha = 1e-3}},
                               ModelParams{GbrtParams{.n_estimators = 20}},
                               ModelParams{MlpParams{.hidden = {6, 3}, .epochs = 5}}}) {
    TrainedModel m = FitModel(p, x, y, 9, "fp", Target::kHoriz);
    m.grid_index = 2;
    m.cv_score = 0.1 + 0.2;
    const auto path = dir / "hlscong_model_rt.json";
    SaveModel(m, path);
    const TrainedModel back = LoadModel(path);
    EXPECT_EQ(back, m);
    const auto a = Predict(m, probe, "fp");
    const auto b = Predict(back, probe, "fp");
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(std::memcmp(&a[i], &b[i], sizeof(double)), 0);
    }
    std::filesystem::remove(path);
  }
}

TEST(Model, RejectsUnknownVersion) {
  Rng rng(4);
  const Matrix x = RandomMatrix(10, 2, rng);
  std::vector<double> y(10, 0.0);
  auto doc = ModelToJson(FitModel(LassoParams{}, x, y, 1, "fp", Target::kAvg));
  doc["version"] = "99";
  EXPECT_THROW(ModelFromJson(doc), DataError);
}

TEST(Cv, FoldsAreDeterministicAndBalanced) {
  const auto a = FoldAssignment(103, 10, 5);
  EXPECT_EQ(a, FoldAssignment(103, 10, 5));
  EXPECT_NE(a, FoldAssignment(103, 10, 6));
  std::map<int, int> sizes;
  for (int f : a) ++sizes[f];
  EXPECT_EQ(sizes.size(), 10u);
  for (auto [f, n] : sizes) EXPECT_TRUE(n == 10 || n == 11);
}

TEST(Cv, SinglePointAndTieRule) {
  Rng rng(5);
  const Matrix x = RandomMatrix(50, 3, rng);
  std::vector<double> y;
  for (std::size_t i = 0; i < 50; ++i) y.push_back(x(i, 0) + 0.1 * rng.Normal());
  const auto one = CvGridSearch(x, y, {LassoParams{.alpha = 0.01}}, 5, 1);
  EXPECT_EQ(one.best_index, 0u);
  EXPECT_EQ(one.rows.size(), 1u);
  EXPECT_EQ(one.rows[0].fold_mae.size(), 5u);

  const ModelParams p = GbrtParams{.n_estimators = 5};
  const auto tie = CvGridSearch(x, y, {p, p}, 5, 1);
  EXPECT_EQ(tie.rows[0].mean_mae, tie.rows[1].mean_mae);
  EXPECT_EQ(tie.best_index, 0u);
}

TEST(Cv, ScoresAreMeanFoldMae) {
  Rng rng(6);
  const Matrix x = RandomMatrix(40, 2, rng);
  std::vector<double> y;
  for (std::size_t i = 0; i < 40; ++i) y.push_back(3 * x(i, 1));
  const std::vector<ModelParams> grid = {LassoParams{.alpha = 10.0}, LassoParams{.alpha = 1e-4}};
  const auto cv = CvGridSearch(x, y, grid, 4, 3);
  EXPECT_EQ(cv.best_index, 1u);
  const auto folds = FoldAssignment(40, 4, 3);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double total = 0;
    for (int f = 0; f < 4; ++f) {
      std::vector<std::size_t> tr, te;
      for (std::size_t i = 0; i < 40; ++i) (folds[i] == f ? te : tr).push_back(i);
      const auto yt = SelectItems(y, tr);
      const auto m = FitModel(grid[g], x.SelectRows(tr), yt, 3, "", Target::kAvg);
      const auto pred = Predict(m, x.SelectRows(te), "");
      const double mae = oracle::NaiveMae(SelectItems(y, te), pred);
      EXPECT_NEAR(cv.rows[g].fold_mae[static_cast<std::size_t>(f)], mae, 1e-12);
      total += mae;
    }
    EXPECT_NEAR(cv.rows[g].mean_mae, total / 4, 1e-12);
  }
  std::ostringstream out;
  WriteCvTable(cv, out);
  EXPECT_NE(out.str().find("mean"), std::string::npos);
}

TEST(Cv, Errors) {
  Rng rng(7);
  const Matrix x = RandomMatrix(5, 2, rng);
  std::vector<double> y(5, 1.0);
  EXPECT_THROW(CvGridSearch(x, y, {}, 2, 1), UsageError);
  EXPECT_THROW(CvGridSearch(x, y, {LassoParams{}}, 1, 1), UsageError);
  EXPECT_THROW(CvGridSearch(x, y, {LassoParams{}}, 10, 1), DataError);
}

TEST(Importance, CausalFeatureFirst) {
  const std::size_t causal = *Schema().IndexOf("fanin_2hop");
  const auto [x, y] = SingleFactor(causal, 8);
  const auto m = FitModel(GbrtParams{.n_estimators = 30, .max_depth = 3}, x, y, 1,
                          Schema().fingerprint(), Target::kAvg);
  const Importance imp = FeatureImportance(m, Schema());
  EXPECT_EQ(imp.features.front().name, "fanin_2hop");
  EXPECT_EQ(imp.categories.front().name, "interconnection");
}

TEST(Importance, SplitCountIdentity) {
  Rng rng(9);
  const Matrix x = RandomMatrix(200, Schema().size(), rng);
  std::vector<double> y;
  for (std::size_t i = 0; i < x.rows(); ++i) y.push_back(x(i, 3) * x(i, 50) + x(i, 100));
  const auto g = std::get<GbrtModel>(
      FitModel(GbrtParams{.n_estimators = 15, .max_depth = 4}, x, y, 1, "", Target::kAvg).parameters);
  const Importance imp = FeatureImportance(g, Schema());
  std::int64_t counted = 0, internal = 0;
  for (auto c : imp.split_counts) counted += c;
  for (const auto& t : g.trees) {
    for (const auto& n : t.nodes) internal += n.feature >= 0;
  }
  EXPECT_EQ(counted, internal);
  double score_sum = 0;
  for (const auto& e : imp.features) score_sum += e.score;
  EXPECT_NEAR(score_sum, static_cast<double>(internal) / 15.0, 1e-12);
  double cat_sum = 0;
  for (const auto& e : imp.categories) cat_sum += e.score;
  EXPECT_NEAR(cat_sum, score_sum, 1e-12);
  for (std::size_t i = 1; i < imp.features.size(); ++i) {
    EXPECT_GE(imp.features[i - 1].score, imp.features[i].score);
  }
}

TEST(Importance, DepthZeroAllZero) {
  Rng rng(10);
  const Matrix x = RandomMatrix(20, Schema().size(), rng);
  std::vector<double> y(20);
  for (std::size_t i = 0; i < 20; ++i) y[i] = x(i, 0);
  const auto m = FitModel(GbrtParams{.n_estimators = 3, .max_depth = 0}, x, y, 1, "", Target::kAvg);
  const Importance imp = FeatureImportance(m, Schema());
  for (const auto& e : imp.features) EXPECT_EQ(e.score, 0);
  // All tied: schema order.
  EXPECT_EQ(imp.features.front().name, Schema().name(0));
  const auto lasso = FitModel(LassoParams{}, x, y, 1, "", Target::kAvg);
  EXPECT_THROW(FeatureImportance(lasso, Schema()), UsageError);
}
