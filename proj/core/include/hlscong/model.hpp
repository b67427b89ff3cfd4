#pragma once

// Trained-model envelope shared by the three learners: hyperparameters,
// fitted parameters, optional feature scaler and the schema fingerprint the
// model was trained against. Also hosts k-fold grid search and split-count
// feature importance.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "hlscong/dataset.hpp"
#include "hlscong/features.hpp"
#include "hlscong/gbrt.hpp"
#include "hlscong/lasso.hpp"
#include "hlscong/matrix.hpp"
#include "hlscong/mlp.hpp"

namespace hlscong {

enum class ModelKind { kLasso, kGbrt, kMlp };
inline constexpr std::array<ModelKind, 3> kAllModelKinds = {
    ModelKind::kLasso, ModelKind::kMlp, ModelKind::kGbrt};

std::string_view ModelKindName(ModelKind k);
std::optional<ModelKind> ParseModelKind(std::string_view name);
// Row label used in the evaluation table: Linear, ANN, GBRT.
std::string_view ModelKindDisplayName(ModelKind k);

using ModelParams = std::variant<LassoParams, GbrtParams, MlpParams>;

ModelKind KindOf(const ModelParams& p);
nlohmann::json ParamsToJson(const ModelParams& p);
ModelParams ParamsFromJson(ModelKind kind, const nlohmann::json& j);

// Default search grids.
std::vector<ModelParams> DefaultGrid(ModelKind kind);

inline constexpr std::string_view kModelFormatVersion = "1";

struct TrainedModel {
  ModelKind kind = ModelKind::kGbrt;
  ModelParams hyperparams;
  std::variant<LassoModel, GbrtModel, MlpModel> parameters;
  std::string schema_fingerprint;
  std::optional<Scaler> scaler;
  Target target = Target::kAvg;
  std::uint64_t seed = 0;
  std::optional<std::size_t> grid_index;
  std::optional<double> cv_score;

  bool operator==(const TrainedModel&) const = default;
};

// Lasso and MLP standardise features (scaler fitted on `x`); GBRT uses raw
// values.
TrainedModel FitModel(const ModelParams& params, const Matrix& x,
                      std::span<const double> y, std::uint64_t seed,
                      std::string schema_fingerprint, Target target);

// Throws DataError when `fingerprint` differs from the model's. Empty `x`
// gives an empty result.
std::vector<double> Predict(const TrainedModel& m, const Matrix& x,
                            std::string_view fingerprint);

nlohmann::json ModelToJson(const TrainedModel& m);
TrainedModel ModelFromJson(const nlohmann::json& doc);
void SaveModel(const TrainedModel& m, const std::filesystem::path& path);
TrainedModel LoadModel(const std::filesystem::path& path);

struct CvRow {
  ModelParams params;
  std::vector<double> fold_mae;
  double mean_mae = 0.0;
};

struct CvResult {
  std::size_t best_index = 0;
  std::vector<CvRow> rows;  // grid order
};

// Fold i holds the samples at positions p with p % folds == i in a seeded
// permutation. The grid point with the lowest mean fold MAE wins; ties go to
// the earlier point.
CvResult CvGridSearch(const Matrix& x, std::span<const double> y,
                      const std::vector<ModelParams>& grid, int folds,
                      std::uint64_t seed);

std::vector<int> FoldAssignment(std::size_t n, int folds, std::uint64_t seed);

// Delimiter-separated table: index, hyperparameters, per-fold MAE, mean.
void WriteCvTable(const CvResult& cv, std::ostream& out, char delimiter = ',');

struct ImportanceEntry {
  std::string name;
  double score = 0.0;
};

struct Importance {
  std::vector<ImportanceEntry> features;    // descending, ties by schema order
  std::vector<ImportanceEntry> categories;  // descending, ties by category order
  std::vector<std::int64_t> split_counts;   // schema order
};

// score(f) = (times f is a split feature across all trees) / n_estimators.
Importance FeatureImportance(const GbrtModel& m, const FeatureSchema& schema);
// Throws UsageError for non-GBRT models.
Importance FeatureImportance(const TrainedModel& m, const FeatureSchema& schema);

}  // namespace hlscong
