#include "hlscong/model.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "hlscong/metrics.hpp"
#include "hlscong/rng.hpp"

namespace hlscong {

using nlohmann::json;

std::string_view ModelKindName(ModelKind k) {
  switch (k) {
    case ModelKind::kLasso:
      return "lasso";
    case ModelKind::kGbrt:
      return "gbrt";
    case ModelKind::kMlp:
      return "mlp";
  }
  return "?";
}

std::optional<ModelKind> ParseModelKind(std::string_view name) {
  for (ModelKind k : kAllModelKinds) {
    if (ModelKindName(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view ModelKindDisplayName(ModelKind k) {
  switch (k) {
    case ModelKind::kLasso:
      return "Linear";
    case ModelKind::kGbrt:
      return "GBRT";
    case ModelKind::kMlp:
      return "ANN";
  }
  return "?";
}

ModelKind KindOf(const ModelParams& p) {
  return static_cast<ModelKind>(p.index());
}

json ParamsToJson(const ModelParams& p) {
  if (auto* l = std::get_if<LassoParams>(&p)) {
    return {{"alpha", l->alpha}, {"tol", l->tol}, {"max_iter", l->max_iter}};
  }
  if (auto* g = std::get_if<GbrtParams>(&p)) {
    return {{"n_estimators", g->n_estimators},
            {"learning_rate", g->learning_rate},
            {"max_depth", g->max_depth},
            {"min_samples_leaf", g->min_samples_leaf}};
  }
  const auto& m = std::get<MlpParams>(p);
  return {{"hidden", m.hidden},
          {"learning_rate", m.learning_rate},
          {"epochs", m.epochs},
          {"batch_size", m.batch_size}};
}

ModelParams ParamsFromJson(ModelKind kind, const json& j) {
  try {
    switch (kind) {
      case ModelKind::kLasso: {
        LassoParams p;
        p.alpha = j.value("alpha", p.alpha);
        p.tol = j.value("tol", p.tol);
        p.max_iter = j.value("max_iter", p.max_iter);
        return p;
      }
      case ModelKind::kGbrt: {
        GbrtParams p;
        p.n_estimators = j.value("n_estimators", p.n_estimators);
        p.learning_rate = j.value("learning_rate", p.learning_rate);
        p.max_depth = j.value("max_depth", p.max_depth);
        p.min_samples_leaf = j.value("min_samples_leaf", p.min_samples_leaf);
        return p;
      }
      case ModelKind::kMlp: {
        MlpParams p;
        p.hidden = j.value("hidden", p.hidden);
        p.learning_rate = j.value("learning_rate", p.learning_rate);
        p.epochs = j.value("epochs", p.epochs);
        p.batch_size = j.value("batch_size", p.batch_size);
        return p;
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed hyperparameters: ") + e.what());
  }
  throw DataError("unknown model kind");
}

std::vector<ModelParams> DefaultGrid(ModelKind kind) {
  std::vector<ModelParams> grid;
  switch (kind) {
    case ModelKind::kLasso:
      for (double a : {1e-4, 1e-3, 1e-2, 1e-1}) {
        LassoParams p;
        p.alpha = a;
        grid.emplace_back(p);
      }
      break;
    case ModelKind::kGbrt:
      for (int n : {100, 300}) {
        for (double lr : {0.05, 0.1}) {
          for (int d : {3, 5}) {
            grid.emplace_back(GbrtParams{n, lr, d, 5});
          }
        }
      }
      break;
    case ModelKind::kMlp:
      for (const std::vector<int>& layers :
           {std::vector<int>{64}, std::vector<int>{64, 32}}) {
        for (double lr : {1e-3, 1e-2}) {
          grid.emplace_back(MlpParams{layers, lr, 200, 32});
        }
      }
      break;
  }
  return grid;
}

TrainedModel FitModel(const ModelParams& params, const Matrix& x,
                      std::span<const double> y, std::uint64_t seed,
                      std::string schema_fingerprint, Target target) {
  TrainedModel m;
  m.kind = KindOf(params);
  m.hyperparams = params;
  m.schema_fingerprint = std::move(schema_fingerprint);
  m.target = target;
  m.seed = seed;
  if (m.kind == ModelKind::kGbrt) {
    m.parameters = FitGbrt(x, y, std::get<GbrtParams>(params));
    return m;
  }
  Matrix scaled = x;
  m.scaler = FitScaler(x);
  m.scaler->Apply(scaled);
  if (m.kind == ModelKind::kLasso) {
    m.parameters = FitLasso(scaled, y, std::get<LassoParams>(params));
  } else {
    m.parameters = FitMlp(scaled, y, std::get<MlpParams>(params), seed);
  }
  return m;
}

std::vector<double> Predict(const TrainedModel& m, const Matrix& x,
                            std::string_view fingerprint) {
  if (fingerprint != m.schema_fingerprint) {
    throw DataError("schema fingerprint mismatch: model expects " +
                    m.schema_fingerprint + ", features have " +
                    std::string(fingerprint));
  }
  std::vector<double> out;
  if (x.rows() == 0) return out;
  const Matrix* input = &x;
  Matrix scaled;
  if (m.scaler) {
    scaled = x;
    m.scaler->Apply(scaled);
    input = &scaled;
  }
  out.reserve(x.rows());
  std::visit(
      [&](const auto& model) {
        for (std::size_t i = 0; i < input->rows(); ++i) {
          out.push_back(model.Predict(input->row(i)));
        }
      },
      m.parameters);
  return out;
}

namespace {

json ParametersToJson(const TrainedModel& m) {
  if (auto* l = std::get_if<LassoModel>(&m.parameters)) {
    return {{"weights", l->weights},
            {"intercept", l->intercept},
            {"alpha", l->alpha}};
  }
  if (auto* g = std::get_if<GbrtModel>(&m.parameters)) {
    json trees = json::array();
    for (const auto& t : g->trees) {
      json nodes = json::array();
      for (const auto& n : t.nodes) {
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
      }
      trees.push_back(std::move(nodes));
    }
    return {{"init", g->init}, {"trees", trees}};
  }
  const auto& mlp = std::get<MlpModel>(m.parameters);
  json weights = json::array();
  for (const auto& w : mlp.weights) weights.push_back(w.data());
  return {{"layer_sizes", mlp.layer_sizes},
          {"weights", weights},
          {"biases", mlp.biases},
          {"y_mean", mlp.y_mean},
          {"y_scale", mlp.y_scale}};
}

void ParametersFromJson(TrainedModel& m, const json& j) {
  switch (m.kind) {
    case ModelKind::kLasso: {
      LassoModel l;
      l.weights = j.at("weights").get<std::vector<double>>();
      l.intercept = j.at("intercept").get<double>();
      l.alpha = j.at("alpha").get<double>();
      m.parameters = std::move(l);
      return;
    }
    case ModelKind::kGbrt: {
      GbrtModel g;
      g.init = j.at("init").get<double>();
      g.params = std::get<GbrtParams>(m.hyperparams);
      for (const json& jt : j.at("trees")) {
        RegressionTree t;
        for (const json& jn : jt) {
          TreeNode n;
          n.feature = jn.at(0).get<int>();
          n.threshold = jn.at(1).get<double>();
          n.left = jn.at(2).get<int>();
          n.right = jn.at(3).get<int>();
          n.value = jn.at(4).get<double>();
          t.nodes.push_back(n);
        }
        const int count = static_cast<int>(t.nodes.size());
        for (const auto& n : t.nodes) {
          if (n.feature >= 0 && (n.left <= 0 || n.left >= count ||
                                 n.right <= 0 || n.right >= count)) {
            throw DataError("gbrt tree has a dangling child index");
          }
        }
        if (t.nodes.empty()) throw DataError("gbrt tree has no nodes");
        g.trees.push_back(std::move(t));
      }
      m.parameters = std::move(g);
      return;
    }
    case ModelKind::kMlp: {
      MlpModel mlp;
      mlp.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
      const auto biases = j.at("biases").get<std::vector<std::vector<double>>>();
      const json& jw = j.at("weights");
      if (mlp.layer_sizes.size() < 2 ||
          jw.size() + 1 != mlp.layer_sizes.size() ||
          biases.size() != jw.size()) {
        throw DataError("mlp layer shapes do not chain");
      }
      for (std::size_t l = 0; l < jw.size(); ++l) {
        const auto rows = static_cast<std::size_t>(mlp.layer_sizes[l + 1]);
        const auto cols = static_cast<std::size_t>(mlp.layer_sizes[l]);
        Matrix w(rows, cols);
        w.data() = jw[l].get<std::vector<double>>();
        if (w.data().size() != rows * cols || biases[l].size() != rows) {
          throw DataError("mlp layer shapes do not chain");
        }
        mlp.weights.push_back(std::move(w));
      }
      mlp.biases = biases;
      mlp.y_mean = j.at("y_mean").get<double>();
      mlp.y_scale = j.at("y_scale").get<double>();
      mlp.params = std::get<MlpParams>(m.hyperparams);
      mlp.seed = m.seed;
      m.parameters = std::move(mlp);
      return;
    }
  }
}

}  // namespace

json ModelToJson(const TrainedModel& m) {
  json doc = {{"format", "hlscong-model"},
              {"version", std::string(kModelFormatVersion)},
              {"kind", std::string(ModelKindName(m.kind))},
              {"target", std::string(TargetName(m.target))},
              {"hyperparams", ParamsToJson(m.hyperparams)},
              {"parameters", ParametersToJson(m)},
              {"schema_fingerprint", m.schema_fingerprint},
              {"seed", m.seed}};
  doc["scaler"] = m.scaler ? json{{"mean", m.scaler->mean},
                                  {"stddev", m.scaler->stddev}}
                           : json(nullptr);
  doc["grid_index"] = m.grid_index ? json(*m.grid_index) : json(nullptr);
  doc["cv_score"] = m.cv_score ? json(*m.cv_score) : json(nullptr);
  return doc;
}

TrainedModel ModelFromJson(const json& doc) {
  try {
    if (doc.at("format") != "hlscong-model") {
      throw DataError("not a model file");
    }
    if (doc.at("version") != kModelFormatVersion) {
      throw DataError("model format version mismatch");
    }
    TrainedModel m;
    auto kind = ParseModelKind(doc.at("kind").get<std::string>());
    if (!kind) throw DataError("unknown model kind");
    m.kind = *kind;
    auto target = ParseTarget(doc.at("target").get<std::string>());
    if (!target) throw DataError("unknown target");
    m.target = *target;
    m.hyperparams = ParamsFromJson(m.kind, doc.at("hyperparams"));
    m.schema_fingerprint = doc.at("schema_fingerprint").get<std::string>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    if (const json& s = doc.at("scaler"); !s.is_null()) {
      m.scaler = Scaler{s.at("mean").get<std::vector<double>>(),
                        s.at("stddev").get<std::vector<double>>()};
    }
    if (const json& g = doc.at("grid_index"); !g.is_null()) {
      m.grid_index = g.get<std::size_t>();
    }
    if (const json& c = doc.at("cv_score"); !c.is_null()) {
      m.cv_score = c.get<double>();
    }
    ParametersFromJson(m, doc.at("parameters"));
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

void SaveModel(const TrainedModel& m, const std::filesystem::path& path) {
  WriteJsonFile(ModelToJson(m), path);
}

TrainedModel LoadModel(const std::filesystem::path& path) {
  try {
    return ModelFromJson(ReadJsonFile(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<int> FoldAssignment(std::size_t n, int folds, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.Shuffle(perm);
  std::vector<int> fold(n);
  for (std::size_t k = 0; k < n; ++k) {
    fold[perm[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
  }
  return fold;
}

CvResult CvGridSearch(const Matrix& x, std::span<const double> y,
                      const std::vector<ModelParams>& grid, int folds,
                      std::uint64_t seed) {
  if (grid.empty()) throw UsageError("grid search: empty grid");
  if (folds < 2) throw UsageError("grid search: need at least two folds");
  if (x.rows() < static_cast<std::size_t>(folds)) {
    throw DataError("grid search: fewer samples than folds");
  }
  const auto fold = FoldAssignment(x.rows(), folds, seed);
  std::vector<std::vector<std::size_t>> train_idx(static_cast<std::size_t>(folds));
  std::vector<std::vector<std::size_t>> valid_idx(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (int f = 0; f < folds; ++f) {
      (fold[i] == f ? valid_idx : train_idx)[static_cast<std::size_t>(f)].push_back(i);
    }
  }
  const std::vector<double> yv(y.begin(), y.end());

  CvResult result;
  for (const ModelParams& params : grid) {
    CvRow row{params, {}, 0.0};
    for (int f = 0; f < folds; ++f) {
      const auto& tr = train_idx[static_cast<std::size_t>(f)];
      const auto& va = valid_idx[static_cast<std::size_t>(f)];
      const Matrix xt = x.SelectRows(tr);
      const auto yt = SelectItems(yv, tr);
      const TrainedModel m = FitModel(params, xt, yt, seed, "", Target::kAvg);
      const auto pred = Predict(m, x.SelectRows(va), "");
      row.fold_mae.push_back(Mae(SelectItems(yv, va), pred));
    }
    row.mean_mae = std::accumulate(row.fold_mae.begin(), row.fold_mae.end(), 0.0) /
                   static_cast<double>(folds);
    result.rows.push_back(std::move(row));
  }
  for (std::size_t i = 1; i < result.rows.size(); ++i) {
    if (result.rows[i].mean_mae < result.rows[result.best_index].mean_mae) {
      result.best_index = i;
    }
  }
  return result;
}

void WriteCvTable(const CvResult& cv, std::ostream& out, char delimiter) {
  const std::size_t folds = cv.rows.empty() ? 0 : cv.rows.front().fold_mae.size();
  out << "index" << delimiter << "hyperparams";
  for (std::size_t f = 0; f < folds; ++f) out << delimiter << "fold" << f << "_mae";
  out << delimiter << "mean_mae" << delimiter << "selected\n";
  const auto old_precision = out.precision(10);
  for (std::size_t i = 0; i < cv.rows.size(); ++i) {
    const CvRow& r = cv.rows[i];
    std::string params = ParamsToJson(r.params).dump();
    // Quote so embedded delimiters survive.
    std::string quoted = "\"";
    for (char c : params) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    quoted += '"';
    out << i << delimiter << quoted;
    for (double m : r.fold_mae) out << delimiter << m;
    out << delimiter << r.mean_mae << delimiter << (i == cv.best_index ? 1 : 0)
        << '\n';
  }
  out.precision(old_precision);
}

Importance FeatureImportance(const GbrtModel& m, const FeatureSchema& schema) {
  Importance imp;
  imp.split_counts.assign(schema.size(), 0);
  for (const auto& t : m.trees) {
    for (const auto& n : t.nodes) {
      if (n.feature < 0) continue;
      if (static_cast<std::size_t>(n.feature) >= schema.size()) {
        throw DataError("model splits on a feature outside the schema");
      }
      ++imp.split_counts[static_cast<std::size_t>(n.feature)];
    }
  }
  const double denom = std::max<std::size_t>(m.trees.size(), 1);
  std::array<double, kNumFeatureCategories> cat{};
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const double score = static_cast<double>(imp.split_counts[f]) / denom;
    imp.features.push_back({schema.name(f), score});
    cat[static_cast<std::size_t>(schema.category(f))] += score;
  }
  for (int c = 0; c < kNumFeatureCategories; ++c) {
    imp.categories.push_back(
        {std::string(FeatureCategoryName(static_cast<FeatureCategory>(c))),
         cat[static_cast<std::size_t>(c)]});
  }
  auto by_score = [](const ImportanceEntry& a, const ImportanceEntry& b) {
    return a.score > b.score;
  };
  std::stable_sort(imp.features.begin(), imp.features.end(), by_score);
  std::stable_sort(imp.categories.begin(), imp.categories.end(), by_score);
  return imp;
}

Importance FeatureImportance(const TrainedModel& m, const FeatureSchema& schema) {
  const auto* g = std::get_if<GbrtModel>(&m.parameters);
  if (!g) {
    throw UsageError("feature importance needs a gbrt model, got " +
                     std::string(ModelKindName(m.kind)));
  }
  return FeatureImportance(*g, schema);
}

}  // namespace hlscong
