#include "hlscong/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "hlscong/depgraph.hpp"
#include "hlscong/metrics.hpp"

namespace hlscong {

namespace {

template <typename T>
void Take(const nlohmann::json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw UsageError(std::string("config: bad value for '") + key + "'");
  }
}

}  // namespace

RunConfig RunConfigFromJson(const nlohmann::json& doc) {
  if (!doc.is_object()) throw UsageError("config: expected an object");
  static const std::set<std::string> kKeys = {
      "data", "models", "output", "seed", "filter", "grids",
      "folds", "test_frac", "exclude_ports"};
  for (const auto& [k, v] : doc.items()) {
    if (!kKeys.count(k)) throw UsageError("config: unknown key '" + k + "'");
  }
  RunConfig cfg;
  if (doc.contains("data")) cfg.data = doc["data"].get<std::string>();
  if (doc.contains("models")) cfg.models = doc["models"].get<std::string>();
  if (doc.contains("output")) cfg.output = doc["output"].get<std::string>();
  Take(doc, "seed", cfg.seed);
  Take(doc, "folds", cfg.folds);
  Take(doc, "test_frac", cfg.test_frac);
  Take(doc, "exclude_ports", cfg.exclude_ports);
  if (doc.contains("filter")) {
    const auto& f = doc["filter"];
    if (f.is_boolean()) {
      cfg.filter = f.get<bool>();
    } else if (f.is_object()) {
      Take(f, "enabled", cfg.filter);
      auto& o = cfg.filter_options;
      if (f.contains("mode")) {
        auto m = ParseFilterMode(f["mode"].get<std::string>());
        if (!m) throw UsageError("config: unknown filter mode");
        o.mode = *m;
      }
      if (f.contains("target")) {
        auto t = ParseTarget(f["target"].get<std::string>());
        if (!t) throw UsageError("config: unknown filter target");
        o.target = *t;
      }
      Take(f, "k", o.k);
      Take(f, "group_min", o.group_min);
      Take(f, "margin_tiles", o.margin_tiles);
      Take(f, "grid_width", o.grid_width);
      Take(f, "grid_height", o.grid_height);
    } else {
      throw UsageError("config: 'filter' must be a boolean or an object");
    }
  }
  if (doc.contains("grids")) {
    for (const auto& [name, points] : doc["grids"].items()) {
      auto kind = ParseModelKind(name);
      if (!kind) throw UsageError("config: unknown model kind '" + name + "'");
      if (!points.is_array()) throw UsageError("config: grid must be an array");
      std::vector<ModelParams> grid;
      for (const auto& p : points) grid.push_back(ParamsFromJson(*kind, p));
      cfg.grids[*kind] = std::move(grid);
    }
  }
  ValidateRunConfig(cfg);
  return cfg;
}

nlohmann::json RunConfigToJson(const RunConfig& cfg) {
  const auto& o = cfg.filter_options;
  nlohmann::json grids = nlohmann::json::object();
  for (const auto& [kind, grid] : cfg.grids) {
    auto& arr = grids[std::string(ModelKindName(kind))] = nlohmann::json::array();
    for (const auto& p : grid) arr.push_back(ParamsToJson(p));
  }
  return {{"data", cfg.data.string()},
          {"models", cfg.models.string()},
          {"output", cfg.output.string()},
          {"seed", cfg.seed},
          {"filter",
           {{"enabled", cfg.filter},
            {"mode", FilterModeName(o.mode)},
            {"target", TargetName(o.target)},
            {"k", o.k},
            {"group_min", o.group_min},
            {"margin_tiles", o.margin_tiles},
            {"grid_width", o.grid_width},
            {"grid_height", o.grid_height}}},
          {"grids", grids},
          {"folds", cfg.folds},
          {"test_frac", cfg.test_frac},
          {"exclude_ports", cfg.exclude_ports}};
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  try {
    return RunConfigFromJson(ReadJsonFile(path));
  } catch (const DataError& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
}

void ValidateRunConfig(const RunConfig& cfg) {
  if (cfg.folds < 2) throw UsageError("config: folds must be at least 2");
  if (!(cfg.test_frac > 0 && cfg.test_frac < 1)) {
    throw UsageError("config: test_frac must lie in (0, 1)");
  }
  if (cfg.filter_options.group_min < 1) {
    throw UsageError("config: filter group_min must be positive");
  }
  if (std::isnan(cfg.filter_options.k)) throw UsageError("config: filter k is NaN");
  for (const auto& [kind, grid] : cfg.grids) {
    if (grid.empty()) {
      throw UsageError("config: empty grid for " + std::string(ModelKindName(kind)));
    }
  }
}

std::vector<ModelParams> GridFor(const RunConfig& cfg, ModelKind kind) {
  auto it = cfg.grids.find(kind);
  return it == cfg.grids.end() ? DefaultGrid(kind) : it->second;
}

std::vector<CorpusEntry> FindCorpus(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError(dir.string() + ": not a directory");
  static constexpr std::string_view kBundle = ".bundle.json";
  std::vector<CorpusEntry> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string file = entry.path().filename().string();
    if (file.size() <= kBundle.size() ||
        file.compare(file.size() - kBundle.size(), kBundle.size(), kBundle) != 0) {
      continue;
    }
    CorpusEntry c;
    c.name = file.substr(0, file.size() - kBundle.size());
    c.bundle = entry.path();
    c.labels = dir / (c.name + ".labels.json");
    if (!fs::exists(c.labels)) {
      throw DataError(c.bundle.string() + ": no matching " + c.labels.filename().string());
    }
    out.push_back(std::move(c));
  }
  if (out.empty()) throw DataError(dir.string() + ": no *.bundle.json files");
  std::sort(out.begin(), out.end(),
            [](const CorpusEntry& a, const CorpusEntry& b) { return a.name < b.name; });
  return out;
}

AssembleResult IngestDesign(const DesignBundle& bundle,
                            const std::vector<LabelRecord>& labels,
                            const std::string& name, const ExtractOptions& options) {
  const DepGraph g = BuildGraph(bundle);
  return Assemble(ExtractAll(g, bundle, options), labels, name);
}

Dataset LoadData(const std::filesystem::path& path, const ExtractOptions& options,
                 std::vector<std::string>* warnings) {
  if (!std::filesystem::is_directory(path)) return LoadDataset(path);
  Dataset all;
  for (const auto& c : FindCorpus(path)) {
    const DesignBundle bundle = LoadDesignBundle(c.bundle);
    const auto labels = LoadLabels(c.labels, bundle);
    AssembleResult r = IngestDesign(bundle, labels, c.name, options);
    if (warnings) {
      for (auto& w : r.warnings) warnings->push_back(c.name + ": " + w);
      if (r.dropped_ops > 0) {
        warnings->push_back(c.name + ": " + std::to_string(r.dropped_ops) +
                            " operations without labels dropped");
      }
    }
    Append(all, r.dataset);
  }
  return all;
}

ProtocolResult RunProtocol(const Dataset& data, ModelKind kind, bool filter,
                           const RunConfig& cfg, std::span<const Target> targets,
                           std::ostream* log) {
  ValidateRunConfig(cfg);
  ProtocolResult result;
  result.kind = kind;
  result.filtered = filter;

  const auto test_idx = SplitTestIndices(data.size(), cfg.test_frac, cfg.seed);
  std::vector<char> in_test(data.size(), 0), removed(data.size(), 0);
  for (auto i : test_idx) in_test[i] = 1;
  if (filter) {
    const FilterResult f = FilterMarginal(data, cfg.filter_options);
    result.removed_fraction = f.removed_fraction;
    for (auto i : f.removed_indices) removed[i] = 1;
  }
  SplitResult split;
  for (Dataset* part : {&split.train, &split.test}) {
    part->schema_fingerprint = data.schema_fingerprint;
    part->provenance = data.provenance;
    part->seed = data.seed;
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (removed[i]) continue;
    (in_test[i] ? split.test : split.train).samples.push_back(data.samples[i]);
  }
  if (split.train.empty() || split.test.empty()) {
    throw DataError("protocol: empty training or test split");
  }
  result.n_train = split.train.size();
  result.n_test = split.test.size();
  const Matrix x_train = FeatureMatrix(split.train);
  const Matrix x_test = FeatureMatrix(split.test);
  const auto grid = GridFor(cfg, kind);

  for (Target t : targets) {
    TargetRun run;
    run.target = t;
    const auto y_train = TargetVector(split.train, t);
    const auto y_test = TargetVector(split.test, t);
    run.cv = CvGridSearch(x_train, y_train, grid, cfg.folds, cfg.seed);
    run.model = FitModel(grid[run.cv.best_index], x_train, y_train, cfg.seed,
                         data.schema_fingerprint, t);
    run.model.grid_index = run.cv.best_index;
    run.model.cv_score = run.cv.rows[run.cv.best_index].mean_mae;
    const auto pred = Predict(run.model, x_test, data.schema_fingerprint);
    run.test_mae = Mae(y_test, pred);
    run.test_medae = MedAe(y_test, pred);
    if (log) {
      *log << ModelKindName(kind) << (filter ? " filtered " : " unfiltered ")
           << TargetName(t) << ": grid point " << run.cv.best_index
           << " cv_mae=" << run.model.cv_score.value() << " test_mae=" << run.test_mae
           << " test_medae=" << run.test_medae << "\n";
    }
    result.targets.push_back(std::move(run));
  }
  return result;
}

void WriteEvaluationTable(const std::vector<ProtocolResult>& results,
                          std::ostream& out) {
  static constexpr std::array<ModelKind, 3> kRows = {ModelKind::kLasso, ModelKind::kMlp,
                                                     ModelKind::kGbrt};
  auto cell = [&](const ProtocolResult& r, Target t, bool medae) -> std::string {
    for (const auto& run : r.targets) {
      if (run.target != t) continue;
      std::ostringstream s;
      s << std::fixed << std::setprecision(2) << (medae ? run.test_medae : run.test_mae);
      return s.str();
    }
    return "-";
  };
  out << std::left << std::setw(8) << "Model" << std::setw(15) << "Filtering";
  for (Target t : kAllTargets) {
    out << std::right << std::setw(12) << (std::string(TargetName(t)) + " MAE")
        << std::setw(14) << (std::string(TargetName(t)) + " MedAE");
  }
  out << "\n";
  for (ModelKind k : kRows) {
    for (bool filtered : {false, true}) {
      for (const auto& r : results) {
        if (r.kind != k || r.filtered != filtered) continue;
        out << std::left << std::setw(8) << ModelKindDisplayName(k) << std::setw(15)
            << (filtered ? "Filtering" : "Not Filtering");
        for (Target t : kAllTargets) {
          out << std::right << std::setw(12) << cell(r, t, false) << std::setw(14)
              << cell(r, t, true);
        }
        out << "\n";
      }
    }
  }
  out << std::left;
}

}  // namespace hlscong
