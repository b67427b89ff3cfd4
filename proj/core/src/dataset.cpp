#include "hlscong/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

#include "hlscong/rng.hpp"
#include "hlscong/stats.hpp"

namespace hlscong {

using nlohmann::json;

std::string_view TargetName(Target t) {
  switch (t) {
    case Target::kVert:
      return "vert";
    case Target::kHoriz:
      return "horiz";
    case Target::kAvg:
      return "avg";
  }
  return "?";
}

std::optional<Target> ParseTarget(std::string_view name) {
  for (Target t : kAllTargets) {
    if (TargetName(t) == name) return t;
  }
  return std::nullopt;
}

double CongestionLabels::get(Target t) const {
  switch (t) {
    case Target::kVert:
      return vert;
    case Target::kHoriz:
      return horiz;
    case Target::kAvg:
      return avg;
  }
  return avg;
}

AssembleResult Assemble(const std::vector<FeatureVector>& vectors,
                        const std::vector<LabelRecord>& labels,
                        const std::string& design_name) {
  AssembleResult result;
  Dataset& d = result.dataset;
  d.schema_fingerprint = Schema().fingerprint();
  d.provenance.push_back(design_name);

  // op_id -> (vector index, member position)
  std::unordered_map<std::string, std::size_t> owner;
  std::size_t total_ops = 0;
  for (std::size_t v = 0; v < vectors.size(); ++v) {
    if (vectors[v].values.size() != Schema().size()) {
      throw DataError("feature vector '" + vectors[v].name +
                      "' does not match the feature schema (" +
                      std::to_string(vectors[v].values.size()) + " vs " +
                      std::to_string(Schema().size()) + " values)");
    }
    for (const auto& op : vectors[v].op_ids) {
      owner.emplace(op, v);
      ++total_ops;
    }
  }

  std::unordered_map<std::string, int> labelled;
  for (const LabelRecord& r : labels) {
    auto it = owner.find(r.op_id);
    if (it == owner.end()) {
      result.warnings.push_back("label for '" + r.op_id +
                                "' has no feature vector (port or unknown op)");
      continue;
    }
    const FeatureVector& fv = vectors[it->second];
    Sample s;
    s.features = fv.values;
    s.design = design_name;
    s.op_id = r.op_id;
    s.node = fv.name;
    s.function_id = fv.function_id;
    s.source_loc = fv.source_loc;
    s.op_type = fv.op_type;
    s.labels = {r.vert_cong_pct, r.horiz_cong_pct, r.avg_cong_pct};
    s.replica_group = r.replica_group;
    s.clb_x = r.clb_x;
    s.clb_y = r.clb_y;
    d.samples.push_back(std::move(s));
    ++labelled[r.op_id];
  }
  result.dropped_ops = total_ops - labelled.size();
  if (labels.empty()) {
    result.warnings.push_back("design '" + design_name +
                              "' has no label records; dataset is empty");
  }
  return result;
}

void Append(Dataset& into, const Dataset& more) {
  if (into.schema_fingerprint.empty()) {
    into.schema_fingerprint = more.schema_fingerprint;
  } else if (!more.schema_fingerprint.empty() &&
             into.schema_fingerprint != more.schema_fingerprint) {
    throw DataError("schema fingerprint mismatch: " + into.schema_fingerprint +
                    " vs " + more.schema_fingerprint);
  }
  into.provenance.insert(into.provenance.end(), more.provenance.begin(),
                         more.provenance.end());
  into.samples.insert(into.samples.end(), more.samples.begin(),
                      more.samples.end());
}

std::optional<FilterMode> ParseFilterMode(std::string_view name) {
  if (name == "label_dev") return FilterMode::kLabelDev;
  if (name == "margin_band") return FilterMode::kMarginBand;
  return std::nullopt;
}

std::string_view FilterModeName(FilterMode m) {
  return m == FilterMode::kLabelDev ? "label_dev" : "margin_band";
}

std::optional<std::string> ReplicaKey(const Sample& s) {
  if (s.replica_group) return s.design + "\x1f" + "g:" + *s.replica_group;
  if (s.source_loc) {
    return s.design + "\x1f" + "l:" + s.source_loc->file + ":" +
           std::to_string(s.source_loc->line) + ":" +
           std::string(OpTypeName(s.op_type));
  }
  return std::nullopt;
}

FilterResult FilterMarginal(const Dataset& d, const FilterOptions& options) {
  if (d.empty()) throw DataError("filter_marginal: dataset is empty");
  std::vector<char> drop(d.size(), 0);

  if (options.mode == FilterMode::kLabelDev) {
    if (!(std::isinf(options.k) && options.k > 0)) {
      std::map<std::string, std::vector<std::size_t>> groups;
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (auto key = ReplicaKey(d.samples[i])) groups[*key].push_back(i);
      }
      for (const auto& [key, members] : groups) {
        if (members.size() < static_cast<std::size_t>(options.group_min)) {
          continue;
        }
        std::vector<double> y;
        for (auto i : members) y.push_back(d.samples[i].labels.get(options.target));
        const double median = Median(y);
        const auto [q1, q3] = Quartiles(y);
        const double threshold = median - options.k * (q3 - q1);
        for (auto i : members) {
          if (d.samples[i].labels.get(options.target) < threshold) drop[i] = 1;
        }
      }
    }
  } else {
    if (options.grid_width <= 0 || options.grid_height <= 0) {
      throw DataError("margin_band filtering needs the device grid size");
    }
    for (std::size_t i = 0; i < d.size(); ++i) {
      const Sample& s = d.samples[i];
      if (!s.clb_x || !s.clb_y) {
        throw DataError("margin_band filtering needs tile coordinates; sample '" +
                        s.op_id + "' has none");
      }
      const int m = options.margin_tiles;
      if (*s.clb_x < m || *s.clb_y < m || *s.clb_x >= options.grid_width - m ||
          *s.clb_y >= options.grid_height - m) {
        drop[i] = 1;
      }
    }
  }

  FilterResult result;
  result.kept.schema_fingerprint = d.schema_fingerprint;
  result.kept.provenance = d.provenance;
  result.kept.seed = d.seed;
  for (std::size_t i = 0; i < d.size(); ++i) {
    (drop[i] ? result.removed : result.kept.samples).push_back(d.samples[i]);
    if (drop[i]) result.removed_indices.push_back(i);
  }
  result.removed_fraction =
      static_cast<double>(result.removed.size()) / static_cast<double>(d.size());
  return result;
}

std::vector<std::size_t> SplitTestIndices(std::size_t n, double test_frac,
                                          std::uint64_t seed) {
  if (!(test_frac > 0.0 && test_frac < 1.0)) {
    throw UsageError("test fraction must lie in (0, 1)");
  }
  std::size_t n_test =
      static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_frac));
  n_test = std::min(std::max<std::size_t>(n_test, 1), n);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.Shuffle(perm);
  perm.resize(n_test);
  std::sort(perm.begin(), perm.end());
  return perm;
}

SplitResult Split(const Dataset& d, double test_frac, std::uint64_t seed) {
  const auto test_idx = SplitTestIndices(d.size(), test_frac, seed);
  std::vector<char> in_test(d.size(), 0);
  for (auto i : test_idx) in_test[i] = 1;
  SplitResult r;
  for (Dataset* part : {&r.train, &r.test}) {
    part->schema_fingerprint = d.schema_fingerprint;
    part->provenance = d.provenance;
    part->seed = seed;
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    (in_test[i] ? r.test : r.train).samples.push_back(d.samples[i]);
  }
  return r;
}

Scaler FitScaler(const Matrix& x) {
  if (x.rows() == 0) throw DataError("cannot standardise an empty matrix");
  Scaler s;
  const std::size_t n = x.rows(), p = x.cols();
  s.mean.assign(p, 0.0);
  s.stddev.assign(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = x.row(i);
    for (std::size_t j = 0; j < p; ++j) s.mean[j] += r[j];
  }
  for (auto& m : s.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = x.row(i);
    for (std::size_t j = 0; j < p; ++j) {
      const double dlt = r[j] - s.mean[j];
      s.stddev[j] += dlt * dlt;
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    s.stddev[j] = std::sqrt(s.stddev[j] / static_cast<double>(n));
    // Columns whose spread is pure rounding noise count as constant.
    if (s.stddev[j] <= 1e-12 * std::max(1.0, std::abs(s.mean[j]))) {
      s.stddev[j] = 0.0;
    }
  }
  return s;
}

void Scaler::Apply(Matrix& x) const {
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      r[j] = stddev[j] == 0.0 ? 0.0 : (r[j] - mean[j]) / stddev[j];
    }
  }
}

StandardizeResult Standardize(const Matrix& train, const Matrix& test) {
  StandardizeResult r{train, test, FitScaler(train)};
  r.scaler.Apply(r.train);
  r.scaler.Apply(r.test);
  return r;
}

Matrix FeatureMatrix(const Dataset& d) {
  Matrix x(d.size(), Schema().size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& f = d.samples[i].features;
    if (f.size() != x.cols()) {
      throw DataError("sample '" + d.samples[i].op_id +
                      "' has the wrong feature count");
    }
    std::copy(f.begin(), f.end(), x.row(i).begin());
  }
  return x;
}

std::vector<double> TargetVector(const Dataset& d, Target t) {
  std::vector<double> y;
  y.reserve(d.size());
  for (const auto& s : d.samples) y.push_back(s.labels.get(t));
  return y;
}

json DatasetToJson(const Dataset& d) {
  json samples = json::array();
  for (const Sample& s : d.samples) {
    json j = {{"design", s.design},
              {"op_id", s.op_id},
              {"node", s.node},
              {"function_id", s.function_id},
              {"op_type", std::string(OpTypeName(s.op_type))},
              {"features", s.features},
              {"labels",
               {{"vert", s.labels.vert},
                {"horiz", s.labels.horiz},
                {"avg", s.labels.avg}}},
              {"weight", s.weight}};
    if (s.source_loc) {
      j["source_loc"] = {{"file", s.source_loc->file},
                         {"line", s.source_loc->line}};
    }
    if (s.replica_group) j["replica_group"] = *s.replica_group;
    if (s.clb_x) j["clb_x"] = *s.clb_x;
    if (s.clb_y) j["clb_y"] = *s.clb_y;
    samples.push_back(std::move(j));
  }
  json names = json::array();
  for (const auto& e : Schema().entries()) names.push_back(e.name);
  return {{"format", "hlscong-dataset"},
          {"schema_version", "1"},
          {"schema_fingerprint", d.schema_fingerprint},
          {"feature_names", names},
          {"provenance", d.provenance},
          {"seed", d.seed},
          {"samples", samples}};
}

Dataset DatasetFromJson(const json& doc) {
  try {
    if (doc.at("format") != "hlscong-dataset") {
      throw DataError("not a dataset cache file");
    }
    if (doc.at("schema_version") != "1") {
      throw DataError("dataset schema-version mismatch");
    }
    Dataset d;
    d.schema_fingerprint = doc.at("schema_fingerprint").get<std::string>();
    const auto names = doc.at("feature_names").get<std::vector<std::string>>();
    if (SchemaFingerprint(names) != d.schema_fingerprint) {
      throw DataError("dataset fingerprint does not match its feature names");
    }
    d.provenance = doc.at("provenance").get<std::vector<std::string>>();
    d.seed = doc.at("seed").get<std::uint64_t>();
    for (const json& j : doc.at("samples")) {
      Sample s;
      s.design = j.at("design").get<std::string>();
      s.op_id = j.at("op_id").get<std::string>();
      s.node = j.at("node").get<std::string>();
      s.function_id = j.at("function_id").get<std::string>();
      auto type = ParseOpType(j.at("op_type").get<std::string>());
      if (!type) throw DataError("unknown op_type in sample '" + s.op_id + "'");
      s.op_type = *type;
      s.features = j.at("features").get<std::vector<double>>();
      if (s.features.size() != names.size()) {
        throw DataError("sample '" + s.op_id + "' has the wrong feature count");
      }
      const json& l = j.at("labels");
      s.labels = {l.at("vert").get<double>(), l.at("horiz").get<double>(),
                  l.at("avg").get<double>()};
      s.weight = j.at("weight").get<double>();
      if (auto it = j.find("source_loc"); it != j.end()) {
        s.source_loc = SourceLoc{it->at("file").get<std::string>(),
                                 it->at("line").get<int>()};
      }
      if (auto it = j.find("replica_group"); it != j.end()) {
        s.replica_group = it->get<std::string>();
      }
      if (auto it = j.find("clb_x"); it != j.end()) s.clb_x = it->get<int>();
      if (auto it = j.find("clb_y"); it != j.end()) s.clb_y = it->get<int>();
      d.samples.push_back(std::move(s));
    }
    return d;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed dataset cache: ") + e.what());
  }
}

void SaveDataset(const Dataset& d, const std::filesystem::path& path) {
  WriteJsonFile(DatasetToJson(d), path);
}

Dataset LoadDataset(const std::filesystem::path& path) {
  try {
    return DatasetFromJson(ReadJsonFile(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace hlscong
