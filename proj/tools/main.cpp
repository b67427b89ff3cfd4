// hlscong: command-line front end.
//
// Exit codes: 0 success, 1 usage, 2 data/validation, 3 training failure.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hlscong/bundle.hpp"
#include "hlscong/dataset.hpp"
#include "hlscong/depgraph.hpp"
#include "hlscong/features.hpp"
#include "hlscong/model.hpp"
#include "hlscong/pipeline.hpp"
#include "hlscong/report.hpp"
#include "hlscong/synthoracle.hpp"

namespace fs = std::filesystem;
using namespace hlscong;

namespace {

// Options shared by the pipeline subcommands. Flags override the config.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> folds;
  std::optional<double> test_frac;
  bool no_filter = false;
  std::string filter_mode;
  std::optional<double> filter_k;
  bool exclude_ports = false;

  void Attach(CLI::App* app) {
    app->add_option("--config", config, "run configuration file")
        ->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "seed for every stochastic stage");
    app->add_option("--folds", folds, "cross-validation folds");
    app->add_option("--test-frac", test_frac, "held-out test fraction");
    app->add_flag("--no-filter", no_filter, "skip marginal-replica filtering");
    app->add_option("--filter-mode", filter_mode, "label_dev or margin_band");
    app->add_option("--filter-k", filter_k, "IQR multiplier for label_dev");
    app->add_flag("--exclude-ports", exclude_ports,
                  "drop port edges from graph features");
  }

  RunConfig Resolve() const {
    RunConfig cfg = config.empty() ? RunConfig{} : LoadRunConfig(config);
    if (seed) cfg.seed = *seed;
    if (folds) cfg.folds = *folds;
    if (test_frac) cfg.test_frac = *test_frac;
    if (no_filter) cfg.filter = false;
    if (!filter_mode.empty()) {
      auto m = ParseFilterMode(filter_mode);
      if (!m) throw UsageError("unknown filter mode '" + filter_mode + "'");
      cfg.filter_options.mode = *m;
    }
    if (filter_k) cfg.filter_options.k = *filter_k;
    if (exclude_ports) cfg.exclude_ports = true;
    ValidateRunConfig(cfg);
    return cfg;
  }
};

ExtractOptions ExtractFrom(const RunConfig& cfg) {
  ExtractOptions o;
  o.exclude_ports = cfg.exclude_ports;
  return o;
}

void RequirePath(const fs::path& p, const char* what) {
  if (p.empty()) throw UsageError(std::string(what) + " path is required");
  if (!fs::exists(p)) throw DataError(p.string() + ": no such file or directory");
}

std::pair<int, int> ParseGrid(const std::string& s) {
  const auto x = s.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(s);
    std::size_t used = 0;
    const int w = std::stoi(s.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(s);
    const int h = std::stoi(s.substr(x + 1), &used);
    if (used != s.size() - x - 1) throw std::invalid_argument(s);
    return {w, h};
  } catch (const std::logic_error&) {
    throw UsageError("--grid expects WxH, got '" + s + "'");
  }
}

std::vector<ModelKind> ParseKinds(const std::string& s) {
  if (s == "all") return {ModelKind::kLasso, ModelKind::kMlp, ModelKind::kGbrt};
  std::vector<ModelKind> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto k = ParseModelKind(item);
    if (!k) throw UsageError("unknown model kind '" + item + "'");
    out.push_back(*k);
  }
  if (out.empty()) throw UsageError("no model kind given");
  return out;
}

std::string ModelFileName(ModelKind k, Target t) {
  return std::string(ModelKindName(k)) + "_" + std::string(TargetName(t)) +
         ".model.json";
}

ModelSet LoadModelSet(const fs::path& dir, ModelKind kind) {
  RequirePath(dir, "models");
  ModelSet set;
  for (Target t : kAllTargets) {
    const fs::path p = dir / ModelFileName(kind, t);
    if (!fs::exists(p)) throw DataError(p.string() + ": model file missing");
    set.emplace(t, LoadModel(p));
  }
  return set;
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HLS routing-congestion prediction toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", [] {
    std::ostringstream s;
    s << "hlscong 0.1.0\n"
      << "feature-schema " << Schema().fingerprint() << " (" << Schema().size()
      << " features)\n"
      << "bundle-format " << kBundleSchemaVersion << "\n"
      << "dataset-format 1\n"
      << "model-format " << kModelFormatVersion << "\n"
      << "report-format 1";
    return s.str();
  });

  // synth-gen
  auto* gen = app.add_subcommand("synth-gen", "generate synthetic designs with oracle labels");
  std::uint64_t gen_seed = 1;
  int gen_designs = 10;
  std::string gen_grid = "auto";
  std::string gen_out;
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--designs", gen_designs, "number of designs");
  gen->add_option("--grid", gen_grid, "tile grid WxH, or auto to size per design");
  gen->add_option("--out", gen_out, "output directory")->required();

  // ingest
  auto* ingest = app.add_subcommand("ingest", "assemble a dataset cache from bundles and labels");
  Common ingest_opts;
  std::string ingest_data, ingest_out;
  ingest->add_option("--data", ingest_data, "corpus directory")->required();
  ingest->add_option("--out", ingest_out, "dataset cache file")->required();
  ingest->add_option("--config", ingest_opts.config, "run configuration file")
      ->check(CLI::ExistingFile);
  ingest->add_flag("--exclude-ports", ingest_opts.exclude_ports, "drop port edges");

  // features
  auto* feat = app.add_subcommand("features", "dump feature vectors or the schema");
  std::string feat_bundle, feat_out, feat_dot;
  bool feat_schema = false, feat_ports = false;
  feat->add_option("--bundle", feat_bundle, "design bundle");
  feat->add_option("--out", feat_out, "CSV output (default stdout)");
  feat->add_option("--graph-dump", feat_dot, "write the dependency graph as DOT");
  feat->add_flag("--schema", feat_schema, "print the feature schema");
  feat->add_flag("--exclude-ports", feat_ports, "drop port edges");

  // train
  auto* train = app.add_subcommand("train", "fit models for all three targets");
  Common train_opts;
  train_opts.Attach(train);
  std::string train_data, train_out, train_kind = "gbrt";
  train->add_option("--data", train_data, "corpus directory or dataset cache");
  train->add_option("--model", train_kind, "lasso, mlp, gbrt, a comma list or all");
  train->add_option("--out", train_out, "model directory");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "test-set MAE/MedAE table with and without filtering");
  Common eval_opts;
  eval_opts.Attach(eval);
  std::string eval_data, eval_kind = "all", eval_json;
  eval->add_option("--data", eval_data, "corpus directory or dataset cache");
  eval->add_option("--model", eval_kind, "model kinds to evaluate");
  eval->add_option("--json", eval_json, "also write results as JSON");

  // importance
  auto* imp = app.add_subcommand("importance", "split-count feature importance of a GBRT model");
  std::string imp_model, imp_csv;
  std::size_t imp_top = 20;
  imp->add_option("--model", imp_model, "GBRT model file")->required();
  imp->add_option("--top", imp_top, "features to print");
  imp->add_option("--csv", imp_csv, "write the full ranking as CSV");

  // predict / report
  auto* pred = app.add_subcommand("predict", "per-operation congestion predictions");
  auto* rep = app.add_subcommand("report", "localize predicted congestion to source regions");
  std::string pr_bundle, pr_models, pr_kind = "gbrt", pr_out;
  bool pr_ports = false;
  for (auto* sub : {pred, rep}) {
    sub->add_option("--bundle", pr_bundle, "design bundle")->required();
    sub->add_option("--models", pr_models, "model directory")->required();
    sub->add_option("--model", pr_kind, "model kind");
    sub->add_flag("--exclude-ports", pr_ports, "drop port edges (must match training)");
  }
  pred->add_option("--out", pr_out, "CSV output (default stdout)");
  std::size_t rep_top = 10;
  std::string rep_target = "avg", rep_json, rep_csv;
  rep->add_option("--top-k", rep_top, "regions to report");
  rep->add_option("--target", rep_target, "vert, horiz or avg");
  rep->add_option("--json", rep_json, "structured report file");
  rep->add_option("--csv", rep_csv, "ranked region CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      if (gen_designs < 1) throw UsageError("--designs must be positive");
      const auto [w, h] = gen_grid == "auto" ? std::pair<int, int>{0, 0} : ParseGrid(gen_grid);
      fs::create_directories(gen_out);
      for (int d = 0; d < gen_designs; ++d) {
        GenConfig cfg;
        char name[32];
        std::snprintf(name, sizeof name, "design_%03d", d);
        cfg.name = name;
        cfg.seed = gen_seed * 1000003ULL + static_cast<std::uint64_t>(d);
        cfg.grid_width = w;
        cfg.grid_height = h;
        const SynthDesign design = SynthesizeDesign(cfg);
        SaveDesignBundle(design.bundle, fs::path(gen_out) / (cfg.name + ".bundle.json"));
        SaveLabels(design.labels, fs::path(gen_out) / (cfg.name + ".labels.json"));
        std::cerr << cfg.name << ": " << design.bundle.operations().size()
                  << " operations on a " << design.grid_width << "x" << design.grid_height
                  << " grid\n";
      }
      return 0;
    }

    if (*ingest) {
      RequirePath(ingest_data, "--data");
      const RunConfig cfg = ingest_opts.Resolve();
      std::vector<std::string> warnings;
      Dataset d = LoadData(ingest_data, ExtractFrom(cfg), &warnings);
      d.seed = cfg.seed;
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      SaveDataset(d, ingest_out);
      std::cerr << d.size() << " samples from " << d.provenance.size() << " designs\n";
      return 0;
    }

    if (*feat) {
      if (feat_schema) {
        std::cout << "# fingerprint " << Schema().fingerprint() << "\n";
        for (int c = 0; c < kNumFeatureCategories; ++c) {
          const auto cat = static_cast<FeatureCategory>(c);
          std::cout << "# " << FeatureCategoryName(cat) << ": " << Schema().CountIn(cat)
                    << "\n";
        }
        std::cout << "# total: " << Schema().size() << "\n";
        for (std::size_t i = 0; i < Schema().size(); ++i) {
          std::cout << Schema().name(i) << "," << FeatureCategoryName(Schema().category(i))
                    << "\n";
        }
        if (feat_bundle.empty()) return 0;
      }
      RequirePath(feat_bundle, "--bundle");
      const DesignBundle bundle = LoadDesignBundle(feat_bundle);
      const DepGraph g = BuildGraph(bundle);
      if (!feat_dot.empty()) {
        std::ostringstream dot;
        WriteDot(g, dot);
        WriteText(feat_dot, dot.str());
      }
      ExtractOptions o;
      o.exclude_ports = feat_ports;
      const auto vectors = ExtractAll(g, bundle, o);
      std::ostringstream csv;
      WriteFeatureMatrix(vectors, csv);
      if (feat_out.empty()) {
        std::cout << csv.str();
      } else {
        WriteText(feat_out, csv.str());
      }
      return 0;
    }

    if (*train) {
      const RunConfig cfg = train_opts.Resolve();
      const fs::path data = train_data.empty() ? cfg.data : fs::path(train_data);
      const fs::path out = train_out.empty() ? cfg.models : fs::path(train_out);
      RequirePath(data, "--data");
      if (out.empty()) throw UsageError("--out path is required");
      const auto kinds = ParseKinds(train_kind);
      std::vector<std::string> warnings;
      const Dataset d = LoadData(data, ExtractFrom(cfg), &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      nlohmann::json summary = nlohmann::json::array();
      for (ModelKind kind : kinds) {
        const auto result = RunProtocol(d, kind, cfg.filter, cfg, kAllTargets, &std::cerr);
        for (const auto& run : result.targets) {
          SaveModel(run.model, out / ModelFileName(kind, run.target));
          std::ostringstream table;
          WriteCvTable(run.cv, table);
          const std::string stem = std::string(ModelKindName(kind)) + "_" +
                                   std::string(TargetName(run.target));
          WriteText(out / (stem + ".cv.csv"), table.str());
          summary.push_back({{"model", ModelKindName(kind)},
                             {"target", TargetName(run.target)},
                             {"filtered", result.filtered},
                             {"removed_fraction", result.removed_fraction},
                             {"n_train", result.n_train},
                             {"n_test", result.n_test},
                             {"grid_index", run.cv.best_index},
                             {"cv_mae", run.cv.rows[run.cv.best_index].mean_mae},
                             {"test_mae", run.test_mae},
                             {"test_medae", run.test_medae}});
        }
      }
      WriteJsonFile({{"config", RunConfigToJson(cfg)}, {"runs", summary}},
                    out / "train_summary.json");
      return 0;
    }

    if (*eval) {
      const RunConfig cfg = eval_opts.Resolve();
      const fs::path data = eval_data.empty() ? cfg.data : fs::path(eval_data);
      RequirePath(data, "--data");
      const auto kinds = ParseKinds(eval_kind);
      std::vector<std::string> warnings;
      const Dataset d = LoadData(data, ExtractFrom(cfg), &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      std::vector<ProtocolResult> results;
      for (ModelKind kind : kinds) {
        for (bool filtered : {false, true}) {
          results.push_back(RunProtocol(d, kind, filtered, cfg, kAllTargets, &std::cerr));
        }
      }
      WriteEvaluationTable(results, std::cout);
      if (!eval_json.empty()) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : results) {
          for (const auto& run : r.targets) {
            rows.push_back({{"model", ModelKindDisplayName(r.kind)},
                            {"filtering", r.filtered},
                            {"removed_fraction", r.removed_fraction},
                            {"target", TargetName(run.target)},
                            {"mae", run.test_mae},
                            {"medae", run.test_medae}});
          }
        }
        WriteJsonFile({{"seed", cfg.seed}, {"rows", rows}}, eval_json);
      }
      return 0;
    }

    if (*imp) {
      const TrainedModel m = LoadModel(imp_model);
      const Importance im = FeatureImportance(m, Schema());
      std::cout << "category,score\n";
      for (const auto& c : im.categories) std::cout << c.name << "," << c.score << "\n";
      std::cout << "\nrank,feature,score\n";
      for (std::size_t i = 0; i < std::min(imp_top, im.features.size()); ++i) {
        std::cout << i + 1 << "," << im.features[i].name << "," << im.features[i].score
                  << "\n";
      }
      if (!imp_csv.empty()) {
        std::ostringstream s;
        s << "rank,feature,score,split_count\n";
        for (std::size_t i = 0; i < im.features.size(); ++i) {
          const auto idx = *Schema().IndexOf(im.features[i].name);
          s << i + 1 << "," << im.features[i].name << "," << im.features[i].score << ","
            << im.split_counts[idx] << "\n";
        }
        WriteText(imp_csv, s.str());
      }
      return 0;
    }

    if (*pred || *rep) {
      auto kind = ParseModelKind(pr_kind);
      if (!kind) throw UsageError("unknown model kind '" + pr_kind + "'");
      RequirePath(pr_bundle, "--bundle");
      RequirePath(pr_models, "--models");
      const DesignBundle bundle = LoadDesignBundle(pr_bundle);
      const ModelSet models = LoadModelSet(pr_models, *kind);
      ExtractOptions o;
      o.exclude_ports = pr_ports;
      const auto preds = PredictDesign(bundle, models, o);
      if (*pred) {
        std::ostringstream s;
        s << "op_id,node,function_id,file,line,vert,horiz,avg\n" << std::setprecision(17);
        for (const auto& p : preds) {
          s << p.op_id << "," << p.node << "," << p.function_id << ","
            << (p.source_loc ? p.source_loc->file : "") << ","
            << (p.source_loc ? std::to_string(p.source_loc->line) : "") << ","
            << p.predicted.vert << "," << p.predicted.horiz << "," << p.predicted.avg
            << "\n";
        }
        if (pr_out.empty()) {
          std::cout << s.str();
        } else {
          WriteText(pr_out, s.str());
        }
        return 0;
      }
      auto target = ParseTarget(rep_target);
      if (!target) throw UsageError("unknown target '" + rep_target + "'");
      LocalizeOptions lo;
      lo.top_k = rep_top;
      lo.target = *target;
      const auto regions = Localize(preds, bundle, lo);
      WriteReportText(regions, *target, std::cout);
      if (!rep_json.empty()) WriteJsonFile(ReportToJson(regions, *target), rep_json);
      if (!rep_csv.empty()) {
        std::ostringstream s;
        WriteReportCsv(regions, s);
        WriteText(rep_csv, s.str());
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::kUsage:
        return 1;
      case ErrorKind::kData:
        return 2;
      case ErrorKind::kTraining:
        return 3;
    }
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
