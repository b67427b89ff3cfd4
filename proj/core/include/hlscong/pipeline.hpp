#pragma once

// Run configuration and the train/evaluate protocol shared by the CLI and
// the test suites: assemble -> split -> filter (optional) -> k-fold grid
// search -> refit on the full training split -> test MAE / MedAE.
//
// The split is drawn on the unfiltered dataset, and filtering then removes
// marginal samples from both halves. Filtered and unfiltered runs with the
// same seed therefore see the same partition of the surviving samples.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hlscong/dataset.hpp"
#include "hlscong/model.hpp"

namespace hlscong {

struct RunConfig {
  std::filesystem::path data;     // corpus directory or dataset cache
  std::filesystem::path models;   // model directory
  std::filesystem::path output;   // reports, tables
  std::uint64_t seed = 1;
  bool filter = true;
  FilterOptions filter_options;
  std::map<ModelKind, std::vector<ModelParams>> grids;  // missing -> DefaultGrid
  int folds = 10;
  double test_frac = 0.2;
  bool exclude_ports = false;
};

// Unknown keys are rejected; missing keys keep their defaults.
RunConfig RunConfigFromJson(const nlohmann::json& doc);
nlohmann::json RunConfigToJson(const RunConfig& cfg);
RunConfig LoadRunConfig(const std::filesystem::path& path);
// Throws UsageError for out-of-range numeric settings.
void ValidateRunConfig(const RunConfig& cfg);

std::vector<ModelParams> GridFor(const RunConfig& cfg, ModelKind kind);

struct CorpusEntry {
  std::string name;
  std::filesystem::path bundle;
  std::filesystem::path labels;
};

// Every `<name>.bundle.json` in `dir` paired with `<name>.labels.json`,
// sorted by name. Throws DataError when a pair is incomplete or none exist.
std::vector<CorpusEntry> FindCorpus(const std::filesystem::path& dir);

AssembleResult IngestDesign(const DesignBundle& bundle,
                            const std::vector<LabelRecord>& labels,
                            const std::string& name,
                            const ExtractOptions& options = {});

// A dataset cache file or a corpus directory. Warnings (dropped operations
// and the like) are appended to `warnings` when given.
Dataset LoadData(const std::filesystem::path& path, const ExtractOptions& options,
                 std::vector<std::string>* warnings = nullptr);

struct TargetRun {
  Target target = Target::kAvg;
  TrainedModel model;
  CvResult cv;
  double test_mae = 0.0;
  double test_medae = 0.0;
};

struct ProtocolResult {
  ModelKind kind = ModelKind::kGbrt;
  bool filtered = false;
  double removed_fraction = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::vector<TargetRun> targets;
};

ProtocolResult RunProtocol(const Dataset& data, ModelKind kind, bool filter,
                           const RunConfig& cfg,
                           std::span<const Target> targets = kAllTargets,
                           std::ostream* log = nullptr);

// Rows {Linear, ANN, GBRT} x {Not Filtering, Filtering}, MAE and MedAE per
// target. Missing combinations are left out.
void WriteEvaluationTable(const std::vector<ProtocolResult>& results,
                          std::ostream& out);

}  // namespace hlscong
