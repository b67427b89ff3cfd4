#pragma once

// Prediction-phase front end: per-operation predictions for a new bundle and
// their aggregation into source-code regions with hint tags.

#include <array>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hlscong/bundle.hpp"
#include "hlscong/dataset.hpp"
#include "hlscong/depgraph.hpp"
#include "hlscong/model.hpp"

namespace hlscong {

struct OpPrediction {
  std::string op_id;
  std::string node;  // owning graph node; merged members share one
  std::string function_id;
  std::optional<SourceLoc> source_loc;
  OpType op_type = OpType::kOther;
  CongestionLabels predicted;
};

// One model per target. Throws UsageError when a target has no model and
// DataError on a schema fingerprint mismatch.
using ModelSet = std::map<Target, TrainedModel>;

// Predictions for every operation of every non-port node, in bundle order.
std::vector<OpPrediction> PredictDesign(const DesignBundle& bundle,
                                        const ModelSet& models,
                                        const ExtractOptions& options = {});

inline constexpr std::string_view kHintNotInline = "consider-not-inline";
inline constexpr std::string_view kHintInputReplication =
    "consider-input-replication";
inline constexpr std::string_view kHintMuxPressure = "reduce-mux-pressure";

inline constexpr std::string_view kUnknownFile = "(unknown)";

struct RegionReport {
  std::string file;  // kUnknownFile for operations without a location
  std::string function_id;
  int first_line = 0;
  int last_line = 0;
  CongestionLabels max;
  CongestionLabels mean;
  std::size_t op_count = 0;
  std::vector<std::string> top_ops;  // up to five, by the ranking target
  std::vector<std::string> hints;
  std::vector<std::string> op_ids;   // all members
};

struct LocalizeOptions {
  std::size_t top_k = 10;
  Target target = Target::kAvg;
};

// Groups operations by (file, function, line), merges runs of adjacent
// lines into ranges and returns the top_k regions ordered by descending max
// of the ranking target (ties by file, then first line).
std::vector<RegionReport> Localize(const std::vector<OpPrediction>& preds,
                                   const DesignBundle& bundle,
                                   const LocalizeOptions& options = {});

void WriteReportText(const std::vector<RegionReport>& regions, Target target,
                     std::ostream& out);
nlohmann::json ReportToJson(const std::vector<RegionReport>& regions,
                            Target target);
void WriteReportCsv(const std::vector<RegionReport>& regions, std::ostream& out);

}  // namespace hlscong
