#pragma once

// Samples (feature vector + congestion labels), marginal-replica filtering,
// the seeded train/test split and z-score standardisation.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hlscong/bundle.hpp"
#include "hlscong/features.hpp"
#include "hlscong/matrix.hpp"

namespace hlscong {

enum class Target { kVert, kHoriz, kAvg };
inline constexpr std::array<Target, 3> kAllTargets = {Target::kVert,
                                                      Target::kHoriz,
                                                      Target::kAvg};
std::string_view TargetName(Target t);
std::optional<Target> ParseTarget(std::string_view name);

struct CongestionLabels {
  double vert = 0.0;
  double horiz = 0.0;
  double avg = 0.0;
  double get(Target t) const;
  bool operator==(const CongestionLabels&) const = default;
};

struct Sample {
  std::vector<double> features;
  std::string design;
  std::string op_id;
  std::string node;  // feature-vector owner (merged nodes share one vector)
  std::string function_id;
  std::optional<SourceLoc> source_loc;
  OpType op_type = OpType::kOther;
  CongestionLabels labels;
  std::optional<std::string> replica_group;
  std::optional<int> clb_x;
  std::optional<int> clb_y;
  double weight = 1.0;
  bool operator==(const Sample&) const = default;
};

struct Dataset {
  std::string schema_fingerprint;
  std::vector<std::string> provenance;  // design names
  std::uint64_t seed = 0;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  bool operator==(const Dataset&) const = default;
};

struct AssembleResult {
  Dataset dataset;
  std::size_t dropped_ops = 0;  // operations without any label record
  std::vector<std::string> warnings;
};

// Inner join of feature vectors and label records on op_id. An operation
// with several records yields several samples sharing one vector.
AssembleResult Assemble(const std::vector<FeatureVector>& vectors,
                        const std::vector<LabelRecord>& labels,
                        const std::string& design_name);

// Appends `more` to `into`; fingerprints must agree (an empty `into` adopts
// the fingerprint of `more`).
void Append(Dataset& into, const Dataset& more);

enum class FilterMode { kLabelDev, kMarginBand };
std::optional<FilterMode> ParseFilterMode(std::string_view name);
std::string_view FilterModeName(FilterMode m);

struct FilterOptions {
  FilterMode mode = FilterMode::kLabelDev;
  double k = 1.5;
  int group_min = 8;
  Target target = Target::kAvg;
  // margin_band only.
  int margin_tiles = 1;
  int grid_width = 0;
  int grid_height = 0;
};

struct FilterResult {
  Dataset kept;
  std::vector<Sample> removed;
  std::vector<std::size_t> removed_indices;  // into the input, ascending
  double removed_fraction = 0.0;
};

// Replica-group key of a sample: the explicit group if present, otherwise
// (source_loc, op_type); samples with neither have no group. Keys are
// scoped by design.
std::optional<std::string> ReplicaKey(const Sample& s);

FilterResult FilterMarginal(const Dataset& d, const FilterOptions& options);

struct SplitResult {
  Dataset train;
  Dataset test;
};

// Test size is round(n * test_frac), at least 1. Both halves keep the
// original sample order.
SplitResult Split(const Dataset& d, double test_frac, std::uint64_t seed);

// Test-set indices chosen by Split, sorted.
std::vector<std::size_t> SplitTestIndices(std::size_t n, double test_frac,
                                          std::uint64_t seed);

struct Scaler {
  std::vector<double> mean;
  std::vector<double> stddev;  // population; 0 marks a constant column

  void Apply(Matrix& x) const;
  bool operator==(const Scaler&) const = default;
};

Scaler FitScaler(const Matrix& x);

struct StandardizeResult {
  Matrix train;
  Matrix test;
  Scaler scaler;
};

StandardizeResult Standardize(const Matrix& train, const Matrix& test);

Matrix FeatureMatrix(const Dataset& d);
std::vector<double> TargetVector(const Dataset& d, Target t);

nlohmann::json DatasetToJson(const Dataset& d);
Dataset DatasetFromJson(const nlohmann::json& doc);
void SaveDataset(const Dataset& d, const std::filesystem::path& path);
Dataset LoadDataset(const std::filesystem::path& path);

}  // namespace hlscong
