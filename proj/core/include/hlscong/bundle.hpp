#pragma once

// On-disk data model for one HLS design export and its congestion labels.
//
// A DesignBundle is what an HLS back-end adapter (or the synthetic oracle)
// emits: operations with their pre-characterised metrics and schedule,
// weighted dependency edges, interface ports, per-function stats and
// design-wide globals. Everything is validated on load; a bundle that made it
// through LoadDesignBundle satisfies every invariant documented below.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "hlscong/common.hpp"

namespace hlscong {

inline constexpr std::string_view kBundleSchemaVersion = "1";

// Closed operator vocabulary. `kOther` absorbs everything else so the
// feature schema keeps a fixed width.
enum class OpType : int {
  kAdd = 0,
  kSub,
  kMul,
  kDiv,
  kIcmp,
  kSelect,
  kXor,
  kAnd,
  kOr,
  kShift,
  kLoad,
  kStore,
  kPhi,
  kCall,
  kOther,
};
inline constexpr int kNumOpTypes = 15;

std::string_view OpTypeName(OpType t);
std::optional<OpType> ParseOpType(std::string_view name);

struct SourceLoc {
  std::string file;
  int line = 0;
  auto operator<=>(const SourceLoc&) const = default;
};

struct Operation {
  std::string op_id;
  OpType op_type = OpType::kOther;
  int bitwidth = 1;
  double delay_ns = 0.0;
  int latency_cycles = 0;
  int start_state = 0;
  int end_state = 0;
  ResourceUsage resource_usage;
  std::optional<std::string> rtl_instance;
  std::string function_id;
  std::optional<SourceLoc> source_loc;
  bool operator==(const Operation&) const = default;
};

struct Edge {
  std::string src;
  std::string dst;
  int wire_count = 0;
  bool operator==(const Edge&) const = default;
};

struct FunctionStats {
  std::string function_id;
  ResourceUsage resource_usage;
  double target_clock_ns = 0.0;
  double estimated_clock_ns = 0.0;
  double clock_uncertainty_ns = 0.0;
  bool is_top = false;
  bool operator==(const FunctionStats&) const = default;
};

struct MemoryStats {
  std::int64_t words = 0;
  std::int64_t banks = 0;
  std::int64_t bits = 0;
  std::int64_t primitives = 0;  // words * bits * banks
  bool operator==(const MemoryStats&) const = default;
};

struct MuxStats {
  std::int64_t count = 0;
  std::int64_t resource_usage = 0;  // LUTs spent on multiplexers
  std::int64_t max_input_size = 0;
  std::int64_t max_bitwidth = 0;
  bool operator==(const MuxStats&) const = default;
};

struct GlobalStats {
  std::vector<MemoryStats> memories;
  MuxStats muxes;
  ResourceUsage device_resources;
  bool operator==(const GlobalStats&) const = default;
};

struct PortDecl {
  std::string port_id;
  std::vector<std::string> connected_ops;
  int bitwidth = 1;
  bool operator==(const PortDecl&) const = default;
};

struct LabelRecord {
  std::string op_id;
  double vert_cong_pct = 0.0;
  double horiz_cong_pct = 0.0;
  double avg_cong_pct = 0.0;
  std::optional<int> clb_x;
  std::optional<int> clb_y;
  std::optional<std::string> replica_group;
  bool operator==(const LabelRecord&) const = default;
};

inline constexpr double kLabelAvgTolerance = 1e-9;

class DesignBundle {
 public:
  DesignBundle() = default;
  DesignBundle(std::vector<Operation> operations, std::vector<Edge> edges,
               std::vector<PortDecl> ports,
               std::vector<FunctionStats> functions, GlobalStats globals);

  const std::vector<Operation>& operations() const { return operations_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<PortDecl>& ports() const { return ports_; }
  const std::vector<FunctionStats>& functions() const { return functions_; }
  const GlobalStats& globals() const { return globals_; }

  // Index into operations(), or nullopt.
  std::optional<std::size_t> FindOp(std::string_view op_id) const;
  const FunctionStats* FindFunction(std::string_view function_id) const;
  const FunctionStats& TopFunction() const;

  // Equality after canonical ordering (operations, edges, ports and
  // functions sorted by identifier).
  bool SemanticallyEqual(const DesignBundle& other) const;

 private:
  void Validate();

  std::vector<Operation> operations_;
  std::vector<Edge> edges_;
  std::vector<PortDecl> ports_;
  std::vector<FunctionStats> functions_;
  GlobalStats globals_;
  std::unordered_map<std::string, std::size_t> op_index_;
  std::unordered_map<std::string, std::size_t> function_index_;
  std::size_t top_ = 0;
};

// Parsing. Every failure throws DataError naming the offending location
// (e.g. "operations[3].bitwidth").
DesignBundle ParseDesignBundle(const nlohmann::json& doc);
DesignBundle LoadDesignBundle(const std::filesystem::path& path);
nlohmann::json DesignBundleToJson(const DesignBundle& bundle);
void SaveDesignBundle(const DesignBundle& bundle,
                      const std::filesystem::path& path);

// Labels. Multiple records per op_id are legal and kept as separate samples.
std::vector<LabelRecord> ParseLabels(const nlohmann::json& doc,
                                     const DesignBundle& bundle);
std::vector<LabelRecord> LoadLabels(const std::filesystem::path& path,
                                    const DesignBundle& bundle);
nlohmann::json LabelsToJson(const std::vector<LabelRecord>& labels);
void SaveLabels(const std::vector<LabelRecord>& labels,
                const std::filesystem::path& path);

// Shared helpers for the structured-text family.
nlohmann::json ReadJsonFile(const std::filesystem::path& path);
void WriteJsonFile(const nlohmann::json& doc,
                   const std::filesystem::path& path);

}  // namespace hlscong
