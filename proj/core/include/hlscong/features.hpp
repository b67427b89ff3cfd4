#pragma once

// Fixed, named feature schema and per-node extraction.
//
// Seven categories: bitwidth, interconnection, resource, timing,
// resource-over-state-gap, operator type, global. The schema is a
// process-wide constant; its fingerprint (FNV-1a over the ordered names)
// travels with datasets and models so mismatched artifacts are rejected.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hlscong/bundle.hpp"
#include "hlscong/depgraph.hpp"

namespace hlscong {

enum class FeatureCategory {
  kBitwidth,
  kInterconnection,
  kResource,
  kTiming,
  kResOverDt,
  kOpType,
  kGlobal,
};
inline constexpr int kNumFeatureCategories = 7;

std::string_view FeatureCategoryName(FeatureCategory c);

class FeatureSchema {
 public:
  struct Entry {
    std::string name;
    FeatureCategory category;
  };

  explicit FeatureSchema(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const std::string& name(std::size_t i) const { return entries_[i].name; }
  FeatureCategory category(std::size_t i) const { return entries_[i].category; }
  std::optional<std::size_t> IndexOf(std::string_view name) const;
  std::size_t CountIn(FeatureCategory c) const;

  // 16 hex digits.
  const std::string& fingerprint() const { return fingerprint_; }

 private:
  std::vector<Entry> entries_;
  std::string fingerprint_;
};

// Fingerprint of an ordered name list; FeatureSchema::fingerprint() is this
// applied to its names.
std::string SchemaFingerprint(const std::vector<std::string>& names);

// The schema used by Extract. Built once.
const FeatureSchema& Schema();

struct FeatureVector {
  std::vector<double> values;  // aligned with Schema()
  int node_id = -1;
  std::string name;  // node name: op_id, or rtl_instance for merged nodes
  std::vector<std::string> op_ids;  // member operations
  std::string function_id;
  std::optional<SourceLoc> source_loc;  // of the lead member
  OpType op_type = OpType::kOther;
};

struct ExtractOptions {
  // Drop port-node edges from interconnection and neighbourhood features.
  bool exclude_ports = false;
};

// Throws DataError("ports are not samples") for port nodes.
FeatureVector Extract(const DepGraph& g, const DesignBundle& bundle, int node,
                      const ExtractOptions& options = {});

// One vector per non-port node, in node order.
std::vector<FeatureVector> ExtractAll(const DepGraph& g,
                                      const DesignBundle& bundle,
                                      const ExtractOptions& options = {});

// Control-state gap assigned to a neighbour reached over two edges: the
// larger of the two per-edge gaps. When several paths reach the same
// neighbour, extraction keeps the smallest resulting gap.
int TwoHopStateGap(int first_edge_gap, int second_edge_gap);

// Delimiter-separated matrix: header `op_id,<schema names>`, one row per
// vector.
void WriteFeatureMatrix(const std::vector<FeatureVector>& vectors,
                        std::ostream& out, char delimiter = ',');

}  // namespace hlscong
