#pragma once

// Weighted operation-dependency graph.
//
// Operations bound to the same RTL instance collapse into one merged node;
// edges are redirected onto it, parallel edges are coalesced by summing wire
// counts and merge-induced self-loops are dropped. Each interface port gets a
// node with edges (weight = port bitwidth) into the operations it feeds.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hlscong/bundle.hpp"

namespace hlscong {

enum class NodeKind { kOperation, kPort, kMerged };

std::string_view NodeKindName(NodeKind kind);

struct Node {
  int id = 0;
  NodeKind kind = NodeKind::kOperation;
  std::string name;  // op_id, rtl_instance or port_id
  std::vector<std::size_t> member_ops;  // indices into bundle.operations()
  std::size_t lead_op = 0;

  // Aggregates over members: resources are summed, everything scalar takes
  // the member maximum. Type and function come from the lead member, the one
  // with the smallest op_id, so they do not depend on bundle order.
  OpType op_type = OpType::kOther;
  ResourceUsage resources;
  int bitwidth = 0;
  double delay_ns = 0.0;
  int latency_cycles = 0;
  int start_state = 0;
  int end_state = 0;
  std::string function_id;

  bool is_port() const { return kind == NodeKind::kPort; }
};

struct WeightedEdge {
  int node = 0;  // the other endpoint
  std::int64_t weight = 0;
  bool operator==(const WeightedEdge&) const = default;
};

class DepGraph {
 public:
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(nodes_.size()); }

  // Sorted by neighbour id.
  const std::vector<WeightedEdge>& out_edges(int id) const;
  const std::vector<WeightedEdge>& in_edges(int id) const;

  int NodeOfOp(std::size_t op_index) const { return op_to_node_.at(op_index); }
  std::size_t num_edges() const;

  // Throws std::out_of_range for ids outside the graph.
  void CheckNode(int id) const;

 private:
  friend DepGraph BuildGraph(const DesignBundle& bundle);
  friend DepGraph GraphFromEdges(int, const std::vector<std::pair<int, int>>&);

  std::vector<Node> nodes_;
  std::vector<std::vector<WeightedEdge>> out_;
  std::vector<std::vector<WeightedEdge>> in_;
  std::vector<int> op_to_node_;
};

DepGraph BuildGraph(const DesignBundle& bundle);

// Bare operation graph with unit weights; used by tests and benchmarks that
// need arbitrary topologies without a bundle. Duplicate pairs coalesce and
// self-loops are dropped, as in BuildGraph.
DepGraph GraphFromEdges(int num_nodes,
                        const std::vector<std::pair<int, int>>& edges);

struct OneHop {
  std::vector<int> preds;  // sorted, excludes the queried node
  std::vector<int> succs;
  std::vector<WeightedEdge> in_edges;
  std::vector<WeightedEdge> out_edges;
};

// With exclude_ports, edges to or from port nodes are ignored.
OneHop OneHopNeighbors(const DepGraph& g, int node, bool exclude_ports = false);

// Nodes at undirected distance 1 or 2, sorted, excluding `node`.
std::vector<int> TwoHopNeighbors(const DepGraph& g, int node,
                                 bool exclude_ports = false);

// Graphviz dump, one node or edge per line.
void WriteDot(const DepGraph& g, std::ostream& out);

}  // namespace hlscong
