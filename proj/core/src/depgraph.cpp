#include "hlscong/depgraph.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace hlscong {

std::string_view NodeKindName(NodeKind kind) {
  switch (kind) {
    case NodeKind::kOperation:
      return "operation";
    case NodeKind::kPort:
      return "port";
    case NodeKind::kMerged:
      return "merged";
  }
  return "?";
}

namespace {

using EdgeMap = std::map<std::pair<int, int>, std::int64_t>;

void Finalize(const EdgeMap& edges, int num_nodes,
              std::vector<std::vector<WeightedEdge>>& out,
              std::vector<std::vector<WeightedEdge>>& in) {
  out.assign(static_cast<std::size_t>(num_nodes), {});
  in.assign(static_cast<std::size_t>(num_nodes), {});
  // std::map iteration order keeps both lists sorted by neighbour id.
  for (const auto& [key, weight] : edges) {
    out[static_cast<std::size_t>(key.first)].push_back({key.second, weight});
  }
  for (const auto& [key, weight] : edges) {
    in[static_cast<std::size_t>(key.second)].push_back({key.first, weight});
  }
  for (auto& list : in) {
    std::sort(list.begin(), list.end(),
              [](const auto& a, const auto& b) { return a.node < b.node; });
  }
}

}  // namespace

const std::vector<WeightedEdge>& DepGraph::out_edges(int id) const {
  CheckNode(id);
  return out_[static_cast<std::size_t>(id)];
}

const std::vector<WeightedEdge>& DepGraph::in_edges(int id) const {
  CheckNode(id);
  return in_[static_cast<std::size_t>(id)];
}

std::size_t DepGraph::num_edges() const {
  std::size_t n = 0;
  for (const auto& list : out_) n += list.size();
  return n;
}

void DepGraph::CheckNode(int id) const {
  if (id < 0 || id >= size()) {
    throw std::out_of_range("unknown node id " + std::to_string(id));
  }
}

DepGraph BuildGraph(const DesignBundle& bundle) {
  DepGraph g;
  const auto& ops = bundle.operations();
  g.op_to_node_.assign(ops.size(), -1);

  std::unordered_map<std::string, int> instance_node;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const Operation& op = ops[i];
    int id = -1;
    if (op.rtl_instance) {
      auto [it, fresh] = instance_node.emplace(*op.rtl_instance, g.size());
      if (!fresh) id = it->second;
    }
    if (id < 0) {
      Node n;
      n.id = g.size();
      n.name = op.rtl_instance ? *op.rtl_instance : op.op_id;
      n.op_type = op.op_type;
      n.function_id = op.function_id;
      n.bitwidth = op.bitwidth;
      n.delay_ns = op.delay_ns;
      n.latency_cycles = op.latency_cycles;
      n.start_state = op.start_state;
      n.end_state = op.end_state;
      g.nodes_.push_back(std::move(n));
      id = g.size() - 1;
    } else {
      Node& n = g.nodes_[static_cast<std::size_t>(id)];
      n.bitwidth = std::max(n.bitwidth, op.bitwidth);
      n.delay_ns = std::max(n.delay_ns, op.delay_ns);
      n.latency_cycles = std::max(n.latency_cycles, op.latency_cycles);
      n.start_state = std::max(n.start_state, op.start_state);
      n.end_state = std::max(n.end_state, op.end_state);
    }
    Node& n = g.nodes_[static_cast<std::size_t>(id)];
    n.member_ops.push_back(i);
    n.resources += op.resource_usage;
    g.op_to_node_[i] = id;
  }
  for (auto& n : g.nodes_) {
    n.lead_op = n.member_ops.front();
    for (std::size_t m : n.member_ops) {
      if (ops[m].op_id < ops[n.lead_op].op_id) n.lead_op = m;
    }
    n.op_type = ops[n.lead_op].op_type;
    n.function_id = ops[n.lead_op].function_id;
    if (n.member_ops.size() >= 2) {
      n.kind = NodeKind::kMerged;
    } else {
      n.name = ops[n.member_ops.front()].op_id;
    }
  }

  EdgeMap edges;
  for (const Edge& e : bundle.edges()) {
    const int s = g.op_to_node_[*bundle.FindOp(e.src)];
    const int d = g.op_to_node_[*bundle.FindOp(e.dst)];
    if (s == d) continue;
    edges[{s, d}] += e.wire_count;
  }
  for (const PortDecl& p : bundle.ports()) {
    Node n;
    n.id = g.size();
    n.kind = NodeKind::kPort;
    n.name = p.port_id;
    n.bitwidth = p.bitwidth;
    g.nodes_.push_back(std::move(n));
    for (const auto& op_id : p.connected_ops) {
      const int d = g.op_to_node_[*bundle.FindOp(op_id)];
      edges[{g.size() - 1, d}] += p.bitwidth;
    }
  }
  Finalize(edges, g.size(), g.out_, g.in_);
  return g;
}

DepGraph GraphFromEdges(int num_nodes,
                        const std::vector<std::pair<int, int>>& edge_list) {
  DepGraph g;
  for (int i = 0; i < num_nodes; ++i) {
    Node n;
    n.id = i;
    n.name = "n" + std::to_string(i);
    n.member_ops = {static_cast<std::size_t>(i)};
    n.lead_op = static_cast<std::size_t>(i);
    g.nodes_.push_back(std::move(n));
    g.op_to_node_.push_back(i);
  }
  EdgeMap edges;
  for (auto [s, d] : edge_list) {
    g.CheckNode(s);
    g.CheckNode(d);
    if (s != d) edges[{s, d}] += 1;
  }
  Finalize(edges, num_nodes, g.out_, g.in_);
  return g;
}

OneHop OneHopNeighbors(const DepGraph& g, int node, bool exclude_ports) {
  OneHop result;
  auto keep = [&](const WeightedEdge& e) {
    return !(exclude_ports && g.node(e.node).is_port());
  };
  for (const auto& e : g.in_edges(node)) {
    if (!keep(e)) continue;
    result.in_edges.push_back(e);
    result.preds.push_back(e.node);
  }
  for (const auto& e : g.out_edges(node)) {
    if (!keep(e)) continue;
    result.out_edges.push_back(e);
    result.succs.push_back(e.node);
  }
  return result;
}

std::vector<int> TwoHopNeighbors(const DepGraph& g, int node,
                                 bool exclude_ports) {
  g.CheckNode(node);
  std::vector<char> seen(static_cast<std::size_t>(g.size()), 0);
  std::vector<int> first;
  auto visit_around = [&](int n, std::vector<int>* frontier) {
    for (const auto* list : {&g.in_edges(n), &g.out_edges(n)}) {
      for (const auto& e : *list) {
        if (e.node == node) continue;
        if (exclude_ports && g.node(e.node).is_port()) continue;
        if (seen[static_cast<std::size_t>(e.node)]) continue;
        seen[static_cast<std::size_t>(e.node)] = 1;
        if (frontier) frontier->push_back(e.node);
      }
    }
  };
  visit_around(node, &first);
  for (int m : first) visit_around(m, nullptr);
  std::vector<int> result;
  for (int i = 0; i < g.size(); ++i) {
    if (seen[static_cast<std::size_t>(i)]) result.push_back(i);
  }
  return result;
}

void WriteDot(const DepGraph& g, std::ostream& out) {
  out << "digraph depgraph {\n";
  for (const Node& n : g.nodes()) {
    out << "  n" << n.id << " [label=\"" << n.name << "\", kind=\""
        << NodeKindName(n.kind) << "\", members=" << n.member_ops.size()
        << "];\n";
  }
  for (const Node& n : g.nodes()) {
    for (const auto& e : g.out_edges(n.id)) {
      out << "  n" << n.id << " -> n" << e.node << " [weight=" << e.weight
          << "];\n";
    }
  }
  out << "}\n";
}

}  // namespace hlscong
