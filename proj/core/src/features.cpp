#include "hlscong/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <ostream>
#include <unordered_map>

namespace hlscong {

std::string_view FeatureCategoryName(FeatureCategory c) {
  switch (c) {
    case FeatureCategory::kBitwidth:
      return "bitwidth";
    case FeatureCategory::kInterconnection:
      return "interconnection";
    case FeatureCategory::kResource:
      return "resource";
    case FeatureCategory::kTiming:
      return "timing";
    case FeatureCategory::kResOverDt:
      return "res_over_dt";
    case FeatureCategory::kOpType:
      return "optype";
    case FeatureCategory::kGlobal:
      return "global";
  }
  return "?";
}

FeatureSchema::FeatureSchema(std::vector<Entry> entries)
    : entries_(std::move(entries)) {
  std::vector<std::string> names;
  for (const auto& e : entries_) names.push_back(e.name);
  fingerprint_ = SchemaFingerprint(names);
}

std::string SchemaFingerprint(const std::vector<std::string>& names) {
  std::uint64_t h = Fnv1a64("");
  for (const auto& n : names) {
    h = Fnv1a64(n, h);
    h = Fnv1a64("\n", h);
  }
  return HexU64(h);
}

std::optional<std::size_t> FeatureSchema::IndexOf(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t FeatureSchema::CountIn(FeatureCategory c) const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(),
                    [c](const Entry& e) { return e.category == c; }));
}

namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

constexpr std::array<std::string_view, 9> kInterconnectNames = {
    "fanin",  "fanout",  "fanin_fanout_sum",      "n_preds",
    "n_succs", "n_preds_succs_sum", "max_wire", "fanin_max_wire_pct_in",
    "fanout_max_wire_pct_out"};

// Neighbour-aggregate stems, each expanded to usage / device ratio /
// function ratio.
constexpr std::array<std::string_view, 3> kRatioSuffixes = {"", "_dev_ratio",
                                                           "_fn_ratio"};

FeatureSchema BuildSchema() {
  using C = FeatureCategory;
  std::vector<FeatureSchema::Entry> e;
  auto add = [&](std::string name, C c) { e.push_back({std::move(name), c}); };

  add("bitwidth", C::kBitwidth);

  for (std::string_view scope : {"", "_2hop"}) {
    for (auto n : kInterconnectNames) {
      add(std::string(n) + std::string(scope), C::kInterconnection);
    }
  }

  for (Resource r : kAllResources) {
    const std::string t = Lower(kResourceKeys[static_cast<int>(r)]);
    for (auto sfx : kRatioSuffixes) add("res_" + t + std::string(sfx), C::kResource);
    for (std::string_view scope : {"", "_2hop"}) {
      const std::string s(scope);
      for (std::string_view stem : {"pred_", "succ_", "nbr_"}) {
        for (auto sfx : kRatioSuffixes) {
          add(std::string(stem) + t + std::string(sfx) + s, C::kResource);
        }
      }
      add("nbr_max_" + t + s, C::kResource);
      add("nbr_max_" + t + "_pct" + s, C::kResource);
    }
  }

  add("delay_ns", C::kTiming);
  add("latency_cycles", C::kTiming);

  for (Resource r : kAllResources) {
    const std::string t = Lower(kResourceKeys[static_cast<int>(r)]);
    for (std::string_view scope : {"", "_2hop"}) {
      for (std::string_view stem : {"pred_", "succ_"}) {
        for (auto sfx : kRatioSuffixes) {
          add(std::string(stem) + t + std::string(sfx) + "_per_dt" +
                  std::string(scope),
              C::kResOverDt);
        }
      }
    }
  }

  for (int i = 0; i < kNumOpTypes; ++i) {
    add("is_" + std::string(OpTypeName(static_cast<OpType>(i))), C::kOpType);
  }
  for (int i = 0; i < kNumOpTypes; ++i) {
    add("nbr_count_" + std::string(OpTypeName(static_cast<OpType>(i))),
        C::kOpType);
  }

  for (Resource r : kAllResources) {
    add("ftop_" + Lower(kResourceKeys[static_cast<int>(r)]), C::kGlobal);
  }
  for (Resource r : kAllResources) {
    add("fop_" + Lower(kResourceKeys[static_cast<int>(r)]), C::kGlobal);
  }
  for (Resource r : kAllResources) {
    add("fop_" + Lower(kResourceKeys[static_cast<int>(r)]) + "_pct_top",
        C::kGlobal);
  }
  for (std::string_view f : {"ftop_", "fop_"}) {
    for (std::string_view c :
         {"target_clock_ns", "estimated_clock_ns", "clock_uncertainty_ns"}) {
      add(std::string(f) + std::string(c), C::kGlobal);
    }
  }
  for (std::string_view m : {"mem_words", "mem_banks", "mem_bits",
                             "mem_primitives", "mux_count",
                             "mux_resource_usage", "mux_max_input_size",
                             "mux_max_bitwidth"}) {
    add(std::string(m), C::kGlobal);
  }
  return FeatureSchema(std::move(e));
}

double SafeDiv(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

int EdgeStateGap(const Node& producer, const Node& consumer) {
  if (producer.is_port() || consumer.is_port()) return 0;
  return std::max(0, consumer.start_state - producer.end_state);
}

// Everything Extract needs to know about the surroundings of one node.
struct Neighborhood {
  OneHop one;
  std::vector<int> one_union;       // preds ∪ succs
  std::vector<int> two_undirected;  // undirected distance <= 2
  std::map<int, int> preds2;        // node -> state gap
  std::map<int, int> succs2;
  std::int64_t fanin2 = 0, fanout2 = 0;
  std::int64_t max_in2 = 0, max_out2 = 0;
};

Neighborhood Explore(const DepGraph& g, int node, bool exclude_ports) {
  Neighborhood nb;
  nb.one = OneHopNeighbors(g, node, exclude_ports);
  nb.one_union = nb.one.preds;
  nb.one_union.insert(nb.one_union.end(), nb.one.succs.begin(),
                      nb.one.succs.end());
  std::sort(nb.one_union.begin(), nb.one_union.end());
  nb.one_union.erase(std::unique(nb.one_union.begin(), nb.one_union.end()),
                     nb.one_union.end());
  nb.two_undirected = TwoHopNeighbors(g, node, exclude_ports);

  const Node& self = g.node(node);
  auto skip = [&](int other) {
    return other == node || (exclude_ports && g.node(other).is_port());
  };
  auto keep_min = [](std::map<int, int>& m, int key, int gap) {
    auto [it, fresh] = m.emplace(key, gap);
    if (!fresh) it->second = std::min(it->second, gap);
  };

  for (const auto& e : nb.one.in_edges) {
    nb.fanin2 += e.weight;
    nb.max_in2 = std::max(nb.max_in2, e.weight);
    const Node& p = g.node(e.node);
    const int gap1 = EdgeStateGap(p, self);
    keep_min(nb.preds2, e.node, gap1);
    for (const auto& e2 : g.in_edges(e.node)) {
      if (skip(e2.node)) continue;
      nb.fanin2 += e2.weight;
      nb.max_in2 = std::max(nb.max_in2, e2.weight);
      keep_min(nb.preds2, e2.node,
               TwoHopStateGap(EdgeStateGap(g.node(e2.node), p), gap1));
    }
  }
  for (const auto& e : nb.one.out_edges) {
    nb.fanout2 += e.weight;
    nb.max_out2 = std::max(nb.max_out2, e.weight);
    const Node& s = g.node(e.node);
    const int gap1 = EdgeStateGap(self, s);
    keep_min(nb.succs2, e.node, gap1);
    for (const auto& e2 : g.out_edges(e.node)) {
      if (skip(e2.node)) continue;
      nb.fanout2 += e2.weight;
      nb.max_out2 = std::max(nb.max_out2, e2.weight);
      keep_min(nb.succs2, e2.node,
               TwoHopStateGap(gap1, EdgeStateGap(s, g.node(e2.node))));
    }
  }
  return nb;
}

class Writer {
 public:
  explicit Writer(std::vector<double>& v) : v_(v) {}
  void Put(double x) { v_.push_back(x); }

 private:
  std::vector<double>& v_;
};

}  // namespace

int TwoHopStateGap(int first_edge_gap, int second_edge_gap) {
  return std::max(first_edge_gap, second_edge_gap);
}

const FeatureSchema& Schema() {
  static const FeatureSchema schema = BuildSchema();
  return schema;
}

FeatureVector Extract(const DepGraph& g, const DesignBundle& bundle, int node,
                      const ExtractOptions& options) {
  const Node& self = g.node(node);
  if (self.is_port()) throw DataError("ports are not samples");

  FeatureVector fv;
  fv.node_id = node;
  fv.name = self.name;
  fv.function_id = self.function_id;
  fv.op_type = self.op_type;
  const auto& ops = bundle.operations();
  for (std::size_t m : self.member_ops) fv.op_ids.push_back(ops[m].op_id);
  fv.source_loc = ops[self.lead_op].source_loc;

  const Neighborhood nb = Explore(g, node, options.exclude_ports);
  const ResourceUsage& device = bundle.globals().device_resources;
  const FunctionStats* fop = bundle.FindFunction(self.function_id);
  const FunctionStats& ftop = bundle.TopFunction();

  fv.values.reserve(Schema().size());
  Writer w(fv.values);

  // Bitwidth.
  w.Put(self.bitwidth);

  // Interconnection, one-hop then two-hop.
  {
    std::int64_t fanin = 0, fanout = 0, max_in = 0, max_out = 0;
    for (const auto& e : nb.one.in_edges) {
      fanin += e.weight;
      max_in = std::max(max_in, e.weight);
    }
    for (const auto& e : nb.one.out_edges) {
      fanout += e.weight;
      max_out = std::max(max_out, e.weight);
    }
    const double np = static_cast<double>(nb.one.preds.size());
    const double ns = static_cast<double>(nb.one.succs.size());
    w.Put(fanin);
    w.Put(fanout);
    w.Put(fanin + fanout);
    w.Put(np);
    w.Put(ns);
    w.Put(np + ns);
    w.Put(std::max(max_in, max_out));
    w.Put(SafeDiv(max_in, fanin));
    w.Put(SafeDiv(max_out, fanout));

    const double np2 = static_cast<double>(nb.preds2.size());
    const double ns2 = static_cast<double>(nb.succs2.size());
    w.Put(nb.fanin2);
    w.Put(nb.fanout2);
    w.Put(nb.fanin2 + nb.fanout2);
    w.Put(np2);
    w.Put(ns2);
    w.Put(np2 + ns2);
    w.Put(std::max(nb.max_in2, nb.max_out2));
    w.Put(SafeDiv(nb.max_in2, nb.fanin2));
    w.Put(SafeDiv(nb.max_out2, nb.fanout2));
  }

  // Resource.
  for (Resource r : kAllResources) {
    const double dev = static_cast<double>(device[r]);
    const double fn = fop ? static_cast<double>(fop->resource_usage[r]) : 0.0;
    auto usage = [&](int n) { return static_cast<double>(g.node(n).resources[r]); };
    auto put3 = [&](double u) {
      w.Put(u);
      w.Put(SafeDiv(u, dev));
      w.Put(SafeDiv(u, fn));
    };
    put3(static_cast<double>(self.resources[r]));

    auto aggregates = [&](auto&& preds, auto&& succs,
                          const std::vector<int>& around) {
      double p = 0, s = 0;
      for (int n : preds) p += usage(n);
      for (int n : succs) s += usage(n);
      put3(p);
      put3(s);
      put3(p + s);
      double mx = 0, total = 0;
      for (int n : around) {
        mx = std::max(mx, usage(n));
        total += usage(n);
      }
      w.Put(mx);
      w.Put(SafeDiv(mx, total));
    };
    aggregates(nb.one.preds, nb.one.succs, nb.one_union);
    std::vector<int> p2, s2;
    for (const auto& [n, gap] : nb.preds2) p2.push_back(n);
    for (const auto& [n, gap] : nb.succs2) s2.push_back(n);
    aggregates(p2, s2, nb.two_undirected);
  }

  // Timing.
  w.Put(self.delay_ns);
  w.Put(self.latency_cycles);

  // Resource over control-state gap; denominator is gap + 1.
  for (Resource r : kAllResources) {
    const double dev = static_cast<double>(device[r]);
    const double fn = fop ? static_cast<double>(fop->resource_usage[r]) : 0.0;
    auto put_scaled = [&](auto&& pairs) {
      double u = 0;
      for (const auto& [n, gap] : pairs) {
        u += static_cast<double>(g.node(n).resources[r]) / (gap + 1.0);
      }
      w.Put(u);
      w.Put(SafeDiv(u, dev));
      w.Put(SafeDiv(u, fn));
    };
    std::vector<std::pair<int, int>> p1, s1;
    for (int p : nb.one.preds) p1.emplace_back(p, EdgeStateGap(g.node(p), self));
    for (int s : nb.one.succs) s1.emplace_back(s, EdgeStateGap(self, g.node(s)));
    put_scaled(p1);
    put_scaled(s1);
    put_scaled(nb.preds2);
    put_scaled(nb.succs2);
  }

  // Operator type.
  {
    std::array<double, kNumOpTypes> counts{};
    for (int n : nb.one_union) {
      if (!g.node(n).is_port()) counts[static_cast<int>(g.node(n).op_type)] += 1;
    }
    for (int i = 0; i < kNumOpTypes; ++i) {
      w.Put(static_cast<int>(self.op_type) == i ? 1.0 : 0.0);
    }
    for (double c : counts) w.Put(c);
  }

  // Global.
  {
    for (Resource r : kAllResources) w.Put(static_cast<double>(ftop.resource_usage[r]));
    for (Resource r : kAllResources) {
      w.Put(fop ? static_cast<double>(fop->resource_usage[r]) : 0.0);
    }
    for (Resource r : kAllResources) {
      w.Put(fop ? SafeDiv(static_cast<double>(fop->resource_usage[r]),
                          static_cast<double>(ftop.resource_usage[r]))
                : 0.0);
    }
    for (const FunctionStats* f : {&ftop, fop}) {
      w.Put(f ? f->target_clock_ns : 0.0);
      w.Put(f ? f->estimated_clock_ns : 0.0);
      w.Put(f ? f->clock_uncertainty_ns : 0.0);
    }
    const GlobalStats& gs = bundle.globals();
    double words = 0, banks = 0, bits = 0, prims = 0;
    for (const auto& m : gs.memories) {
      words += static_cast<double>(m.words);
      banks += static_cast<double>(m.banks);
      bits += static_cast<double>(m.bits);
      prims += static_cast<double>(m.primitives);
    }
    w.Put(words);
    w.Put(banks);
    w.Put(bits);
    w.Put(prims);
    w.Put(static_cast<double>(gs.muxes.count));
    w.Put(static_cast<double>(gs.muxes.resource_usage));
    w.Put(static_cast<double>(gs.muxes.max_input_size));
    w.Put(static_cast<double>(gs.muxes.max_bitwidth));
  }

  if (fv.values.size() != Schema().size()) {
    throw std::logic_error("feature writer out of step with schema");
  }
  return fv;
}

std::vector<FeatureVector> ExtractAll(const DepGraph& g,
                                      const DesignBundle& bundle,
                                      const ExtractOptions& options) {
  std::vector<FeatureVector> out;
  for (const Node& n : g.nodes()) {
    if (!n.is_port()) out.push_back(Extract(g, bundle, n.id, options));
  }
  return out;
}

void WriteFeatureMatrix(const std::vector<FeatureVector>& vectors,
                        std::ostream& out, char delimiter) {
  const FeatureSchema& schema = Schema();
  out << "op_id";
  for (const auto& e : schema.entries()) out << delimiter << e.name;
  out << '\n';
  const auto old_precision = out.precision(17);
  for (const auto& v : vectors) {
    out << v.name;
    for (double x : v.values) out << delimiter << x;
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace hlscong
