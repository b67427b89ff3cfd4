#include "hlscong/report.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>

namespace hlscong {

std::vector<OpPrediction> PredictDesign(const DesignBundle& bundle,
                                        const ModelSet& models,
                                        const ExtractOptions& options) {
  for (Target t : kAllTargets) {
    if (!models.count(t)) {
      throw UsageError("no model for target '" + std::string(TargetName(t)) + "'");
    }
  }
  const DepGraph g = BuildGraph(bundle);
  const auto vectors = ExtractAll(g, bundle, options);
  Matrix x(0, Schema().size());
  for (const auto& v : vectors) x.AppendRow(v.values);

  std::array<std::vector<double>, 3> y;
  for (Target t : kAllTargets) {
    y[static_cast<std::size_t>(t)] =
        Predict(models.at(t), x, Schema().fingerprint());
  }

  std::vector<OpPrediction> out(bundle.operations().size());
  std::vector<bool> seen(out.size(), false);
  for (std::size_t r = 0; r < vectors.size(); ++r) {
    const Node& n = g.node(vectors[r].node_id);
    for (std::size_t op : n.member_ops) {
      const Operation& o = bundle.operations()[op];
      OpPrediction& p = out[op];
      p.op_id = o.op_id;
      p.node = n.name;
      p.function_id = o.function_id;
      p.source_loc = o.source_loc;
      p.op_type = o.op_type;
      p.predicted.vert = y[0][r];
      p.predicted.horiz = y[1][r];
      p.predicted.avg = y[2][r];
      seen[op] = true;
    }
  }
  std::vector<OpPrediction> ordered;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (seen[i]) ordered.push_back(std::move(out[i]));
  }
  return ordered;
}

namespace {

struct LineKey {
  std::string file;
  std::string function_id;
  auto operator<=>(const LineKey&) const = default;
};

std::vector<std::string> Hints(const RegionReport& r, const DesignBundle& bundle,
                               const DepGraph& g) {
  std::vector<std::string> hints;
  std::set<int> nodes;
  std::size_t in_merged = 0;
  for (const auto& id : r.op_ids) {
    const int n = g.NodeOfOp(*bundle.FindOp(id));
    nodes.insert(n);
    if (g.node(n).kind == NodeKind::kMerged) ++in_merged;
  }

  // Mostly bound to shared RTL instances.
  if (2 * in_merged >= r.op_ids.size() && in_merged > 0) {
    hints.emplace_back(kHintNotInline);
  }

  // Fan-in wires of the region's nodes, by source node. The source may sit
  // in the region itself (a read on the same line as its consumers).
  std::map<int, double> from;
  double fanin = 0;
  for (int n : nodes) {
    for (const auto& e : g.in_edges(n)) {
      from[e.node] += e.weight;
      fanin += e.weight;
    }
  }
  if (r.op_ids.size() >= 4 && fanin > 0) {
    std::vector<std::pair<double, int>> ranked;
    for (auto [src, w] : from) ranked.emplace_back(w, src);
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) {
                return a.first != b.first ? a.first > b.first : a.second < b.second;
              });
    double loads = 0;
    for (std::size_t i = 0; i < std::min<std::size_t>(2, ranked.size()); ++i) {
      const Node& src = g.node(ranked[i].second);
      if (!src.is_port() && src.op_type == OpType::kLoad) loads += ranked[i].first;
    }
    if (loads >= 0.5 * fanin) hints.emplace_back(kHintInputReplication);
  }

  // Extra mux inputs implied by shared instances in the region.
  std::size_t mux_inputs = 0;
  for (int n : nodes) {
    const Node& node = g.node(n);
    if (node.kind == NodeKind::kMerged) mux_inputs += node.member_ops.size() - 1;
  }
  if (mux_inputs >= 4) hints.emplace_back(kHintMuxPressure);
  return hints;
}

}  // namespace

std::vector<RegionReport> Localize(const std::vector<OpPrediction>& preds,
                                   const DesignBundle& bundle,
                                   const LocalizeOptions& options) {
  if (options.top_k == 0 || preds.empty()) return {};

  // (file, function) -> line -> prediction indices
  std::map<LineKey, std::map<int, std::vector<std::size_t>>> lines;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& p = preds[i];
    LineKey key{p.source_loc ? p.source_loc->file : std::string(kUnknownFile),
                p.function_id};
    if (!p.source_loc) key.function_id.clear();
    lines[key][p.source_loc ? p.source_loc->line : 0].push_back(i);
  }

  std::vector<RegionReport> regions;
  for (const auto& [key, by_line] : lines) {
    RegionReport* cur = nullptr;
    std::vector<std::size_t> members;
    auto flush = [&] {
      if (!cur) return;
      const double n = static_cast<double>(members.size());
      for (Target t : kAllTargets) {
        double mx = -std::numeric_limits<double>::infinity(), sum = 0;
        for (std::size_t m : members) {
          const double v = preds[m].predicted.get(t);
          mx = std::max(mx, v);
          sum += v;
        }
        double* max_slot = t == Target::kVert ? &cur->max.vert
                           : t == Target::kHoriz ? &cur->max.horiz
                                                 : &cur->max.avg;
        double* mean_slot = t == Target::kVert ? &cur->mean.vert
                            : t == Target::kHoriz ? &cur->mean.horiz
                                                  : &cur->mean.avg;
        *max_slot = mx;
        *mean_slot = sum / n;
      }
      std::vector<std::size_t> ranked = members;
      std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
        return preds[a].predicted.get(options.target) >
               preds[b].predicted.get(options.target);
      });
      for (std::size_t i = 0; i < std::min<std::size_t>(5, ranked.size()); ++i) {
        cur->top_ops.push_back(preds[ranked[i]].op_id);
      }
      cur->op_count = members.size();
      for (std::size_t m : members) cur->op_ids.push_back(preds[m].op_id);
      members.clear();
      cur = nullptr;
    };
    for (const auto& [line, idx] : by_line) {
      const bool unknown = key.file == kUnknownFile;
      if (cur && (unknown || line > cur->last_line + 1)) flush();
      if (!cur) {
        regions.emplace_back();
        cur = &regions.back();
        cur->file = key.file;
        cur->function_id = key.function_id;
        cur->first_line = line;
      }
      cur->last_line = line;
      members.insert(members.end(), idx.begin(), idx.end());
    }
    flush();
  }

  const DepGraph g = BuildGraph(bundle);
  for (auto& r : regions) r.hints = Hints(r, bundle, g);

  std::sort(regions.begin(), regions.end(),
            [&](const RegionReport& a, const RegionReport& b) {
              const double ma = a.max.get(options.target);
              const double mb = b.max.get(options.target);
              if (ma != mb) return ma > mb;
              return std::tie(a.file, a.first_line, a.function_id) <
                     std::tie(b.file, b.first_line, b.function_id);
            });
  if (regions.size() > options.top_k) regions.resize(options.top_k);
  return regions;
}

namespace {

std::string RegionName(const RegionReport& r) {
  if (r.file == kUnknownFile) return r.file;
  std::string s = r.file + ":" + std::to_string(r.first_line);
  if (r.last_line != r.first_line) s += "-" + std::to_string(r.last_line);
  return s;
}

std::string Join(const std::vector<std::string>& v, const char* sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += v[i];
  }
  return s;
}

}  // namespace

void WriteReportText(const std::vector<RegionReport>& regions, Target target,
                     std::ostream& out) {
  out << "Congested regions (ranked by max predicted " << TargetName(target)
      << " congestion, %)\n";
  if (regions.empty()) {
    out << "  (none)\n";
    return;
  }
  out << std::fixed << std::setprecision(2);
  int rank = 1;
  for (const auto& r : regions) {
    out << std::setw(3) << rank++ << ". " << RegionName(r);
    if (!r.function_id.empty()) out << " [" << r.function_id << "]";
    out << "  ops=" << r.op_count << "\n";
    out << "     max  vert=" << r.max.vert << " horiz=" << r.max.horiz
        << " avg=" << r.max.avg << "\n";
    out << "     mean vert=" << r.mean.vert << " horiz=" << r.mean.horiz
        << " avg=" << r.mean.avg << "\n";
    out << "     top: " << Join(r.top_ops, ", ") << "\n";
    if (!r.hints.empty()) out << "     hints: " << Join(r.hints, ", ") << "\n";
  }
  out.unsetf(std::ios::floatfield);
}

nlohmann::json ReportToJson(const std::vector<RegionReport>& regions,
                            Target target) {
  auto labels = [](const CongestionLabels& c) {
    return nlohmann::json{{"vert", c.vert}, {"horiz", c.horiz}, {"avg", c.avg}};
  };
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : regions) {
    arr.push_back({{"file", r.file},
                   {"function_id", r.function_id},
                   {"first_line", r.first_line},
                   {"last_line", r.last_line},
                   {"max", labels(r.max)},
                   {"mean", labels(r.mean)},
                   {"op_count", r.op_count},
                   {"top_ops", r.top_ops},
                   {"hints", r.hints},
                   {"op_ids", r.op_ids}});
  }
  return {{"format", "hlscong-report"},
          {"schema_version", "1"},
          {"target", TargetName(target)},
          {"regions", arr}};
}

void WriteReportCsv(const std::vector<RegionReport>& regions, std::ostream& out) {
  out << "rank,file,function_id,first_line,last_line,op_count,max_vert,max_horiz,"
         "max_avg,mean_vert,mean_horiz,mean_avg,hints\n";
  out << std::setprecision(17);
  int rank = 1;
  for (const auto& r : regions) {
    out << rank++ << ',' << r.file << ',' << r.function_id << ',' << r.first_line
        << ',' << r.last_line << ',' << r.op_count << ',' << r.max.vert << ','
        << r.max.horiz << ',' << r.max.avg << ',' << r.mean.vert << ','
        << r.mean.horiz << ',' << r.mean.avg << ',' << Join(r.hints, ";") << '\n';
  }
}

}  // namespace hlscong
