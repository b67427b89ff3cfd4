#include "hlscong/synthoracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>
#include <unordered_map>

#include "hlscong/rng.hpp"

namespace hlscong {

namespace {

struct OpTraits {
  double delay_ns;
  int latency;
};

OpTraits Traits(OpType t, int bw) {
  switch (t) {
    case OpType::kAdd:
    case OpType::kSub:
      return {1.2 + 0.03 * bw, 0};
    case OpType::kMul:
      return {3.5, bw >= 16 ? 3 : 1};
    case OpType::kDiv:
      return {3.0, bw / 2 + 2};
    case OpType::kIcmp:
      return {1.1 + 0.01 * bw, 0};
    case OpType::kSelect:
      return {0.8, 0};
    case OpType::kXor:
    case OpType::kAnd:
    case OpType::kOr:
      return {0.7, 0};
    case OpType::kShift:
      return {1.0, 0};
    case OpType::kLoad:
      return {2.3, 2};
    case OpType::kStore:
      return {1.6, 1};
    case OpType::kPhi:
      return {0.4, 0};
    case OpType::kCall:
      return {0.0, 5};
    case OpType::kOther:
      return {1.0, 0};
  }
  return {1.0, 0};
}

ResourceUsage Resources(OpType t, int bw) {
  ResourceUsage r;
  const auto w = static_cast<std::int64_t>(bw);
  switch (t) {
    case OpType::kAdd:
    case OpType::kSub:
      r[Resource::kLut] = w;
      r[Resource::kFf] = w / 2;
      break;
    case OpType::kMul: {
      const std::int64_t pieces = (w + 17) / 18;
      r[Resource::kDsp] = std::min<std::int64_t>(pieces * pieces, 4);
      r[Resource::kLut] = 8 + w / 2;
      r[Resource::kFf] = 2 * w;
      break;
    }
    case OpType::kDiv:
      r[Resource::kLut] = w * w / 3 + 20;
      r[Resource::kFf] = 3 * w;
      break;
    case OpType::kIcmp:
      r[Resource::kLut] = std::max<std::int64_t>(1, w / 2);
      break;
    case OpType::kSelect:
      r[Resource::kLut] = w;
      break;
    case OpType::kXor:
    case OpType::kAnd:
    case OpType::kOr:
      r[Resource::kLut] = std::max<std::int64_t>(1, w / 2);
      break;
    case OpType::kShift:
      r[Resource::kLut] = w * 2;
      break;
    case OpType::kLoad:
      r[Resource::kLut] = 4;
      r[Resource::kFf] = w;
      break;
    case OpType::kStore:
      r[Resource::kLut] = 4;
      break;
    case OpType::kPhi:
      r[Resource::kLut] = std::max<std::int64_t>(1, w / 2);
      r[Resource::kFf] = w;
      break;
    case OpType::kCall:
      r[Resource::kLut] = 40;
      r[Resource::kFf] = 60;
      break;
    case OpType::kOther:
      r[Resource::kLut] = 10;
      break;
  }
  return r;
}

bool Shareable(OpType t) {
  return t == OpType::kMul || t == OpType::kDiv || t == OpType::kAdd ||
         t == OpType::kSub;
}

// Weighted draw over the body-op vocabulary.
OpType DrawBodyType(Rng& rng) {
  static constexpr std::array<std::pair<OpType, int>, 12> kWeights = {{
      {OpType::kAdd, 20},
      {OpType::kSub, 6},
      {OpType::kMul, 12},
      {OpType::kDiv, 2},
      {OpType::kIcmp, 8},
      {OpType::kSelect, 8},
      {OpType::kXor, 4},
      {OpType::kAnd, 4},
      {OpType::kOr, 3},
      {OpType::kShift, 5},
      {OpType::kLoad, 10},
      {OpType::kStore, 5},
  }};
  int total = 0;
  for (auto [t, w] : kWeights) total += w;
  auto r = static_cast<int>(rng.UniformInt(0, total - 1));
  for (auto [t, w] : kWeights) {
    if (r < w) return t;
    r -= w;
  }
  return OpType::kAdd;
}

class Builder {
 public:
  explicit Builder(const GenConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {}

  DesignBundle Build() {
    const int nf = cfg_.num_functions;
    for (int f = 0; f < nf; ++f) {
      FunctionStats fs;
      fs.function_id = f == 0 ? "top" : "func" + std::to_string(f);
      fs.is_top = f == 0;
      fs.target_clock_ns = 10.0;
      fs.estimated_clock_ns = std::round(rng_.Uniform(7.0, 11.5) * 100.0) / 100.0;
      fs.clock_uncertainty_ns = 1.25;
      functions_.push_back(fs);
    }
    // Loop i lives in function i % nf.
    for (int f = 0; f < nf; ++f) {
      BuildBody(f);
      for (std::size_t l = 0; l < cfg_.unroll_replicas.size(); ++l) {
        if (static_cast<int>(l) % nf == f) BuildLoop(f, static_cast<int>(l));
      }
    }
    // Calls from top into every other function.
    for (int f = 1; f < nf; ++f) {
      const int id = AddOp("top_call" + std::to_string(f), OpType::kCall, 32, 0,
                           NextLine(0), std::nullopt);
      if (!top_body_.empty()) {
        Connect(top_body_[static_cast<std::size_t>(
                    rng_.UniformInt(0, static_cast<std::int64_t>(top_body_.size()) - 1))],
                id);
      }
    }
    Schedule();
    BuildPorts();
    return Assemble();
  }

 private:
  int AddOp(std::string id, OpType type, int bw, int function, int line,
            std::optional<std::string> instance) {
    Operation op;
    op.op_id = std::move(id);
    op.op_type = type;
    op.bitwidth = type == OpType::kIcmp ? 1 : bw;
    const OpTraits tr = Traits(type, bw);
    op.delay_ns = tr.delay_ns;
    op.latency_cycles = tr.latency;
    op.resource_usage = Resources(type, bw);
    op.function_id = functions_[static_cast<std::size_t>(function)].function_id;
    op.source_loc = SourceLoc{cfg_.name + ".cpp", line};
    op.rtl_instance = std::move(instance);
    ops_.push_back(std::move(op));
    preds_.emplace_back();
    return static_cast<int>(ops_.size()) - 1;
  }

  void Connect(int src, int dst) {
    const int bw = ops_[static_cast<std::size_t>(src)].bitwidth;
    int wires = bw;
    if (bw > 1 && rng_.Bernoulli(0.3)) {
      wires = static_cast<int>(rng_.UniformInt(1, bw));
    }
    edges_.push_back({ops_[static_cast<std::size_t>(src)].op_id,
                      ops_[static_cast<std::size_t>(dst)].op_id, wires});
    preds_[static_cast<std::size_t>(dst)].push_back(src);
  }

  int NextLine(int f) {
    int& line = line_[f];
    if (line == 0) line = 100 * (f + 1);
    if (rng_.Bernoulli(0.55)) ++line;
    return line;
  }

  int DrawWidth() {
    return cfg_.bitwidths[static_cast<std::size_t>(
        rng_.UniformInt(0, static_cast<std::int64_t>(cfg_.bitwidths.size()) - 1))];
  }

  std::optional<std::string> Instance(int f, OpType type, const std::string& id) {
    if (!Shareable(type)) return std::nullopt;
    auto& pool = instances_[{f, static_cast<int>(type)}];
    if (!pool.empty() && rng_.Bernoulli(cfg_.sharing_probability)) {
      return pool[static_cast<std::size_t>(
          rng_.UniformInt(0, static_cast<std::int64_t>(pool.size()) - 1))];
    }
    std::string name = id + "_u";
    pool.push_back(name);
    return name;
  }

  void BuildBody(int f) {
    const int count = static_cast<int>(
        rng_.UniformInt(cfg_.min_ops_per_function, cfg_.max_ops_per_function));
    std::vector<int> body;
    const std::string fname = functions_[static_cast<std::size_t>(f)].function_id;
    for (int k = 0; k < count; ++k) {
      const OpType type = k == 0 ? OpType::kLoad : DrawBodyType(rng_);
      const std::string id = fname + "_op" + std::to_string(k);
      const int op = AddOp(id, type, DrawWidth(), f, NextLine(f), Instance(f, type, id));
      if (type != OpType::kLoad && !body.empty()) {
        const int window = std::min<int>(12, static_cast<int>(body.size()));
        int fanin = 0;
        for (int b = 0; b < window && fanin < 3; ++b) {
          const int cand = body[body.size() - 1 - static_cast<std::size_t>(b)];
          if (rng_.Bernoulli(cfg_.edge_density)) {
            Connect(cand, op);
            ++fanin;
          }
        }
        if (fanin == 0) {
          Connect(body[static_cast<std::size_t>(
                      rng_.UniformInt(0, static_cast<std::int64_t>(body.size()) - 1))],
                  op);
        }
      }
      body.push_back(op);
    }
    if (f == 0) top_body_ = body;
    body_[f] = body;
  }

  // Fully unrolled loop: one shared input feeding every replica, a chain of
  // `loop_body_ops` operations per replica and a reduction tree. The tree
  // adds are the unrolled copies of the loop's accumulate statement, so they
  // form a replica group of their own.
  void BuildLoop(int f, int l) {
    const int replicas = cfg_.unroll_replicas[static_cast<std::size_t>(l)];
    const std::string fname = functions_[static_cast<std::size_t>(f)].function_id;
    const std::string base = fname + "_L" + std::to_string(l);
    const auto& body = body_[f];
    const int shared = AddOp(base + "_in", OpType::kLoad, 32, f, NextLine(f), std::nullopt);
    if (!body.empty()) Connect(body.back(), shared);

    std::vector<OpType> tmpl = {OpType::kLoad};
    std::vector<int> widths = {32};
    static constexpr std::array<OpType, 5> kLoopTypes = {
        OpType::kMul, OpType::kAdd, OpType::kIcmp, OpType::kSelect, OpType::kXor};
    for (int j = 1; j < cfg_.loop_body_ops; ++j) {
      tmpl.push_back(kLoopTypes[static_cast<std::size_t>(rng_.UniformInt(0, 4))]);
      widths.push_back(DrawWidth());
    }
    std::vector<int> lines;
    for (int j = 0; j < cfg_.loop_body_ops; ++j) lines.push_back(NextLine(f));

    std::vector<int> outputs;
    for (int r = 0; r < replicas; ++r) {
      int prev = shared;
      for (int j = 0; j < cfg_.loop_body_ops; ++j) {
        const std::string id =
            base + "_o" + std::to_string(j) + "#r" + std::to_string(r);
        const int op = AddOp(id, tmpl[static_cast<std::size_t>(j)],
                             widths[static_cast<std::size_t>(j)], f,
                             lines[static_cast<std::size_t>(j)],
                             Shareable(tmpl[static_cast<std::size_t>(j)])
                                 ? std::optional<std::string>(id + "_u")
                                 : std::nullopt);
        Connect(prev, op);
        prev = op;
      }
      outputs.push_back(prev);
    }
    const int red_line = NextLine(f);
    int k = 0;
    while (outputs.size() > 1) {
      std::vector<int> next;
      for (std::size_t i = 0; i + 1 < outputs.size(); i += 2) {
        const std::string id = base + "_acc#r" + std::to_string(k++);
        const int op = AddOp(id, OpType::kAdd, 32, f, red_line, id + "_u");
        Connect(outputs[i], op);
        Connect(outputs[i + 1], op);
        next.push_back(op);
      }
      if (outputs.size() % 2 == 1) next.push_back(outputs.back());
      outputs = std::move(next);
    }
  }

  // Longest-path levelisation in creation order (creation order is
  // topological). Latency-0 producers chain within a state.
  void Schedule() {
    for (std::size_t i = 0; i < ops_.size(); ++i) {
      int start = 0;
      for (int p : preds_[i]) {
        const Operation& po = ops_[static_cast<std::size_t>(p)];
        start = std::max(start, po.end_state + (po.latency_cycles > 0 ? 1 : 0));
      }
      // Unrolled replicas are scheduled identically; other operations may
      // slip a few states.
      const bool replica = ops_[i].op_id.find("#r") != std::string::npos;
      if (!replica && rng_.Bernoulli(0.2)) {
        start += static_cast<int>(rng_.UniformInt(1, 3));
      }
      ops_[i].start_state = start;
      ops_[i].end_state = start + ops_[i].latency_cycles;
    }
  }

  void BuildPorts() {
    std::vector<int> loads;
    for (int op : top_body_) {
      if (ops_[static_cast<std::size_t>(op)].op_type == OpType::kLoad) loads.push_back(op);
    }
    if (loads.empty() && !top_body_.empty()) loads.push_back(top_body_.front());
    const int nports = 2 + static_cast<int>(cfg_.unroll_replicas.size());
    for (int p = 0; p < nports && !loads.empty(); ++p) {
      PortDecl port;
      port.port_id = "port" + std::to_string(p);
      port.bitwidth = 32;
      const int fan = static_cast<int>(rng_.UniformInt(1, 3));
      for (int k = 0; k < fan; ++k) {
        const int op = loads[static_cast<std::size_t>(
            rng_.UniformInt(0, static_cast<std::int64_t>(loads.size()) - 1))];
        const std::string& id = ops_[static_cast<std::size_t>(op)].op_id;
        if (std::find(port.connected_ops.begin(), port.connected_ops.end(), id) ==
            port.connected_ops.end()) {
          port.connected_ops.push_back(id);
        }
      }
      ports_.push_back(std::move(port));
    }
  }

  DesignBundle Assemble() {
    std::unordered_map<std::string, std::size_t> fidx;
    for (std::size_t f = 0; f < functions_.size(); ++f) {
      fidx[functions_[f].function_id] = f;
    }
    ResourceUsage total;
    for (const auto& op : ops_) {
      functions_[fidx[op.function_id]].resource_usage += op.resource_usage;
      total += op.resource_usage;
    }
    functions_[0].resource_usage = total;

    GlobalStats g;
    g.device_resources[Resource::kDsp] = 220;
    g.device_resources[Resource::kBram] = 280;
    g.device_resources[Resource::kLut] = 53200;
    g.device_resources[Resource::kFf] = 106400;
    for (int r : cfg_.unroll_replicas) {
      MemoryStats m;
      m.words = 4 * r;
      m.banks = std::min(r, 16);
      m.bits = 32;
      m.primitives = m.words * m.bits * m.banks;
      g.memories.push_back(m);
    }
    const int extra = static_cast<int>(rng_.UniformInt(1, 3));
    for (int k = 0; k < extra; ++k) {
      MemoryStats m;
      m.words = 64 << rng_.UniformInt(0, 4);
      m.banks = 1;
      m.bits = 32;
      m.primitives = m.words * m.bits * m.banks;
      g.memories.push_back(m);
    }
    std::map<std::string, std::pair<int, int>> shared;  // members, max bw
    for (const auto& op : ops_) {
      if (!op.rtl_instance) continue;
      auto& s = shared[*op.rtl_instance];
      ++s.first;
      s.second = std::max(s.second, op.bitwidth);
    }
    for (const auto& [name, s] : shared) {
      if (s.first < 2) continue;
      ++g.muxes.count;
      g.muxes.resource_usage += static_cast<std::int64_t>(s.first - 1) * s.second / 2;
      g.muxes.max_input_size = std::max<std::int64_t>(g.muxes.max_input_size, s.first);
      g.muxes.max_bitwidth = std::max<std::int64_t>(g.muxes.max_bitwidth, s.second);
    }
    return DesignBundle(std::move(ops_), std::move(edges_), std::move(ports_),
                        std::move(functions_), std::move(g));
  }

  const GenConfig& cfg_;
  Rng rng_;
  std::vector<Operation> ops_;
  std::vector<Edge> edges_;
  std::vector<PortDecl> ports_;
  std::vector<FunctionStats> functions_;
  std::vector<std::vector<int>> preds_;
  std::map<int, int> line_;
  std::map<int, std::vector<int>> body_;
  std::vector<int> top_body_;
  std::map<std::pair<int, int>, std::vector<std::string>> instances_;
};

}  // namespace

void ValidateGenConfig(const GenConfig& cfg) {
  if (cfg.num_functions < 1) throw UsageError("synth: need at least one function");
  if (cfg.min_ops_per_function < 1 ||
      cfg.max_ops_per_function < cfg.min_ops_per_function) {
    throw UsageError("synth: invalid ops-per-function range (zero ops)");
  }
  for (int r : cfg.unroll_replicas) {
    if (r < 1) throw UsageError("synth: unroll replica counts must be positive");
  }
  if (cfg.loop_body_ops < 1) throw UsageError("synth: loop body needs operations");
  if (cfg.sharing_probability < 0 || cfg.sharing_probability > 1 ||
      cfg.edge_density <= 0 || cfg.edge_density > 1) {
    throw UsageError("synth: probabilities must lie in [0, 1]");
  }
  if (cfg.bitwidths.empty()) throw UsageError("synth: no bitwidths to draw from");
  for (int b : cfg.bitwidths) {
    if (b < 1) throw UsageError("synth: bitwidths must be positive");
  }
  if (cfg.grid_width < 0 || cfg.grid_height < 0 || cfg.vertical_capacity < 1 ||
      cfg.horizontal_capacity < 1 || cfg.ops_per_tile < 1) {
    throw UsageError("synth: grid dimensions and capacities must be positive");
  }
  if ((cfg.grid_width == 0) != (cfg.grid_height == 0)) {
    throw UsageError("synth: set both grid dimensions or neither");
  }
  if (!(cfg.target_utilization > 0 && cfg.target_utilization <= 1)) {
    throw UsageError("synth: target utilization must lie in (0, 1]");
  }
  if (!(cfg.perimeter_capacity_scale > 0 && cfg.perimeter_capacity_scale <= 1)) {
    throw UsageError("synth: perimeter capacity scale must lie in (0, 1]");
  }
}

DesignBundle GenerateDesign(const GenConfig& cfg) {
  ValidateGenConfig(cfg);
  return Builder(cfg).Build();
}

TileGrid::TileGrid(int width, int height, int vertical_capacity,
                   int horizontal_capacity, int ops_per_tile)
    : width_(width),
      height_(height),
      vcap_(vertical_capacity),
      hcap_(horizontal_capacity),
      ops_per_tile_(ops_per_tile) {
  if (width < 1 || height < 1 || vertical_capacity < 1 ||
      horizontal_capacity < 1 || ops_per_tile < 1) {
    throw UsageError("tile grid dimensions and capacities must be positive");
  }
  vdem_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0.0);
  hdem_ = vdem_;
}

void TileGrid::set_perimeter_scale(double s) {
  if (!(s > 0 && s <= 1)) throw UsageError("perimeter capacity scale must be in (0, 1]");
  perimeter_scale_ = s;
}

void TileGrid::RouteL(int x0, int y0, int x1, int y1, double wires) {
  if (x0 != x1) {
    for (int x = std::min(x0, x1); x <= std::max(x0, x1); ++x) {
      hdem_[Index(x, y0)] += wires;
    }
  }
  if (y0 != y1) {
    for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y) {
      vdem_[Index(x1, y)] += wires;
    }
  }
}

double TileGrid::total_vertical_demand() const {
  return std::accumulate(vdem_.begin(), vdem_.end(), 0.0);
}

double TileGrid::total_horizontal_demand() const {
  return std::accumulate(hdem_.begin(), hdem_.end(), 0.0);
}

std::vector<std::pair<int, int>> SpiralOrder(int width, int height) {
  const double cx = (width - 1) / 2.0, cy = (height - 1) / 2.0;
  struct Tile {
    double r2, angle;
    int x, y;
  };
  std::vector<Tile> tiles;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double dx = x - cx, dy = y - cy;
      tiles.push_back({dx * dx + dy * dy, std::atan2(dy, dx), x, y});
    }
  }
  std::sort(tiles.begin(), tiles.end(), [](const Tile& a, const Tile& b) {
    if (a.r2 != b.r2) return a.r2 < b.r2;
    if (a.angle != b.angle) return a.angle < b.angle;
    return std::tie(a.y, a.x) < std::tie(b.y, b.x);
  });
  std::vector<std::pair<int, int>> out;
  for (const auto& t : tiles) out.emplace_back(t.x, t.y);
  return out;
}

namespace {

// Placement units: one per RTL instance, one per unbound operation.
std::vector<int> UnitOfOp(const DesignBundle& bundle, int* count) {
  const auto& ops = bundle.operations();
  std::unordered_map<std::string, int> unit_of_instance;
  std::vector<int> unit(ops.size());
  int units = 0;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (ops[i].rtl_instance) {
      auto [it, fresh] = unit_of_instance.emplace(*ops[i].rtl_instance, units);
      if (fresh) ++units;
      unit[i] = it->second;
    } else {
      unit[i] = units++;
    }
  }
  *count = units;
  return unit;
}

}  // namespace

int CountPlacementUnits(const DesignBundle& bundle) {
  int units = 0;
  UnitOfOp(bundle, &units);
  return units;
}

Placement PlaceDesign(const DesignBundle& bundle, const TileGrid& grid) {
  const auto& ops = bundle.operations();
  const std::size_t n = ops.size();
  int units = 0;
  const std::vector<int> unit = UnitOfOp(bundle, &units);
  const long capacity = static_cast<long>(grid.width()) * grid.height() * grid.ops_per_tile();
  if (units > capacity) {
    throw DataError("grid too small: " + std::to_string(units) +
                    " placement units for " + std::to_string(capacity) + " slots");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ops[a].start_state < ops[b].start_state;
  });

  const auto spiral = SpiralOrder(grid.width(), grid.height());
  std::vector<int> unit_slot(static_cast<std::size_t>(units), -1);
  int next_slot = 0;
  Placement p;
  p.x.assign(n, -1);
  p.y.assign(n, -1);
  for (std::size_t i : order) {
    int& slot = unit_slot[static_cast<std::size_t>(unit[i])];
    if (slot < 0) slot = next_slot++;
    const auto [x, y] = spiral[static_cast<std::size_t>(slot / grid.ops_per_tile())];
    p.x[i] = x;
    p.y[i] = y;
  }
  return p;
}

std::vector<std::string> ReplicaGroups(const DesignBundle& bundle) {
  std::vector<std::string> groups;
  for (const auto& op : bundle.operations()) {
    const auto pos = op.op_id.rfind("#r");
    groups.push_back(pos == std::string::npos ? std::string()
                                              : op.op_id.substr(0, pos));
  }
  return groups;
}

std::vector<LabelRecord> PlaceAndRoute(const DesignBundle& bundle, TileGrid& grid) {
  const Placement p = PlaceDesign(bundle, grid);
  for (const Edge& e : bundle.edges()) {
    const std::size_t s = *bundle.FindOp(e.src);
    const std::size_t d = *bundle.FindOp(e.dst);
    grid.RouteL(p.x[s], p.y[s], p.x[d], p.y[d], e.wire_count);
  }
  const auto groups = ReplicaGroups(bundle);
  std::vector<LabelRecord> labels;
  const auto& ops = bundle.operations();
  for (std::size_t i = 0; i < ops.size(); ++i) {
    LabelRecord r;
    r.op_id = ops[i].op_id;
    r.vert_cong_pct = grid.vertical_pct(p.x[i], p.y[i]);
    r.horiz_cong_pct = grid.horizontal_pct(p.x[i], p.y[i]);
    r.avg_cong_pct = (r.vert_cong_pct + r.horiz_cong_pct) / 2.0;
    r.clb_x = p.x[i];
    r.clb_y = p.y[i];
    if (!groups[i].empty()) r.replica_group = groups[i];
    labels.push_back(std::move(r));
  }
  return labels;
}

std::pair<int, int> GridFor(const DesignBundle& bundle, const GenConfig& cfg) {
  if (cfg.grid_width > 0) return {cfg.grid_width, cfg.grid_height};
  const double slots = CountPlacementUnits(bundle) / cfg.target_utilization;
  const int side = std::max(
      1, static_cast<int>(std::ceil(std::sqrt(slots / cfg.ops_per_tile) - 1e-9)));
  return {side, side};
}

SynthDesign SynthesizeDesign(const GenConfig& cfg) {
  SynthDesign out;
  out.bundle = GenerateDesign(cfg);
  std::tie(out.grid_width, out.grid_height) = GridFor(out.bundle, cfg);
  TileGrid grid(out.grid_width, out.grid_height, cfg.vertical_capacity,
                cfg.horizontal_capacity, cfg.ops_per_tile);
  grid.set_perimeter_scale(cfg.perimeter_capacity_scale);
  out.labels = PlaceAndRoute(out.bundle, grid);
  return out;
}

}  // namespace hlscong
