#include "hlscong/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

namespace hlscong {

std::string HexU64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

namespace {

constexpr std::array<std::string_view, kNumOpTypes> kOpTypeNames = {
    "add", "sub",   "mul", "div",  "icmp",  "select", "xor",   "and",
    "or",  "shift", "load", "store", "phi", "call",   "other"};

using nlohmann::json;

[[noreturn]] void Fail(const std::string& where, const std::string& msg) {
  throw DataError(where + ": " + msg);
}

const json& Require(const json& obj, const std::string& key,
                    const std::string& where) {
  if (!obj.is_object()) Fail(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) Fail(where + "." + key, "missing field");
  return *it;
}

std::string GetString(const json& obj, const std::string& key,
                      const std::string& where) {
  const json& v = Require(obj, key, where);
  if (!v.is_string()) Fail(where + "." + key, "expected a string");
  return v.get<std::string>();
}

std::int64_t GetInt(const json& obj, const std::string& key,
                    const std::string& where) {
  const json& v = Require(obj, key, where);
  if (!v.is_number_integer()) Fail(where + "." + key, "expected an integer");
  return v.get<std::int64_t>();
}

double GetReal(const json& obj, const std::string& key,
               const std::string& where) {
  const json& v = Require(obj, key, where);
  if (!v.is_number()) Fail(where + "." + key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) Fail(where + "." + key, "non-finite value");
  return d;
}

bool GetBool(const json& obj, const std::string& key,
             const std::string& where) {
  const json& v = Require(obj, key, where);
  if (!v.is_boolean()) Fail(where + "." + key, "expected a boolean");
  return v.get<bool>();
}

const json& GetArray(const json& obj, const std::string& key,
                     const std::string& where) {
  const json& v = Require(obj, key, where);
  if (!v.is_array()) Fail(where + "." + key, "expected a list");
  return v;
}

std::int64_t NonNegative(std::int64_t v, const std::string& where) {
  if (v < 0) Fail(where, "must be non-negative");
  return v;
}

int ToInt(std::int64_t v, const std::string& where) {
  if (v < INT32_MIN || v > INT32_MAX) Fail(where, "integer out of range");
  return static_cast<int>(v);
}

ResourceUsage ParseResources(const json& v, const std::string& where,
                             bool require_positive) {
  if (!v.is_object()) Fail(where, "expected a resource map");
  ResourceUsage usage;
  for (Resource r : kAllResources) {
    const std::string key(kResourceKeys[static_cast<int>(r)]);
    const std::int64_t units = GetInt(v, key, where);
    if (require_positive ? units <= 0 : units < 0) {
      Fail(where + "." + key,
           require_positive ? "must be positive" : "must be non-negative");
    }
    usage[r] = units;
  }
  if (v.size() != 4) Fail(where, "unexpected resource key");
  return usage;
}

json ResourcesToJson(const ResourceUsage& usage) {
  json out = json::object();
  for (Resource r : kAllResources) {
    out[std::string(kResourceKeys[static_cast<int>(r)])] = usage[r];
  }
  return out;
}

std::string Loc(const std::string& list, std::size_t i) {
  return list + "[" + std::to_string(i) + "]";
}

Operation ParseOperation(const json& j, const std::string& where) {
  Operation op;
  op.op_id = GetString(j, "op_id", where);
  if (op.op_id.empty()) Fail(where + ".op_id", "empty identifier");
  const std::string type = GetString(j, "op_type", where);
  auto parsed = ParseOpType(type);
  if (!parsed) Fail(where + ".op_type", "unknown operator type '" + type + "'");
  op.op_type = *parsed;
  op.bitwidth = ToInt(GetInt(j, "bitwidth", where), where + ".bitwidth");
  if (op.bitwidth < 1) Fail(where + ".bitwidth", "must be >= 1");
  op.delay_ns = GetReal(j, "delay_ns", where);
  if (op.delay_ns < 0) Fail(where + ".delay_ns", "must be non-negative");
  op.latency_cycles = ToInt(
      NonNegative(GetInt(j, "latency_cycles", where), where + ".latency_cycles"),
      where + ".latency_cycles");
  op.start_state = ToInt(
      NonNegative(GetInt(j, "start_state", where), where + ".start_state"),
      where + ".start_state");
  op.end_state = ToInt(
      NonNegative(GetInt(j, "end_state", where), where + ".end_state"),
      where + ".end_state");
  if (op.end_state < op.start_state) {
    Fail(where + ".end_state", "end_state precedes start_state");
  }
  op.resource_usage = ParseResources(Require(j, "resource_usage", where),
                                     where + ".resource_usage", false);
  if (auto it = j.find("rtl_instance"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) Fail(where + ".rtl_instance", "expected a string");
    op.rtl_instance = it->get<std::string>();
  }
  op.function_id = GetString(j, "function_id", where);
  if (auto it = j.find("source_loc"); it != j.end() && !it->is_null()) {
    const std::string w = where + ".source_loc";
    SourceLoc loc;
    loc.file = GetString(*it, "file", w);
    loc.line = ToInt(GetInt(*it, "line", w), w + ".line");
    op.source_loc = loc;
  }
  return op;
}

json OperationToJson(const Operation& op) {
  json j = {{"op_id", op.op_id},
            {"op_type", std::string(OpTypeName(op.op_type))},
            {"bitwidth", op.bitwidth},
            {"delay_ns", op.delay_ns},
            {"latency_cycles", op.latency_cycles},
            {"start_state", op.start_state},
            {"end_state", op.end_state},
            {"resource_usage", ResourcesToJson(op.resource_usage)},
            {"function_id", op.function_id}};
  if (op.rtl_instance) j["rtl_instance"] = *op.rtl_instance;
  if (op.source_loc) {
    j["source_loc"] = {{"file", op.source_loc->file},
                       {"line", op.source_loc->line}};
  }
  return j;
}

FunctionStats ParseFunction(const json& j, const std::string& where) {
  FunctionStats f;
  f.function_id = GetString(j, "function_id", where);
  f.resource_usage = ParseResources(Require(j, "resource_usage", where),
                                    where + ".resource_usage", false);
  f.target_clock_ns = GetReal(j, "target_clock_ns", where);
  f.estimated_clock_ns = GetReal(j, "estimated_clock_ns", where);
  f.clock_uncertainty_ns = GetReal(j, "clock_uncertainty_ns", where);
  if (f.target_clock_ns < 0 || f.estimated_clock_ns < 0 ||
      f.clock_uncertainty_ns < 0) {
    Fail(where, "clock values must be non-negative");
  }
  f.is_top = GetBool(j, "is_top", where);
  return f;
}

GlobalStats ParseGlobals(const json& j, const std::string& where) {
  GlobalStats g;
  const json& mems = GetArray(j, "memories", where);
  for (std::size_t i = 0; i < mems.size(); ++i) {
    const std::string w = Loc(where + ".memories", i);
    MemoryStats m;
    m.words = NonNegative(GetInt(mems[i], "words", w), w + ".words");
    m.banks = NonNegative(GetInt(mems[i], "banks", w), w + ".banks");
    m.bits = NonNegative(GetInt(mems[i], "bits", w), w + ".bits");
    m.primitives =
        NonNegative(GetInt(mems[i], "primitives", w), w + ".primitives");
    if (m.primitives != m.words * m.bits * m.banks) {
      Fail(w + ".primitives", "primitives must equal words*bits*banks");
    }
    g.memories.push_back(m);
  }
  const json& mux = Require(j, "muxes", where);
  const std::string mw = where + ".muxes";
  g.muxes.count = NonNegative(GetInt(mux, "count", mw), mw + ".count");
  g.muxes.resource_usage =
      NonNegative(GetInt(mux, "resource_usage", mw), mw + ".resource_usage");
  g.muxes.max_input_size =
      NonNegative(GetInt(mux, "max_input_size", mw), mw + ".max_input_size");
  g.muxes.max_bitwidth =
      NonNegative(GetInt(mux, "max_bitwidth", mw), mw + ".max_bitwidth");
  g.device_resources = ParseResources(Require(j, "device_resources", where),
                                      where + ".device_resources", true);
  return g;
}

}  // namespace

std::string_view OpTypeName(OpType t) {
  return kOpTypeNames[static_cast<int>(t)];
}

std::optional<OpType> ParseOpType(std::string_view name) {
  for (int i = 0; i < kNumOpTypes; ++i) {
    if (kOpTypeNames[i] == name) return static_cast<OpType>(i);
  }
  return std::nullopt;
}

DesignBundle::DesignBundle(std::vector<Operation> operations,
                           std::vector<Edge> edges,
                           std::vector<PortDecl> ports,
                           std::vector<FunctionStats> functions,
                           GlobalStats globals)
    : operations_(std::move(operations)),
      edges_(std::move(edges)),
      ports_(std::move(ports)),
      functions_(std::move(functions)),
      globals_(std::move(globals)) {
  Validate();
}

void DesignBundle::Validate() {
  // Field-level invariants are re-checked here so bundles built in memory
  // (e.g. by the synthetic generator) obey the same rules as parsed ones.
  for (std::size_t i = 0; i < functions_.size(); ++i) {
    const auto& f = functions_[i];
    if (!function_index_.emplace(f.function_id, i).second) {
      Fail(Loc("functions", i), "duplicate function_id '" + f.function_id + "'");
    }
  }
  int tops = 0;
  for (std::size_t i = 0; i < functions_.size(); ++i) {
    if (functions_[i].is_top) {
      ++tops;
      top_ = i;
    }
  }
  if (tops == 0) Fail("functions", "missing top function");
  if (tops > 1) Fail("functions", "multiple top functions");

  for (std::size_t i = 0; i < operations_.size(); ++i) {
    const auto& op = operations_[i];
    const std::string w = Loc("operations", i);
    if (op.op_id.empty()) Fail(w + ".op_id", "empty identifier");
    if (op.bitwidth < 1) Fail(w + ".bitwidth", "must be >= 1");
    if (op.end_state < op.start_state || op.start_state < 0) {
      Fail(w + ".end_state", "invalid control-state range");
    }
    if (op.latency_cycles < 0 || op.delay_ns < 0) {
      Fail(w, "timing values must be non-negative");
    }
    for (auto u : op.resource_usage.units) {
      if (u < 0) Fail(w + ".resource_usage", "must be non-negative");
    }
    if (!op_index_.emplace(op.op_id, i).second) {
      Fail(w + ".op_id", "duplicate op_id '" + op.op_id + "'");
    }
    if (!function_index_.contains(op.function_id)) {
      Fail(w + ".function_id",
           "dangling function reference '" + op.function_id + "'");
    }
  }
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const auto& e = edges_[i];
    const std::string w = Loc("edges", i);
    auto src = op_index_.find(e.src);
    if (src == op_index_.end()) {
      Fail(w + ".src", "dangling op reference '" + e.src + "'");
    }
    if (!op_index_.contains(e.dst)) {
      Fail(w + ".dst", "dangling op reference '" + e.dst + "'");
    }
    if (e.wire_count < 1) Fail(w + ".wire_count", "must be positive");
    if (e.wire_count > operations_[src->second].bitwidth) {
      Fail(w + ".wire_count", "exceeds source bitwidth");
    }
  }
  std::set<std::string> port_ids;
  for (std::size_t i = 0; i < ports_.size(); ++i) {
    const auto& p = ports_[i];
    const std::string w = Loc("ports", i);
    if (!port_ids.insert(p.port_id).second) {
      Fail(w + ".port_id", "duplicate port_id '" + p.port_id + "'");
    }
    if (op_index_.contains(p.port_id)) {
      Fail(w + ".port_id", "port_id collides with an op_id");
    }
    if (p.bitwidth < 1) Fail(w + ".bitwidth", "must be >= 1");
    for (std::size_t k = 0; k < p.connected_ops.size(); ++k) {
      if (!op_index_.contains(p.connected_ops[k])) {
        Fail(Loc(w + ".connected_ops", k),
             "dangling op reference '" + p.connected_ops[k] + "'");
      }
    }
  }
  for (std::size_t i = 0; i < globals_.memories.size(); ++i) {
    const auto& m = globals_.memories[i];
    if (m.primitives != m.words * m.bits * m.banks) {
      Fail(Loc("globals.memories", i) + ".primitives",
           "primitives must equal words*bits*banks");
    }
  }
  for (auto u : globals_.device_resources.units) {
    if (u <= 0) Fail("globals.device_resources", "must be positive");
  }
}

std::optional<std::size_t> DesignBundle::FindOp(std::string_view op_id) const {
  auto it = op_index_.find(std::string(op_id));
  if (it == op_index_.end()) return std::nullopt;
  return it->second;
}

const FunctionStats* DesignBundle::FindFunction(
    std::string_view function_id) const {
  auto it = function_index_.find(std::string(function_id));
  return it == function_index_.end() ? nullptr : &functions_[it->second];
}

const FunctionStats& DesignBundle::TopFunction() const {
  return functions_.at(top_);
}

bool DesignBundle::SemanticallyEqual(const DesignBundle& other) const {
  auto sorted = [](auto v, auto key) {
    std::sort(v.begin(), v.end(),
              [&](const auto& a, const auto& b) { return key(a) < key(b); });
    return v;
  };
  auto op_key = [](const Operation& o) { return o.op_id; };
  auto edge_key = [](const Edge& e) {
    return std::tie(e.src, e.dst, e.wire_count);
  };
  auto port_key = [](const PortDecl& p) { return p.port_id; };
  auto fn_key = [](const FunctionStats& f) { return f.function_id; };
  return sorted(operations_, op_key) == sorted(other.operations_, op_key) &&
         sorted(edges_, edge_key) == sorted(other.edges_, edge_key) &&
         sorted(ports_, port_key) == sorted(other.ports_, port_key) &&
         sorted(functions_, fn_key) == sorted(other.functions_, fn_key) &&
         globals_ == other.globals_;
}

DesignBundle ParseDesignBundle(const json& doc) {
  if (!doc.is_object()) Fail("$", "expected a bundle object");
  const std::string version = GetString(doc, "schema_version", "$");
  if (version != kBundleSchemaVersion) {
    Fail("$.schema_version", "schema-version mismatch: expected '" +
                                 std::string(kBundleSchemaVersion) +
                                 "', got '" + version + "'");
  }
  std::vector<Operation> ops;
  const json& jops = GetArray(doc, "operations", "$");
  for (std::size_t i = 0; i < jops.size(); ++i) {
    ops.push_back(ParseOperation(jops[i], Loc("operations", i)));
  }
  // Resolve ops first so default wire counts can use the source bitwidth.
  std::unordered_map<std::string, int> widths;
  for (const auto& op : ops) widths.emplace(op.op_id, op.bitwidth);

  std::vector<Edge> edges;
  const json& jedges = GetArray(doc, "edges", "$");
  for (std::size_t i = 0; i < jedges.size(); ++i) {
    const std::string w = Loc("edges", i);
    Edge e;
    e.src = GetString(jedges[i], "src", w);
    e.dst = GetString(jedges[i], "dst", w);
    auto wc = jedges[i].find("wire_count");
    if (wc == jedges[i].end() || wc->is_null()) {
      auto it = widths.find(e.src);
      if (it == widths.end()) {
        Fail(w + ".src", "dangling op reference '" + e.src + "'");
      }
      e.wire_count = it->second;
    } else {
      e.wire_count = ToInt(GetInt(jedges[i], "wire_count", w), w + ".wire_count");
    }
    edges.push_back(std::move(e));
  }

  std::vector<PortDecl> ports;
  const json& jports = GetArray(doc, "ports", "$");
  for (std::size_t i = 0; i < jports.size(); ++i) {
    const std::string w = Loc("ports", i);
    PortDecl p;
    p.port_id = GetString(jports[i], "port_id", w);
    const json& conn = GetArray(jports[i], "connected_ops", w);
    for (std::size_t k = 0; k < conn.size(); ++k) {
      if (!conn[k].is_string()) {
        Fail(Loc(w + ".connected_ops", k), "expected a string");
      }
      p.connected_ops.push_back(conn[k].get<std::string>());
    }
    p.bitwidth = ToInt(GetInt(jports[i], "bitwidth", w), w + ".bitwidth");
    ports.push_back(std::move(p));
  }

  std::vector<FunctionStats> functions;
  const json& jfns = GetArray(doc, "functions", "$");
  for (std::size_t i = 0; i < jfns.size(); ++i) {
    functions.push_back(ParseFunction(jfns[i], Loc("functions", i)));
  }
  GlobalStats globals = ParseGlobals(Require(doc, "globals", "$"), "globals");
  return DesignBundle(std::move(ops), std::move(edges), std::move(ports),
                      std::move(functions), std::move(globals));
}

json DesignBundleToJson(const DesignBundle& bundle) {
  json ops = json::array();
  for (const auto& op : bundle.operations()) ops.push_back(OperationToJson(op));
  json edges = json::array();
  for (const auto& e : bundle.edges()) {
    edges.push_back({{"src", e.src}, {"dst", e.dst}, {"wire_count", e.wire_count}});
  }
  json ports = json::array();
  for (const auto& p : bundle.ports()) {
    ports.push_back({{"port_id", p.port_id},
                     {"connected_ops", p.connected_ops},
                     {"bitwidth", p.bitwidth}});
  }
  json fns = json::array();
  for (const auto& f : bundle.functions()) {
    fns.push_back({{"function_id", f.function_id},
                   {"resource_usage", ResourcesToJson(f.resource_usage)},
                   {"target_clock_ns", f.target_clock_ns},
                   {"estimated_clock_ns", f.estimated_clock_ns},
                   {"clock_uncertainty_ns", f.clock_uncertainty_ns},
                   {"is_top", f.is_top}});
  }
  const GlobalStats& g = bundle.globals();
  json mems = json::array();
  for (const auto& m : g.memories) {
    mems.push_back({{"words", m.words},
                    {"banks", m.banks},
                    {"bits", m.bits},
                    {"primitives", m.primitives}});
  }
  json globals = {
      {"memories", mems},
      {"muxes",
       {{"count", g.muxes.count},
        {"resource_usage", g.muxes.resource_usage},
        {"max_input_size", g.muxes.max_input_size},
        {"max_bitwidth", g.muxes.max_bitwidth}}},
      {"device_resources", ResourcesToJson(g.device_resources)}};
  return {{"schema_version", std::string(kBundleSchemaVersion)},
          {"operations", ops},
          {"edges", edges},
          {"ports", ports},
          {"functions", fns},
          {"globals", globals}};
}

json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": parse error at byte " +
                    std::to_string(e.byte) + ": " + e.what());
  }
}

void WriteJsonFile(const json& doc, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) throw DataError(path.string() + ": cannot write file");
  out << doc.dump(2) << '\n';
}

DesignBundle LoadDesignBundle(const std::filesystem::path& path) {
  const json doc = ReadJsonFile(path);
  try {
    return ParseDesignBundle(doc);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void SaveDesignBundle(const DesignBundle& bundle,
                      const std::filesystem::path& path) {
  WriteJsonFile(DesignBundleToJson(bundle), path);
}

std::vector<LabelRecord> ParseLabels(const json& doc,
                                     const DesignBundle& bundle) {
  if (!doc.is_array()) Fail("$", "expected a list of label records");
  std::vector<LabelRecord> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string w = Loc("labels", i);
    const json& j = doc[i];
    LabelRecord r;
    r.op_id = GetString(j, "op_id", w);
    if (!bundle.FindOp(r.op_id)) {
      Fail(w + ".op_id", "op_id '" + r.op_id + "' not in bundle");
    }
    r.vert_cong_pct = GetReal(j, "vert_cong_pct", w);
    r.horiz_cong_pct = GetReal(j, "horiz_cong_pct", w);
    r.avg_cong_pct = GetReal(j, "avg_cong_pct", w);
    if (r.vert_cong_pct < 0 || r.horiz_cong_pct < 0) {
      Fail(w, "negative congestion value");
    }
    const double expected = (r.vert_cong_pct + r.horiz_cong_pct) / 2.0;
    if (std::abs(r.avg_cong_pct - expected) > kLabelAvgTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "avg mismatch: avg_cong_pct " << r.avg_cong_pct
          << " != (vert+horiz)/2 = " << expected;
      Fail(w + ".avg_cong_pct", msg.str());
    }
    if (auto it = j.find("clb_x"); it != j.end() && !it->is_null()) {
      r.clb_x = ToInt(GetInt(j, "clb_x", w), w + ".clb_x");
    }
    if (auto it = j.find("clb_y"); it != j.end() && !it->is_null()) {
      r.clb_y = ToInt(GetInt(j, "clb_y", w), w + ".clb_y");
    }
    if (auto it = j.find("replica_group"); it != j.end() && !it->is_null()) {
      r.replica_group = GetString(j, "replica_group", w);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<LabelRecord> LoadLabels(const std::filesystem::path& path,
                                    const DesignBundle& bundle) {
  const json doc = ReadJsonFile(path);
  try {
    return ParseLabels(doc, bundle);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

json LabelsToJson(const std::vector<LabelRecord>& labels) {
  json out = json::array();
  for (const auto& r : labels) {
    json j = {{"op_id", r.op_id},
              {"vert_cong_pct", r.vert_cong_pct},
              {"horiz_cong_pct", r.horiz_cong_pct},
              {"avg_cong_pct", r.avg_cong_pct}};
    if (r.clb_x) j["clb_x"] = *r.clb_x;
    if (r.clb_y) j["clb_y"] = *r.clb_y;
    if (r.replica_group) j["replica_group"] = *r.replica_group;
    out.push_back(std::move(j));
  }
  return out;
}

void SaveLabels(const std::vector<LabelRecord>& labels,
                const std::filesystem::path& path) {
  WriteJsonFile(LabelsToJson(labels), path);
}

}  // namespace hlscong
