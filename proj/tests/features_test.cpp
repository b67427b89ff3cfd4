#include <cmath>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "hlscong/features.hpp"
#include "hlscong/rng.hpp"
#include "oracles.hpp"

using namespace hlscong;

namespace {

Operation Op(std::string id, OpType type, int bw, int start = 0, int end = 0) {
  Operation op;
  op.op_id = std::move(id);
  op.op_type = type;
  op.bitwidth = bw;
  op.start_state = start;
  op.end_state = end;
  op.function_id = "top";
  return op;
}

DesignBundle Make(std::vector<Operation> ops, std::vector<Edge> edges) {
  FunctionStats top;
  top.function_id = "top";
  top.is_top = true;
  for (Resource r : kAllResources) top.resource_usage[r] = 50;
  GlobalStats g;
  for (Resource r : kAllResources) g.device_resources[r] = 1000;
  return DesignBundle(std::move(ops), std::move(edges), {}, {top}, g);
}

double Get(const FeatureVector& fv, const std::string& name) {
  auto i = Schema().IndexOf(name);
  EXPECT_TRUE(i.has_value()) << name;
  return i ? fv.values[*i] : NAN;
}

FeatureVector ByName(const std::vector<FeatureVector>& all, const std::string& name) {
  for (const auto& fv : all) {
    if (fv.name == name) return fv;
  }
  ADD_FAILURE() << "no vector for " << name;
  return {};
}

}  // namespace

TEST(Schema, Shape) {
  const FeatureSchema& s = Schema();
  EXPECT_EQ(s.size(), 225u);
  EXPECT_EQ(s.CountIn(FeatureCategory::kBitwidth), 1u);
  auto i = s.IndexOf("fanin_max_wire_pct_in");
  ASSERT_TRUE(i);
  EXPECT_EQ(s.category(*i), FeatureCategory::kInterconnection);
  std::set<std::string> names;
  for (const auto& e : s.entries()) names.insert(e.name);
  EXPECT_EQ(names.size(), s.size());
  std::size_t total = 0;
  for (int c = 0; c < kNumFeatureCategories; ++c) {
    total += s.CountIn(static_cast<FeatureCategory>(c));
  }
  EXPECT_EQ(total, s.size());
}

TEST(Schema, Fingerprint) {
  std::vector<std::string> names;
  for (const auto& e : Schema().entries()) names.push_back(e.name);
  EXPECT_EQ(SchemaFingerprint(names), Schema().fingerprint());
  EXPECT_EQ(Schema().fingerprint().size(), 16u);
  names.back() += "x";
  EXPECT_NE(SchemaFingerprint(names), Schema().fingerprint());
}

TEST(Extract, IsolatedNode) {
  const auto b = Make({Op("a", OpType::kAdd, 32)}, {});
  const DepGraph g = BuildGraph(b);
  const FeatureVector fv = Extract(g, b, 0);
  ASSERT_EQ(fv.values.size(), Schema().size());
  EXPECT_EQ(Get(fv, "bitwidth"), 32);
  EXPECT_EQ(Get(fv, "fanin"), 0);
  EXPECT_EQ(Get(fv, "fanout"), 0);
  EXPECT_EQ(Get(fv, "fanin_max_wire_pct_in"), 0);
  for (std::size_t i = 0; i < Schema().size(); ++i) {
    const auto& n = Schema().name(i);
    if (n.starts_with("pred_") || n.starts_with("succ_") || n.starts_with("nbr_")) {
      EXPECT_EQ(fv.values[i], 0) << n;
    }
  }
  EXPECT_EQ(Get(fv, "is_add"), 1);
}

TEST(Extract, FanInWithMaxWire) {
  const auto b = Make({Op("p", OpType::kAdd, 8), Op("q", OpType::kAdd, 32), Op("v", OpType::kAdd, 32)},
                      {{"p", "v", 8}, {"q", "v", 24}});
  const DepGraph g = BuildGraph(b);
  const auto fv = ByName(ExtractAll(g, b), "v");
  EXPECT_EQ(Get(fv, "fanin"), 32);
  EXPECT_EQ(Get(fv, "max_wire"), 24);
  EXPECT_DOUBLE_EQ(Get(fv, "fanin_max_wire_pct_in"), 0.75);
  EXPECT_EQ(Get(fv, "n_preds"), 2);
}

TEST(Extract, ResourceOverStateGap) {
  Operation p = Op("p", OpType::kAdd, 8, 1, 2);
  Operation s = Op("s", OpType::kAdd, 8, 5, 5);
  s.resource_usage[Resource::kLut] = 12;
  const auto b = Make({p, s}, {{"p", "s", 8}});
  const DepGraph g = BuildGraph(b);
  const auto fv = ByName(ExtractAll(g, b), "p");
  EXPECT_DOUBLE_EQ(Get(fv, "succ_lut_per_dt"), 3.0);
  EXPECT_DOUBLE_EQ(Get(fv, "succ_lut"), 12.0);
}

TEST(Extract, TwoHopGapKeepsSmallestPathMax) {
  // a -> m1 -> v (gaps 4, 0) and a -> m2 -> v (gaps 1, 1): a gets gap 1.
  Operation a = Op("a", OpType::kAdd, 8, 0, 0);
  a.resource_usage[Resource::kFf] = 10;
  const auto b = Make({a, Op("m1", OpType::kAdd, 8, 4, 4), Op("m2", OpType::kAdd, 8, 1, 3),
                       Op("v", OpType::kAdd, 8, 4, 4)},
                      {{"a", "m1", 8}, {"a", "m2", 8}, {"m1", "v", 8}, {"m2", "v", 8}});
  EXPECT_EQ(TwoHopStateGap(4, 0), 4);
  const DepGraph g = BuildGraph(b);
  const auto fv = ByName(ExtractAll(g, b), "v");
  EXPECT_DOUBLE_EQ(Get(fv, "pred_ff_per_dt_2hop"), 10.0 / 2.0);
}

TEST(Extract, PortIsNotASample) {
  FunctionStats top;
  top.function_id = "top";
  top.is_top = true;
  GlobalStats gs;
  for (Resource r : kAllResources) gs.device_resources[r] = 1;
  const DesignBundle b({Op("a", OpType::kAdd, 8)}, {}, {{"in", {"a"}, 8}}, {top}, gs);
  const DepGraph g = BuildGraph(b);
  int port = -1;
  for (const auto& n : g.nodes()) {
    if (n.is_port()) port = n.id;
  }
  try {
    Extract(g, b, port);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("ports are not samples"), std::string::npos);
  }
  EXPECT_EQ(ExtractAll(g, b).size(), 1u);
}

TEST(Extract, MatchesBruteForceOnRandomGraphs) {
  Rng rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const DesignBundle b = oracle::RandomBundle(
        rng, {.num_ops = static_cast<int>(rng.UniformInt(2, 30)), .edge_prob = 0.12,
              .share_prob = 0.25, .num_ports = static_cast<int>(rng.UniformInt(0, 3))});
    for (bool ex : {false, true}) {
      const DepGraph g = BuildGraph(b);
      const oracle::RefGraph ref = oracle::BuildRefGraph(b, ex);
      for (const auto& fv : ExtractAll(g, b, {.exclude_ports = ex})) {
        const auto want = oracle::RefFeatures(b, ref, oracle::RefIndex(ref, fv.name));
        for (const auto& [name, value] : want) {
          const double got = Get(fv, name);
          EXPECT_NEAR(got, value, 1e-9 * std::max(1.0, std::fabs(value)))
              << "trial " << trial << " node " << fv.name << " feature " << name;
        }
      }
    }
  }
}

TEST(Extract, InvariantsOnRandomGraphs) {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const DesignBundle b = oracle::RandomBundle(rng, {.num_ops = 30, .share_prob = 0.2, .num_ports = 2});
    const DepGraph g = BuildGraph(b);
    const auto all = ExtractAll(g, b);
    std::map<std::string, std::vector<double>> globals;
    for (const auto& fv : all) {
      for (std::string t : {"dsp", "bram", "lut", "ff"}) {
        EXPECT_GE(Get(fv, "nbr_" + t + "_2hop"), Get(fv, "nbr_" + t) - 1e-9);
        EXPECT_GE(Get(fv, "nbr_" + t), 0);
      }
      for (std::string n : {"fanin_max_wire_pct_in", "fanout_max_wire_pct_out",
                            "fanin_max_wire_pct_in_2hop", "fanout_max_wire_pct_out_2hop"}) {
        EXPECT_GE(Get(fv, n), 0);
        EXPECT_LE(Get(fv, n), 1);
      }
      std::vector<double> gvals;
      for (std::size_t i = 0; i < Schema().size(); ++i) {
        if (Schema().category(i) == FeatureCategory::kGlobal) gvals.push_back(fv.values[i]);
      }
      auto [it, fresh] = globals.emplace(fv.function_id, gvals);
      if (!fresh) EXPECT_EQ(it->second, gvals);
    }
  }
}

TEST(Extract, RelabelingOpsLeavesValuesUnchanged) {
  Rng rng(9);
  const DesignBundle b = oracle::RandomBundle(rng, {.num_ops = 20, .share_prob = 0.2, .num_ports = 2});
  auto rename = [](const std::string& id) { return "zz_" + id; };
  std::vector<Operation> ops = b.operations();
  for (auto& op : ops) op.op_id = rename(op.op_id);
  std::reverse(ops.begin(), ops.end());
  std::vector<Edge> edges = b.edges();
  for (auto& e : edges) {
    e.src = rename(e.src);
    e.dst = rename(e.dst);
  }
  std::vector<PortDecl> ports = b.ports();
  for (auto& p : ports) {
    for (auto& c : p.connected_ops) c = rename(c);
  }
  const DesignBundle r(ops, edges, ports, b.functions(), b.globals());
  const auto fa = ExtractAll(BuildGraph(b), b);
  const auto fb = ExtractAll(BuildGraph(r), r);
  ASSERT_EQ(fa.size(), fb.size());
  std::map<std::string, std::vector<double>> by_op;
  for (const auto& fv : fa) {
    for (const auto& id : fv.op_ids) by_op[rename(id)] = fv.values;
  }
  for (const auto& fv : fb) {
    for (const auto& id : fv.op_ids) {
      const auto& want = by_op.at(id);
      for (std::size_t k = 0; k < want.size(); ++k) {
        // Sums may be accumulated in another order.
        EXPECT_NEAR(want[k], fv.values[k], 1e-12 * std::max(1.0, std::abs(want[k])))
            << id << " " << Schema().name(k);
      }
    }
  }
}

TEST(Extract, MatrixWriter) {
  const auto b = Make({Op("a", OpType::kAdd, 32), Op("b", OpType::kMul, 16)}, {{"a", "b", 4}});
  std::ostringstream out;
  WriteFeatureMatrix(ExtractAll(BuildGraph(b), b), out, ';');
  std::istringstream in(out.str());
  std::string header, row;
  std::getline(in, header);
  EXPECT_TRUE(header.starts_with("op_id;bitwidth;"));
  std::size_t lines = 0;
  while (std::getline(in, row)) ++lines;
  EXPECT_EQ(lines, 2u);
}
