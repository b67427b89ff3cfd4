#include <algorithm>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "hlscong/report.hpp"
#include "hlscong/rng.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"

using namespace hlscong;
using hlscong::oracle::SharedReaderBundle;

namespace {

// Linear model y = intercept + w * feature, without a scaler.
TrainedModel LinearOn(const std::string& feature, double w, double intercept, Target t) {
  LassoModel lm;
  lm.weights.assign(Schema().size(), 0.0);
  lm.weights[*Schema().IndexOf(feature)] = w;
  lm.intercept = intercept;
  TrainedModel m;
  m.kind = ModelKind::kLasso;
  m.hyperparams = LassoParams{};
  m.parameters = lm;
  m.schema_fingerprint = Schema().fingerprint();
  m.target = t;
  return m;
}

ModelSet FaninModels() {
  ModelSet ms;
  ms[Target::kVert] = LinearOn("fanin", 1.0, 5.0, Target::kVert);
  ms[Target::kHoriz] = LinearOn("fanin", 0.5, 7.0, Target::kHoriz);
  ms[Target::kAvg] = LinearOn("fanin", 0.75, 6.0, Target::kAvg);
  return ms;
}

OpPrediction Pred(std::string id, std::string file, int line, double avg,
                  std::string fn = "kernel") {
  OpPrediction p;
  p.op_id = std::move(id);
  p.node = p.op_id;
  p.function_id = std::move(fn);
  if (!file.empty()) p.source_loc = SourceLoc{std::move(file), line};
  p.predicted = {avg + 1, avg - 1, avg};
  return p;
}

}  // namespace

TEST(PredictDesign, OnePredictionPerOperation) {
  const DesignBundle b = SharedReaderBundle();
  const auto preds = PredictDesign(b, FaninModels());
  ASSERT_EQ(preds.size(), b.operations().size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    EXPECT_EQ(preds[i].op_id, b.operations()[i].op_id);
  }
  // rd has no inputs; each multiplier takes 32 wires from rd.
  EXPECT_DOUBLE_EQ(preds[0].predicted.vert, 5);
  EXPECT_DOUBLE_EQ(preds[1].predicted.vert, 5 + 32);
  EXPECT_DOUBLE_EQ(preds[1].predicted.horiz, 7 + 16);
  EXPECT_DOUBLE_EQ(preds[1].predicted.avg, 6 + 24);
}

TEST(PredictDesign, MergedMembersShareOneVector) {
  Rng rng(11);
  oracle::RandomBundleOptions o;
  o.share_prob = 0.6;
  o.num_ops = 30;
  const DesignBundle b = oracle::RandomBundle(rng, o);
  const auto preds = PredictDesign(b, FaninModels());
  EXPECT_EQ(preds.size(), b.operations().size());
  std::map<std::string, double> by_node;
  for (const auto& p : preds) {
    auto [it, fresh] = by_node.emplace(p.node, p.predicted.avg);
    if (!fresh) EXPECT_EQ(it->second, p.predicted.avg) << p.node;
    const auto& op = b.operations()[*b.FindOp(p.op_id)];
    EXPECT_EQ(p.source_loc, op.source_loc);
  }
}

TEST(PredictDesign, MissingTargetIsUsageError) {
  ModelSet ms = FaninModels();
  ms.erase(Target::kHoriz);
  EXPECT_THROW(PredictDesign(SharedReaderBundle(), ms), UsageError);
}

TEST(PredictDesign, FingerprintMismatchIsDataError) {
  ModelSet ms = FaninModels();
  ms[Target::kAvg].schema_fingerprint = "0000000000000000";
  try {
    PredictDesign(SharedReaderBundle(), ms);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(Schema().fingerprint()), std::string::npos);
  }
}

TEST(PredictDesign, EmptyBundleEmptyReport) {
  FunctionStats fs;
  fs.function_id = "f";
  fs.is_top = true;
  GlobalStats g;
  for (Resource r : kAllResources) g.device_resources[r] = 100;
  const DesignBundle b({}, {}, {}, {fs}, g);
  const auto preds = PredictDesign(b, FaninModels());
  EXPECT_TRUE(preds.empty());
  EXPECT_TRUE(Localize(preds, b).empty());
}

TEST(Localize, SharedReaderTopRegion) {
  const DesignBundle b = SharedReaderBundle();
  const auto preds = PredictDesign(b, FaninModels());
  const auto regions = Localize(preds, b);
  ASSERT_FALSE(regions.empty());
  const RegionReport& top = regions.front();
  EXPECT_EQ(top.file, "kernel.cpp");
  EXPECT_EQ(top.first_line, 14);
  EXPECT_EQ(top.last_line, 14);
  EXPECT_EQ(top.op_count, 25u);
  EXPECT_EQ(top.top_ops.size(), 5u);
  EXPECT_NE(std::find(top.hints.begin(), top.hints.end(), kHintInputReplication),
            top.hints.end());
  EXPECT_EQ(std::find(top.hints.begin(), top.hints.end(), kHintNotInline), top.hints.end());

  // Same call, same answer.
  const auto again = Localize(PredictDesign(b, FaninModels()), b);
  ASSERT_EQ(again.size(), regions.size());
  for (std::size_t i = 0; i < regions.size(); ++i) {
    EXPECT_EQ(again[i].op_ids, regions[i].op_ids);
    EXPECT_EQ(again[i].hints, regions[i].hints);
  }
}

TEST(Localize, AdjacentLinesCoalesce) {
  const DesignBundle b = SharedReaderBundle();
  const auto regions = Localize(PredictDesign(b, FaninModels()), b);
  // 14, 20-25, 30-31, 33
  std::set<std::pair<int, int>> ranges;
  for (const auto& r : regions) ranges.insert({r.first_line, r.last_line});
  const std::set<std::pair<int, int>> want = {{14, 14}, {20, 25}, {30, 31}, {33, 33}};
  EXPECT_EQ(ranges, want);
}

TEST(Localize, EveryOpInExactlyOneRegion) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    oracle::RandomBundleOptions o;
    o.num_ops = 40;
    o.share_prob = 0.3;
    const DesignBundle b = oracle::RandomBundle(rng, o);
    const auto preds = PredictDesign(b, FaninModels());
    const auto regions = Localize(preds, b, {.top_k = 1000});
    std::multiset<std::string> seen;
    for (const auto& r : regions) {
      EXPECT_EQ(r.op_count, r.op_ids.size());
      for (Target t : kAllTargets) EXPECT_GE(r.max.get(t), r.mean.get(t));
      seen.insert(r.op_ids.begin(), r.op_ids.end());
    }
    EXPECT_EQ(seen.size(), preds.size());
    for (const auto& p : preds) EXPECT_EQ(seen.count(p.op_id), 1u) << p.op_id;
  }
}

TEST(Localize, AllOnOneLine) {
  const DesignBundle b = SharedReaderBundle();
  std::vector<OpPrediction> preds = {Pred("mul0", "kernel.cpp", 14, 90),
                                     Pred("mul1", "kernel.cpp", 14, 80)};
  const auto regions = Localize(preds, b);
  ASSERT_EQ(regions.size(), 1u);
  EXPECT_EQ(regions[0].first_line, 14);
  EXPECT_DOUBLE_EQ(regions[0].max.avg, 90);
  EXPECT_DOUBLE_EQ(regions[0].mean.avg, 85);
  EXPECT_EQ(regions[0].top_ops, (std::vector<std::string>{"mul0", "mul1"}));
}

TEST(Localize, UnknownLocationRegion) {
  const DesignBundle b = SharedReaderBundle();
  std::vector<OpPrediction> preds = {Pred("mul0", "", 0, 10), Pred("mul1", "", 0, 30),
                                     Pred("rd", "kernel.cpp", 14, 20)};
  const auto regions = Localize(preds, b);
  ASSERT_EQ(regions.size(), 2u);
  EXPECT_EQ(regions[0].file, kUnknownFile);
  EXPECT_EQ(regions[0].op_count, 2u);
  EXPECT_EQ(regions[1].file, "kernel.cpp");
}

TEST(Localize, TopKZeroAndTruncation) {
  const DesignBundle b = SharedReaderBundle();
  const auto preds = PredictDesign(b, FaninModels());
  EXPECT_TRUE(Localize(preds, b, {.top_k = 0}).empty());
  EXPECT_EQ(Localize(preds, b, {.top_k = 2}).size(), 2u);
}

TEST(Localize, TiesByFileThenLine) {
  const DesignBundle b = SharedReaderBundle();
  std::vector<OpPrediction> preds = {Pred("mul0", "b.cpp", 3, 50), Pred("mul1", "a.cpp", 9, 50),
                                     Pred("mul2", "a.cpp", 2, 50), Pred("mul3", "a.cpp", 20, 60)};
  const auto regions = Localize(preds, b);
  ASSERT_EQ(regions.size(), 4u);
  EXPECT_EQ(regions[0].first_line, 20);
  EXPECT_EQ(regions[1].file, "a.cpp");
  EXPECT_EQ(regions[1].first_line, 2);
  EXPECT_EQ(regions[2].first_line, 9);
  EXPECT_EQ(regions[3].file, "b.cpp");
}

TEST(Localize, RankingTarget) {
  const DesignBundle b = SharedReaderBundle();
  std::vector<OpPrediction> preds = {Pred("mul0", "a.cpp", 1, 50), Pred("mul1", "a.cpp", 5, 49)};
  preds[1].predicted.vert = 100;
  EXPECT_EQ(Localize(preds, b)[0].first_line, 1);
  EXPECT_EQ(Localize(preds, b, {.target = Target::kVert})[0].first_line, 5);
}

TEST(Localize, SharedInstanceHints) {
  // Eight adds bound to two instances on one line.
  std::vector<Operation> ops;
  std::vector<Edge> edges;
  ops.push_back(oracle::ScenarioOp("src", OpType::kXor, 32, 0, 0, 2));
  for (int i = 0; i < 8; ++i) {
    ops.push_back(oracle::ScenarioOp("a" + std::to_string(i), OpType::kAdd, 32, 1 + i, 1 + i, 4));
    ops.back().rtl_instance = i % 2 ? "add_u1" : "add_u0";
    edges.push_back({"src", ops.back().op_id, 32});
  }
  FunctionStats fs;
  fs.function_id = "kernel";
  fs.is_top = true;
  GlobalStats g;
  for (Resource r : kAllResources) g.device_resources[r] = 100;
  const DesignBundle b(ops, edges, {}, {fs}, g);
  const auto regions = Localize(PredictDesign(b, FaninModels()), b);
  const auto it = std::find_if(regions.begin(), regions.end(),
                               [](const RegionReport& r) { return r.first_line == 4; });
  ASSERT_NE(it, regions.end());
  EXPECT_NE(std::find(it->hints.begin(), it->hints.end(), kHintNotInline), it->hints.end());
  EXPECT_NE(std::find(it->hints.begin(), it->hints.end(), kHintMuxPressure), it->hints.end());
  EXPECT_EQ(std::find(it->hints.begin(), it->hints.end(), kHintInputReplication), it->hints.end());
}

TEST(ReportOutput, TextJsonCsv) {
  const DesignBundle b = SharedReaderBundle();
  const auto regions = Localize(PredictDesign(b, FaninModels()), b, {.top_k = 3});
  std::ostringstream text;
  WriteReportText(regions, Target::kAvg, text);
  EXPECT_NE(text.str().find("kernel.cpp:14"), std::string::npos);
  EXPECT_NE(text.str().find(std::string(kHintInputReplication)), std::string::npos);

  const auto doc = ReportToJson(regions, Target::kAvg);
  EXPECT_EQ(doc["target"], "avg");
  ASSERT_EQ(doc["regions"].size(), 3u);
  EXPECT_EQ(doc["regions"][0]["first_line"], 14);
  EXPECT_EQ(doc["regions"][0]["op_ids"].size(), 25u);

  std::ostringstream csv;
  WriteReportCsv(regions, csv);
  std::istringstream in(csv.str());
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  EXPECT_EQ(n, 4);

  std::ostringstream none;
  WriteReportText({}, Target::kVert, none);
  EXPECT_NE(none.str().find("(none)"), std::string::npos);
}
