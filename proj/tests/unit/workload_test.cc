#include <gtest/gtest.h>

#include "falconmeta/harness/workload.h"

namespace falconmeta::harness {
namespace {

ClusterConfig Config(uint32_t clients) {
  ClusterConfig c;
  c.mnodes = 4;
  c.clients = clients;
  c.sim.seed = 5;
  return c;
}

TEST(Workload, LoadTreeMatchesCensus) {
  Cluster cl(Config(3));
  auto tree = GenerateTree(UniformSpec(2, 3, 4), 1);
  ASSERT_TRUE(tree.ok());
  ASSERT_TRUE(LoadTree(cl, tree.value()).ok());
  CensusReport census = cl.Census();
  EXPECT_TRUE(census.ok());
  // 12 directories plus 36 files; the root is not a record.
  EXPECT_EQ(census.by_path.size(), 12u + 36u);
}

TEST(Workload, TraverseIsOneRoundTripPerOperation) {
  Cluster cl(Config(2));
  auto tree = GenerateTree(UniformSpec(3, 3, 5), 2);
  ASSERT_TRUE(tree.ok());
  ASSERT_TRUE(LoadTree(cl, tree.value()).ok());
  WarmReplicas(cl, tree.value());
  TraverseReport rep = RunTraverse(cl, tree.value(), 9);
  EXPECT_TRUE(rep.exactly_once);
  EXPECT_EQ(rep.failures, 0u);
  EXPECT_EQ(rep.opens, 2 * tree.value().files.size());
  EXPECT_EQ(rep.closes, rep.opens);
  EXPECT_EQ(rep.client_to_mnode, rep.opens + rep.closes);
  EXPECT_EQ(rep.inter_mnode, 0u);
}

TEST(Workload, BurstSpreadsOneDirectory) {
  Cluster cl(Config(2));
  auto tree = GenerateTree(UniformSpec(1, 4, 200), 3);
  ASSERT_TRUE(tree.ok());
  ASSERT_TRUE(LoadTree(cl, tree.value()).ok());
  WarmReplicas(cl, tree.value());
  BurstReport rep = RunBurst(cl, tree.value(), 200, 4, 50'000'000);
  EXPECT_EQ(rep.failures, 0u);
  ASSERT_FALSE(rep.cv.empty());
  EXPECT_LT(rep.mean_cv, rep.baseline_mean_cv);
}

TEST(Workload, ReplayReportsPerOpResults) {
  Cluster cl(Config(2));
  auto ops = ParseTrace(
      "1 mkdir /a 755\n"
      "2 create /a/f 644\n"
      "3 create /a/f 644\n"
      "4 rename /a/f /a/g\n"
      "5 getattr /a/f\n"
      "6 close /a/g 42\n"
      "7 readdir /a\n");
  ASSERT_TRUE(ops.ok());
  ReplayReport rep = Replay(cl, ops.value());
  std::vector<Code> want = {Code::kOk, Code::kOk, Code::kExist, Code::kOk, Code::kNoEnt, Code::kOk, Code::kOk};
  EXPECT_EQ(rep.results, want);
  EXPECT_EQ(rep.failures, 2u);
  EXPECT_EQ(cl.Census().by_path.at("/a/g").size, 42u);
}

TEST(Metrics, JsonIsSortedAndIntegral) {
  Metrics m;
  m["b"] = 2;
  m["a"] = 0.5;
  std::string j = MetricsToJson(m);
  EXPECT_LT(j.find("\"a\""), j.find("\"b\""));
  EXPECT_NE(j.find("0.5"), std::string::npos);
  EXPECT_NE(j.find("\"b\": 2"), std::string::npos);
}

}  // namespace
}  // namespace falconmeta::harness
