#include <gtest/gtest.h>

#include "falconmeta/cluster/cluster.h"
#include "falconmeta/harness/balance.h"
#include "falconmeta/harness/baseline.h"
#include "falconmeta/harness/coalescing.h"
#include "falconmeta/harness/crash_sweep.h"
#include "falconmeta/harness/explorer.h"
#include "falconmeta/harness/oracle.h"
#include "falconmeta/harness/trace.h"
#include "falconmeta/harness/tree_gen.h"
#include "falconmeta/harness/workload.h"

namespace falconmeta::harness {
namespace {

TraceOp Op(TraceOpKind kind, std::string path, std::vector<std::string> args = {}) {
  TraceOp op;
  op.kind = kind;
  op.path = std::move(path);
  op.args = std::move(args);
  return op;
}

TEST(Trace, RoundTripsThroughText) {
  std::vector<TraceOp> ops = {Op(TraceOpKind::kMkdir, "/a", {"755"}), Op(TraceOpKind::kCreate, "/a/f", {"644"}),
                              Op(TraceOpKind::kRename, "/a/f", {"/a/g"}), Op(TraceOpKind::kSetPerm, "/a", {"700", "100", "100"})};
  for (size_t i = 0; i < ops.size(); ++i) ops[i].seq = i;
  auto back = ParseTrace(RenderTrace(ops));
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(*back, ops);
  EXPECT_FALSE(ParseTraceLine("0 teleport /a").ok());
}

TEST(Trace, TreeSurvivesTraceRoundTrip) {
  auto tree = GenerateTree(UniformSpec(2, 3, 2), 4);
  ASSERT_TRUE(tree.ok());
  GeneratedTree back = TreeFromTrace(TreeToTrace(*tree));
  EXPECT_EQ(back.dirs, tree->dirs);
  EXPECT_EQ(back.files, tree->files);
}

TEST(TreeGen, DirectoriesPrecedeChildren) {
  auto tree = GenerateTree(UniformSpec(3, 4, 2), 9);
  ASSERT_TRUE(tree.ok());
  EXPECT_EQ(tree->dirs.size(), 4u + 16u + 64u);
  EXPECT_EQ(tree->files.size(), 128u);
  std::set<std::string> seen = {""};
  for (const auto& d : tree->dirs) {
    EXPECT_TRUE(seen.contains(d.substr(0, d.rfind('/')))) << d;
    seen.insert(d);
  }
  EXPECT_DOUBLE_EQ(tree->AverageFileDepth(), 3.0);
}

TEST(Oracle, PosixLikeResults) {
  OracleState s;
  Credentials root{0, 0}, user{100, 100};
  EXPECT_EQ(s.Mkdir("/a", 0755, root), Code::kOk);
  EXPECT_EQ(s.Mkdir("/a", 0755, root), Code::kExist);
  EXPECT_EQ(s.Create("/a/f", 0644, root), Code::kOk);
  EXPECT_EQ(s.Create("/nope/f", 0644, root), Code::kNoEnt);
  EXPECT_EQ(s.Create("/a/g", 0644, user), Code::kAccess);
  EXPECT_EQ(s.Rmdir("/a", root), Code::kNotEmpty);
  EXPECT_EQ(s.Rename("/a/f", "/a/h", root), Code::kOk);
  EXPECT_FALSE(s.Contains("/a/f"));
  EXPECT_EQ(s.Close("/a/h", 99, root), Code::kOk);
  EXPECT_EQ(s.entries().at("/a/h").size, 99u);
  EXPECT_EQ(s.SetPerm("/a", Permission{0700, 0, 0}, root), Code::kOk);
  EXPECT_EQ(s.GetAttr("/a/h", user), Code::kAccess);
  EXPECT_EQ(s.Unlink("/a/h", root), Code::kOk);
  EXPECT_EQ(s.Rmdir("/a", root), Code::kOk);
  EXPECT_TRUE(s.entries().empty());
}

ClusterConfig SmallConfig(uint64_t seed) {
  ClusterConfig c;
  c.mnodes = 3;
  c.clients = 2;
  c.sim.seed = seed;
  c.sim.record_trace = true;
  return c;
}

uint64_t DigestOf(uint64_t seed) {
  Cluster cl(SmallConfig(seed));
  auto tree = GenerateTree(UniformSpec(2, 3, 2), seed);
  EXPECT_TRUE(LoadTree(cl, *tree).ok());
  RunTraverse(cl, *tree, seed);
  return cl.sim().trace_digest();
}

TEST(Determinism, SameSeedSameTrace) {
  EXPECT_EQ(DigestOf(5), DigestOf(5));
  EXPECT_NE(DigestOf(5), DigestOf(6));
}

TEST(Workload, LoadedTreeMatchesOracle) {
  Cluster cl(SmallConfig(3));
  auto tree = GenerateTree(UniformSpec(2, 3, 2), 3);
  ASSERT_TRUE(LoadTree(cl, *tree).ok());
  OracleState want;
  for (const auto& op : TreeToTrace(*tree)) want.Apply(op, Credentials{0, 0});
  Verdict v = CompareNamespace(want, cl.Census());
  EXPECT_TRUE(v.pass) << v.detail;
}

TEST(Baseline, LookupsShrinkWithBudget) {
  auto tree = GenerateTree(UniformSpec(3, 4, 2), 2);
  ASSERT_TRUE(tree.ok());
  uint64_t last = UINT64_MAX;
  for (double budget : {0.0, 0.1, 0.5, 1.0}) {
    Cluster cl(SmallConfig(2));
    ASSERT_TRUE(LoadTree(cl, *tree).ok());
    BaselineReport r = RunCachedWalk(cl, *tree, budget, 2);
    EXPECT_EQ(r.failures, 0u);
    if (budget == 0.0) EXPECT_EQ(r.lookups, UncachedLookups(*tree));
    if (budget == 1.0) EXPECT_EQ(r.lookups, tree->dirs.size());
    EXPECT_LE(r.lookups, last) << budget;
    last = r.lookups;
  }
  EXPECT_EQ(UncachedLookups(*tree), tree->files.size() * 3);
}

TEST(Balance, EntryBoundAndShares) {
  EXPECT_DOUBLE_EQ(EntryBound(4), 12.0);
  EXPECT_DOUBLE_EQ(EntryBound(16), 80.0);
  Cluster cl(SmallConfig(1));
  auto tree = GenerateTree(UniformSpec(2, 4, 4), 1);
  ASSERT_TRUE(LoadTree(cl, *tree).ok());
  BalanceReport b = MeasureBalance(cl);
  EXPECT_EQ(b.total, tree->dirs.size() + tree->files.size());
  double sum = 0;
  for (const auto& [n, s] : b.shares) sum += s;
  EXPECT_NEAR(sum, 1.0, 1e-9);
  EXPECT_EQ(b.entries(), 0u);
}

TEST(Coalescing, ExpectedLocksForThreeCreates) {
  std::vector<TraceOp> ops = {Op(TraceOpKind::kCreate, "/a/b/x", {"644"}),
                              Op(TraceOpKind::kCreate, "/a/b/y", {"644"}),
                              Op(TraceOpKind::kCreate, "/a/c/z", {"644"})};
  // /a, /a/b, /a/c plus the three targets.
  EXPECT_EQ(ExpectedBatchLocks(ops), 6u);
}

TEST(Explorer, DfsChooserEnumeratesProduct) {
  DfsChooser c;
  int schedules = 0;
  std::set<std::pair<size_t, size_t>> seen;
  do {
    size_t a = c.Choose(3);
    size_t b = c.Choose(2);
    seen.insert({a, b});
    ++schedules;
  } while (c.Next());
  EXPECT_EQ(schedules, 6);
  EXPECT_EQ(seen.size(), 6u);
}

TEST(Explorer, RmdirVersusCreateIsSerializable) {
  RaceScenario s = StandardRaces().front();
  ExploreReport r = Explore(s, 5000);
  EXPECT_TRUE(r.exhausted);
  EXPECT_GT(r.schedules, 1u);
  EXPECT_EQ(r.failures, 0u) << r.first_failure.detail;
}

TEST(Explorer, SkippingInvalidationIsCaught) {
  ExploreReport r = Explore(SkipInvalidationMutant(), 5000);
  EXPECT_GT(r.failures, 0u);
}

TEST(CrashSweep, RenameIsAtomicAtEveryCrashPoint) {
  CrashSweepReport r = SweepRename(1);
  EXPECT_GT(r.points, 0u);
  EXPECT_GT(r.applied, 0u);
  EXPECT_LT(r.applied, r.points);
  EXPECT_EQ(r.failures, 0u) << (r.failed.empty() ? "" : r.failed.front().detail);
}

}  // namespace
}  // namespace falconmeta::harness
