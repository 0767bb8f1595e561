// Values produced by tests/oracles/reference.py and frozen here.
#include <gtest/gtest.h>

#include <algorithm>
#include <unordered_map>

#include "falconmeta/common/hash.h"
#include "falconmeta/coordinator/planner.h"
#include "falconmeta/filestore/data_node.h"
#include "falconmeta/harness/tree_gen.h"
#include "falconmeta/index/ring.h"
#include "falconmeta/model/dentry_codec.h"

namespace falconmeta {
namespace {

Ring RingOf(uint32_t n) {
  std::vector<NodeId> nodes;
  for (uint32_t i = 0; i < n; ++i) nodes.push_back(NodeId(i));
  return *Ring::Build(nodes);
}

std::string Base(const std::string& path) { return path.substr(path.rfind('/') + 1); }

ClusterStats StatsFor(const harness::GeneratedTree& tree, const Ring& ring) {
  uint32_t n = static_cast<uint32_t>(ring.size());
  std::vector<std::unordered_map<std::string, uint64_t>> freq(n);
  ClusterStats stats;
  stats.nodes.resize(n);
  auto add = [&](const std::string& path) {
    std::string name = Base(path);
    NodeId o = OwnerByName(ring, name);
    ++freq[Raw(o)][name];
    ++stats.nodes[Raw(o)].inode_count;
  };
  for (const auto& d : tree.dirs) add(d);
  for (const auto& f : tree.files) add(f);
  for (uint32_t i = 0; i < n; ++i) {
    stats.nodes[i].node = NodeId(i);
    std::vector<rpc::NameCount> ranked;
    for (const auto& [name, c] : freq[i]) ranked.push_back({name, c});
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.count != b.count ? a.count > b.count : a.name < b.name;
    });
    ranked.resize(std::min<size_t>(ranked.size(), ReportSize(n)));
    stats.nodes[i].top = std::move(ranked);
  }
  return stats;
}

struct PlanCounts {
  size_t entries = 0;
  size_t path_walk = 0;
  size_t overrides = 0;
  double projected_max_share = 0;
};

PlanCounts Summarize(const RebalancePlan& plan, uint64_t total) {
  ExceptionTable t = plan.Apply(ExceptionTable{});
  PlanCounts c;
  c.entries = t.size();
  c.path_walk = t.CountRule(RedirectRule::kPathWalk);
  c.overrides = t.CountRule(RedirectRule::kOverride);
  uint64_t hi = 0;
  for (const auto& [node, load] : plan.projected) hi = std::max(hi, load);
  c.projected_max_share = static_cast<double>(hi) / static_cast<double>(total);
  return c;
}

TEST(ReferenceValues, Fnv1a64) {
  EXPECT_EQ(Fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(Fnv1a64("Makefile"), 0xfc99ef51f8114d01ULL);
  EXPECT_EQ(Fnv1a64("ILSVRC2012_val_00000001.JPEG"), 0x9404ca5055a9eec1ULL);
}

TEST(ReferenceValues, SplitMix64) {
  EXPECT_EQ(SplitMix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(SplitMix64(1), 0x910a2dec89025cc1ULL);
  EXPECT_EQ(SplitMix64((uint64_t{3} << 32) | 7), 0x950e0a0f498b7b6bULL);
}

TEST(ReferenceValues, NameParentAndChunkHash) {
  EXPECT_EQ(NameParentHash("Makefile", DirectoryId(5)), 0x07cfe668984fb16cULL);
  EXPECT_EQ(ChunkHash(ChunkKey{InodeId(42), 0}), 0x409a61124f57855fULL);
  EXPECT_EQ(ChunkHash(ChunkKey{InodeId(42), 1}), 0xa09fb509f921c8ceULL);
}

TEST(ReferenceValues, OwnersOnFourNodes) {
  Ring r = RingOf(4);
  EXPECT_EQ(OwnerByName(r, "ILSVRC2012_val_00000001.JPEG"), NodeId(1));
  EXPECT_EQ(OwnerByName(r, "Kconfig"), NodeId(1));
  EXPECT_EQ(OwnerByName(r, "Makefile"), NodeId(3));
  EXPECT_EQ(OwnerByName(r, "README"), NodeId(1));
  EXPECT_EQ(OwnerByName(r, "a"), NodeId(0));
  EXPECT_EQ(OwnerByName(r, "f0.dat"), NodeId(0));
  EXPECT_EQ(OwnerByName(r, "f1.dat"), NodeId(2));
  EXPECT_EQ(OwnerByNameAndParent(r, "Makefile", DirectoryId(5)), NodeId(3));
}

TEST(ReferenceValues, OwnersOnSixteenNodes) {
  Ring r = RingOf(16);
  EXPECT_EQ(OwnerByName(r, "ILSVRC2012_val_00000001.JPEG"), NodeId(4));
  EXPECT_EQ(OwnerByName(r, "Kconfig"), NodeId(12));
  EXPECT_EQ(OwnerByName(r, "Makefile"), NodeId(8));
  EXPECT_EQ(OwnerByName(r, "README"), NodeId(1));
  EXPECT_EQ(OwnerByName(r, "a"), NodeId(0));
  EXPECT_EQ(OwnerByName(r, "f0.dat"), NodeId(13));
  EXPECT_EQ(OwnerByName(r, "f1.dat"), NodeId(4));
}

TEST(ReferenceValues, RingCoverage) {
  auto extent = [](const Ring& r) {
    double lo = 1, hi = 0;
    for (const auto& [n, s] : r.Coverage()) {
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    return std::pair{lo, hi};
  };
  auto [lo4, hi4] = extent(RingOf(4));
  EXPECT_NEAR(lo4, 0.23572, 1e-5);
  EXPECT_NEAR(hi4, 0.26123, 1e-5);
  auto [lo16, hi16] = extent(RingOf(16));
  EXPECT_NEAR(lo16, 0.05815, 1e-5);
  EXPECT_NEAR(hi16, 0.06592, 1e-5);
}

TEST(ReferenceValues, ChunkOwnersOnThreeDataNodes) {
  Ring d = BuildDataRing(3);
  const uint32_t want[] = {2, 2, 1, 1};
  for (uint32_t i = 0; i < 4; ++i) {
    EXPECT_EQ(d.Lookup(ChunkHash(ChunkKey{InodeId(42), i})), NodeId(want[i])) << i;
  }
}

TEST(ReferenceValues, ZipfCounts) {
  uint64_t tail = 0;
  auto counts = harness::ZipfCounts(100000, 1.2, &tail);
  ASSERT_EQ(counts.size(), 2696u);
  uint64_t sum = 0;
  for (uint64_t c : counts) sum += c;
  EXPECT_EQ(sum, 89715u);
  EXPECT_EQ(counts[0], 19640u);
  EXPECT_EQ(counts[1], 8549u);
  EXPECT_EQ(tail, 10285u);
}

TEST(ReferenceValues, TreeShapes) {
  auto mdtest = harness::GenerateTree(harness::ScaledMdtestSpec(), 1);
  ASSERT_TRUE(mdtest.ok());
  EXPECT_EQ(mdtest->dirs.size(), 11110u);
  EXPECT_EQ(mdtest->files.size(), 100000u);
  EXPECT_DOUBLE_EQ(mdtest->AverageFileDepth() * static_cast<double>(mdtest->files.size()), 400000.0);
  auto small = harness::GenerateTree(harness::UniformSpec(1, 10, 10), 1);
  ASSERT_TRUE(small.ok());
  EXPECT_EQ(small->dirs.size(), 10u);
  EXPECT_EQ(small->files.size(), 100u);
}

TEST(ReferenceValues, ZipfPlans) {
  auto tree = harness::GenerateTree(harness::ZipfSpec(100000, 1.2), 1);
  ASSERT_TRUE(tree.ok());
  struct Want {
    uint32_t n;
    double initial;
    size_t entries, path_walk, overrides;
    double projected;
  };
  for (const Want& w : {Want{4, 0.54706, 7, 1, 6, 0.25781}, Want{8, 0.47323, 28, 2, 26, 0.13381},
                        Want{16, 0.41916, 61, 6, 55, 0.07237}}) {
    ClusterStats stats = StatsFor(*tree, RingOf(w.n));
    EXPECT_NEAR(stats.MaxShare(), w.initial, 1e-5) << w.n;
    RebalancePlan plan = Rebalance(stats, ExceptionTable{}, 0.01);
    EXPECT_TRUE(plan.status.ok()) << w.n;
    PlanCounts c = Summarize(plan, stats.total());
    EXPECT_EQ(c.entries, w.entries) << w.n;
    EXPECT_EQ(c.path_walk, w.path_walk) << w.n;
    EXPECT_EQ(c.overrides, w.overrides) << w.n;
    // Projected loads are integral in C++; the reference keeps fractions.
    EXPECT_NEAR(c.projected_max_share, w.projected, 1e-4) << w.n;
  }
}

TEST(ReferenceValues, LinuxPlanOnSixteenNodes) {
  auto tree = harness::GenerateTree(harness::LinuxLikeSpec(), 1);
  ASSERT_TRUE(tree.ok());
  ClusterStats stats = StatsFor(*tree, RingOf(16));
  EXPECT_NEAR(stats.MaxShare(), 0.08978, 1e-5);
  RebalancePlan plan = Rebalance(stats, ExceptionTable{}, 0.01);
  EXPECT_TRUE(plan.status.ok());
  PlanCounts c = Summarize(plan, stats.total());
  EXPECT_EQ(c.path_walk, 2u);
  EXPECT_EQ(c.overrides, 0u);
  EXPECT_NEAR(c.projected_max_share, 0.06673, 1e-4);
}

TEST(ReferenceValues, RedirectArithmetic) {
  // n=4, hot 1000, cold 600, |F|=200: path-walk gives (850, 650), override (800, 800).
  ClusterStats stats;
  const uint64_t loads[] = {1000, 600, 800, 800};
  for (uint32_t i = 0; i < 4; ++i) stats.nodes.push_back(NodeStats{NodeId(i), loads[i], {}, {}});
  stats.nodes[0].top = {{"hot", 200}};
  RebalancePlan plan = Rebalance(stats, ExceptionTable{}, 0.0);
  ASSERT_FALSE(plan.steps.empty());
  EXPECT_EQ(plan.steps[0].name, "hot");
  EXPECT_EQ(plan.steps[0].rule, RedirectRule::kOverride);
  EXPECT_EQ(plan.steps[0].target, NodeId(1));
  EXPECT_EQ(plan.projected.at(NodeId(0)), 800u);
  EXPECT_EQ(plan.projected.at(NodeId(1)), 800u);
}

TEST(ReferenceValues, ReconfigureFourToFiveMovesNames) {
  auto tree = harness::GenerateTree(harness::UniformSpec(2, 10, 10), 1);
  ASSERT_TRUE(tree.ok());
  Ring r4 = RingOf(4), r5 = RingOf(5);
  size_t records = 0, moved = 0;
  for (const auto* list : {&tree->dirs, &tree->files}) {
    for (const auto& p : *list) {
      ++records;
      std::string name = Base(p);
      if (OwnerByName(r4, name) != OwnerByName(r5, name)) ++moved;
    }
  }
  EXPECT_EQ(records, 1110u);
  EXPECT_EQ(moved, 193u);
}

TEST(ReferenceValues, DentryWithSixtyFourByteName) {
  DentryRecord d;
  d.key = DentryKey{DirectoryId(7), std::string(64, 'n')};
  EXPECT_EQ(EncodeDentry(d).size(), 93u);
}

}  // namespace
}  // namespace falconmeta
