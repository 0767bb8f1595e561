#include <gtest/gtest.h>

#include "falconmeta/mnode/wal_state.h"
#include "falconmeta/sim/task.h"
#include "falconmeta/storage/inode_table.h"
#include "falconmeta/storage/lock_table.h"
#include "falconmeta/storage/namespace_replica.h"
#include "falconmeta/storage/wal.h"

namespace falconmeta {
namespace {

Bytes B(std::string_view s) { return Bytes(s.begin(), s.end()); }

TEST(Wal, ScanReturnsAppendedRecords) {
  Disk disk;
  Wal wal(&disk);
  EXPECT_EQ(wal.Append(WalKind::kBeginBatch, {}), 1u);
  EXPECT_EQ(wal.Append(WalKind::kOpApply, B("x")), 2u);
  EXPECT_EQ(wal.Append(WalKind::kCommitBatch, {}), 3u);
  wal.Flush();
  WalScan scan = ScanWal(disk.contents());
  ASSERT_TRUE(scan.status.ok());
  ASSERT_EQ(scan.records.size(), 3u);
  EXPECT_EQ(scan.records[1].kind, WalKind::kOpApply);
  EXPECT_EQ(scan.records[1].payload, B("x"));
  EXPECT_EQ(scan.valid_bytes, disk.contents().size());
  EXPECT_EQ(disk.flush_count(), 1u);
}

TEST(Wal, CrashDropsUnflushedTail) {
  Disk disk;
  Wal wal(&disk);
  wal.Append(WalKind::kOpApply, B("durable"));
  wal.Flush();
  size_t durable = disk.durable_size();
  wal.Append(WalKind::kOpApply, B("lost"));
  disk.Crash(nullptr);
  EXPECT_EQ(disk.contents().size(), durable);
  EXPECT_EQ(ScanWal(disk.contents()).records.size(), 1u);
}

TEST(Wal, TornTailStopsScanAtLastWholeRecord) {
  Disk disk;
  Wal wal(&disk);
  wal.Append(WalKind::kOpApply, B("one"));
  wal.Flush();
  size_t whole = disk.contents().size();
  wal.Append(WalKind::kOpApply, B("two-two-two"));
  disk.Truncate(disk.contents().size() - 3);
  WalScan scan = ScanWal(disk.contents());
  EXPECT_EQ(scan.records.size(), 1u);
  EXPECT_EQ(scan.valid_bytes, whole);
}

TEST(Wal, CorruptPayloadFailsChecksum) {
  Disk disk;
  Wal wal(&disk);
  wal.Append(WalKind::kOpApply, B("abc"));
  disk.mutable_contents().back() ^= 0xff;
  EXPECT_TRUE(ScanWal(disk.contents()).records.empty());
}

TEST(Wal, ReopenContinuesLsn) {
  Disk disk;
  {
    Wal wal(&disk);
    wal.Append(WalKind::kOpApply, B("a"));
    wal.Append(WalKind::kOpApply, B("b"));
    wal.Flush();
  }
  Wal again(&disk);
  EXPECT_TRUE(again.open_status().ok());
  EXPECT_EQ(again.next_lsn(), 3u);
}

TEST(WalReplay, OnlyCommittedBatchesApply) {
  InodeRecord rec;
  rec.key = DentryKey{kRootDir, "f"};
  rec.id = InodeId(9);
  Bytes put = EncodeValue(Mutation::Put(rec));
  std::vector<WalRecord> log = {
      {1, WalKind::kBeginBatch, {}},   {2, WalKind::kOpApply, put}, {3, WalKind::kCommitBatch, {}},
      {4, WalKind::kBeginBatch, {}},   {5, WalKind::kOpApply, put},
  };
  ReplayResult r = ReplayWal(log);
  ASSERT_EQ(r.mutations.size(), 1u);
  EXPECT_EQ(r.mutations[0].record, rec);
  EXPECT_EQ(r.rolled_back_batches, 1u);
}

TEST(WalReplay, PreparedThenAbortedLeavesNothing) {
  rpc::PrepareRequest p;
  p.txid = 77;
  DecisionLog d;
  d.txid = 77;
  std::vector<WalRecord> log = {{1, WalKind::kPrepare, EncodeValue(p)}};
  EXPECT_EQ(ReplayWal(log).in_doubt.size(), 1u);
  log.push_back({2, WalKind::kAbort, EncodeValue(d)});
  ReplayResult r = ReplayWal(log);
  EXPECT_TRUE(r.in_doubt.empty());
  EXPECT_TRUE(r.committed.empty());
}

TEST(LockSet, CanonicalOrderMergesDuplicates) {
  LockKey a{LockSpace::kDentry, {kRootDir, "a"}};
  LockKey b{LockSpace::kDentry, {kRootDir, "b"}};
  LockKey i{LockSpace::kInode, {kRootDir, "a"}};
  auto set = CanonicalLockSet({{i, LockMode::kShared},
                               {b, LockMode::kShared},
                               {a, LockMode::kShared},
                               {b, LockMode::kExclusive}});
  ASSERT_EQ(set.size(), 3u);
  EXPECT_EQ(set[0].key, a);
  EXPECT_EQ(set[1].key, b);
  EXPECT_EQ(set[1].mode, LockMode::kExclusive);
  EXPECT_EQ(set[2].key, i);
}

sim::Task<void> Grab(LockTable* t, LockKey key, LockMode mode, std::vector<std::string>* log, std::string tag) {
  co_await t->Acquire(key, mode);
  log->push_back(tag);
}

struct Idle : sim::Actor {
  void Deliver(sim::Envelope) override {}
};

TEST(LockTable, WaitersAreGrantedInFifoOrder) {
  sim::Simulator sim(sim::Simulator::Config{});
  Idle owner;
  sim.Register(1, &owner);
  LockTable table(sim, 1);
  sim::TaskScope scope;
  std::vector<std::string> log;
  LockKey k{LockSpace::kInode, {kRootDir, "x"}};
  scope.Spawn(Grab(&table, k, LockMode::kExclusive, &log, "w1"));
  scope.Spawn(Grab(&table, k, LockMode::kShared, &log, "r1"));
  scope.Spawn(Grab(&table, k, LockMode::kShared, &log, "r2"));
  scope.Spawn(Grab(&table, k, LockMode::kExclusive, &log, "w2"));
  sim.RunUntilIdle();
  EXPECT_EQ(log, (std::vector<std::string>{"w1"}));
  EXPECT_TRUE(table.IsHeldExclusive(k));
  table.Release(k, LockMode::kExclusive);
  sim.RunUntilIdle();
  EXPECT_EQ(log, (std::vector<std::string>{"w1", "r1", "r2"}));
  table.Release(k, LockMode::kShared);
  sim.RunUntilIdle();
  EXPECT_EQ(log.size(), 3u);
  table.Release(k, LockMode::kShared);
  sim.RunUntilIdle();
  EXPECT_EQ(log.back(), "w2");
  EXPECT_EQ(table.acquisitions(), 4u);
}

TEST(NamespaceReplica, StaleFetchLosesToInvalidation) {
  NamespaceReplica ns;
  DentryKey k{kRootDir, "d"};
  uint64_t issued = ns.Gen(k);
  EXPECT_EQ(ns.Invalidate(k), issued + 1);
  EXPECT_FALSE(ns.InstallFetched(k, DirectoryId(5), Permission{0755, 0, 0}, issued));
  EXPECT_EQ(ns.Find(k)->state, DentryState::kInvalid);
  EXPECT_TRUE(ns.InstallFetched(k, DirectoryId(5), Permission{0755, 0, 0}, ns.Gen(k)));
  EXPECT_EQ(ns.Find(k)->state, DentryState::kValid);
  EXPECT_EQ(ns.Find(k)->dir_id, DirectoryId(5));
  EXPECT_EQ(ns.valid_count(), 1u);
}

TEST(NamespaceReplica, MemoryIsCounted) {
  NamespaceReplica ns;
  size_t empty = ns.memory_bytes();
  for (int i = 0; i < 100; ++i) ns.PutValid({kRootDir, "dir" + std::to_string(i)}, DirectoryId(i + 1), {});
  EXPECT_GT(ns.memory_bytes(), empty + 100 * 8);
  ns.Clear();
  EXPECT_EQ(ns.memory_bytes(), empty);
}

TEST(InodeTable, TopKOrdersByCountThenName) {
  InodeTable t;
  uint64_t id = 1;
  auto add = [&](DirectoryId pid, const char* name) {
    InodeRecord r;
    r.key = {pid, name};
    r.id = InodeId(id++);
    EXPECT_TRUE(t.Insert(r));
  };
  for (int d = 1; d <= 3; ++d) add(DirectoryId(d), "b");
  for (int d = 1; d <= 3; ++d) add(DirectoryId(d), "a");
  add(DirectoryId(1), "c");
  auto top = t.TopK(2);
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(top[0].name, "a");
  EXPECT_EQ(top[1].name, "b");
  EXPECT_EQ(top[0].count, 3u);
  EXPECT_TRUE(t.Erase({DirectoryId(2), "a"}));
  EXPECT_EQ(t.NameCount("a"), 2u);
  EXPECT_EQ(t.TopK(1)[0].name, "b");
  EXPECT_EQ(t.Children(DirectoryId(1)).size(), 3u);
}

}  // namespace
}  // namespace falconmeta
