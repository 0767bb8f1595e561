#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "falconmeta/index/exception_table.h"
#include "falconmeta/index/ring.h"
#include "falconmeta/model/types.h"
#include "falconmeta/rpc/messages.h"
#include "falconmeta/storage/wal.h"

namespace falconmeta {

// Payload of an OpApply record.
struct Mutation {
  enum class Kind : uint8_t {
    kPutInode = 0,
    kEraseInode = 1,
    kSetTable = 2,
    kSetView = 3,
    kBlockNames = 4,
    kUnblockNames = 5,
    kBoot = 6,
  };
  Kind kind = Kind::kPutInode;
  InodeRecord record;  // kPutInode; kEraseInode uses record.key
  std::optional<ExceptionTable> table;
  std::optional<ClusterView> view;
  std::vector<std::string> names;
  uint64_t value = 0;  // kBoot: incarnation

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(kind, record, table, view, names, value);
  }

  static Mutation Put(const InodeRecord& rec) { return Mutation{Kind::kPutInode, rec, {}, {}, {}, 0}; }
  static Mutation Erase(const DentryKey& key) {
    Mutation m;
    m.kind = Kind::kEraseInode;
    m.record.key = key;
    return m;
  }
};

// Payload of Commit and Abort records. A transaction coordinator lists the
// participants it must notify and the operations it applies locally.
struct DecisionLog {
  uint64_t txid = 0;
  std::vector<uint32_t> participants;
  std::vector<rpc::TxOp> local_ops;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(txid, participants, local_ops);
  }
};

// Converts committed transaction operations into store mutations.
std::vector<Mutation> TxOpsToMutations(const std::vector<rpc::TxOp>& ops);

struct ReplayResult {
  // Committed mutations in log order.
  std::vector<Mutation> mutations;
  // Prepared here, outcome unknown.
  std::map<uint64_t, rpc::PrepareRequest> in_doubt;
  // Commit decisions this node coordinated; participants are re-notified.
  std::map<uint64_t, std::vector<uint32_t>> decisions;
  std::set<uint64_t> committed;
  uint64_t rolled_back_batches = 0;
  Status scan_status;
};

// Pure function of the record sequence: batches without CommitBatch are
// dropped, transactions apply at their Commit record.
ReplayResult ReplayWal(std::span<const WalRecord> records);

}  // namespace falconmeta
