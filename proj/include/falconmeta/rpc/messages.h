#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "falconmeta/common/bytes.h"
#include "falconmeta/common/status.h"
#include "falconmeta/index/exception_table.h"
#include "falconmeta/index/ring.h"
#include "falconmeta/model/types.h"
#include "falconmeta/sim/simulator.h"

namespace falconmeta::rpc {

using sim::Address;

// ---- client <-> MNode -------------------------------------------------------

enum class MetaOp : uint8_t { kMkdir, kCreate, kOpen, kGetAttr, kUnlink, kClose, kReaddir };

std::string_view MetaOpName(MetaOp op);
bool IsMutation(MetaOp op);

struct MetaRequest {
  static constexpr std::string_view kName = "meta";
  MetaOp op = MetaOp::kGetAttr;
  std::string path;
  Credentials caller;
  uint16_t mode = 0;   // mkdir / create
  uint64_t size = 0;   // close
  uint64_t mtime = 0;  // close
  uint8_t hops = 0;    // servers that handled this request so far
  Address reply_to = 0;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(op, path, caller, mode, size, mtime, hops, reply_to);
  }
};

struct MetaReply {
  static constexpr std::string_view kName = "meta_reply";
  Code status = Code::kOk;
  std::optional<InodeRecord> inode;
  std::vector<InodeRecord> entries;  // readdir shard
  uint8_t hops = 0;
  std::optional<ExceptionTable> table;  // piggybacked when the client is stale
  std::optional<ClusterView> view;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(status, inode, entries, hops, table, view);
  }
};

// ---- client <-> coordinator -------------------------------------------------

enum class GlobalOp : uint8_t { kRmdir, kSetPerm, kRename };

struct GlobalRequest {
  static constexpr std::string_view kName = "global";
  GlobalOp op = GlobalOp::kRmdir;
  std::string path;
  std::string path2;  // rename destination
  Credentials caller;
  Permission perm;  // setperm

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(op, path, path2, caller, perm);
  }
};

struct GlobalReply {
  static constexpr std::string_view kName = "global_reply";
  Code status = Code::kOk;
  std::optional<ExceptionTable> table;
  std::optional<ClusterView> view;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(status, table, view);
  }
};

// ---- namespace replication --------------------------------------------------

struct LookupRequest {
  static constexpr std::string_view kName = "lookup";
  DentryKey key;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(key);
  }
};

struct LookupReply {
  static constexpr std::string_view kName = "lookup_reply";
  Code status = Code::kOk;
  DirectoryId dir_id = kRootDir;
  Permission perm;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(status, dir_id, perm);
  }
};

// Coordinator -> owner of a directory (or file) inode.
struct DirOpRequest {
  static constexpr std::string_view kName = "dirop";
  GlobalOp op = GlobalOp::kRmdir;
  DentryKey key;
  Permission perm;
  Credentials caller;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(op, key, perm, caller);
  }
};

struct DirOpReply {
  static constexpr std::string_view kName = "dirop_reply";
  Code status = Code::kOk;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(status);
  }
};

struct InvalidateRequest {
  static constexpr std::string_view kName = "invalidate";
  DentryKey key;
  DirectoryId dir_id = kRootDir;
  bool check_children = false;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(key, dir_id, check_children);
  }
};

struct InvalidateReply {
  static constexpr std::string_view kName = "invalidate_reply";
  bool children_exist = false;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(children_exist);
  }
};

// ---- two-phase commit -------------------------------------------------------

enum class TxOpKind : uint8_t { kRemove, kInsert, kMove };

// kRemove: drop record.key (the participant fills in the full record).
// kInsert: add `record`.
// kMove: rekey the record at record.key to `dest` on the same node.
// Removing or moving a directory invalidates its dentry on every replica.
struct TxOp {
  TxOpKind kind = TxOpKind::kInsert;
  InodeRecord record;
  DentryKey dest;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(kind, record, dest);
  }
};

struct PrepareRequest {
  static constexpr std::string_view kName = "prepare";
  uint64_t txid = 0;
  Address coordinator = 0;
  std::vector<TxOp> ops;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(txid, coordinator, ops);
  }
};

struct VoteReply {
  static constexpr std::string_view kName = "vote";
  uint64_t txid = 0;
  Code status = Code::kOk;  // kOk votes yes
  std::vector<InodeRecord> removed;  // records captured by kRemove / kMove

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(txid, status, removed);
  }
};

struct DecisionRequest {
  static constexpr std::string_view kName = "decision";
  uint64_t txid = 0;
  bool commit = false;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(txid, commit);
  }
};

struct AckReply {
  static constexpr std::string_view kName = "ack";
  uint64_t value = 0;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(value);
  }
};

enum class TxState : uint8_t { kPending, kCommitted, kAborted };

struct DecisionQuery {
  static constexpr std::string_view kName = "decision_query";
  uint64_t txid = 0;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(txid);
  }
};

struct DecisionReply {
  static constexpr std::string_view kName = "decision_reply";
  uint64_t txid = 0;
  TxState state = TxState::kPending;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(txid, state);
  }
};

// ---- load balancing and reconfiguration --------------------------------------

struct TablePush {
  static constexpr std::string_view kName = "table_push";
  ExceptionTable table;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(table);
  }
};

struct ViewPush {
  static constexpr std::string_view kName = "view_push";
  ClusterView view;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(view);
  }
};

struct BlockNames {
  static constexpr std::string_view kName = "block";
  std::vector<std::string> names;
  bool block = true;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(names, block);
  }
};

struct PauseRequest {
  static constexpr std::string_view kName = "pause";
  bool pause = true;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(pause);
  }
};

// Move every local inode whose placement under the current table and ring is
// another node. `names` restricts the sweep unless `all` is set.
struct MigrateRequest {
  static constexpr std::string_view kName = "migrate";
  std::vector<std::string> names;
  bool all = false;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(names, all);
  }
};

struct MigrateReply {
  static constexpr std::string_view kName = "migrate_reply";
  uint64_t moved = 0;
  uint64_t remaining = 0;  // records still placed elsewhere after this pass

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(moved, remaining);
  }
};

struct NameCount {
  std::string name;
  uint64_t count = 0;

  friend bool operator==(const NameCount&, const NameCount&) = default;
};

struct StatsRequest {
  static constexpr std::string_view kName = "stats";
  uint16_t k = 0;
  std::vector<std::string> tracked;  // names whose exact local count is wanted

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(k, tracked);
  }
};

// Wire: u64 inode_count | u16 K | K x (u16 len, name, u64 freq), followed by
// the same list layout for tracked names.
struct StatsReport {
  static constexpr std::string_view kName = "stats_report";
  uint64_t inode_count = 0;
  std::vector<NameCount> top;
  std::vector<NameCount> tracked;

  void EncodeTo(ByteWriter& w) const;
  static StatsReport DecodeFrom(ByteReader& r);
  friend bool operator==(const StatsReport&, const StatsReport&) = default;
};

// ---- file store ----------------------------------------------------------------

enum class ChunkOp : uint8_t { kPut, kGet, kDeleteAll };

struct ChunkRequest {
  static constexpr std::string_view kName = "chunk";
  ChunkOp op = ChunkOp::kGet;
  InodeId inode{0};
  uint32_t index = 0;
  Bytes data;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(op, inode, index, data);
  }
};

struct ChunkReply {
  static constexpr std::string_view kName = "chunk_reply";
  Code status = Code::kOk;
  Bytes data;
  uint32_t deleted = 0;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(status, data, deleted);
  }
};

// The variant index is the wire opcode.
using Payload =
    std::variant<MetaRequest, MetaReply, GlobalRequest, GlobalReply, LookupRequest, LookupReply, DirOpRequest,
                 DirOpReply, InvalidateRequest, InvalidateReply, PrepareRequest, VoteReply, DecisionRequest, AckReply,
                 DecisionQuery, DecisionReply, TablePush, ViewPush, BlockNames, PauseRequest, MigrateRequest,
                 MigrateReply, StatsRequest, StatsReport, ChunkRequest, ChunkReply>;

// Wire: u8 opcode | u64 request id | u64 client table version | payload.
struct Message {
  uint64_t req_id = 0;
  uint64_t table_version = 0;
  Payload body;

  uint8_t opcode() const { return static_cast<uint8_t>(body.index()); }
  std::string_view name() const;
  bool is_reply() const;
};

Bytes Encode(const Message& msg);
Result<Message> Decode(std::span<const uint8_t> data);

}  // namespace falconmeta::rpc
