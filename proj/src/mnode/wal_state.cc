#include "falconmeta/mnode/wal_state.h"

namespace falconmeta {

std::vector<Mutation> TxOpsToMutations(const std::vector<rpc::TxOp>& ops) {
  std::vector<Mutation> out;
  for (const auto& op : ops) {
    switch (op.kind) {
      case rpc::TxOpKind::kRemove:
        out.push_back(Mutation::Erase(op.record.key));
        break;
      case rpc::TxOpKind::kInsert:
        out.push_back(Mutation::Put(op.record));
        break;
      case rpc::TxOpKind::kMove: {
        out.push_back(Mutation::Erase(op.record.key));
        InodeRecord moved = op.record;
        moved.key = op.dest;
        out.push_back(Mutation::Put(moved));
        break;
      }
    }
  }
  return out;
}

ReplayResult ReplayWal(std::span<const WalRecord> records) {
  ReplayResult out;
  std::vector<Mutation> pending;
  bool in_batch = false;
  for (const auto& rec : records) {
    switch (rec.kind) {
      case WalKind::kBeginBatch:
        if (in_batch) ++out.rolled_back_batches;
        pending.clear();
        in_batch = true;
        break;
      case WalKind::kOpApply: {
        Mutation m;
        if (!DecodeValue(rec.payload, &m)) break;
        if (in_batch) {
          pending.push_back(std::move(m));
        } else {
          out.mutations.push_back(std::move(m));
        }
        break;
      }
      case WalKind::kCommitBatch:
        for (auto& m : pending) out.mutations.push_back(std::move(m));
        pending.clear();
        in_batch = false;
        break;
      case WalKind::kPrepare: {
        rpc::PrepareRequest p;
        if (!DecodeValue(rec.payload, &p)) break;
        out.in_doubt[p.txid] = std::move(p);
        break;
      }
      case WalKind::kCommit: {
        DecisionLog d;
        if (!DecodeValue(rec.payload, &d)) break;
        auto it = out.in_doubt.find(d.txid);
        if (it != out.in_doubt.end()) {
          for (auto& m : TxOpsToMutations(it->second.ops)) out.mutations.push_back(std::move(m));
          out.in_doubt.erase(it);
        }
        for (auto& m : TxOpsToMutations(d.local_ops)) out.mutations.push_back(std::move(m));
        if (!d.participants.empty()) out.decisions[d.txid] = d.participants;
        out.committed.insert(d.txid);
        break;
      }
      case WalKind::kAbort: {
        DecisionLog d;
        if (!DecodeValue(rec.payload, &d)) break;
        out.in_doubt.erase(d.txid);
        break;
      }
    }
  }
  if (in_batch) ++out.rolled_back_batches;
  return out;
}

}  // namespace falconmeta
