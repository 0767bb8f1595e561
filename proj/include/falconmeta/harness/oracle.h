#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "falconmeta/cluster/cluster.h"
#include "falconmeta/harness/trace.h"
#include "falconmeta/model/path.h"
#include "falconmeta/model/types.h"

namespace falconmeta::harness {

// Single-node reference: a flat map from full path to record, applying the
// same POSIX subset and the same error precedence as the cluster.
class OracleState {
 public:
  struct Entry {
    bool dir = false;
    Permission perm;
    uint64_t size = 0;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  Code Apply(const TraceOp& op, const Credentials& who);

  Code Mkdir(const std::string& path, uint16_t mode, const Credentials& who);
  Code Create(const std::string& path, uint16_t mode, const Credentials& who);
  Code GetAttr(const std::string& path, const Credentials& who) const;
  Code Close(const std::string& path, uint64_t size, const Credentials& who);
  Code Unlink(const std::string& path, const Credentials& who);
  Code Readdir(const std::string& path, const Credentials& who, std::vector<std::string>* names) const;
  Code Rmdir(const std::string& path, const Credentials& who);
  Code SetPerm(const std::string& path, Permission perm, const Credentials& who);
  Code Rename(const std::string& from, const std::string& to, const Credentials& who);

  const std::map<std::string, Entry>& entries() const { return entries_; }
  bool Contains(const std::string& path) const { return entries_.contains(path); }

  friend bool operator==(const OracleState&, const OracleState&) = default;

 private:
  // Walks the parent directories of `path`, checking exec on each directory
  // searched. On success `*parent` holds the last directory's permission.
  Code ResolveParent(const PathName& path, const Credentials& who, Permission* parent) const;
  Code Insert(const std::string& path, bool dir, uint16_t mode, const Credentials& who);
  bool HasChildren(const std::string& path) const;

  std::map<std::string, Entry> entries_;
};

struct Verdict {
  bool pass = true;
  std::string detail;  // first divergent path or result on failure
};

// Compares the cluster namespace against the oracle, path by path.
Verdict CompareNamespace(const OracleState& expected, const CensusReport& census);

struct HistoryOp {
  uint32_t client = 0;
  Credentials who;
  TraceOp op;
  Code observed = Code::kOk;
};

// True iff some serial order of `concurrent` (respecting per-client order),
// followed by `after` in order, reproduces every observed result and the
// final namespace, starting from `initial`.
Verdict CheckSerializable(const OracleState& initial, const std::vector<HistoryOp>& concurrent,
                          const std::vector<HistoryOp>& after, const CensusReport& census);

}  // namespace falconmeta::harness
