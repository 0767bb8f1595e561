#include "falconmeta/harness/oracle.h"

#include <algorithm>
#include <numeric>

namespace falconmeta::harness {

namespace {

uint16_t ParseMode(const std::string& s) { return static_cast<uint16_t>(std::stoul(s, nullptr, 8)); }

bool IsUnder(const std::string& path, const std::string& dir) {
  return path.size() > dir.size() && path.compare(0, dir.size(), dir) == 0 && path[dir.size()] == '/';
}

}  // namespace

Code OracleState::Apply(const TraceOp& op, const Credentials& who) {
  try {
    switch (op.kind) {
      case TraceOpKind::kMkdir:
        return Mkdir(op.path, op.args.empty() ? 0755 : ParseMode(op.args[0]), who);
      case TraceOpKind::kCreate:
        return Create(op.path, op.args.empty() ? 0644 : ParseMode(op.args[0]), who);
      case TraceOpKind::kOpen:
      case TraceOpKind::kGetAttr:
        return GetAttr(op.path, who);
      case TraceOpKind::kClose:
        return Close(op.path, op.args.empty() ? 0 : std::stoull(op.args[0]), who);
      case TraceOpKind::kUnlink:
        return Unlink(op.path, who);
      case TraceOpKind::kReaddir: {
        std::vector<std::string> names;
        return Readdir(op.path, who, &names);
      }
      case TraceOpKind::kRmdir:
        return Rmdir(op.path, who);
      case TraceOpKind::kSetPerm: {
        if (op.args.size() != 3) return Code::kInvalidArgument;
        Permission p{ParseMode(op.args[0]), static_cast<uint32_t>(std::stoul(op.args[1])),
                     static_cast<uint32_t>(std::stoul(op.args[2]))};
        return SetPerm(op.path, p, who);
      }
      case TraceOpKind::kRename:
        return op.args.empty() ? Code::kInvalidArgument : Rename(op.path, op.args[0], who);
    }
  } catch (const std::exception&) {
    return Code::kInvalidArgument;
  }
  return Code::kInvalidArgument;
}

Code OracleState::ResolveParent(const PathName& path, const Credentials& who, Permission* parent) const {
  Permission perm = kRootPermission;
  std::string prefix;
  for (const auto& c : path.parent_components()) {
    if (!CheckPermission(perm, who, Access::kExec)) return Code::kAccess;
    prefix += "/" + c;
    auto it = entries_.find(prefix);
    if (it == entries_.end()) return Code::kNoEnt;
    if (!it->second.dir) return Code::kNotDir;
    perm = it->second.perm;
  }
  *parent = perm;
  return Code::kOk;
}

bool OracleState::HasChildren(const std::string& path) const {
  auto it = entries_.upper_bound(path);
  // Children sort after "path/" ... and before "path0".
  for (; it != entries_.end(); ++it) {
    if (IsUnder(it->first, path)) return true;
    if (it->first.compare(0, path.size(), path) != 0) break;
  }
  return false;
}

Code OracleState::Insert(const std::string& raw, bool dir, uint16_t mode, const Credentials& who) {
  auto p = PathName::Parse(raw);
  if (!p.ok()) return p.code();
  if (p->is_root()) return Code::kExist;
  Permission parent;
  Code rc = ResolveParent(*p, who, &parent);
  if (rc != Code::kOk) return rc;
  if (!CheckPermission(parent, who, Access::kExec)) return Code::kAccess;
  if (!CheckPermission(parent, who, Access::kWrite)) return Code::kAccess;
  std::string path = p->Render();
  if (entries_.contains(path)) return Code::kExist;
  if (mode > kMaxMode) return Code::kInvalidArgument;
  entries_[path] = Entry{dir, Permission{mode, who.uid, who.gid}, 0};
  return Code::kOk;
}

Code OracleState::Mkdir(const std::string& path, uint16_t mode, const Credentials& who) {
  return Insert(path, true, mode, who);
}

Code OracleState::Create(const std::string& path, uint16_t mode, const Credentials& who) {
  return Insert(path, false, mode, who);
}

Code OracleState::GetAttr(const std::string& raw, const Credentials& who) const {
  auto p = PathName::Parse(raw);
  if (!p.ok()) return p.code();
  if (p->is_root()) return Code::kOk;
  Permission parent;
  Code rc = ResolveParent(*p, who, &parent);
  if (rc != Code::kOk) return rc;
  if (!CheckPermission(parent, who, Access::kExec)) return Code::kAccess;
  return entries_.contains(p->Render()) ? Code::kOk : Code::kNoEnt;
}

Code OracleState::Close(const std::string& raw, uint64_t size, const Credentials& who) {
  auto p = PathName::Parse(raw);
  if (!p.ok()) return p.code();
  if (p->is_root()) return Code::kIsDir;
  Permission parent;
  Code rc = ResolveParent(*p, who, &parent);
  if (rc != Code::kOk) return rc;
  if (!CheckPermission(parent, who, Access::kExec)) return Code::kAccess;
  auto it = entries_.find(p->Render());
  if (it == entries_.end()) return Code::kNoEnt;
  if (it->second.dir) return Code::kIsDir;
  it->second.size = size;
  return Code::kOk;
}

Code OracleState::Unlink(const std::string& raw, const Credentials& who) {
  auto p = PathName::Parse(raw);
  if (!p.ok()) return p.code();
  if (p->is_root()) return Code::kIsDir;
  Permission parent;
  Code rc = ResolveParent(*p, who, &parent);
  if (rc != Code::kOk) return rc;
  if (!CheckPermission(parent, who, Access::kExec)) return Code::kAccess;
  if (!CheckPermission(parent, who, Access::kWrite)) return Code::kAccess;
  auto it = entries_.find(p->Render());
  if (it == entries_.end()) return Code::kNoEnt;
  if (it->second.dir) return Code::kIsDir;
  entries_.erase(it);
  return Code::kOk;
}

Code OracleState::Readdir(const std::string& raw, const Credentials& who, std::vector<std::string>* names) const {
  auto p = PathName::Parse(raw);
  if (!p.ok()) return p.code();
  Permission perm = kRootPermission;
  std::string prefix;
  for (const auto& c : p->components()) {
    if (!CheckPermission(perm, who, Access::kExec)) return Code::kAccess;
    prefix += "/" + c;
    auto it = entries_.find(prefix);
    if (it == entries_.end()) return Code::kNoEnt;
    if (!it->second.dir) return Code::kNotDir;
    perm = it->second.perm;
  }
  if (!CheckPermission(perm, who, Access::kRead)) return Code::kAccess;
  names->clear();
  for (const auto& [path, _] : entries_) {
    if (IsUnder(path, prefix) && path.find('/', prefix.size() + 1) == std::string::npos) {
      names->push_back(path.substr(prefix.size() + 1));
    }
  }
  return Code::kOk;
}

Code OracleState::Rmdir(const std::string& raw, const Credentials& who) {
  auto p = PathName::Parse(raw);
  if (!p.ok()) return p.code();
  if (p->is_root()) return Code::kAccess;
  Permission parent;
  Code rc = ResolveParent(*p, who, &parent);
  if (rc != Code::kOk) return rc;
  if (!CheckPermission(parent, who, Access::kExec)) return Code::kAccess;
  if (!CheckPermission(parent, who, Access::kWrite)) return Code::kAccess;
  std::string path = p->Render();
  auto it = entries_.find(path);
  if (it == entries_.end()) return Code::kNoEnt;
  if (!it->second.dir) return Code::kNotDir;
  if (HasChildren(path)) return Code::kNotEmpty;
  entries_.erase(it);
  return Code::kOk;
}

Code OracleState::SetPerm(const std::string& raw, Permission perm, const Credentials& who) {
  auto p = PathName::Parse(raw);
  if (!p.ok()) return p.code();
  if (p->is_root()) return Code::kAccess;
  Permission parent;
  Code rc = ResolveParent(*p, who, &parent);
  if (rc != Code::kOk) return rc;
  if (!CheckPermission(parent, who, Access::kExec)) return Code::kAccess;
  auto it = entries_.find(p->Render());
  if (it == entries_.end()) return Code::kNoEnt;
  const Permission& cur = it->second.perm;
  bool allowed = who.uid == 0 || (who.uid == cur.uid && perm.uid == cur.uid);
  if (!allowed) return Code::kAccess;
  if (perm.mode > kMaxMode) return Code::kInvalidArgument;
  it->second.perm = perm;
  return Code::kOk;
}

Code OracleState::Rename(const std::string& raw_from, const std::string& raw_to, const Credentials& who) {
  auto a = PathName::Parse(raw_from);
  if (!a.ok()) return a.code();
  auto b = PathName::Parse(raw_to);
  if (!b.ok()) return b.code();
  if (a->is_root() || b->is_root()) return Code::kInvalidRename;
  if (*a == *b) return Code::kOk;
  if (a->IsPrefixOf(*b)) return Code::kInvalidRename;
  Permission pa;
  Permission pb;
  Code rc = ResolveParent(*a, who, &pa);
  if (rc != Code::kOk) return rc;
  rc = ResolveParent(*b, who, &pb);
  if (rc != Code::kOk) return rc;
  for (const Permission* p : {&pa, &pb}) {
    if (!CheckPermission(*p, who, Access::kWrite) || !CheckPermission(*p, who, Access::kExec)) return Code::kAccess;
  }
  std::string from = a->Render();
  std::string to = b->Render();
  auto it = entries_.find(from);
  if (it == entries_.end()) return Code::kNoEnt;
  if (entries_.contains(to)) return Code::kExist;
  Entry moved = it->second;
  entries_.erase(it);
  if (moved.dir) {
    std::vector<std::pair<std::string, Entry>> sub;
    for (auto c = entries_.begin(); c != entries_.end();) {
      if (IsUnder(c->first, from)) {
        sub.emplace_back(to + c->first.substr(from.size()), c->second);
        c = entries_.erase(c);
      } else {
        ++c;
      }
    }
    for (auto& [path, e] : sub) entries_[path] = e;
  }
  entries_[to] = moved;
  return Code::kOk;
}

Verdict CompareNamespace(const OracleState& expected, const CensusReport& census) {
  Verdict v;
  if (!census.duplicates.empty()) return Verdict{false, "duplicated inode " + census.duplicates.front()};
  if (!census.orphans.empty()) return Verdict{false, "orphaned inode " + census.orphans.front()};
  auto e = expected.entries().begin();
  auto c = census.by_path.begin();
  while (e != expected.entries().end() || c != census.by_path.end()) {
    if (c == census.by_path.end() || (e != expected.entries().end() && e->first < c->first)) {
      return Verdict{false, "missing " + e->first};
    }
    if (e == expected.entries().end() || c->first < e->first) return Verdict{false, "unexpected " + c->first};
    const InodeRecord& rec = c->second;
    if (rec.is_dir() != e->second.dir || rec.perm != e->second.perm || (!rec.is_dir() && rec.size != e->second.size)) {
      return Verdict{false, "attributes differ at " + e->first};
    }
    ++e;
    ++c;
  }
  return v;
}

Verdict CheckSerializable(const OracleState& initial, const std::vector<HistoryOp>& concurrent,
                          const std::vector<HistoryOp>& after, const CensusReport& census) {
  std::vector<size_t> order(concurrent.size());
  std::iota(order.begin(), order.end(), 0);
  Verdict last{false, "no serial order matches"};
  do {
    // Per-client program order must hold.
    bool respects = true;
    for (size_t i = 0; i < order.size() && respects; ++i) {
      for (size_t j = i + 1; j < order.size(); ++j) {
        if (concurrent[order[i]].client == concurrent[order[j]].client && order[i] > order[j]) {
          respects = false;
          break;
        }
      }
    }
    if (!respects) continue;
    OracleState s = initial;
    bool match = true;
    std::string why;
    for (size_t idx : order) {
      const HistoryOp& h = concurrent[idx];
      Code got = s.Apply(h.op, h.who);
      if (got != h.observed) {
        match = false;
        why = RenderTraceLine(h.op) + " expected " + std::string(CodeName(got)) + " observed " +
              std::string(CodeName(h.observed));
        break;
      }
    }
    for (size_t i = 0; match && i < after.size(); ++i) {
      Code got = s.Apply(after[i].op, after[i].who);
      if (got != after[i].observed) {
        match = false;
        why = RenderTraceLine(after[i].op) + " expected " + std::string(CodeName(got)) + " observed " +
              std::string(CodeName(after[i].observed));
      }
    }
    if (match) {
      Verdict v = CompareNamespace(s, census);
      if (v.pass) return v;
      why = v.detail;
    }
    last = Verdict{false, why};
  } while (std::next_permutation(order.begin(), order.end()));
  return last;
}

}  // namespace falconmeta::harness
