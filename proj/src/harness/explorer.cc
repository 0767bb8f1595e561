#include "falconmeta/harness/explorer.h"

#include <algorithm>
#include <set>

#include "falconmeta/harness/workload.h"

namespace falconmeta::harness {

size_t DfsChooser::Choose(size_t n) {
  if (pos_ < path_.size()) return path_[pos_++].first;
  path_.emplace_back(0, n);
  ++pos_;
  return 0;
}

bool DfsChooser::Next() {
  pos_ = 0;
  while (!path_.empty()) {
    auto& [choice, options] = path_.back();
    if (choice + 1 < options) {
      ++choice;
      return true;
    }
    path_.pop_back();
  }
  return false;
}

namespace {

constexpr Credentials kRoot{0, 0};
constexpr Credentials kUser{100, 100};

TraceOp Op(TraceOpKind kind, std::string path, std::vector<std::string> args = {}) {
  TraceOp op;
  op.kind = kind;
  op.path = std::move(path);
  op.args = std::move(args);
  return op;
}

HistoryOp H(uint32_t client, Credentials who, TraceOp op) {
  HistoryOp h;
  h.client = client;
  h.who = who;
  h.op = std::move(op);
  return h;
}

ClusterConfig RaceConfig(const RaceScenario& s) {
  ClusterConfig c;
  c.mnodes = s.mnodes;
  c.clients = 2;
  c.sim.seed = 1;
  c.sim.jitter_ns = 0;
  c.node.batch_base_ns = 0;
  c.node.per_request_ns = 0;
  c.node.flush_ns = 0;
  c.node.torn_writes = false;
  c.node.skip_invalidation = s.skip_invalidation;
  return c;
}

Ring RaceRing(uint32_t mnodes) {
  ClusterView v;
  for (uint32_t i = 0; i < mnodes; ++i) v.nodes.push_back(NodeId{i});
  return v.BuildRing();
}

// First of base, base1, base2, ... whose hash owner differs from `other`.
std::string NameAwayFrom(const Ring& ring, const std::string& base, NodeId other) {
  if (OwnerByName(ring, base) != other) return base;
  for (int i = 1;; ++i) {
    std::string n = base + std::to_string(i);
    if (OwnerByName(ring, n) != other) return n;
  }
}

Code RunOne(Cluster& cl, const HistoryOp& h) {
  ClientSession& c = cl.client(h.client);
  c.set_creds(h.who);
  auto r = cl.Await(h.client, ExecuteTraceOp(&c, h.op));
  return r ? r->status : Code::kTimeout;
}

sim::Task<void> RaceTask(ClientSession* c, TraceOp op, Code* out, size_t* pending) {
  OpResult r = co_await ExecuteTraceOp(c, std::move(op));
  *out = r.status;
  --*pending;
}

}  // namespace

ExploreReport Explore(const RaceScenario& s, uint64_t max_schedules) {
  ExploreReport rep;
  rep.name = s.name;
  OracleState initial;
  for (const auto& op : s.setup) initial.Apply(op, kRoot);

  DfsChooser chooser;
  std::set<std::string> outcomes;
  bool more = true;
  while (more && rep.schedules < max_schedules) {
    Cluster cl(RaceConfig(s));
    for (const auto& op : s.setup) RunOne(cl, H(0, kRoot, op));
    if (s.cold_replicas) {
      for (const auto& [id, node] : cl.mnodes()) {
        cl.sim().Crash(Raw(id));
        cl.sim().Restart(Raw(id));
      }
      cl.sim().RunUntilIdle();
    }
    for (const auto& h : s.warm) RunOne(cl, h);
    cl.sim().RunUntilIdle();

    auto& counters = cl.sim().counters();
    uint64_t delivered0 = cl.sim().deliveries();
    uint64_t remote0 = counters.Get("lookup.remote");
    uint64_t discarded0 = counters.Get("lookup.discarded");
    std::vector<HistoryOp> concurrent = s.concurrent;
    std::vector<Code> results(concurrent.size(), Code::kTimeout);
    size_t pending = concurrent.size();
    cl.sim().SetChooser(&chooser);
    for (size_t i = 0; i < concurrent.size(); ++i) {
      ClientSession& c = cl.client(concurrent[i].client);
      c.set_creds(concurrent[i].who);
      c.Spawn(RaceTask(&c, concurrent[i].op, &results[i], &pending));
    }
    cl.sim().RunUntil([&pending] { return pending == 0; }, 1'000'000);
    cl.sim().RunUntilIdle(1'000'000);
    cl.sim().SetChooser(nullptr);
    rep.max_messages = std::max(rep.max_messages, cl.sim().deliveries() - delivered0);
    if (counters.Get("lookup.remote") > remote0) ++rep.refetch_schedules;
    if (counters.Get("lookup.discarded") > discarded0) ++rep.discard_schedules;

    std::string outcome;
    for (size_t i = 0; i < concurrent.size(); ++i) {
      concurrent[i].observed = results[i];
      outcome += std::string(i ? "," : "") + std::string(CodeName(results[i]));
    }
    std::vector<HistoryOp> after = s.after;
    for (auto& h : after) {
      h.observed = RunOne(cl, h);
      outcome += "|" + std::string(CodeName(h.observed));
    }
    outcomes.insert(outcome);

    Verdict v = CheckSerializable(initial, concurrent, after, cl.Census());
    ++rep.schedules;
    if (!v.pass) {
      if (rep.failures == 0) rep.first_failure = v;
      ++rep.failures;
    }
    more = chooser.Next();
  }
  rep.exhausted = !more;
  rep.outcomes.assign(outcomes.begin(), outcomes.end());
  std::string k = "explore." + s.name + ".";
  rep.metrics[k + "schedules"] = static_cast<double>(rep.schedules);
  rep.metrics[k + "failures"] = static_cast<double>(rep.failures);
  rep.metrics[k + "exhausted"] = rep.exhausted ? 1 : 0;
  rep.metrics[k + "max_messages"] = static_cast<double>(rep.max_messages);
  rep.metrics[k + "refetch_schedules"] = static_cast<double>(rep.refetch_schedules);
  rep.metrics[k + "discard_schedules"] = static_cast<double>(rep.discard_schedules);
  rep.metrics[k + "outcomes"] = static_cast<double>(rep.outcomes.size());
  return rep;
}

std::vector<RaceScenario> StandardRaces() {
  const uint32_t n = 2;
  Ring ring = RaceRing(n);
  std::vector<RaceScenario> out;

  // The directory being removed and the child are owned by different nodes,
  // so the child's owner resolves /a/b from its replica while the
  // directory's owner invalidates it.
  std::string b = "b";
  std::string c = NameAwayFrom(ring, "c", OwnerByName(ring, b));
  {
    RaceScenario s;
    s.name = "rmdir_create_child";
    s.mnodes = n;
    s.setup = {Op(TraceOpKind::kMkdir, "/a", {"755"}), Op(TraceOpKind::kMkdir, "/a/" + b, {"755"})};
    s.warm = {H(0, kRoot, Op(TraceOpKind::kGetAttr, "/a/" + b + "/" + c))};
    s.concurrent = {H(0, kRoot, Op(TraceOpKind::kRmdir, "/a/" + b)),
                    H(1, kRoot, Op(TraceOpKind::kCreate, "/a/" + b + "/" + c, {"644"}))};
    s.after = {H(0, kRoot, Op(TraceOpKind::kGetAttr, "/a/" + b)),
               H(0, kRoot, Op(TraceOpKind::kGetAttr, "/a/" + b + "/" + c))};
    out.push_back(std::move(s));
  }
  {
    RaceScenario s;
    s.name = "rmdir_open";
    s.mnodes = n;
    s.setup = {Op(TraceOpKind::kMkdir, "/a", {"755"}), Op(TraceOpKind::kMkdir, "/a/" + b, {"755"})};
    s.warm = {H(0, kRoot, Op(TraceOpKind::kGetAttr, "/a/" + b + "/" + c))};
    s.concurrent = {H(0, kRoot, Op(TraceOpKind::kRmdir, "/a/" + b)),
                    H(1, kRoot, Op(TraceOpKind::kOpen, "/a/" + b + "/" + c))};
    s.after = {H(0, kRoot, Op(TraceOpKind::kGetAttr, "/a/" + b)),
               H(1, kRoot, Op(TraceOpKind::kCreate, "/a/" + b + "/" + c, {"644"}))};
    out.push_back(std::move(s));
  }
  // Permission change racing a resolution on a node whose replica has never
  // seen /a: the fetch reply may arrive after the invalidation.
  std::string f = NameAwayFrom(ring, "f", OwnerByName(ring, "a"));
  {
    RaceScenario s;
    s.name = "setperm_resolve";
    s.mnodes = n;
    s.setup = {Op(TraceOpKind::kMkdir, "/a", {"755"}), Op(TraceOpKind::kCreate, "/a/" + f, {"644"})};
    s.cold_replicas = true;
    s.concurrent = {H(0, kRoot, Op(TraceOpKind::kSetPerm, "/a", {"700", "0", "0"})),
                    H(1, kUser, Op(TraceOpKind::kGetAttr, "/a/" + f))};
    s.after = {H(1, kUser, Op(TraceOpKind::kGetAttr, "/a/" + f)),
               H(0, kRoot, Op(TraceOpKind::kGetAttr, "/a/" + f))};
    out.push_back(std::move(s));
  }
  std::string sub = "sub";
  std::string x = NameAwayFrom(ring, "x", OwnerByName(ring, sub));
  {
    RaceScenario s;
    s.name = "rename_open";
    s.mnodes = n;
    s.setup = {Op(TraceOpKind::kMkdir, "/a", {"755"}), Op(TraceOpKind::kMkdir, "/a/" + sub, {"755"}),
               Op(TraceOpKind::kCreate, "/a/" + sub + "/" + x, {"644"}), Op(TraceOpKind::kMkdir, "/b", {"755"})};
    s.warm = {H(1, kRoot, Op(TraceOpKind::kGetAttr, "/a/" + sub + "/" + x))};
    s.concurrent = {H(0, kRoot, Op(TraceOpKind::kRename, "/a/" + sub, {"/b/sub2"})),
                    H(1, kRoot, Op(TraceOpKind::kOpen, "/a/" + sub + "/" + x))};
    s.after = {H(1, kRoot, Op(TraceOpKind::kGetAttr, "/a/" + sub + "/" + x)),
               H(1, kRoot, Op(TraceOpKind::kGetAttr, "/b/sub2/" + x))};
    out.push_back(std::move(s));
  }
  return out;
}

RaceScenario SkipInvalidationMutant() {
  Ring ring = RaceRing(2);
  std::string f = NameAwayFrom(ring, "f", OwnerByName(ring, "a"));
  RaceScenario s;
  s.name = "setperm_resolve_skip_invalidation";
  s.mnodes = 2;
  s.skip_invalidation = true;
  s.setup = {Op(TraceOpKind::kMkdir, "/a", {"755"}), Op(TraceOpKind::kCreate, "/a/" + f, {"644"})};
  s.warm = {H(1, kUser, Op(TraceOpKind::kGetAttr, "/a/" + f))};
  s.concurrent = {H(0, kRoot, Op(TraceOpKind::kSetPerm, "/a", {"700", "0", "0"})),
                  H(1, kUser, Op(TraceOpKind::kGetAttr, "/a/" + f))};
  s.after = {H(1, kUser, Op(TraceOpKind::kGetAttr, "/a/" + f))};
  return s;
}

}  // namespace falconmeta::harness
