#include "falconmeta/harness/workload.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "falconmeta/common/hash.h"
#include "falconmeta/rpc/messages.h"

namespace falconmeta::harness {
namespace {

uint16_t ParseMode(const std::string& s) { return static_cast<uint16_t>(std::stoul(s, nullptr, 8)); }

OpResult Failed(Code c) {
  OpResult r;
  r.status = c;
  return r;
}

sim::Task<void> StreamTask(ClientSession* client, std::vector<TraceOp> ops, std::vector<Code>* out, size_t* pending) {
  for (auto& op : ops) {
    OpResult r = co_await ExecuteTraceOp(client, op);
    out->push_back(r.status);
  }
  --*pending;
}

void RunAll(Cluster& cluster, size_t* pending) {
  cluster.sim().RunUntil([pending] { return *pending == 0; });
}

bool IsClient(sim::Address a) { return a >= sim::kClientBase; }

std::string ParentOf(const std::string& path) {
  auto pos = path.rfind('/');
  return pos == 0 ? std::string("/") : path.substr(0, pos);
}

struct TraverseState {
  uint64_t opens = 0;
  uint64_t closes = 0;
  uint64_t failures = 0;
  uint64_t extra_hops = 0;
  std::vector<std::string> opened;
};

sim::Task<void> AccessFile(ClientSession* client, std::string path, bool read, TraverseState* st) {
  Result<FileHandle> h = co_await client->Open(path);
  ++st->opens;
  if (!h.ok()) {
    ++st->failures;
    co_return;
  }
  st->opened.push_back(path);
  FileHandle handle = h.value();
  if (read && handle.size > 0) {
    OpResult data = co_await client->Read(handle);
    if (!data.ok()) ++st->failures;
  }
  OpResult closed = co_await client->Close(path, handle.size, 0);
  ++st->closes;
  if (!closed.ok()) ++st->failures;
  if (closed.hops > 1) st->extra_hops += closed.hops - 1;
}

sim::Task<void> TraverseTask(ClientSession* client, std::vector<std::string> files, TraverseState* st,
                             size_t* pending) {
  for (auto& f : files) co_await AccessFile(client, f, true, st);
  --*pending;
}

sim::Task<void> BurstTask(ClientSession* client, std::vector<std::string> files, TraverseState* st,
                          size_t* pending) {
  for (auto& f : files) co_await AccessFile(client, f, false, st);
  --*pending;
}

}  // namespace

sim::Task<OpResult> ExecuteTraceOp(ClientSession* client, TraceOp op) {
  switch (op.kind) {
    case TraceOpKind::kMkdir: {
      OpResult r = co_await client->Mkdir(op.path, op.args.empty() ? 0755 : ParseMode(op.args[0]));
      co_return r;
    }
    case TraceOpKind::kCreate: {
      OpResult r = co_await client->Create(op.path, op.args.empty() ? 0644 : ParseMode(op.args[0]));
      co_return r;
    }
    case TraceOpKind::kOpen: {
      Result<FileHandle> h = co_await client->Open(op.path);
      OpResult r;
      r.status = h.code();
      co_return r;
    }
    case TraceOpKind::kClose: {
      uint64_t size = op.args.empty() ? 0 : std::stoull(op.args[0]);
      OpResult r = co_await client->Close(op.path, size, 0);
      co_return r;
    }
    case TraceOpKind::kGetAttr: {
      OpResult r = co_await client->GetAttr(op.path);
      co_return r;
    }
    case TraceOpKind::kUnlink: {
      OpResult r = co_await client->Unlink(op.path);
      co_return r;
    }
    case TraceOpKind::kReaddir: {
      OpResult r = co_await client->Readdir(op.path);
      co_return r;
    }
    case TraceOpKind::kRmdir: {
      OpResult r = co_await client->Rmdir(op.path);
      co_return r;
    }
    case TraceOpKind::kSetPerm: {
      if (op.args.size() < 3) co_return Failed(Code::kInvalidArgument);
      Permission p;
      p.mode = ParseMode(op.args[0]);
      p.uid = static_cast<uint32_t>(std::stoul(op.args[1]));
      p.gid = static_cast<uint32_t>(std::stoul(op.args[2]));
      OpResult r = co_await client->SetPerm(op.path, p);
      co_return r;
    }
    case TraceOpKind::kRename: {
      if (op.args.empty()) co_return Failed(Code::kInvalidArgument);
      OpResult r = co_await client->Rename(op.path, op.args[0]);
      co_return r;
    }
  }
  co_return Failed(Code::kInvalidArgument);
}

std::vector<std::vector<Code>> RunStreams(Cluster& cluster, std::vector<std::vector<TraceOp>> streams) {
  std::vector<std::vector<Code>> out(streams.size());
  size_t pending = 0;
  for (size_t i = 0; i < streams.size(); ++i) {
    if (streams[i].empty()) continue;
    ++pending;
    ClientSession* c = &cluster.client(i % cluster.client_count());
    c->Spawn(StreamTask(c, std::move(streams[i]), &out[i], &pending));
  }
  RunAll(cluster, &pending);
  return out;
}

Status LoadTree(Cluster& cluster, const GeneratedTree& tree) {
  size_t n = cluster.client_count();
  // Group directories by depth so parents exist before children.
  std::map<size_t, std::vector<std::string>> by_depth;
  for (const auto& d : tree.dirs) by_depth[std::count(d.begin(), d.end(), '/')].push_back(d);
  auto run = [&](const std::vector<std::string>& paths, TraceOpKind kind) -> Status {
    std::vector<std::vector<TraceOp>> streams(n);
    for (size_t i = 0; i < paths.size(); ++i) {
      TraceOp op;
      op.seq = i;
      op.kind = kind;
      op.path = paths[i];
      streams[i % n].push_back(std::move(op));
    }
    auto res = RunStreams(cluster, std::move(streams));
    for (size_t s = 0; s < res.size(); ++s) {
      for (size_t j = 0; j < res[s].size(); ++j) {
        if (res[s][j] != Code::kOk) return Status(res[s][j], "load " + paths[j * n + s]);
      }
    }
    return Status::OK();
  };
  for (const auto& [depth, dirs] : by_depth) {
    Status st = run(dirs, TraceOpKind::kMkdir);
    if (!st.ok()) return st;
  }
  return run(tree.files, TraceOpKind::kCreate);
}

void WarmReplicas(Cluster& cluster, const GeneratedTree& tree) {
  size_t n = cluster.client_count();
  std::vector<std::vector<TraceOp>> streams(n);
  for (size_t i = 0; i < tree.files.size(); ++i) {
    TraceOp op;
    op.kind = TraceOpKind::kGetAttr;
    op.path = tree.files[i];
    streams[i % n].push_back(std::move(op));
  }
  RunStreams(cluster, std::move(streams));
}

bool IsClientToMNode(sim::Address src, sim::Address dst) { return IsClient(src) && sim::IsMNodeAddress(dst); }

uint64_t InterMNodeMessages(const sim::Counters& counters) {
  return counters.SumEdges(sim::IsMNodeAddress, sim::IsMNodeAddress);
}

uint64_t ClientToMNodeMessages(const sim::Counters& counters) {
  return counters.SumEdges(IsClient, sim::IsMNodeAddress);
}

TraverseReport RunTraverse(Cluster& cluster, const GeneratedTree& tree, uint64_t seed) {
  TraverseReport rep;
  rep.files = tree.files.size();
  rep.sessions = cluster.client_count();
  auto& counters = cluster.sim().counters();
  uint64_t c2m0 = ClientToMNodeMessages(counters);
  uint64_t m2m0 = InterMNodeMessages(counters);
  uint64_t open0 = counters.Get("client.op.open");
  uint64_t close0 = counters.Get("client.op.close");

  std::vector<TraverseState> states(rep.sessions);
  size_t pending = rep.sessions;
  for (size_t i = 0; i < rep.sessions; ++i) {
    std::vector<std::string> order = tree.files;
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + i);
    std::shuffle(order.begin(), order.end(), rng);
    ClientSession* c = &cluster.client(i);
    c->Spawn(TraverseTask(c, std::move(order), &states[i], &pending));
  }
  RunAll(cluster, &pending);

  std::vector<std::string> expect = tree.files;
  std::sort(expect.begin(), expect.end());
  for (auto& st : states) {
    rep.failures += st.failures;
    rep.extra_hops += st.extra_hops;
    std::sort(st.opened.begin(), st.opened.end());
    if (st.opened != expect) rep.exactly_once = false;
  }
  rep.opens = counters.Get("client.op.open") - open0;
  rep.closes = counters.Get("client.op.close") - close0;
  rep.client_to_mnode = ClientToMNodeMessages(counters) - c2m0;
  rep.inter_mnode = InterMNodeMessages(counters) - m2m0;

  rep.metrics["traverse.files"] = static_cast<double>(rep.files);
  rep.metrics["traverse.sessions"] = static_cast<double>(rep.sessions);
  rep.metrics["traverse.opens"] = static_cast<double>(rep.opens);
  rep.metrics["traverse.closes"] = static_cast<double>(rep.closes);
  rep.metrics["traverse.failures"] = static_cast<double>(rep.failures);
  rep.metrics["traverse.client_to_mnode"] = static_cast<double>(rep.client_to_mnode);
  rep.metrics["traverse.inter_mnode"] = static_cast<double>(rep.inter_mnode);
  rep.metrics["traverse.exactly_once"] = rep.exactly_once ? 1 : 0;
  rep.metrics["traverse.requests_per_access"] =
      rep.opens == 0 ? 0 : static_cast<double>(rep.client_to_mnode) / static_cast<double>(rep.opens);
  rep.metrics["traverse.sim_ns"] = static_cast<double>(cluster.sim().now());
  return rep;
}

double CoefficientOfVariation(const std::vector<double>& xs) {
  if (xs.empty()) return 0;
  double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (mean == 0) return 0;
  double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  return std::sqrt(var) / mean;
}

BurstReport RunBurst(Cluster& cluster, const GeneratedTree& tree, uint32_t burst, uint64_t seed, uint64_t window_ns) {
  BurstReport rep;
  rep.burst = burst;
  rep.window_ns = window_ns;

  std::map<std::string, std::vector<std::string>> by_dir;
  for (const auto& f : tree.files) by_dir[ParentOf(f)].push_back(f);
  std::vector<std::string> dirs;
  for (const auto& [d, fs] : by_dir) dirs.push_back(d);

  Ring ring = cluster.coordinator().view().BuildRing();
  std::vector<NodeId> nodes = ring.nodes();
  std::map<NodeId, size_t> slot;
  for (size_t i = 0; i < nodes.size(); ++i) slot[nodes[i]] = i;
  std::map<std::string, size_t> affinity;
  // Directory-affinity placement: every file of a directory on the node that
  // owns the directory path.
  for (const auto& d : dirs) affinity[d] = slot[ring.Lookup(SplitMix64(NameHash(d)))];

  struct Arrival {
    uint64_t at;
    size_t node;
    size_t baseline;
  };
  std::vector<Arrival> arrivals;
  uint64_t start_ns = cluster.sim().now();
  cluster.sim().SetObserver([&](const sim::Envelope& env) {
    if (!IsClientToMNode(env.src, env.dst)) return;
    auto msg = rpc::Decode(env.payload);
    if (!msg.ok()) return;
    auto* req = std::get_if<rpc::MetaRequest>(&msg.value().body);
    if (req == nullptr) return;
    auto it = affinity.find(ParentOf(req->path));
    if (it == affinity.end()) return;
    arrivals.push_back(Arrival{env.deliver_ns - start_ns, slot[static_cast<NodeId>(env.dst)], it->second});
  });

  size_t sessions = cluster.client_count();
  std::vector<TraverseState> states(sessions);
  size_t pending = sessions;
  for (size_t i = 0; i < sessions; ++i) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + i);
    std::vector<std::string> order = dirs;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::string> files;
    for (const auto& d : order) {
      std::vector<std::string> in_dir = by_dir[d];
      std::shuffle(in_dir.begin(), in_dir.end(), rng);
      in_dir.resize(std::min<size_t>(in_dir.size(), burst));
      files.insert(files.end(), in_dir.begin(), in_dir.end());
    }
    ClientSession* c = &cluster.client(i);
    c->Spawn(BurstTask(c, std::move(files), &states[i], &pending));
  }
  RunAll(cluster, &pending);
  cluster.sim().SetObserver(nullptr);
  for (auto& st : states) rep.failures += st.failures;

  // Whole windows only; the tail window is partial.
  uint64_t end_ns = arrivals.empty() ? 0 : arrivals.back().at;
  size_t windows = window_ns == 0 ? 0 : static_cast<size_t>(end_ns / window_ns);
  std::vector<std::vector<double>> ours(windows, std::vector<double>(nodes.size(), 0));
  std::vector<std::vector<double>> base(windows, std::vector<double>(nodes.size(), 0));
  for (const auto& a : arrivals) {
    size_t w = a.at / window_ns;
    if (w >= windows) continue;
    ours[w][a.node] += 1;
    base[w][a.baseline] += 1;
  }
  for (size_t w = 0; w < windows; ++w) {
    double total = std::accumulate(ours[w].begin(), ours[w].end(), 0.0);
    if (total == 0) continue;
    rep.cv.push_back(CoefficientOfVariation(ours[w]));
    rep.baseline_cv.push_back(CoefficientOfVariation(base[w]));
  }
  if (!rep.cv.empty()) {
    rep.mean_cv = std::accumulate(rep.cv.begin(), rep.cv.end(), 0.0) / static_cast<double>(rep.cv.size());
    rep.max_cv = *std::max_element(rep.cv.begin(), rep.cv.end());
    rep.baseline_mean_cv = std::accumulate(rep.baseline_cv.begin(), rep.baseline_cv.end(), 0.0) /
                           static_cast<double>(rep.baseline_cv.size());
    rep.baseline_min_cv = *std::min_element(rep.baseline_cv.begin(), rep.baseline_cv.end());
  }
  rep.metrics["burst.size"] = burst;
  rep.metrics["burst.window_ns"] = static_cast<double>(window_ns);
  rep.metrics["burst.windows"] = static_cast<double>(rep.cv.size());
  rep.metrics["burst.requests"] = static_cast<double>(arrivals.size());
  rep.metrics["burst.failures"] = static_cast<double>(rep.failures);
  rep.metrics["burst.cv.mean"] = rep.mean_cv;
  rep.metrics["burst.cv.max"] = rep.max_cv;
  rep.metrics["burst.baseline_cv.mean"] = rep.baseline_mean_cv;
  rep.metrics["burst.baseline_cv.min"] = rep.baseline_min_cv;
  return rep;
}

ReplayReport Replay(Cluster& cluster, const std::vector<TraceOp>& ops) {
  ReplayReport rep;
  std::vector<TraceOp> sorted = ops;
  std::stable_sort(sorted.begin(), sorted.end(), [](const TraceOp& a, const TraceOp& b) { return a.seq < b.seq; });
  size_t n = cluster.client_count();
  for (size_t i = 0; i < sorted.size(); ++i) {
    auto r = cluster.Await(i % n, ExecuteTraceOp(&cluster.client(i % n), sorted[i]));
    Code c = r ? r->status : Code::kTimeout;
    rep.results.push_back(c);
    if (c != Code::kOk) ++rep.failures;
    ++rep.metrics["replay.result." + std::string(CodeName(c))];
  }
  rep.metrics["replay.ops"] = static_cast<double>(sorted.size());
  rep.metrics["replay.failures"] = static_cast<double>(rep.failures);
  return rep;
}

}  // namespace falconmeta::harness
