#include "falconmeta/harness/baseline.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "falconmeta/index/route.h"

namespace falconmeta::harness {
namespace {

constexpr sim::Address kWalkerAddress = sim::kClientBase + 50'000;

struct WalkState {
  uint64_t opens = 0;
  uint64_t closes = 0;
  uint64_t failures = 0;
  bool done = false;
};

sim::Task<void> WalkTask(CachedWalkClient* walker, ClientSession* client, std::vector<std::string> files,
                         WalkState* st) {
  for (auto& f : files) {
    Code c = co_await walker->ResolveParent(f);
    if (c != Code::kOk) {
      ++st->failures;
      continue;
    }
    Result<FileHandle> h = co_await client->Open(f);
    ++st->opens;
    if (!h.ok()) {
      ++st->failures;
      continue;
    }
    OpResult closed = co_await client->Close(f, h.value().size, 0);
    ++st->closes;
    if (!closed.ok()) ++st->failures;
  }
  st->done = true;
}

}  // namespace

CachedWalkClient::CachedWalkClient(sim::Simulator& sim, sim::Address self, ClusterView view, ExceptionTable table,
                                   size_t capacity)
    : sim_(sim), ep_(sim, self), ring_(view.BuildRing()), table_(std::move(table)), capacity_(capacity) {
  sim_.Register(self, this);
}

CachedWalkClient::~CachedWalkClient() { sim_.Unregister(ep_.self()); }

void CachedWalkClient::Deliver(sim::Envelope env) {
  auto decoded = rpc::Decode(env.payload);
  if (!decoded.ok()) return;
  rpc::Message msg = std::move(decoded).value();
  if (msg.is_reply()) ep_.OnReply(std::move(msg));
}

bool CachedWalkClient::Touch(const std::string& dir, DirectoryId* id) {
  auto it = index_.find(dir);
  if (it == index_.end()) return false;
  lru_.splice(lru_.begin(), lru_, it->second);
  *id = it->second->second;
  return true;
}

void CachedWalkClient::Insert(const std::string& dir, DirectoryId id) {
  if (capacity_ == 0) return;
  lru_.emplace_front(dir, id);
  index_[dir] = lru_.begin();
  if (lru_.size() > capacity_) {
    index_.erase(lru_.back().first);
    lru_.pop_back();
  }
}

sim::Task<Code> CachedWalkClient::ResolveParent(std::string path) {
  auto parsed = PathName::Parse(path);
  if (!parsed.ok()) co_return parsed.code();
  DirectoryId pid = kRootDir;
  std::string prefix;
  for (const auto& name : parsed.value().parent_components()) {
    prefix += "/" + name;
    DirectoryId id;
    if (Touch(prefix, &id)) {
      ++hits_;
      pid = id;
      continue;
    }
    ++lookups_;
    sim_.counters().Add("baseline.lookup");
    DentryKey key{pid, name};
    NodeId owner = PlacementOwner(ring_, table_, pid, name);
    rpc::Payload lookup = rpc::LookupRequest{key};
    std::optional<rpc::Message> r = co_await ep_.Call(Raw(owner), std::move(lookup), 0, rpc::kDefaultRpcTimeoutNs);
    if (!r || !std::holds_alternative<rpc::LookupReply>(r->body)) co_return Code::kTimeout;
    const auto& reply = std::get<rpc::LookupReply>(r->body);
    if (reply.status != Code::kOk) co_return reply.status;
    pid = reply.dir_id;
    Insert(prefix, pid);
  }
  co_return Code::kOk;
}

BaselineReport RunCachedWalk(Cluster& cluster, const GeneratedTree& tree, double budget, uint64_t seed) {
  BaselineReport rep;
  rep.budget = budget;
  rep.capacity = static_cast<uint64_t>(std::floor(budget * static_cast<double>(tree.dirs.size()) + 1e-9));
  CachedWalkClient walker(cluster.sim(), kWalkerAddress, cluster.coordinator().view(), cluster.coordinator().table(),
                          rep.capacity);
  std::vector<std::string> order = tree.files;
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL);
  std::shuffle(order.begin(), order.end(), rng);
  WalkState st;
  walker.Spawn(WalkTask(&walker, &cluster.client(0), std::move(order), &st));
  cluster.sim().RunUntil([&st] { return st.done; });
  rep.lookups = walker.lookups();
  rep.hits = walker.hits();
  rep.opens = st.opens;
  rep.closes = st.closes;
  rep.failures = st.failures;
  std::string k = "baseline." + std::to_string(static_cast<int>(std::lround(budget * 100))) + ".";
  rep.metrics[k + "capacity"] = static_cast<double>(rep.capacity);
  rep.metrics[k + "lookups"] = static_cast<double>(rep.lookups);
  rep.metrics[k + "hits"] = static_cast<double>(rep.hits);
  rep.metrics[k + "opens"] = static_cast<double>(rep.opens);
  rep.metrics[k + "closes"] = static_cast<double>(rep.closes);
  rep.metrics[k + "requests"] = static_cast<double>(rep.requests());
  rep.metrics[k + "failures"] = static_cast<double>(rep.failures);
  return rep;
}

uint64_t UncachedLookups(const GeneratedTree& tree) {
  uint64_t n = 0;
  for (const auto& f : tree.files) n += static_cast<uint64_t>(std::count(f.begin(), f.end(), '/')) - 1;
  return n;
}

}  // namespace falconmeta::harness
