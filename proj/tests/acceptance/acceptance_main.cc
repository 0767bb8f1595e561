// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any
// criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "falconmeta/harness/balance.h"
#include "falconmeta/harness/baseline.h"
#include "falconmeta/harness/coalescing.h"
#include "falconmeta/harness/crash_sweep.h"
#include "falconmeta/harness/explorer.h"
#include "falconmeta/harness/oracle.h"
#include "falconmeta/harness/workload.h"
#include "falconmeta/model/dentry_codec.h"
#include "falconmeta/storage/namespace_replica.h"

namespace fm = falconmeta;
namespace hx = falconmeta::harness;

namespace {

// Tolerances and sizes, pinned.
constexpr uint32_t kTraverseNodes = 4;
constexpr uint32_t kTraverseSessions = 2;
constexpr double kAmplificationMin = 1.3;
constexpr double kShareSlackPoints = 1.0;  // percentage points around 1/n
constexpr double kEpsilon = 0.01;
constexpr uint32_t kMaxEpochs = 64;
constexpr uint64_t kThreeCreateLocks = 6;
constexpr int kRandomBatchTrials = 40;
constexpr uint64_t kWalBatch = 32;
constexpr uint64_t kWalSequential = 256;
constexpr uint64_t kMaxSchedules = 200'000;
constexpr double kBurstCvMax = 0.1;
constexpr double kBaselineCvMin = 0.5;
constexpr uint32_t kBurstSize = 100;
constexpr uint32_t kBurstSessions = 4;
constexpr uint32_t kBurstDirs = 128;
constexpr uint64_t kBurstWindowNs = 75'000'000;
constexpr size_t kDentryBytesMax = 100;
constexpr size_t kReplicaDirs = 100'000;
constexpr double kReplicaOverhead = 2.0;

// Frozen from tests/oracles/reference.py.
constexpr uint64_t kScaledDirs = 11'110;
constexpr uint64_t kScaledFiles = 100'000;
constexpr uint64_t kScaledUncachedLookups = 400'000;

uint64_t Seed() {
  const char* s = std::getenv("FALCONMETA_SEED");
  return s ? std::strtoull(s, nullptr, 10) : 1;
}

int failures = 0;

void Report(int id, bool pass, const std::string& detail, double seconds) {
  std::printf("%s AC%d %s (%.1fs)\n", pass ? "PASS" : "FAIL", id, detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

void Run(int id, const std::function<bool(std::string*)>& body) {
  auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = body(&detail);
  Report(id, pass, detail, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

std::string Fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0, double e = 0) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d, e);
  return buf;
}

fm::ClusterConfig Config(uint32_t mnodes, uint32_t clients, uint64_t seed) {
  fm::ClusterConfig c;
  c.mnodes = mnodes;
  c.clients = clients;
  c.sim.seed = seed;
  return c;
}

// Criteria 1 and 2 share the loaded tree.
void TraverseAndBaseline(uint64_t seed) {
  auto t0 = std::chrono::steady_clock::now();
  fm::Cluster cl(Config(kTraverseNodes, kTraverseSessions, seed));
  auto tree = hx::GenerateTree(hx::ScaledMdtestSpec(), seed).value();
  bool shape = tree.dirs.size() == kScaledDirs && tree.files.size() == kScaledFiles;
  bool loaded = hx::LoadTree(cl, tree).ok();
  hx::WarmReplicas(cl, tree);
  hx::TraverseReport t = hx::RunTraverse(cl, tree, seed);
  uint64_t expect = kTraverseSessions * kScaledFiles;
  bool ok1 = shape && loaded && cl.coordinator().table().empty() && t.failures == 0 && t.exactly_once &&
             t.opens == expect && t.closes == expect && t.client_to_mnode == t.opens + t.closes &&
             t.inter_mnode == 0;
  Report(1, ok1,
         Fmt("opens=%.0f closes=%.0f client->mnode=%.0f inter-mnode=%.0f exactly_once=%.0f", t.opens, t.closes,
             t.client_to_mnode, t.inter_mnode, t.exactly_once),
         std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

  t0 = std::chrono::steady_clock::now();
  std::vector<double> budgets = {0.1, 0.5, 0.9, 1.0};
  std::vector<uint64_t> lookups;
  bool dominance = true;
  for (double b : budgets) {
    hx::BaselineReport r = hx::RunCachedWalk(cl, tree, b, seed);
    lookups.push_back(r.lookups);
    if (r.failures != 0 || r.opens != kScaledFiles) dominance = false;
    if (r.budget < 1.0 && r.requests() < 2 * kScaledFiles) dominance = false;
  }
  hx::BaselineReport zero = hx::RunCachedWalk(cl, tree, 0.0, seed);
  bool monotone = true;
  for (size_t i = 1; i < lookups.size(); ++i) monotone = monotone && lookups[i] < lookups[i - 1];
  double ratio = static_cast<double>(lookups.front()) / static_cast<double>(lookups.back());
  bool ok2 = monotone && dominance && ratio >= kAmplificationMin && zero.lookups == kScaledUncachedLookups &&
             lookups.back() == kScaledDirs;
  Report(2, ok2,
         Fmt("lookups 10%%=%.0f 50%%=%.0f 90%%=%.0f 100%%=%.0f ratio=%.2f", lookups[0], lookups[1], lookups[2],
             lookups[3], ratio) +
             Fmt(" budget0=%.0f", zero.lookups),
         std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

bool Rebalanced(fm::Cluster& cl, std::string* why) {
  auto out = cl.AwaitControl([](fm::Coordinator& co, fm::Coordinator::Done done) {
    co.StartRebalance(kEpsilon, kMaxEpochs, done);
  });
  if (!out) {
    *why = "rebalance did not finish";
    return false;
  }
  if (!out->status.ok()) {
    *why = out->status.ToString();
    return false;
  }
  return true;
}

bool BalanceUnique(uint64_t seed, std::string* detail) {
  const uint32_t n = 16;
  fm::Cluster cl(Config(n, 4, seed));
  auto tree = hx::GenerateImageNetLike(1000, 100, seed);
  if (!hx::LoadTree(cl, tree).ok()) return false;
  std::string why;
  bool ok = Rebalanced(cl, &why);
  hx::BalanceReport b = hx::MeasureBalance(cl);
  double ideal = 100.0 / n;
  *detail = Fmt("files=%.0f max=%.2f%% min=%.2f%% entries=%.0f", static_cast<double>(tree.files.size()),
                b.max_share * 100, b.min_share * 100, b.entries()) +
            (ok ? "" : " " + why);
  return ok && tree.files.size() >= 100'000 && b.entries() == 0 && b.max_share * 100 <= ideal + kShareSlackPoints &&
         b.min_share * 100 >= ideal - kShareSlackPoints;
}

bool BalanceZipf(uint64_t seed, std::string* detail) {
  bool all = true;
  for (uint32_t n : {4u, 8u, 16u}) {
    fm::Cluster cl(Config(n, 4, seed));
    auto tree = hx::GenerateTree(hx::ZipfSpec(100'000, 1.2), seed).value();
    if (!hx::LoadTree(cl, tree).ok()) return false;
    std::string why;
    bool ok = Rebalanced(cl, &why);
    hx::BalanceReport b = hx::MeasureBalance(cl);
    bool census = cl.Census().ok();
    bool pass = ok && census && b.entries() <= hx::EntryBound(n) && b.max_share <= 1.0 / n + kEpsilon;
    *detail += Fmt("n=%.0f entries=%.0f/%.0f max=%.2f%% ", n, b.entries(), hx::EntryBound(n), b.max_share * 100) +
               (ok ? "" : why + " ");
    all = all && pass;
  }
  return all;
}

// Names under `dir` whose hash owner is `node`.
std::vector<std::string> NamesOn(const fm::Ring& ring, fm::NodeId node, const std::string& base, size_t count) {
  std::vector<std::string> out;
  for (int i = 0; out.size() < count; ++i) {
    std::string n = base + std::to_string(i) + ".dat";
    if (fm::OwnerByName(ring, n) == node) out.push_back(n);
  }
  return out;
}

hx::TraceOp Op(hx::TraceOpKind kind, std::string path, std::vector<std::string> args = {}) {
  hx::TraceOp op;
  op.kind = kind;
  op.path = std::move(path);
  op.args = std::move(args);
  return op;
}

bool LockCoalescing(uint64_t seed, std::string* detail) {
  fm::Cluster cl(Config(4, 3, seed));
  fm::Ring ring = cl.coordinator().view().BuildRing();
  const fm::NodeId node{1};
  auto& c = cl.client(0);
  cl.Await(0, c.Mkdir("/a", 0755));
  cl.Await(0, c.Mkdir("/a/b", 0755));
  cl.Await(0, c.Mkdir("/a/c", 0755));
  auto files = NamesOn(ring, node, "n", 3);
  // The owner resolves /a/b and /a/c once so the batch needs no fetches.
  cl.Await(0, c.GetAttr("/a/b/" + files[0]));
  cl.Await(0, c.GetAttr("/a/c/" + files[2]));
  std::vector<hx::TraceOp> three_creates = {Op(hx::TraceOpKind::kCreate, "/a/b/" + files[0], {"644"}),
                                   Op(hx::TraceOpKind::kCreate, "/a/b/" + files[1], {"644"}),
                                   Op(hx::TraceOpKind::kCreate, "/a/c/" + files[2], {"644"})};
  hx::HeldBatchResult r = hx::RunHeldBatch(cl, node, three_creates);
  bool three_ok = r.batches == 1 && r.locks == kThreeCreateLocks && r.revalidations == 0 &&
                 hx::ExpectedBatchLocks(three_creates) == kThreeCreateLocks;
  for (auto code : r.results) three_ok = three_ok && code == fm::Code::kOk;
  *detail = Fmt("three_creates batches=%.0f locks=%.0f", r.batches, r.locks);

  // Randomized batches over a small tree; every path is owned by `node`.
  std::mt19937_64 rng(seed);
  std::vector<std::string> dirs = {"/a", "/a/b", "/a/c"};
  for (int d = 0; d < 3; ++d) {
    std::string dir = "/a/b/s" + std::to_string(d);
    cl.Await(0, c.Mkdir(dir, 0755));
    dirs.push_back(dir);
  }
  auto pool = NamesOn(ring, node, "r", 12);
  for (const auto& d : dirs) cl.Await(0, c.GetAttr(d + "/" + pool[0]));
  int good = 0;
  for (int t = 0; t < kRandomBatchTrials; ++t) {
    hx::TraceOpKind kind = (t % 2 == 0) ? hx::TraceOpKind::kGetAttr : hx::TraceOpKind::kClose;
    size_t k = 2 + rng() % 12;
    std::vector<hx::TraceOp> ops;
    for (size_t i = 0; i < k; ++i) {
      std::string path = dirs[rng() % dirs.size()] + "/" + pool[rng() % pool.size()];
      ops.push_back(kind == hx::TraceOpKind::kClose ? Op(kind, path, {"0"}) : Op(kind, path));
    }
    hx::HeldBatchResult rr = hx::RunHeldBatch(cl, node, ops);
    if (rr.batches == 1 && rr.revalidations == 0 && rr.locks == hx::ExpectedBatchLocks(ops)) ++good;
  }
  *detail += Fmt(" random %.0f/%.0f", good, kRandomBatchTrials);
  return three_ok && good == kRandomBatchTrials;
}

bool WalCoalescing(uint64_t seed, std::string* detail) {
  fm::Cluster cl(Config(4, 4, seed));
  fm::Ring ring = cl.coordinator().view().BuildRing();
  const fm::NodeId node{2};
  auto& c = cl.client(0);
  cl.Await(0, c.Mkdir("/w", 0755));
  auto names = NamesOn(ring, node, "w", kWalBatch + kWalSequential);
  cl.Await(0, c.GetAttr("/w/" + names[0]));
  std::vector<hx::TraceOp> batch;
  for (uint64_t i = 0; i < kWalBatch; ++i) batch.push_back(Op(hx::TraceOpKind::kCreate, "/w/" + names[i], {"644"}));
  hx::HeldBatchResult r = hx::RunHeldBatch(cl, node, batch);
  std::vector<hx::TraceOp> seq;
  for (uint64_t i = kWalBatch; i < kWalBatch + kWalSequential; ++i) {
    seq.push_back(Op(hx::TraceOpKind::kCreate, "/w/" + names[i], {"644"}));
  }
  std::vector<fm::Code> codes;
  uint64_t flushes = hx::RunSequential(cl, seq, &codes);
  bool all_ok = true;
  for (auto code : r.results) all_ok = all_ok && code == fm::Code::kOk;
  for (auto code : codes) all_ok = all_ok && code == fm::Code::kOk;
  *detail = Fmt("batch of %.0f -> %.0f flush, %.0f sequential -> %.0f flushes", kWalBatch, r.flushes,
                kWalSequential, flushes);
  return all_ok && r.batches == 1 && r.flushes == 1 && flushes == kWalSequential;
}

bool Races(std::string* detail) {
  bool ok = true;
  for (const auto& s : hx::StandardRaces()) {
    hx::ExploreReport r = hx::Explore(s, kMaxSchedules);
    *detail += r.name + Fmt("=%.0f/%.0f ", r.schedules - r.failures, r.schedules);
    ok = ok && r.exhausted && r.failures == 0 && r.schedules > 1;
    if (s.name == "setperm_resolve") {
      *detail += Fmt("discards=%.0f ", r.discard_schedules);
      ok = ok && r.discard_schedules > 0 && r.outcomes.size() >= 2;
    }
    if (s.name == "rmdir_create_child") ok = ok && r.outcomes.size() >= 2;
    if (!r.first_failure.pass) *detail += "[" + r.first_failure.detail + "] ";
  }
  hx::ExploreReport mutant = hx::Explore(hx::SkipInvalidationMutant(), kMaxSchedules);
  *detail += Fmt("mutant_failures=%.0f/%.0f", mutant.failures, mutant.schedules);
  return ok && mutant.failures > 0;
}

bool Crashes(uint64_t seed, std::string* detail) {
  hx::CrashSweepReport rename = hx::SweepRename(seed);
  hx::CrashSweepReport migration = hx::SweepMigration(seed);
  *detail = Fmt("rename points=%.0f failures=%.0f committed=%.0f; migration points=%.0f failures=%.0f",
                rename.points, rename.failures, rename.applied, migration.points, migration.failures);
  for (const auto& p : rename.failed) *detail += " [rename k=" + std::to_string(p.delivery) + " " + p.target + p.detail + "]";
  for (const auto& p : migration.failed) {
    *detail += " [migration k=" + std::to_string(p.delivery) + " " + p.target + p.detail + "]";
  }
  // Some crash points must roll the rename back and some must let it commit.
  return rename.points > 0 && migration.points > 0 && rename.failures == 0 && migration.failures == 0 &&
         rename.applied > 0 && rename.applied < rename.points;
}

bool Burst(uint64_t seed, std::string* detail) {
  fm::Cluster cl(Config(4, kBurstSessions, seed));
  auto tree = hx::GenerateTree(hx::UniformSpec(1, kBurstDirs, kBurstSize), seed).value();
  if (!hx::LoadTree(cl, tree).ok()) return false;
  hx::WarmReplicas(cl, tree);
  hx::BurstReport r = hx::RunBurst(cl, tree, kBurstSize, seed, kBurstWindowNs);
  *detail = Fmt("windows=%.0f cv mean=%.3f max=%.3f; affinity baseline cv mean=%.3f min=%.3f", r.cv.size(), r.mean_cv,
                r.max_cv, r.baseline_mean_cv, r.baseline_min_cv);
  return r.failures == 0 && r.cv.size() >= 20 && r.mean_cv <= kBurstCvMax && r.baseline_mean_cv >= kBaselineCvMin;
}

bool StaleTable(uint64_t seed, std::string* detail) {
  fm::Cluster cl(Config(4, 1, seed));
  hx::OracleState oracle;
  const fm::Credentials root{0, 0};
  std::vector<hx::TraceOp> setup;
  for (int d = 0; d < 60; ++d) {
    std::string dir = "/d" + std::to_string(d);
    setup.push_back(Op(hx::TraceOpKind::kMkdir, dir, {"755"}));
    for (const char* hot : {"Makefile", "Kconfig"}) setup.push_back(Op(hx::TraceOpKind::kCreate, dir + "/" + hot, {"644"}));
    setup.push_back(Op(hx::TraceOpKind::kCreate, dir + "/u" + std::to_string(d) + ".c", {"644"}));
  }
  for (const auto& op : setup) {
    oracle.Apply(op, root);
    cl.Await(0, hx::ExecuteTraceOp(&cl.client(0), op));
  }
  std::string why;
  if (!Rebalanced(cl, &why)) {
    *detail = why;
    return false;
  }
  const fm::ExceptionTable& table = cl.coordinator().table();
  if (table.empty()) {
    *detail = "rebalance produced no entries";
    return false;
  }
  std::vector<hx::TraceOp> ops = {
      Op(hx::TraceOpKind::kGetAttr, "/d3/Makefile"),
      Op(hx::TraceOpKind::kOpen, "/d4/Kconfig"),
      Op(hx::TraceOpKind::kClose, "/d5/Makefile", {"10"}),
      Op(hx::TraceOpKind::kMkdir, "/n1", {"755"}),
      Op(hx::TraceOpKind::kCreate, "/n1/Makefile", {"644"}),
      Op(hx::TraceOpKind::kCreate, "/n1/Kconfig", {"644"}),
      Op(hx::TraceOpKind::kReaddir, "/d7"),
      Op(hx::TraceOpKind::kUnlink, "/d8/Makefile"),
      Op(hx::TraceOpKind::kRename, "/d9/Kconfig", {"/d9/Kconfig.old"}),
      Op(hx::TraceOpKind::kRename, "/d11/u11.c", {"/n1/Kconfig"}),
      Op(hx::TraceOpKind::kSetPerm, "/d10", {"700", "0", "0"}),
      Op(hx::TraceOpKind::kMkdir, "/n2", {"755"}),
      Op(hx::TraceOpKind::kRmdir, "/n2"),
      Op(hx::TraceOpKind::kGetAttr, "/d12/missing"),
  };
  int good = 0;
  uint64_t version = table.version();
  for (const auto& op : ops) {
    fm::ClientConfig cc;
    cc.seed = seed * 7919 + good;
    fm::ClientSession& stale = cl.AddClient(cc);
    size_t idx = cl.client_count() - 1;
    bool was_stale = stale.table().version() < version;
    auto r = cl.Await(idx, hx::ExecuteTraceOp(&stale, op));
    fm::Code want = oracle.Apply(op, root);
    auto parsed = fm::PathName::Parse(op.path).value();
    const fm::ExceptionEntry* e = parsed.is_root() ? nullptr : table.Find(parsed.leaf());
    int fresh_hops = (e && e->rule == fm::RedirectRule::kPathWalk) ? 2 : 1;
    bool ok = was_stale && r && r->status == want && r->hops <= fresh_hops + 1 && stale.table().version() == version;
    if (ok) {
      ++good;
    } else {
      *detail += " [" + hx::RenderTraceLine(op) + " got " +
                 std::string(fm::CodeName(r ? r->status : fm::Code::kTimeout)) + " want " +
                 std::string(fm::CodeName(want)) + Fmt(" hops=%.0f adopted=%.0f]", r ? r->hops : 0,
                                                         stale.table().version() == version);
    }
  }
  hx::Verdict v = hx::CompareNamespace(oracle, cl.Census());
  *detail = Fmt("entries=%.0f ops=%.0f/%.0f", table.size(), good, ops.size()) + (v.pass ? "" : " " + v.detail) + *detail;
  return good == static_cast<int>(ops.size()) && v.pass;
}

bool Footprint(std::string* detail) {
  fm::DentryRecord rec;
  rec.key.pid = fm::DirectoryId{0x0123456789abcdefULL};
  rec.key.name = std::string(64, 'n');
  rec.dir_id = fm::DirectoryId{0x0fedcba987654321ULL};
  rec.perm = fm::Permission{0755, 1000, 1000};
  size_t encoded = fm::EncodeDentry(rec).size();

  fm::NamespaceReplica replica;
  std::mt19937_64 rng(7);
  for (size_t i = 0; i < kReplicaDirs; ++i) {
    // 64-byte names, the largest covered by the bound.
    std::string name = std::to_string(i);
    name.resize(64, 'x');
    replica.PutValid(fm::DentryKey{fm::DirectoryId{rng() % 1000 + 1}, name}, fm::DirectoryId{i + 2000},
                     fm::Permission{0755, 0, 0});
  }
  double budget = static_cast<double>(kReplicaDirs) * kDentryBytesMax * kReplicaOverhead;
  *detail = Fmt("encoded=%.0fB replica=%.0fB budget=%.0fB (%.1f B/dir)", encoded, replica.memory_bytes(), budget,
                static_cast<double>(replica.memory_bytes()) / kReplicaDirs);
  return encoded <= kDentryBytesMax && replica.size() == kReplicaDirs &&
         static_cast<double>(replica.memory_bytes()) <= budget;
}

}  // namespace

int main() {
  const uint64_t seed = Seed();
  std::printf("seed %llu\n", static_cast<unsigned long long>(seed));
  TraverseAndBaseline(seed);
  Run(3, [&](std::string* d) { return BalanceUnique(seed, d); });
  Run(4, [&](std::string* d) { return BalanceZipf(seed, d); });
  Run(5, [&](std::string* d) { return LockCoalescing(seed, d); });
  Run(6, [&](std::string* d) { return WalCoalescing(seed, d); });
  Run(7, [&](std::string* d) { return Races(d); });
  Run(8, [&](std::string* d) { return Crashes(seed, d); });
  Run(9, [&](std::string* d) { return Burst(seed, d); });
  Run(10, [&](std::string* d) { return StaleTable(seed, d); });
  Run(11, [&](std::string* d) { return Footprint(d); });
  std::printf("%s: %d failing\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
