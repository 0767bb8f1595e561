// falconmeta: drive the simulated metadata cluster from the command line.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "falconmeta/cluster/cluster.h"
#include "falconmeta/harness/balance.h"
#include "falconmeta/harness/baseline.h"
#include "falconmeta/harness/crash_sweep.h"
#include "falconmeta/harness/metrics.h"
#include "falconmeta/harness/oracle.h"
#include "falconmeta/harness/trace.h"
#include "falconmeta/harness/tree_gen.h"
#include "falconmeta/harness/workload.h"

namespace fm = falconmeta;
namespace hx = falconmeta::harness;

namespace {

struct TreeOptions {
  std::string shape = "mdtest";
  std::string trace;
  uint32_t depth = 2;
  uint32_t fanout = 10;
  uint32_t files = 10;
};

struct Common {
  uint64_t seed = 1;
  std::string metrics_file;
};

uint64_t EffectiveSeed(const Common& c) {
  if (const char* s = std::getenv("FALCONMETA_SEED")) return std::strtoull(s, nullptr, 10);
  return c.seed;
}

void AddTreeOptions(CLI::App* cmd, TreeOptions* t, const std::string& default_shape) {
  t->shape = default_shape;
  cmd->add_option("--shape", t->shape, "Tree shape")
      ->check(CLI::IsMember({"mdtest", "uniform", "zipf", "linux", "imagenet"}))
      ->capture_default_str();
  cmd->add_option("--trace", t->trace, "Load the tree from a trace file instead");
  cmd->add_option("--depth", t->depth, "Directory levels (uniform)")->capture_default_str();
  cmd->add_option("--fanout", t->fanout, "Children per directory (uniform)")->capture_default_str();
  cmd->add_option("--files", t->files, "Files per leaf directory (uniform)")->capture_default_str();
}

void AddCommon(CLI::App* cmd, Common* c) {
  cmd->add_option("--seed", c->seed, "Seed; FALCONMETA_SEED takes precedence")->capture_default_str();
  cmd->add_option("--metrics", c->metrics_file, "Write JSON metrics here instead of stdout");
}

fm::Result<hx::GeneratedTree> BuildTree(const TreeOptions& t, uint64_t seed) {
  if (!t.trace.empty()) {
    auto ops = hx::ReadTraceFile(t.trace);
    if (!ops.ok()) return ops.status();
    return hx::TreeFromTrace(*ops);
  }
  if (t.shape == "uniform") return hx::GenerateTree(hx::UniformSpec(t.depth, t.fanout, t.files), seed);
  if (t.shape == "zipf") return hx::GenerateTree(hx::ZipfSpec(100'000, 1.2), seed);
  if (t.shape == "linux") return hx::GenerateTree(hx::LinuxLikeSpec(), seed);
  if (t.shape == "imagenet") return hx::GenerateImageNetLike(1000, 100, seed);
  return hx::GenerateTree(hx::ScaledMdtestSpec(), seed);
}

void EmitMetrics(const Common& c, hx::Metrics m) {
  m["seed"] = static_cast<double>(EffectiveSeed(c));
  std::string json = hx::MetricsToJson(m);
  if (c.metrics_file.empty()) {
    std::cout << json << "\n";
    return;
  }
  std::ofstream out(c.metrics_file);
  out << json << "\n";
}

int Verdict(const std::string& what, bool pass, const std::string& detail) {
  std::printf("%s %s %s\n", pass ? "PASS" : "FAIL", what.c_str(), detail.c_str());
  return pass ? 0 : 1;
}

fm::ClusterConfig MakeConfig(uint32_t nodes, uint32_t clients, uint64_t seed) {
  fm::ClusterConfig c;
  c.mnodes = nodes;
  c.clients = clients;
  c.sim.seed = seed;
  return c;
}

// Rebalances until the busiest node holds at most 1/n + epsilon.
std::optional<fm::RebalanceOutcome> Rebalance(fm::Cluster& cl, double epsilon) {
  return cl.AwaitControl(
      [epsilon](fm::Coordinator& co, fm::Coordinator::Done done) { co.StartRebalance(epsilon, 64, std::move(done)); });
}

int GenTree(const TreeOptions& t, const Common& c, const std::string& out) {
  auto tree = BuildTree(t, EffectiveSeed(c));
  if (!tree.ok()) {
    std::cerr << tree.status().ToString() << "\n";
    return 2;
  }
  fm::Status s = hx::WriteTraceFile(out, hx::TreeToTrace(*tree));
  if (!s.ok()) {
    std::cerr << s.ToString() << "\n";
    return 2;
  }
  hx::Metrics m = {{"dirs", static_cast<double>(tree->dirs.size())},
                   {"files", static_cast<double>(tree->files.size())},
                   {"avg_file_depth", tree->AverageFileDepth()},
                   {"uncached_lookups", static_cast<double>(hx::UncachedLookups(*tree))}};
  EmitMetrics(c, m);
  return 0;
}

struct RunOptions {
  std::string workload = "traverse";
  uint32_t nodes = 4;
  uint32_t clients = 2;
  double epsilon = 0;
  uint32_t burst = 100;
  uint64_t window_ms = 75;
};

int RunWorkload(const RunOptions& r, TreeOptions t, const Common& c) {
  uint64_t seed = EffectiveSeed(c);
  fm::Cluster cl(MakeConfig(r.nodes, r.clients, seed));
  if (r.workload == "replay") {
    if (t.trace.empty()) {
      std::cerr << "replay needs --trace\n";
      return 2;
    }
    auto ops = hx::ReadTraceFile(t.trace);
    if (!ops.ok()) {
      std::cerr << ops.status().ToString() << "\n";
      return 2;
    }
    hx::ReplayReport rep = hx::Replay(cl, *ops);
    for (size_t i = 0; i < rep.results.size(); ++i) {
      std::printf("%zu %s\n", i, std::string(fm::CodeName(rep.results[i])).c_str());
    }
    EmitMetrics(c, rep.metrics);
    return 0;
  }
  auto tree = BuildTree(t, seed);
  if (!tree.ok() || !hx::LoadTree(cl, *tree).ok()) {
    std::cerr << "cannot load tree\n";
    return 2;
  }
  if (r.epsilon > 0) {
    auto out = Rebalance(cl, r.epsilon);
    if (!out || !out->status.ok()) return Verdict("rebalance", false, out ? out->status.ToString() : "unfinished");
  }
  hx::WarmReplicas(cl, *tree);
  if (r.workload == "burst") {
    hx::BurstReport b = hx::RunBurst(cl, *tree, r.burst, seed, r.window_ms * 1'000'000);
    EmitMetrics(c, b.metrics);
    return Verdict("burst", b.failures == 0, "windows=" + std::to_string(b.cv.size()) + " mean_cv=" +
                                                 std::to_string(b.mean_cv));
  }
  hx::TraverseReport tr = hx::RunTraverse(cl, *tree, seed);
  EmitMetrics(c, tr.metrics);
  return Verdict("traverse", tr.failures == 0 && tr.exactly_once && tr.inter_mnode == 0,
                 "client_to_mnode=" + std::to_string(tr.client_to_mnode) +
                     " inter_mnode=" + std::to_string(tr.inter_mnode));
}

int CheckOracle(TreeOptions t, const Common& c, uint32_t nodes, uint32_t clients) {
  uint64_t seed = EffectiveSeed(c);
  std::vector<hx::TraceOp> ops;
  if (!t.trace.empty()) {
    auto read = hx::ReadTraceFile(t.trace);
    if (!read.ok()) {
      std::cerr << read.status().ToString() << "\n";
      return 2;
    }
    ops = std::move(*read);
  } else {
    auto tree = BuildTree(t, seed);
    if (!tree.ok()) return 2;
    ops = hx::TreeToTrace(*tree);
  }
  fm::ClusterConfig config = MakeConfig(nodes, clients, seed);
  fm::Cluster cl(config);
  hx::ReplayReport rep = hx::Replay(cl, ops);
  std::vector<hx::TraceOp> sorted = ops;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.seq < b.seq; });
  hx::OracleState oracle;
  uint64_t mismatches = 0;
  std::string first;
  for (size_t i = 0; i < sorted.size(); ++i) {
    fm::Code want = oracle.Apply(sorted[i], config.creds);
    if (i < rep.results.size() && rep.results[i] != want) {
      if (mismatches++ == 0) {
        first = hx::RenderTraceLine(sorted[i]) + " got " + std::string(fm::CodeName(rep.results[i])) + " want " +
                std::string(fm::CodeName(want));
      }
    }
  }
  hx::Verdict ns = hx::CompareNamespace(oracle, cl.Census());
  hx::Metrics m = rep.metrics;
  m["oracle.ops"] = static_cast<double>(sorted.size());
  m["oracle.mismatches"] = static_cast<double>(mismatches);
  m["oracle.namespace_ok"] = ns.pass ? 1 : 0;
  EmitMetrics(c, m);
  bool pass = mismatches == 0 && ns.pass && rep.results.size() == sorted.size();
  return Verdict("oracle", pass, pass ? std::to_string(sorted.size()) + " ops" : (first.empty() ? ns.detail : first));
}

int BalanceReport(TreeOptions t, const Common& c, uint32_t nodes, double epsilon) {
  uint64_t seed = EffectiveSeed(c);
  fm::Cluster cl(MakeConfig(nodes, 2, seed));
  auto tree = BuildTree(t, seed);
  if (!tree.ok() || !hx::LoadTree(cl, *tree).ok()) return 2;
  hx::BalanceReport before = hx::MeasureBalance(cl);
  std::printf("before\n%s", before.ToText().c_str());
  if (epsilon <= 0) {
    EmitMetrics(c, before.ToMetrics());
    return 0;
  }
  auto out = Rebalance(cl, epsilon);
  hx::BalanceReport after = hx::MeasureBalance(cl);
  std::printf("after\n%s", after.ToText().c_str());
  hx::Metrics m = after.ToMetrics();
  m["before.max_share"] = before.max_share;
  EmitMetrics(c, m);
  bool pass = out && out->status.ok() && after.max_share <= 1.0 / nodes + epsilon &&
              static_cast<double>(after.entries()) <= hx::EntryBound(nodes) && cl.Census().ok();
  return Verdict("balance", pass,
                 "max_share=" + std::to_string(after.max_share) + " entries=" + std::to_string(after.entries()));
}

int Baseline(TreeOptions t, const Common& c, uint32_t nodes, double budget) {
  uint64_t seed = EffectiveSeed(c);
  fm::Cluster cl(MakeConfig(nodes, 1, seed));
  auto tree = BuildTree(t, seed);
  if (!tree.ok() || !hx::LoadTree(cl, *tree).ok()) return 2;
  hx::BaselineReport b = hx::RunCachedWalk(cl, *tree, budget, seed);
  EmitMetrics(c, b.metrics);
  return Verdict("baseline", b.failures == 0,
                 "lookups=" + std::to_string(b.lookups) + " hits=" + std::to_string(b.hits) +
                     " requests=" + std::to_string(b.requests()));
}

int CrashSweep(const Common& c, const std::string& op) {
  uint64_t seed = EffectiveSeed(c);
  hx::CrashSweepReport r = op == "migration" ? hx::SweepMigration(seed) : hx::SweepRename(seed);
  for (const auto& p : r.failed) {
    std::printf("crash after delivery %llu of %s: %s\n", static_cast<unsigned long long>(p.delivery),
                p.target.c_str(), p.detail.c_str());
  }
  EmitMetrics(c, r.metrics);
  return Verdict("crash-sweep", r.failures == 0,
                 op + " points=" + std::to_string(r.points) + " applied=" + std::to_string(r.applied) +
                     " failures=" + std::to_string(r.failures));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated stateless-client metadata cluster"};
  app.require_subcommand(1);

  Common common;
  TreeOptions gen_tree, run_tree, check_tree, balance_tree, baseline_tree;

  auto* gen = app.add_subcommand("gen-tree", "Generate a namespace and write it as a trace");
  std::string out_file = "tree.trace";
  AddTreeOptions(gen, &gen_tree, "mdtest");
  AddCommon(gen, &common);
  gen->add_option("--out", out_file, "Trace file to write")->capture_default_str();

  auto* run = app.add_subcommand("run", "Run a workload against a fresh cluster");
  RunOptions ro;
  AddTreeOptions(run, &run_tree, "mdtest");
  AddCommon(run, &common);
  run->add_option("--workload", ro.workload)
      ->check(CLI::IsMember({"traverse", "burst", "replay"}))
      ->capture_default_str();
  run->add_option("--nodes", ro.nodes)->capture_default_str();
  run->add_option("--clients", ro.clients)->capture_default_str();
  run->add_option("--epsilon", ro.epsilon, "Rebalance to 1/n + epsilon first; 0 skips")->capture_default_str();
  run->add_option("--burst", ro.burst, "Files per directory visit (burst)")->capture_default_str();
  run->add_option("--window-ms", ro.window_ms, "CV window (burst)")->capture_default_str();

  auto* check = app.add_subcommand("check", "Compare a trace replay with the sequential oracle");
  bool use_oracle = false;
  uint32_t check_nodes = 4, check_clients = 2;
  AddTreeOptions(check, &check_tree, "uniform");
  AddCommon(check, &common);
  check->add_flag("--oracle", use_oracle, "Check results and final namespace against the oracle")->required();
  check->add_option("--nodes", check_nodes)->capture_default_str();
  check->add_option("--clients", check_clients)->capture_default_str();

  auto* balance = app.add_subcommand("balance-report", "Per-node inode shares before and after rebalancing");
  uint32_t balance_nodes = 16;
  double balance_eps = 0.01;
  AddTreeOptions(balance, &balance_tree, "zipf");
  AddCommon(balance, &common);
  balance->add_option("--nodes", balance_nodes)->capture_default_str();
  balance->add_option("--epsilon", balance_eps, "0 reports without rebalancing")->capture_default_str();

  auto* baseline = app.add_subcommand("baseline", "Path-walk client with a bounded dentry cache");
  double budget = 0;
  uint32_t baseline_nodes = 4;
  AddTreeOptions(baseline, &baseline_tree, "mdtest");
  AddCommon(baseline, &common);
  baseline->add_option("--cache-budget", budget, "Cache size as a fraction of directories")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  baseline->add_option("--nodes", baseline_nodes)->capture_default_str();

  auto* crash = app.add_subcommand("crash-sweep", "Crash a participant after every delivery of one operation");
  std::string crash_op = "rename";
  AddCommon(crash, &common);
  crash->add_option("--op", crash_op)->check(CLI::IsMember({"rename", "migration"}))->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (*gen) return GenTree(gen_tree, common, out_file);
  if (*run) return RunWorkload(ro, run_tree, common);
  if (*check) return CheckOracle(check_tree, common, check_nodes, check_clients);
  if (*balance) return BalanceReport(balance_tree, common, balance_nodes, balance_eps);
  if (*baseline) return Baseline(baseline_tree, common, baseline_nodes, budget);
  if (*crash) return CrashSweep(common, crash_op);
  return 2;
}
