#pragma once

#include <cstdint>
#include <list>
#include <string>
#include <unordered_map>

#include "falconmeta/cluster/cluster.h"
#include "falconmeta/harness/metrics.h"
#include "falconmeta/harness/tree_gen.h"

namespace falconmeta::harness {

// Stateful client model: resolves each directory component with its own
// lookup request unless the component is in an LRU dentry cache.
class CachedWalkClient : public sim::Actor {
 public:
  CachedWalkClient(sim::Simulator& sim, sim::Address self, ClusterView view, ExceptionTable table, size_t capacity);
  ~CachedWalkClient() override;

  void Deliver(sim::Envelope env) override;
  void Spawn(sim::Task<void> task) { scope_.Spawn(std::move(task)); }

  // Resolves the directories above `path`; fails on the first failed lookup.
  sim::Task<Code> ResolveParent(std::string path);

  uint64_t lookups() const { return lookups_; }
  uint64_t hits() const { return hits_; }
  size_t cached() const { return lru_.size(); }

 private:
  bool Touch(const std::string& dir, DirectoryId* id);
  void Insert(const std::string& dir, DirectoryId id);

  sim::Simulator& sim_;
  rpc::Endpoint ep_;
  sim::TaskScope scope_;
  Ring ring_;
  ExceptionTable table_;
  size_t capacity_;
  std::list<std::pair<std::string, DirectoryId>> lru_;  // most recent first
  std::unordered_map<std::string, std::list<std::pair<std::string, DirectoryId>>::iterator> index_;
  uint64_t lookups_ = 0;
  uint64_t hits_ = 0;
};

struct BaselineReport {
  double budget = 0;
  uint64_t capacity = 0;
  uint64_t lookups = 0;
  uint64_t hits = 0;
  uint64_t opens = 0;
  uint64_t closes = 0;
  uint64_t failures = 0;
  uint64_t requests() const { return lookups + opens + closes; }
  Metrics metrics;
};

// One session opens and closes every file of `tree` in seeded random order,
// with a dentry cache of floor(budget x directory count) entries. Uses
// client 0 for open and close.
BaselineReport RunCachedWalk(Cluster& cluster, const GeneratedTree& tree, double budget, uint64_t seed);

// Lookups expected with no cache: one per directory component of each file.
uint64_t UncachedLookups(const GeneratedTree& tree);

}  // namespace falconmeta::harness
