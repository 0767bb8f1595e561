#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "falconmeta/harness/metrics.h"
#include "falconmeta/harness/oracle.h"
#include "falconmeta/sim/simulator.h"

namespace falconmeta::harness {

// Depth-first enumeration of delivery orders. Replays the current prefix,
// takes choice 0 past it, and Next() advances to the following schedule.
class DfsChooser : public sim::Chooser {
 public:
  size_t Choose(size_t n) override;
  // False once every schedule has been visited.
  bool Next();
  size_t depth() const { return path_.size(); }

 private:
  std::vector<std::pair<size_t, size_t>> path_;  // (choice, options)
  size_t pos_ = 0;
};

struct RaceScenario {
  std::string name;
  uint32_t mnodes = 2;
  std::vector<TraceOp> setup;  // run as root, in order
  // Restart every MNode after setup so that namespace replicas start empty.
  bool cold_replicas = false;
  std::vector<HistoryOp> warm;        // sequential, before exploring
  std::vector<HistoryOp> concurrent;  // at most one per client
  std::vector<HistoryOp> after;       // sequential, once the race is over
  bool skip_invalidation = false;
};

struct ExploreReport {
  std::string name;
  uint64_t schedules = 0;
  uint64_t failures = 0;
  bool exhausted = false;        // every schedule was visited
  uint64_t max_messages = 0;     // deliveries during the race, worst schedule
  uint64_t refetch_schedules = 0;   // schedules where a racing lookup went remote
  uint64_t discard_schedules = 0;   // schedules where a fetched dentry was discarded
  std::vector<std::string> outcomes;  // distinct observed result tuples
  Verdict first_failure;
  Metrics metrics;
};

ExploreReport Explore(const RaceScenario& scenario, uint64_t max_schedules);

// rmdir vs create of a child, rmdir vs open below it, permission change vs
// resolution through the changed directory (cold replica), rename vs open
// below the source.
std::vector<RaceScenario> StandardRaces();
// Permission change vs resolution with invalidations ignored; must FAIL.
RaceScenario SkipInvalidationMutant();

}  // namespace falconmeta::harness
