#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "falconmeta/harness/metrics.h"

namespace falconmeta::harness {

struct CrashPoint {
  uint64_t delivery = 0;  // crash right after this delivery (1-based)
  std::string target;     // coordinator, source or dest
  bool settled = false;   // simulation drained
  bool census_ok = false;  // no duplicate or orphan records
  bool count_ok = false;   // record count unchanged
  bool atomic_ok = false;  // rename: exactly one of source and destination
  bool placement_ok = false;  // every record on its placement owner
  bool live_ok = false;       // affected files answer getattr afterwards
  std::string detail;

  bool ok() const { return settled && census_ok && count_ok && atomic_ok && placement_ok && live_ok; }
};

struct CrashSweepReport {
  std::string op;
  uint64_t boundaries = 0;  // deliveries in the crash-free run
  uint64_t points = 0;
  uint64_t failures = 0;
  uint64_t applied = 0;     // points where the operation took effect
  std::vector<CrashPoint> failed;
  Metrics metrics;
};

// Rename of a file between two directories whose entries live on different
// MNodes; crashes the coordinator, the source owner or the destination owner
// after every delivery of the crash-free run, restarting it 50 ms later.
CrashSweepReport SweepRename(uint64_t seed);
// Publishes an override for one filename and migrates its files; crashes the
// coordinator, the source or the target the same way.
CrashSweepReport SweepMigration(uint64_t seed);

}  // namespace falconmeta::harness
