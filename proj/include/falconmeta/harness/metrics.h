#pragma once

#include <map>
#include <string>

#include "falconmeta/sim/simulator.h"

namespace falconmeta::harness {

// Flat key -> number report; keys serialize in sorted order.
using Metrics = std::map<std::string, double>;

std::string MetricsToJson(const Metrics& m);
void AddCounters(Metrics* m, const sim::Counters& counters, const std::string& prefix = "counter.");

}  // namespace falconmeta::harness
