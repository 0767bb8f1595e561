#include "falconmeta/harness/metrics.h"

#include <cmath>

#include "json.hpp"

namespace falconmeta::harness {

std::string MetricsToJson(const Metrics& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : m) {
    double ip = 0;
    if (std::modf(v, &ip) == 0.0 && std::fabs(v) < 9.0e15) {
      j[k] = static_cast<int64_t>(v);
    } else {
      j[k] = v;
    }
  }
  return j.dump(2);
}

void AddCounters(Metrics* m, const sim::Counters& counters, const std::string& prefix) {
  for (const auto& [k, v] : counters.Flat()) (*m)[prefix + k] = static_cast<double>(v);
}

}  // namespace falconmeta::harness
