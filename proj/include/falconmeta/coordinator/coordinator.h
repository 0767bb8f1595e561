#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "falconmeta/coordinator/planner.h"
#include "falconmeta/mnode/meta_actor.h"
#include "falconmeta/model/path.h"

namespace falconmeta {

struct RebalanceOutcome {
  Status status;
  std::vector<RebalancePlan> plans;  // one per epoch that changed the table
  uint32_t epochs = 0;
  double max_share = 0;  // measured after the last epoch
};

// Owns global namespace operations, the exception table and membership.
// Holds a namespace replica of its own but no inode shard.
class Coordinator : public MetaActor {
 public:
  Coordinator(sim::Simulator& sim, NodeConfig config, ClusterView view, ExceptionTable table);

  using Done = std::function<void(const RebalanceOutcome&)>;

  // Each runs as a background task; `done` fires once it finishes (never,
  // if the coordinator crashes first).
  void StartRebalance(double epsilon, uint32_t max_epochs, Done done);
  void StartShrink(double epsilon, Done done);
  // Publishes `table` and migrates the files whose placement it changes.
  void StartPublish(ExceptionTable table, Done done);
  void StartReconfigure(std::vector<NodeId> nodes, Done done);
  // Periodic rebalance on a fixed simulated cadence.
  void EnableAutoRebalance(double epsilon, uint64_t period_ns);

  uint64_t rng_seed() const { return rng_seed_; }

 protected:
  void Handle(rpc::Message msg, sim::Address src) override;
  void ApplyMutation(const Mutation& m) override;
  void ResetVolatile() override;
  void AfterRecovery(const ReplayResult& replay) override;

 private:
  sim::Task<void> ServeGlobal(rpc::Message msg, sim::Address src);
  sim::Task<Code> DoRmdirOrSetPerm(rpc::GlobalRequest req);
  sim::Task<Code> DoRename(rpc::GlobalRequest req);

  sim::Task<ClusterStats> GatherStats();
  // Every call is retried until each destination answers.
  sim::Task<std::vector<rpc::Message>> CallAll(std::vector<sim::Address> dsts, rpc::Payload body);
  sim::Task<void> Publish(ExceptionTable next, std::vector<std::string> names);
  sim::Task<void> MigrateAll(std::vector<sim::Address> nodes, std::vector<std::string> names, bool all);

  sim::Task<void> RunRebalance(double epsilon, uint32_t max_epochs, Done done);
  sim::Task<void> RunShrink(double epsilon, Done done);
  sim::Task<void> RunPublish(ExceptionTable table, Done done);
  sim::Task<void> RunReconfigure(std::vector<NodeId> nodes, Done done);
  sim::Task<void> AutoRebalance(double epsilon, uint64_t period_ns);

  std::vector<sim::Address> MNodeAddresses() const;

  sim::Task<void> AcquireControl();
  void ReleaseControl();
  sim::Task<void> FinishPublish(std::vector<std::string> names);

  uint64_t rng_seed_;
  // Names whose files are migrating; global operations on them wait.
  std::set<std::string> migrating_;
  std::vector<std::coroutine_handle<>> migrating_waiters_;
  bool paused_ = false;
  std::vector<std::coroutine_handle<>> pause_waiters_;
  // Serializes control-plane tasks (rebalance, shrink, reconfigure).
  std::vector<std::coroutine_handle<>> control_waiters_;
  bool control_busy_ = false;
};

}  // namespace falconmeta
