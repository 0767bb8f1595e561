#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "falconmeta/client/client.h"
#include "falconmeta/coordinator/coordinator.h"
#include "falconmeta/filestore/data_node.h"
#include "falconmeta/mnode/mnode.h"
#include "falconmeta/sim/simulator.h"

namespace falconmeta {

struct ClusterConfig {
  uint32_t mnodes = 4;
  uint32_t data_nodes = 0;
  uint32_t clients = 1;
  uint32_t vnodes = kDefaultVnodes;
  uint32_t chunk_bytes = kDefaultChunkBytes;
  sim::Simulator::Config sim;
  NodeConfig node;
  ExceptionTable table;
  Credentials creds;
};

// Global view of every inode held by any MNode, as full paths.
struct CensusReport {
  std::map<std::string, InodeRecord> by_path;
  std::vector<std::string> duplicates;  // keys held by more than one node
  std::vector<std::string> orphans;     // records whose parent does not exist
  std::vector<std::string> misplaced;   // records not on their placement owner
  size_t total = 0;

  bool ok() const { return duplicates.empty() && orphans.empty(); }
};

// Owns one simulation and every actor in it.
class Cluster {
 public:
  explicit Cluster(ClusterConfig config);
  ~Cluster();
  Cluster(const Cluster&) = delete;
  Cluster& operator=(const Cluster&) = delete;

  sim::Simulator& sim() { return *sim_; }
  const ClusterConfig& config() const { return config_; }
  Coordinator& coordinator() { return *coordinator_; }
  const Coordinator& coordinator() const { return *coordinator_; }
  MNode& mnode(NodeId id) { return *mnodes_.at(id); }
  const std::map<NodeId, std::unique_ptr<MNode>>& mnodes() const { return mnodes_; }
  ClientSession& client(size_t i) { return *clients_.at(i); }
  size_t client_count() const { return clients_.size(); }
  DataNode& data_node(size_t i) { return *data_nodes_.at(i); }
  size_t data_node_count() const { return data_nodes_.size(); }

  // Starts an MNode that is not yet in the ring, for reconfiguration.
  MNode& AddMNode(NodeId id);
  ClientSession& AddClient(ClientConfig config);

  // Runs `task` on client `i` and steps the simulation until it finishes.
  template <typename T>
  std::optional<T> Await(size_t i, sim::Task<T> task, uint64_t max_events = 50'000'000) {
    std::optional<T> out;
    client(i).Spawn(Capture<T>(std::move(task), &out));
    sim_->RunUntil([&out] { return out.has_value(); }, max_events);
    return out;
  }

  // Runs a coordinator control operation to completion.
  std::optional<RebalanceOutcome> AwaitControl(
      const std::function<void(Coordinator&, Coordinator::Done)>& start, uint64_t max_events = 200'000'000);

  CensusReport Census() const;
  // Sum of inode records per MNode.
  std::map<NodeId, uint64_t> InodeCounts() const;

 private:
  template <typename T>
  static sim::Task<void> Capture(sim::Task<T> task, std::optional<T>* out) {
    T v = co_await task;
    out->emplace(std::move(v));
  }

  ClusterConfig config_;
  std::unique_ptr<sim::Simulator> sim_;
  ClusterView view_;
  std::unique_ptr<Coordinator> coordinator_;
  std::map<NodeId, std::unique_ptr<MNode>> mnodes_;
  std::vector<std::unique_ptr<DataNode>> data_nodes_;
  std::vector<std::unique_ptr<ClientSession>> clients_;
};

}  // namespace falconmeta
