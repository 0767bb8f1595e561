#include "falconmeta/cluster/cluster.h"

#include <set>
#include <utility>

#include "falconmeta/index/route.h"

namespace falconmeta {

Cluster::Cluster(ClusterConfig config) : config_(std::move(config)) {
  sim_ = std::make_unique<sim::Simulator>(config_.sim);
  view_.epoch = 1;
  view_.vnodes = config_.vnodes;
  for (uint32_t i = 0; i < config_.mnodes; ++i) view_.nodes.push_back(NodeId(i));
  for (uint32_t i = 0; i < config_.mnodes; ++i) {
    auto node = std::make_unique<MNode>(*sim_, NodeId(i), config_.node, view_, config_.table);
    sim_->Register(Raw(NodeId(i)), node.get());
    mnodes_.emplace(NodeId(i), std::move(node));
  }
  coordinator_ = std::make_unique<Coordinator>(*sim_, config_.node, view_, config_.table);
  sim_->Register(sim::kCoordinatorAddress, coordinator_.get());
  for (uint32_t i = 0; i < config_.data_nodes; ++i) {
    auto d = std::make_unique<DataNode>(*sim_, NodeId(i), config_.chunk_bytes);
    sim_->Register(d->address(), d.get());
    data_nodes_.push_back(std::move(d));
  }
  for (uint32_t i = 0; i < config_.clients; ++i) {
    ClientConfig cc;
    cc.creds = config_.creds;
    cc.seed = config_.sim.seed * 1000003 + i;
    cc.data_nodes = config_.data_nodes;
    cc.chunk_bytes = config_.chunk_bytes;
    AddClient(cc);
  }
}

Cluster::~Cluster() = default;

MNode& Cluster::AddMNode(NodeId id) {
  auto node = std::make_unique<MNode>(*sim_, id, config_.node, coordinator_->view(), coordinator_->table());
  sim_->Register(Raw(id), node.get());
  MNode& ref = *node;
  mnodes_[id] = std::move(node);
  return ref;
}

ClientSession& Cluster::AddClient(ClientConfig config) {
  auto index = static_cast<uint32_t>(clients_.size());
  auto c = std::make_unique<ClientSession>(*sim_, index, config, view_, config_.table);
  sim_->Register(c->address(), c.get());
  clients_.push_back(std::move(c));
  return *clients_.back();
}

std::optional<RebalanceOutcome> Cluster::AwaitControl(
    const std::function<void(Coordinator&, Coordinator::Done)>& start, uint64_t max_events) {
  std::optional<RebalanceOutcome> out;
  start(*coordinator_, [&out](const RebalanceOutcome& o) { out = o; });
  sim_->RunUntil([&out] { return out.has_value(); }, max_events);
  return out;
}

std::map<NodeId, uint64_t> Cluster::InodeCounts() const {
  std::map<NodeId, uint64_t> out;
  for (const auto& [id, node] : mnodes_) out[id] = node->inodes().records().size();
  return out;
}

CensusReport Cluster::Census() const {
  CensusReport report;
  std::map<DentryKey, std::vector<NodeId>> holders;
  std::map<DirectoryId, std::vector<const InodeRecord*>> children;
  for (const auto& [id, node] : mnodes_) {
    for (const auto& [key, rec] : node->inodes().records()) {
      holders[key].push_back(id);
      children[key.pid].push_back(&rec);
      ++report.total;
    }
  }
  const Ring& ring = coordinator_->ring();
  const ExceptionTable& table = coordinator_->table();
  std::set<NodeId> members(ring.nodes().begin(), ring.nodes().end());
  for (const auto& [key, nodes] : holders) {
    if (nodes.size() > 1) report.duplicates.push_back(ToString(key));
    NodeId owner = PlacementOwner(ring, table, key.pid, key.name);
    if (nodes.size() == 1 && nodes.front() != owner) report.misplaced.push_back(ToString(key));
  }
  // Walk from the root; anything not reached is an orphan.
  std::set<DentryKey> reached;
  std::vector<std::pair<DirectoryId, std::string>> stack{{kRootDir, ""}};
  while (!stack.empty()) {
    auto [dir, prefix] = stack.back();
    stack.pop_back();
    auto it = children.find(dir);
    if (it == children.end()) continue;
    for (const InodeRecord* rec : it->second) {
      if (!reached.insert(rec->key).second) continue;
      std::string path = prefix + "/" + rec->key.name;
      report.by_path.emplace(path, *rec);
      if (rec->is_dir()) stack.emplace_back(rec->dir_id, path);
    }
  }
  for (const auto& [key, _] : holders) {
    if (!reached.contains(key)) report.orphans.push_back(ToString(key));
  }
  return report;
}

}  // namespace falconmeta
