#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "falconmeta/filestore/data_node.h"
#include "falconmeta/index/exception_table.h"
#include "falconmeta/index/ring.h"
#include "falconmeta/model/path.h"
#include "falconmeta/rpc/endpoint.h"
#include "falconmeta/sim/simulator.h"
#include "falconmeta/sim/task.h"

namespace falconmeta {

inline sim::Address ClientAddress(uint32_t index) { return sim::kClientBase + index; }

struct OpResult {
  Code status = Code::kOk;
  std::optional<InodeRecord> inode;
  std::vector<InodeRecord> entries;  // readdir, sorted by name
  Bytes data;                        // read
  uint8_t hops = 0;                  // servers that handled the request

  bool ok() const { return status == Code::kOk; }
};

// Returned by Open; read and write use it without re-resolving the path.
struct FileHandle {
  std::string path;
  InodeId inode{0};
  uint64_t size = 0;
};

struct ClientConfig {
  Credentials creds;
  uint64_t seed = 1;
  uint32_t data_nodes = 0;
  uint32_t chunk_bytes = kDefaultChunkBytes;
  uint64_t timeout_ns = 2'000'000'000;
};

// Stateless client: keeps the ring, the exception table and an rng, and
// nothing about files or directories.
class ClientSession : public sim::Actor {
 public:
  ClientSession(sim::Simulator& sim, uint32_t index, ClientConfig config, ClusterView view, ExceptionTable table);
  ~ClientSession() override;

  void Deliver(sim::Envelope env) override;

  sim::Address address() const { return self_; }
  const ExceptionTable& table() const { return table_; }
  const ClusterView& view() const { return view_; }
  const Credentials& creds() const { return config_.creds; }
  void set_creds(Credentials c) { config_.creds = c; }
  // Per-file or per-directory entries retained between operations.
  size_t retained_entries() const { return 0; }
  uint64_t requests() const { return requests_; }

  // Runs `task` as a root coroutine of this session.
  void Spawn(sim::Task<void> task) { scope_.Spawn(std::move(task)); }

  sim::Task<OpResult> Mkdir(std::string path, uint16_t mode);
  sim::Task<OpResult> Create(std::string path, uint16_t mode);
  sim::Task<OpResult> GetAttr(std::string path);
  sim::Task<OpResult> Close(std::string path, uint64_t size, uint64_t mtime);
  sim::Task<OpResult> Unlink(std::string path);
  sim::Task<OpResult> Readdir(std::string path);
  sim::Task<OpResult> Rmdir(std::string path);
  sim::Task<OpResult> SetPerm(std::string path, Permission perm);
  sim::Task<OpResult> Rename(std::string from, std::string to);
  sim::Task<Result<FileHandle>> Open(std::string path);
  // Writes `data` from offset 0, replacing the contents, then closes the
  // file with the new size.
  sim::Task<OpResult> Write(FileHandle handle, Bytes data, uint64_t mtime);
  sim::Task<OpResult> Read(FileHandle handle);

  // Data node that stores chunk (inode, index).
  sim::Address ChunkOwner(InodeId inode, uint32_t index) const;

 private:
  sim::Task<OpResult> SendMeta(rpc::MetaOp op, std::string path, uint16_t mode, uint64_t size, uint64_t mtime);
  sim::Task<OpResult> SendGlobal(rpc::GlobalRequest req);
  void Absorb(const std::optional<ExceptionTable>& table, const std::optional<ClusterView>& view);

  sim::Simulator& sim_;
  sim::Address self_;
  ClientConfig config_;
  rpc::Endpoint ep_;
  sim::TaskScope scope_;
  ClusterView view_;
  Ring ring_;
  ExceptionTable table_;
  Ring data_ring_;
  std::mt19937_64 rng_;
  uint64_t requests_ = 0;
};

}  // namespace falconmeta
