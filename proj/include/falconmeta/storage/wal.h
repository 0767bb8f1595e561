#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "falconmeta/common/bytes.h"
#include "falconmeta/common/status.h"

namespace falconmeta {

// Simulated block device. Appends land in a volatile tail until Flush();
// a crash keeps the durable prefix plus, optionally, a torn piece of the tail.
class Disk {
 public:
  void Append(std::span<const uint8_t> bytes) { data_.insert(data_.end(), bytes.begin(), bytes.end()); }
  void Flush() {
    durable_ = data_.size();
    ++flushes_;
  }
  void Crash(std::mt19937_64* torn_rng);
  void Truncate(size_t n);

  const Bytes& contents() const { return data_; }
  Bytes& mutable_contents() { return data_; }
  size_t durable_size() const { return durable_; }
  uint64_t flush_count() const { return flushes_; }

 private:
  Bytes data_;
  size_t durable_ = 0;
  uint64_t flushes_ = 0;
};

enum class WalKind : uint8_t {
  kBeginBatch = 1,
  kOpApply = 2,
  kCommitBatch = 3,
  kPrepare = 4,
  kCommit = 5,
  kAbort = 6,
};

struct WalRecord {
  uint64_t lsn = 0;
  WalKind kind = WalKind::kOpApply;
  Bytes payload;

  friend bool operator==(const WalRecord&, const WalRecord&) = default;
};

// Record layout: u32 payload_len | u32 crc32(lsn, kind, payload) | u64 lsn |
// u8 kind | payload.
inline constexpr size_t kWalRecordHeaderBytes = 17;

void EncodeWalRecord(const WalRecord& rec, ByteWriter& w);

struct WalScan {
  std::vector<WalRecord> records;
  size_t valid_bytes = 0;
  // kCorruptLog when a torn or corrupt record ended the scan early.
  Status status;
};

WalScan ScanWal(std::span<const uint8_t> bytes);

class Wal {
 public:
  // Scans the disk, truncates any torn tail and continues after the last
  // valid lsn.
  explicit Wal(Disk* disk);

  uint64_t Append(WalKind kind, Bytes payload);
  // Durability point. Counts one flush.
  void Flush() { disk_->Flush(); }

  uint64_t next_lsn() const { return next_lsn_; }
  Disk* disk() { return disk_; }
  const Status& open_status() const { return open_status_; }

 private:
  Disk* disk_;
  uint64_t next_lsn_ = 1;
  Status open_status_;
};

}  // namespace falconmeta
