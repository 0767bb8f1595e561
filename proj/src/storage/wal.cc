#include "falconmeta/storage/wal.h"

#include "falconmeta/common/hash.h"

namespace falconmeta {

void Disk::Crash(std::mt19937_64* torn_rng) {
  size_t keep = durable_;
  if (torn_rng != nullptr && data_.size() > durable_) {
    keep += (*torn_rng)() % (data_.size() - durable_ + 1);
  }
  data_.resize(keep);
  durable_ = keep;
}

void Disk::Truncate(size_t n) {
  if (n < data_.size()) data_.resize(n);
  if (durable_ > data_.size()) durable_ = data_.size();
}

namespace {

uint32_t RecordCrc(uint64_t lsn, WalKind kind, std::span<const uint8_t> payload) {
  ByteWriter w;
  w.PutU64(lsn);
  w.PutU8(static_cast<uint8_t>(kind));
  w.PutRaw(payload);
  return Crc32(w.bytes());
}

}  // namespace

void EncodeWalRecord(const WalRecord& rec, ByteWriter& w) {
  w.PutU32(static_cast<uint32_t>(rec.payload.size()));
  w.PutU32(RecordCrc(rec.lsn, rec.kind, rec.payload));
  w.PutU64(rec.lsn);
  w.PutU8(static_cast<uint8_t>(rec.kind));
  w.PutRaw(std::span<const uint8_t>(rec.payload));
}

WalScan ScanWal(std::span<const uint8_t> bytes) {
  WalScan scan;
  size_t pos = 0;
  uint64_t last_lsn = 0;
  while (pos < bytes.size()) {
    ByteReader r(bytes.subspan(pos));
    uint32_t len = r.GetU32();
    uint32_t crc = r.GetU32();
    uint64_t lsn = r.GetU64();
    uint8_t kind = r.GetU8();
    if (!r.ok() || r.remaining() < len) {
      scan.status = Status(Code::kCorruptLog, "torn record at byte " + std::to_string(pos));
      break;
    }
    Bytes payload = r.GetBytes(len);
    if (kind < 1 || kind > 6 || crc != RecordCrc(lsn, static_cast<WalKind>(kind), payload) || lsn <= last_lsn) {
      scan.status = Status(Code::kCorruptLog, "bad record at byte " + std::to_string(pos));
      break;
    }
    last_lsn = lsn;
    scan.records.push_back(WalRecord{lsn, static_cast<WalKind>(kind), std::move(payload)});
    pos += kWalRecordHeaderBytes + len;
  }
  scan.valid_bytes = pos;
  return scan;
}

Wal::Wal(Disk* disk) : disk_(disk) {
  WalScan scan = ScanWal(disk_->contents());
  open_status_ = scan.status;
  disk_->Truncate(scan.valid_bytes);
  if (!scan.records.empty()) next_lsn_ = scan.records.back().lsn + 1;
}

uint64_t Wal::Append(WalKind kind, Bytes payload) {
  WalRecord rec{next_lsn_++, kind, std::move(payload)};
  ByteWriter w;
  EncodeWalRecord(rec, w);
  disk_->Append(w.bytes());
  return rec.lsn;
}

}  // namespace falconmeta
