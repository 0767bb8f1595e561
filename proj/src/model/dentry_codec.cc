#include "falconmeta/model/dentry_codec.h"

#include "falconmeta/model/path.h"

namespace falconmeta {

void EncodeDentry(const DentryRecord& rec, ByteWriter& w) {
  w.PutU64(Raw(rec.key.pid));
  w.PutU64(Raw(rec.dir_id));
  w.PutU32(rec.perm.uid);
  w.PutU32(rec.perm.gid);
  w.PutU16(rec.perm.mode);
  w.PutU8(static_cast<uint8_t>(rec.state));
  w.PutU16(static_cast<uint16_t>(rec.key.name.size()));
  w.PutRaw(rec.key.name);
}

Bytes EncodeDentry(const DentryRecord& rec) {
  ByteWriter w;
  EncodeDentry(rec, w);
  return w.Release();
}

Result<DentryRecord> DecodeDentry(std::span<const uint8_t> data) {
  ByteReader r(data);
  DentryRecord rec;
  rec.key.pid = DirectoryId(r.GetU64());
  rec.dir_id = DirectoryId(r.GetU64());
  rec.perm.uid = r.GetU32();
  rec.perm.gid = r.GetU32();
  rec.perm.mode = r.GetU16();
  uint8_t state = r.GetU8();
  uint16_t len = r.GetU16();
  if (!r.ok()) return Status(Code::kCodecError, "truncated header");
  if (state > 1) return Status(Code::kCodecError, "bad state tag");
  if (len > kMaxNameBytes) return Status(Code::kCodecError, "name too long");
  if (rec.perm.mode > kMaxMode) return Status(Code::kCodecError, "mode out of range");
  rec.key.name = r.GetString(len);
  if (!r.ok()) return Status(Code::kCodecError, "truncated name");
  if (r.remaining() != 0) return Status(Code::kCodecError, "trailing bytes");
  rec.state = static_cast<DentryState>(state);
  return rec;
}

}  // namespace falconmeta
