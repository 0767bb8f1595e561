#include "falconmeta/model/types.h"

namespace falconmeta {

bool CheckPermission(const Permission& perm, const Credentials& who, Access want) {
  if (who.uid == 0) return true;
  int shift = 0;
  if (who.uid == perm.uid) {
    shift = 6;
  } else if (who.gid == perm.gid) {
    shift = 3;
  }
  return ((perm.mode >> shift) & static_cast<uint16_t>(want)) != 0;
}

std::string ToString(const DentryKey& key) {
  return "(" + std::to_string(Raw(key.pid)) + "," + key.name + ")";
}

}  // namespace falconmeta
