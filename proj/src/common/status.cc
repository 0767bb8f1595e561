#include "falconmeta/common/status.h"

namespace falconmeta {

std::string_view CodeName(Code code) {
  switch (code) {
    case Code::kOk: return "OK";
    case Code::kNoEnt: return "NoEnt";
    case Code::kExist: return "Exist";
    case Code::kAccess: return "Access";
    case Code::kNotDir: return "NotDir";
    case Code::kIsDir: return "IsDir";
    case Code::kNotEmpty: return "NotEmpty";
    case Code::kInvalidRename: return "InvalidRename";
    case Code::kMalformedPath: return "MalformedPath";
    case Code::kCodecError: return "CodecError";
    case Code::kCorruptLog: return "CorruptLog";
    case Code::kEmptyCluster: return "EmptyCluster";
    case Code::kUnbalanceable: return "Unbalanceable";
    case Code::kNoChunk: return "NoChunk";
    case Code::kShortRead: return "ShortRead";
    case Code::kTimeout: return "Timeout";
    case Code::kScenarioError: return "ScenarioError";
    case Code::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

std::string Status::ToString() const {
  std::string s(CodeName(code_));
  if (!msg_.empty()) {
    s += ": ";
    s += msg_;
  }
  return s;
}

}  // namespace falconmeta
