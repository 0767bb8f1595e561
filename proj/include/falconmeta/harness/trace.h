#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "falconmeta/common/status.h"

namespace falconmeta::harness {

enum class TraceOpKind : uint8_t {
  kMkdir,
  kCreate,
  kOpen,
  kClose,
  kGetAttr,
  kUnlink,
  kReaddir,
  kRmdir,
  kSetPerm,
  kRename,
};

std::string_view TraceOpName(TraceOpKind kind);
Result<TraceOpKind> ParseTraceOpName(std::string_view name);

// One line of a replayable trace: `<seq> <op> <path> [<arg>...]`.
// mkdir/create take an octal mode, setperm takes octal mode, uid and gid,
// rename takes the destination path, close takes the size.
struct TraceOp {
  uint64_t seq = 0;
  TraceOpKind kind = TraceOpKind::kGetAttr;
  std::string path;
  std::vector<std::string> args;

  friend bool operator==(const TraceOp&, const TraceOp&) = default;
};

std::string RenderTraceLine(const TraceOp& op);
Result<TraceOp> ParseTraceLine(std::string_view line);

// Blank lines and lines starting with '#' are skipped.
Result<std::vector<TraceOp>> ParseTrace(std::string_view text);
std::string RenderTrace(const std::vector<TraceOp>& ops);

Result<std::vector<TraceOp>> ReadTraceFile(const std::string& file);
Status WriteTraceFile(const std::string& file, const std::vector<TraceOp>& ops);

}  // namespace falconmeta::harness
