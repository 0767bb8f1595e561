#include "falconmeta/harness/trace.h"

#include <array>
#include <fstream>
#include <sstream>

namespace falconmeta::harness {

namespace {

constexpr std::array<std::string_view, 10> kNames = {"mkdir",   "create",  "open",  "close",   "getattr",
                                                     "unlink",  "readdir", "rmdir", "setperm", "rename"};

size_t ExpectedArgs(TraceOpKind kind) {
  switch (kind) {
    case TraceOpKind::kMkdir:
    case TraceOpKind::kCreate:
    case TraceOpKind::kClose:
    case TraceOpKind::kRename:
      return 1;
    case TraceOpKind::kSetPerm:
      return 3;
    default:
      return 0;
  }
}

}  // namespace

std::string_view TraceOpName(TraceOpKind kind) { return kNames[static_cast<size_t>(kind)]; }

Result<TraceOpKind> ParseTraceOpName(std::string_view name) {
  for (size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<TraceOpKind>(i);
  }
  return Status(Code::kScenarioError, "unknown op " + std::string(name));
}

std::string RenderTraceLine(const TraceOp& op) {
  std::string line = std::to_string(op.seq) + " " + std::string(TraceOpName(op.kind)) + " " + op.path;
  for (const auto& a : op.args) line += " " + a;
  return line;
}

Result<TraceOp> ParseTraceLine(std::string_view line) {
  std::istringstream in{std::string(line)};
  TraceOp op;
  std::string seq;
  std::string name;
  if (!(in >> seq >> name >> op.path)) return Status(Code::kScenarioError, "short trace line");
  try {
    size_t used = 0;
    op.seq = std::stoull(seq, &used);
    if (used != seq.size()) return Status(Code::kScenarioError, "bad sequence number " + seq);
  } catch (const std::exception&) {
    return Status(Code::kScenarioError, "bad sequence number " + seq);
  }
  auto kind = ParseTraceOpName(name);
  if (!kind.ok()) return kind.status();
  op.kind = *kind;
  for (std::string a; in >> a;) op.args.push_back(a);
  if (op.args.size() != ExpectedArgs(op.kind)) {
    return Status(Code::kScenarioError, "wrong argument count for " + name);
  }
  return op;
}

Result<std::vector<TraceOp>> ParseTrace(std::string_view text) {
  std::vector<TraceOp> ops;
  size_t pos = 0;
  size_t lineno = 0;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++lineno;
    pos = end + 1;
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || line[first] == '#') {
      if (end == text.size()) break;
      continue;
    }
    auto op = ParseTraceLine(line);
    if (!op.ok()) return Status(Code::kScenarioError, "line " + std::to_string(lineno) + ": " + op.status().message());
    ops.push_back(std::move(op).value());
    if (end == text.size()) break;
  }
  return ops;
}

std::string RenderTrace(const std::vector<TraceOp>& ops) {
  std::string out;
  for (const auto& op : ops) {
    out += RenderTraceLine(op);
    out += '\n';
  }
  return out;
}

Result<std::vector<TraceOp>> ReadTraceFile(const std::string& file) {
  std::ifstream in(file);
  if (!in) return Status(Code::kScenarioError, "cannot open " + file);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseTrace(ss.str());
}

Status WriteTraceFile(const std::string& file, const std::vector<TraceOp>& ops) {
  std::ofstream out(file);
  if (!out) return Status(Code::kScenarioError, "cannot write " + file);
  out << RenderTrace(ops);
  return out ? Status::OK() : Status(Code::kScenarioError, "write failed: " + file);
}

}  // namespace falconmeta::harness
