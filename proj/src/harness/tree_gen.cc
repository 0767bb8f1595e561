#include "falconmeta/harness/tree_gen.h"

#include <cmath>
#include <cstdio>
#include <random>
#include <set>

namespace falconmeta::harness {

double GeneratedTree::AverageFileDepth() const {
  if (files.empty()) return 0;
  uint64_t total = 0;
  for (const auto& f : files) {
    for (char c : f) total += c == '/' ? 1 : 0;
    --total;  // the leaf itself
  }
  return static_cast<double>(total) / static_cast<double>(files.size());
}

Result<GeneratedTree> GenerateTree(const TreeSpec& spec, uint64_t seed) {
  GeneratedTree tree;
  tree.file_size = spec.file_size;
  std::vector<std::string> level{""};
  uint64_t dir_counter = 0;
  for (uint32_t f : spec.fanout) {
    if (f == 0) return Status(Code::kScenarioError, "zero fanout");
    std::vector<std::string> next;
    next.reserve(level.size() * f);
    for (const auto& parent : level) {
      for (uint32_t i = 0; i < f; ++i) {
        std::string path = parent + "/" + spec.dir_prefix + std::to_string(dir_counter++);
        tree.dirs.push_back(path);
        next.push_back(std::move(path));
      }
    }
    level = std::move(next);
  }
  const std::vector<std::string>& leaves = level;
  tree.leaf_count = leaves.size();
  uint64_t total = spec.total_files != 0 ? spec.total_files : uint64_t{spec.files_per_leaf} * leaves.size();
  uint64_t dup_total = 0;
  for (const auto& d : spec.duplicated) {
    if (d.count > leaves.size()) {
      return Status(Code::kScenarioError, d.name + " needs more distinct directories than leaves");
    }
    dup_total += d.count;
  }
  if (dup_total > total) return Status(Code::kScenarioError, "duplicated names exceed the file count");
  std::mt19937_64 rng(seed);
  tree.files.reserve(total);
  std::set<std::string> dup_names;
  for (const auto& d : spec.duplicated) {
    if (!dup_names.insert(d.name).second) return Status(Code::kScenarioError, "repeated name " + d.name);
    // A run of consecutive leaves from a random start: distinct by construction.
    uint64_t start = rng() % leaves.size();
    for (uint64_t j = 0; j < d.count; ++j) tree.files.push_back(leaves[(start + j) % leaves.size()] + "/" + d.name);
  }
  uint64_t unique = total - dup_total;
  for (uint64_t i = 0; i < unique; ++i) {
    tree.files.push_back(leaves[i % leaves.size()] + "/" + spec.file_prefix + std::to_string(i) + spec.file_suffix);
  }
  return tree;
}

std::vector<TraceOp> TreeToTrace(const GeneratedTree& tree) {
  std::vector<TraceOp> ops;
  ops.reserve(tree.dirs.size() + tree.files.size());
  uint64_t seq = 0;
  for (const auto& d : tree.dirs) ops.push_back(TraceOp{seq++, TraceOpKind::kMkdir, d, {"755"}});
  for (const auto& f : tree.files) ops.push_back(TraceOp{seq++, TraceOpKind::kCreate, f, {"644"}});
  return ops;
}

GeneratedTree TreeFromTrace(const std::vector<TraceOp>& ops) {
  GeneratedTree tree;
  for (const auto& op : ops) {
    if (op.kind == TraceOpKind::kMkdir) tree.dirs.push_back(op.path);
    if (op.kind == TraceOpKind::kCreate) tree.files.push_back(op.path);
  }
  return tree;
}

TreeSpec UniformSpec(uint32_t depth, uint32_t fanout, uint32_t files_per_leaf) {
  TreeSpec spec;
  spec.fanout.assign(depth, fanout);
  spec.files_per_leaf = files_per_leaf;
  return spec;
}

TreeSpec ScaledMdtestSpec() { return UniformSpec(4, 10, 10); }

std::vector<uint64_t> ZipfCounts(uint64_t files, double s, uint64_t* tail) {
  double h = 0;
  for (uint64_t r = 1; r <= files; ++r) h += std::pow(static_cast<double>(r), -s);
  std::vector<uint64_t> counts;
  uint64_t used = 0;
  for (uint64_t r = 1; r <= files; ++r) {
    auto c = static_cast<uint64_t>(std::llround(static_cast<double>(files) * std::pow(static_cast<double>(r), -s) / h));
    if (c < 2) break;
    counts.push_back(c);
    used += c;
  }
  *tail = files > used ? files - used : 0;
  return counts;
}

TreeSpec ZipfSpec(uint64_t files, double s) {
  uint64_t tail = 0;
  std::vector<uint64_t> counts = ZipfCounts(files, s, &tail);
  TreeSpec spec;
  uint64_t top = counts.empty() ? 1 : counts.front();
  // Two levels with enough leaves for the most frequent name.
  uint32_t outer = 20;
  auto inner = static_cast<uint32_t>((top + outer - 1) / outer);
  spec.fanout = {outer, std::max<uint32_t>(inner, 1)};
  spec.total_files = files;
  for (size_t r = 0; r < counts.size(); ++r) {
    spec.duplicated.push_back(NameFrequency{"z" + std::to_string(r + 1), counts[r]});
  }
  spec.file_prefix = "t";
  return spec;
}

TreeSpec LinuxLikeSpec() {
  TreeSpec spec;
  spec.fanout = {60, 60};
  spec.total_files = 88936;
  spec.duplicated = {{"Makefile", 2945}, {"Kconfig", 1690}};
  spec.file_prefix = "src";
  spec.file_suffix = ".c";
  return spec;
}

GeneratedTree GenerateImageNetLike(uint32_t classes, uint32_t per_class, uint64_t seed) {
  GeneratedTree tree;
  std::mt19937_64 rng(seed);
  tree.dirs.push_back("/train");
  std::set<uint64_t> wnids;
  while (wnids.size() < classes) wnids.insert(1'000'000 + rng() % 9'000'000);
  for (uint64_t wnid : wnids) {
    char cls[16];
    std::snprintf(cls, sizeof(cls), "n%08llu", static_cast<unsigned long long>(wnid));
    std::string dir = std::string("/train/") + cls;
    tree.dirs.push_back(dir);
    std::set<uint64_t> ids;
    while (ids.size() < per_class) ids.insert(1 + rng() % 60'000);
    for (uint64_t id : ids) tree.files.push_back(dir + "/" + cls + "_" + std::to_string(id) + ".JPEG");
  }
  tree.leaf_count = classes;
  return tree;
}

}  // namespace falconmeta::harness
