#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "falconmeta/harness/trace.h"

namespace falconmeta::harness {

struct NameFrequency {
  std::string name;
  uint64_t count = 0;
};

// Directory levels under the root, each with its own fanout. Files go into
// the leaf directories. Directory and default file names are unique across
// the tree; `duplicated` names are placed in distinct leaf directories.
struct TreeSpec {
  std::vector<uint32_t> fanout;
  uint32_t files_per_leaf = 0;
  // When nonzero, overrides files_per_leaf x leaves.
  uint64_t total_files = 0;
  uint64_t file_size = 0;
  std::vector<NameFrequency> duplicated;
  std::string dir_prefix = "d";
  std::string file_prefix = "f";
  // Unique file names are <prefix><counter><suffix>.
  std::string file_suffix = ".dat";
};

struct GeneratedTree {
  std::vector<std::string> dirs;  // parents before children
  std::vector<std::string> files;
  uint64_t file_size = 0;

  size_t leaf_count = 0;
  double AverageFileDepth() const;  // directory components per file path
};

Result<GeneratedTree> GenerateTree(const TreeSpec& spec, uint64_t seed);

// mkdir for every directory, then create for every file.
std::vector<TraceOp> TreeToTrace(const GeneratedTree& tree);
// Inverse of TreeToTrace for traces holding only mkdir and create.
GeneratedTree TreeFromTrace(const std::vector<TraceOp>& ops);

// Presets.
TreeSpec UniformSpec(uint32_t depth, uint32_t fanout, uint32_t files_per_leaf);
// Ten-way tree scaled down a thousandfold: four directory levels of fanout
// ten (11,110 directories) and ten files per leaf (100,000 files).
TreeSpec ScaledMdtestSpec();
// Filenames drawn from Zipf(s) with expected counts, 100k files by default.
TreeSpec ZipfSpec(uint64_t files, double s);
// Source-tree shape with two very common names.
TreeSpec LinuxLikeSpec();
// Class directories holding uniquely named images; all names unique.
GeneratedTree GenerateImageNetLike(uint32_t classes, uint32_t per_class, uint64_t seed);

// Expected Zipf(s) counts for `files` draws over `files` names, rounded.
// Names whose count rounds below 2 are returned as a single tail count.
std::vector<uint64_t> ZipfCounts(uint64_t files, double s, uint64_t* tail);

}  // namespace falconmeta::harness
