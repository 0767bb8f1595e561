#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "falconmeta/common/status.h"

namespace falconmeta {

inline constexpr size_t kMaxPathBytes = 4096;
inline constexpr size_t kMaxNameBytes = 255;

// Absolute, normalized path. Root has no components.
class PathName {
 public:
  PathName() = default;
  explicit PathName(std::vector<std::string> components) : components_(std::move(components)) {}

  static Result<PathName> Parse(std::string_view raw);

  bool is_root() const { return components_.empty(); }
  size_t depth() const { return components_.size(); }
  const std::vector<std::string>& components() const { return components_; }
  // Precondition: !is_root().
  const std::string& leaf() const { return components_.back(); }
  std::span<const std::string> parent_components() const {
    return std::span<const std::string>(components_).first(components_.empty() ? 0 : components_.size() - 1);
  }
  PathName Parent() const;
  PathName Child(std::string name) const;

  // True when `this` equals `other` or is one of its ancestors.
  bool IsPrefixOf(const PathName& other) const;

  std::string Render() const;

  friend auto operator<=>(const PathName&, const PathName&) = default;
  friend bool operator==(const PathName&, const PathName&) = default;

 private:
  std::vector<std::string> components_;
};

bool IsValidName(std::string_view name);

}  // namespace falconmeta
