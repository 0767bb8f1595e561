#include "falconmeta/model/path.h"

namespace falconmeta {

bool IsValidName(std::string_view name) {
  if (name.empty() || name.size() > kMaxNameBytes) return false;
  if (name == "." || name == "..") return false;
  for (char c : name) {
    if (c == '/' || c == '\0') return false;
  }
  return true;
}

Result<PathName> PathName::Parse(std::string_view raw) {
  if (raw.empty() || raw.front() != '/') return Status(Code::kMalformedPath, "not absolute");
  if (raw.size() > kMaxPathBytes) return Status(Code::kMalformedPath, "path too long");
  if (raw == "/") return PathName();
  std::vector<std::string> parts;
  size_t pos = 1;
  while (true) {
    size_t next = raw.find('/', pos);
    std::string_view part = raw.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    if (!IsValidName(part)) {
      return Status(Code::kMalformedPath, "bad component '" + std::string(part) + "'");
    }
    parts.emplace_back(part);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return PathName(std::move(parts));
}

PathName PathName::Parent() const {
  if (components_.empty()) return *this;
  return PathName(std::vector<std::string>(components_.begin(), components_.end() - 1));
}

PathName PathName::Child(std::string name) const {
  auto parts = components_;
  parts.push_back(std::move(name));
  return PathName(std::move(parts));
}

bool PathName::IsPrefixOf(const PathName& other) const {
  if (components_.size() > other.components_.size()) return false;
  for (size_t i = 0; i < components_.size(); ++i) {
    if (components_[i] != other.components_[i]) return false;
  }
  return true;
}

std::string PathName::Render() const {
  if (components_.empty()) return "/";
  std::string s;
  for (const auto& c : components_) {
    s += '/';
    s += c;
  }
  return s;
}

}  // namespace falconmeta
