#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace falconmeta {

// Error codes double as wire codes in RPC replies; values are stable.
enum class Code : uint8_t {
  kOk = 0,
  kNoEnt = 1,
  kExist = 2,
  kAccess = 3,
  kNotDir = 4,
  kIsDir = 5,
  kNotEmpty = 6,
  kInvalidRename = 7,
  kMalformedPath = 8,
  kCodecError = 9,
  kCorruptLog = 10,
  kEmptyCluster = 11,
  kUnbalanceable = 12,
  kNoChunk = 13,
  kShortRead = 14,
  kTimeout = 15,
  kScenarioError = 16,
  kInvalidArgument = 17,
};

std::string_view CodeName(Code code);

class Status {
 public:
  Status() = default;
  Status(Code code, std::string msg) : code_(code), msg_(std::move(msg)) {}
  explicit Status(Code code) : code_(code) {}

  static Status OK() { return Status(); }

  bool ok() const { return code_ == Code::kOk; }
  Code code() const { return code_; }
  const std::string& message() const { return msg_; }
  std::string ToString() const;

  friend bool operator==(const Status& a, const Status& b) { return a.code_ == b.code_; }

 private:
  Code code_ = Code::kOk;
  std::string msg_;
};

// Value-or-error, in the spirit of absl::StatusOr.
template <typename T>
class Result {
 public:
  Result(T value) : v_(std::move(value)) {}  // NOLINT(runtime/explicit)
  Result(Status status) : v_(std::move(status)) {}  // NOLINT(runtime/explicit)
  Result(Code code) : v_(Status(code)) {}  // NOLINT(runtime/explicit)

  bool ok() const { return std::holds_alternative<T>(v_); }
  Status status() const { return ok() ? Status::OK() : std::get<Status>(v_); }
  Code code() const { return ok() ? Code::kOk : std::get<Status>(v_).code(); }

  T& value() & { return std::get<T>(v_); }
  const T& value() const& { return std::get<T>(v_); }
  T&& value() && { return std::get<T>(std::move(v_)); }

  T& operator*() & { return value(); }
  const T& operator*() const& { return value(); }
  T* operator->() { return &value(); }
  const T* operator->() const { return &value(); }

 private:
  std::variant<T, Status> v_;
};

#define FM_RETURN_NOT_OK(expr)            \
  do {                                    \
    ::falconmeta::Status _s = (expr);     \
    if (!_s.ok()) return _s;              \
  } while (0)

}  // namespace falconmeta
