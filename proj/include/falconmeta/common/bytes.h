#pragma once

#include <concepts>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace falconmeta {

using Bytes = std::vector<uint8_t>;

// Little-endian append-only encoder.
class ByteWriter {
 public:
  void PutU8(uint8_t v) { buf_.push_back(v); }
  void PutU16(uint16_t v) { PutLE(v); }
  void PutU32(uint32_t v) { PutLE(v); }
  void PutU64(uint64_t v) { PutLE(v); }
  void PutRaw(std::span<const uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
  void PutRaw(std::string_view s) {
    buf_.insert(buf_.end(), reinterpret_cast<const uint8_t*>(s.data()),
                reinterpret_cast<const uint8_t*>(s.data()) + s.size());
  }

  size_t size() const { return buf_.size(); }
  const Bytes& bytes() const { return buf_; }
  Bytes Release() { return std::move(buf_); }

 private:
  template <typename T>
  void PutLE(T v) {
    for (size_t i = 0; i < sizeof(T); ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }

  Bytes buf_;
};

// Little-endian decoder. Reads past the end latch a failure flag and yield
// zeros; callers check ok() once after decoding a whole object.
class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

  uint8_t GetU8() { return GetLE<uint8_t>(); }
  uint16_t GetU16() { return GetLE<uint16_t>(); }
  uint32_t GetU32() { return GetLE<uint32_t>(); }
  uint64_t GetU64() { return GetLE<uint64_t>(); }

  std::string GetString(size_t n) {
    if (!Need(n)) return {};
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  Bytes GetBytes(size_t n) {
    if (!Need(n)) return {};
    Bytes b(data_.begin() + pos_, data_.begin() + pos_ + n);
    pos_ += n;
    return b;
  }

  bool ok() const { return ok_; }
  void Fail() { ok_ = false; }
  size_t remaining() const { return data_.size() - pos_; }
  size_t position() const { return pos_; }

 private:
  bool Need(size_t n) {
    if (!ok_ || data_.size() - pos_ < n) {
      ok_ = false;
      return false;
    }
    return true;
  }
  template <typename T>
  T GetLE() {
    if (!Need(sizeof(T))) return 0;
    T v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(data_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return v;
  }

  std::span<const uint8_t> data_;
  size_t pos_ = 0;
  bool ok_ = true;
};

// Generic field archives. A struct opts in by exposing
//   template <typename Ar> void Fields(Ar& ar) { ar(a, b, c); }
// Types with bit-exact external formats instead provide
//   void EncodeTo(ByteWriter&) const;  static T DecodeFrom(ByteReader&);
template <typename T>
concept HasWireCodec = requires(const T& t, ByteWriter& w, ByteReader& r) {
  t.EncodeTo(w);
  { T::DecodeFrom(r) } -> std::same_as<T>;
};

class Encoder {
 public:
  explicit Encoder(ByteWriter& w) : w_(w) {}

  template <typename... Ts>
  void operator()(const Ts&... vs) {
    (Put(vs), ...);
  }

 private:
  template <typename T>
  void Put(const T& v) {
    if constexpr (std::is_same_v<T, bool>) {
      w_.PutU8(v ? 1 : 0);
    } else if constexpr (std::is_enum_v<T>) {
      Put(static_cast<std::underlying_type_t<T>>(v));
    } else if constexpr (std::is_integral_v<T> && sizeof(T) == 1) {
      w_.PutU8(static_cast<uint8_t>(v));
    } else if constexpr (std::is_integral_v<T> && sizeof(T) == 2) {
      w_.PutU16(static_cast<uint16_t>(v));
    } else if constexpr (std::is_integral_v<T> && sizeof(T) == 4) {
      w_.PutU32(static_cast<uint32_t>(v));
    } else if constexpr (std::is_integral_v<T> && sizeof(T) == 8) {
      w_.PutU64(static_cast<uint64_t>(v));
    } else if constexpr (std::is_same_v<T, std::string>) {
      w_.PutU32(static_cast<uint32_t>(v.size()));
      w_.PutRaw(v);
    } else if constexpr (std::is_same_v<T, Bytes>) {
      w_.PutU32(static_cast<uint32_t>(v.size()));
      w_.PutRaw(std::span<const uint8_t>(v));
    } else if constexpr (HasWireCodec<T>) {
      v.EncodeTo(w_);
    } else if constexpr (requires { typename T::value_type; v.size(); v.begin(); }) {
      w_.PutU32(static_cast<uint32_t>(v.size()));
      for (const auto& e : v) Put(e);
    } else if constexpr (requires { v.has_value(); *v; }) {
      w_.PutU8(v.has_value() ? 1 : 0);
      if (v.has_value()) Put(*v);
    } else {
      const_cast<T&>(v).Fields(*this);
    }
  }

  ByteWriter& w_;
};

class Decoder {
 public:
  explicit Decoder(ByteReader& r) : r_(r) {}

  template <typename... Ts>
  void operator()(Ts&... vs) {
    (Get(vs), ...);
  }

 private:
  // Upper bound on decoded element counts; guards against hostile lengths.
  static constexpr uint32_t kMaxElems = 1u << 26;

  template <typename T>
  void Get(T& v) {
    if constexpr (std::is_same_v<T, bool>) {
      v = r_.GetU8() != 0;
    } else if constexpr (std::is_enum_v<T>) {
      std::underlying_type_t<T> u{};
      Get(u);
      v = static_cast<T>(u);
    } else if constexpr (std::is_integral_v<T> && sizeof(T) == 1) {
      v = static_cast<T>(r_.GetU8());
    } else if constexpr (std::is_integral_v<T> && sizeof(T) == 2) {
      v = static_cast<T>(r_.GetU16());
    } else if constexpr (std::is_integral_v<T> && sizeof(T) == 4) {
      v = static_cast<T>(r_.GetU32());
    } else if constexpr (std::is_integral_v<T> && sizeof(T) == 8) {
      v = static_cast<T>(r_.GetU64());
    } else if constexpr (std::is_same_v<T, std::string>) {
      v = r_.GetString(r_.GetU32());
    } else if constexpr (std::is_same_v<T, Bytes>) {
      v = r_.GetBytes(r_.GetU32());
    } else if constexpr (HasWireCodec<T>) {
      v = T::DecodeFrom(r_);
    } else if constexpr (requires { typename T::value_type; v.size(); v.begin(); v.push_back(typename T::value_type{}); }) {
      uint32_t n = r_.GetU32();
      if (n > kMaxElems || n > r_.remaining()) {
        r_.Fail();
        return;
      }
      v.clear();
      v.reserve(n);
      for (uint32_t i = 0; i < n && r_.ok(); ++i) {
        typename T::value_type e{};
        Get(e);
        v.push_back(std::move(e));
      }
    } else if constexpr (requires { v.has_value(); v.emplace(); }) {
      if (r_.GetU8() != 0) {
        v.emplace();
        Get(*v);
      } else {
        v.reset();
      }
    } else {
      v.Fields(*this);
    }
  }

  ByteReader& r_;
};

template <typename T>
Bytes EncodeValue(const T& v) {
  ByteWriter w;
  Encoder enc(w);
  enc(v);
  return w.Release();
}

// Returns false on truncation or trailing bytes.
template <typename T>
bool DecodeValue(std::span<const uint8_t> data, T* out) {
  ByteReader r(data);
  Decoder dec(r);
  dec(*out);
  return r.ok() && r.remaining() == 0;
}

}  // namespace falconmeta
