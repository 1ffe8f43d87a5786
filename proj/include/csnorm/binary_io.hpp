#pragma once

// Little-endian binary container shared by model files and resource bundles.
//
//   offset 0   "CSNORM"            6 bytes magic
//   offset 6   u32 format version
//   offset 10  u8  payload kind     (see PayloadKind)
//   offset 11  payload bytes
//   last 32    SHA-256 of every preceding byte
//
// Integers are little-endian, doubles are IEEE-754 bit patterns written as
// u64, strings are u32 byte length followed by UTF-8 bytes.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "csnorm/error.hpp"
#include "csnorm/hash.hpp"

namespace csnorm {

inline constexpr std::string_view kMagic = "CSNORM";
inline constexpr std::uint32_t kFormatVersion = 1;

enum class PayloadKind : std::uint8_t {
  normalization_model = 0,
  sequence_model = 1,
  resource_bundle = 2,
};

class BinaryWriter {
public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  void raw(std::string_view s) { buf_.append(s); }

  const std::string& bytes() const { return buf_; }

private:
  std::string buf_;
};

class BinaryReader {
public:
  explicit BinaryReader(std::string_view data) : data_(data) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(data_[pos_++])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(data_[pos_++])) << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str() {
    auto n = u32();
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool at_end() const { return pos_ == data_.size(); }

private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw IntegrityError("truncated payload");
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

inline std::string read_file(const std::string& path) {
  std::error_code ec;
  if (std::filesystem::is_directory(path, ec)) throw Error(path + " is a directory");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error("read failed: " + path);
  return buf.str();
}

inline void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path);
}

// Wraps a payload in the versioned, checksummed container.
inline std::string seal_container(PayloadKind kind, std::string_view payload) {
  BinaryWriter w;
  w.raw(kMagic);
  w.u32(kFormatVersion);
  w.u8(static_cast<std::uint8_t>(kind));
  w.raw(payload);
  auto digest = sha256(w.bytes());
  std::string out = w.bytes();
  out.append(reinterpret_cast<const char*>(digest.data()), digest.size());
  return out;
}

// Validates magic, version, kind and checksum; returns the payload view.
inline std::string_view open_container(std::string_view bytes, PayloadKind expected) {
  constexpr std::size_t header = 6 + 4 + 1;
  if (bytes.size() < header + 32) throw IntegrityError("truncated file");
  if (bytes.substr(0, 6) != kMagic) throw IntegrityError("bad magic (not a csnorm file)");
  BinaryReader r(bytes.substr(6, 5));
  auto version = r.u32();
  auto kind = r.u8();
  if (version != kFormatVersion)
    throw IntegrityError("unsupported format version " + std::to_string(version) + " (reader supports " +
                         std::to_string(kFormatVersion) + ")");
  auto body = bytes.substr(0, bytes.size() - 32);
  auto digest = sha256(body);
  if (std::memcmp(digest.data(), bytes.data() + body.size(), 32) != 0)
    throw IntegrityError("checksum mismatch (file corrupted)");
  if (kind != static_cast<std::uint8_t>(expected)) throw IntegrityError("unexpected payload kind");
  return bytes.substr(header, body.size() - header);
}

}  // namespace csnorm
