#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "oodgate/error.hpp"

namespace oodgate::detail {

// Little-endian writer into an in-memory buffer.
class ByteWriter {
 public:
  void put_bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

  template <typename UInt>
  void put_uint(UInt v) {
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
      buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
  }

  void put_f32(float v) { put_uint(std::bit_cast<std::uint32_t>(v)); }
  void put_f64(double v) { put_uint(std::bit_cast<std::uint64_t>(v)); }

  const std::vector<char>& bytes() const { return buf_; }

 private:
  std::vector<char> buf_;
};

// Bounds-checked little-endian reader. Every read names what it was
// reading so truncation errors point at the offending field.
class ByteReader {
 public:
  explicit ByteReader(std::vector<char> buf) : buf_(std::move(buf)) {}

  std::size_t remaining() const { return buf_.size() - pos_; }

  std::string take_bytes(std::size_t n, const std::string& what) {
    need(n, what);
    std::string out(buf_.data() + pos_, n);
    pos_ += n;
    return out;
  }

  template <typename UInt>
  UInt take_uint(const std::string& what) {
    need(sizeof(UInt), what);
    UInt v = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
      v |= static_cast<UInt>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(UInt);
    return v;
  }

  float take_f32(const std::string& what) {
    return std::bit_cast<float>(take_uint<std::uint32_t>(what));
  }
  double take_f64(const std::string& what) {
    return std::bit_cast<double>(take_uint<std::uint64_t>(what));
  }

 private:
  void need(std::size_t n, const std::string& what) const {
    if (remaining() < n) throw data_error("truncated file while reading " + what);
  }

  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

inline std::vector<char> read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw data_error("input not found: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const char* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot write " + path.string());
  out.write(data, static_cast<std::streamsize>(n));
  if (!out) throw data_error("write failed: " + path.string());
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  write_file(path, text.data(), text.size());
}

}  // namespace oodgate::detail
