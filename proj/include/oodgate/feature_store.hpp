#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "oodgate/detail/byte_io.hpp"
#include "oodgate/error.hpp"

namespace oodgate {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class FeatureFormat { binary, csv };

/// N feature vectors of dimension D, each tagged with a distinct id.
///
/// Construction validates the invariants (N >= 1, D >= 1, one distinct id
/// per row, all values finite); a constructed matrix is immutable.
class FeatureMatrix {
 public:
  FeatureMatrix(std::vector<std::string> ids, RowMatrix data)
      : ids_(std::move(ids)), data_(std::move(data)) {
    if (data_.rows() < 1 || data_.cols() < 1) {
      throw data_error("feature matrix needs at least one row and one column");
    }
    if (ids_.size() != static_cast<std::size_t>(data_.rows())) {
      throw data_error("id count " + std::to_string(ids_.size()) + " does not match row count " +
                       std::to_string(data_.rows()));
    }
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < ids_.size(); ++r) {
      if (!seen.insert(ids_[r]).second) {
        throw data_error("duplicate id '" + ids_[r] + "' at row " + std::to_string(r));
      }
      for (Eigen::Index c = 0; c < data_.cols(); ++c) {
        if (!std::isfinite(data_(static_cast<Eigen::Index>(r), c))) {
          throw data_error("non-finite value at row " + std::to_string(r) + ", column " +
                           std::to_string(c));
        }
      }
    }
  }

  std::size_t rows() const { return ids_.size(); }
  std::size_t dims() const { return static_cast<std::size_t>(data_.cols()); }
  const std::vector<std::string>& ids() const { return ids_; }
  const RowMatrix& data() const { return data_; }
  auto row(std::size_t i) const { return data_.row(static_cast<Eigen::Index>(i)); }

  friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) {
    return a.ids_ == b.ids_ && a.data_.rows() == b.data_.rows() &&
           a.data_.cols() == b.data_.cols() && a.data_ == b.data_;
  }

 private:
  std::vector<std::string> ids_;
  RowMatrix data_;
};

inline constexpr char kFeatureMagic[] = "FEAT";
inline constexpr std::uint32_t kFeatureVersion = 1;

namespace detail {

inline FeatureMatrix parse_binary_features(std::vector<char> bytes) {
  ByteReader in(std::move(bytes));
  if (in.take_bytes(4, "magic") != std::string_view(kFeatureMagic, 4)) {
    throw data_error("malformed header: bad magic (expected FEAT)");
  }
  const auto version = in.take_uint<std::uint32_t>("version");
  if (version != kFeatureVersion) {
    throw data_error("malformed header: unsupported version " + std::to_string(version));
  }
  const auto rows = in.take_uint<std::uint64_t>("row count");
  const auto dims = in.take_uint<std::uint64_t>("dimension count");
  if (rows == 0 || dims == 0) throw data_error("malformed header: rows and dims must be >= 1");
  // Every row needs at least a 4-byte id length and D floats.
  if (rows > in.remaining() / 4 || dims > in.remaining() / 4) {
    throw data_error("malformed header: declared rows=" + std::to_string(rows) +
                     ", dims=" + std::to_string(dims) + " exceed file size");
  }

  std::vector<std::string> ids;
  ids.reserve(rows);
  for (std::uint64_t r = 0; r < rows; ++r) {
    const std::string where = "id of row " + std::to_string(r);
    const auto len = in.take_uint<std::uint32_t>(where);
    ids.push_back(in.take_bytes(len, where));
  }

  if (in.remaining() / sizeof(float) / dims < rows) {
    throw data_error("truncated payload: header declares " + std::to_string(rows) +
                     " rows, payload holds " +
                     std::to_string(in.remaining() / sizeof(float) / dims));
  }
  RowMatrix data(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dims));
  for (std::uint64_t r = 0; r < rows; ++r) {
    for (std::uint64_t c = 0; c < dims; ++c) {
      data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          in.take_f32("payload row " + std::to_string(r));
    }
  }
  if (in.remaining() != 0) {
    throw data_error("dimension mismatch: " + std::to_string(in.remaining()) +
                     " trailing bytes after payload");
  }
  return FeatureMatrix(std::move(ids), std::move(data));
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline double parse_csv_double(const std::string& tok, std::size_t row, std::size_t col) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw data_error("unparsable value '" + tok + "' at row " + std::to_string(row) +
                     ", column " + std::to_string(col));
  }
  if (!std::isfinite(v)) {
    throw data_error("non-finite value at row " + std::to_string(row) + ", column " +
                     std::to_string(col));
  }
  return v;
}

// Header "id,x0,...": ids come from the first column. Any other header
// means every column is numeric and ids are synthesized as "row-<index>".
inline FeatureMatrix parse_csv_features(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw data_error("malformed header: empty CSV file");
  const auto header = split_csv_line(line);
  const bool has_ids = !header.empty() && header.front() == "id";
  const std::size_t dims = header.size() - (has_ids ? 1 : 0);
  if (dims == 0) throw data_error("malformed header: no feature columns");

  std::vector<std::string> ids;
  std::vector<double> values;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto toks = split_csv_line(line);
    if (toks.size() != header.size()) {
      throw data_error("dimension mismatch at row " + std::to_string(row) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(toks.size()));
    }
    ids.push_back(has_ids ? toks.front() : "row-" + std::to_string(row));
    for (std::size_t c = 0; c < dims; ++c) {
      values.push_back(parse_csv_double(toks[c + (has_ids ? 1 : 0)], row, c));
    }
    ++row;
  }
  if (row == 0) throw data_error("CSV file has no data rows");
  RowMatrix data = Eigen::Map<RowMatrix>(values.data(), static_cast<Eigen::Index>(row),
                                         static_cast<Eigen::Index>(dims));
  return FeatureMatrix(std::move(ids), std::move(data));
}

}  // namespace detail

inline FeatureMatrix load_features(const std::filesystem::path& path, FeatureFormat format) {
  auto bytes = detail::read_file(path);
  if (format == FeatureFormat::binary) return detail::parse_binary_features(std::move(bytes));
  return detail::parse_csv_features(std::string(bytes.begin(), bytes.end()));
}

/// Serializes to the FEAT layout. Values are narrowed to float32, so a
/// binary round trip is exact only for float-representable matrices
/// (everything loaded from a FEAT file is).
inline std::vector<char> encode_features_binary(const FeatureMatrix& m) {
  detail::ByteWriter out;
  out.put_bytes(std::string_view(kFeatureMagic, 4));
  out.put_uint<std::uint32_t>(kFeatureVersion);
  out.put_uint<std::uint64_t>(m.rows());
  out.put_uint<std::uint64_t>(m.dims());
  for (const auto& id : m.ids()) {
    if (id.size() > std::numeric_limits<std::uint32_t>::max()) throw data_error("id too long");
    out.put_uint<std::uint32_t>(static_cast<std::uint32_t>(id.size()));
    out.put_bytes(id);
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.dims(); ++c) {
      const auto v = static_cast<float>(m.data()(static_cast<Eigen::Index>(r),
                                                 static_cast<Eigen::Index>(c)));
      if (!std::isfinite(v)) {
        throw data_error("value at row " + std::to_string(r) + " overflows float32");
      }
      out.put_f32(v);
    }
  }
  return out.bytes();
}

inline std::string encode_features_csv(const FeatureMatrix& m) {
  std::string text = "id";
  for (std::size_t c = 0; c < m.dims(); ++c) text += ",x" + std::to_string(c);
  text += '\n';
  char buf[32];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    text += m.ids()[r];
    for (std::size_t c = 0; c < m.dims(); ++c) {
      std::snprintf(buf, sizeof buf, ",%.17g",
                    m.data()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
      text += buf;
    }
    text += '\n';
  }
  return text;
}

inline void save_features(const FeatureMatrix& m, const std::filesystem::path& path,
                          FeatureFormat format) {
  if (format == FeatureFormat::binary) {
    const auto bytes = encode_features_binary(m);
    detail::write_file(path, bytes.data(), bytes.size());
  } else {
    detail::write_file(path, encode_features_csv(m));
  }
}

}  // namespace oodgate
