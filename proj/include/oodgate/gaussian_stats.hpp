#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "oodgate/detail/byte_io.hpp"
#include "oodgate/error.hpp"
#include "oodgate/feature_store.hpp"

namespace oodgate {

inline constexpr double kDefaultShrinkage = 1e-3;

/// Gaussian model of the labeled feature set: sample mean, unbiased
/// covariance, and the inverse of the shrunk covariance (covariance + λI).
struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd inverse;
  double shrinkage = 0.0;  // λ actually added to the diagonal

  std::size_t dims() const { return static_cast<std::size_t>(mean.size()); }
  Eigen::MatrixXd regularized_covariance() const {
    return covariance + shrinkage * Eigen::MatrixXd::Identity(covariance.rows(), covariance.cols());
  }
};

/// Per-sample squared Mahalanobis scores with population moments.
class DistanceSet {
 public:
  DistanceSet() = default;
  DistanceSet(std::vector<std::string> ids, std::vector<double> distances)
      : ids_(std::move(ids)), distances_(std::move(distances)) {
    if (ids_.size() != distances_.size()) {
      throw data_error("distance set: id count does not match distance count");
    }
    for (std::size_t i = 0; i < distances_.size(); ++i) {
      if (!std::isfinite(distances_[i]) || distances_[i] < 0.0) {
        throw numerical_error("distance set: invalid distance at row " + std::to_string(i));
      }
    }
    if (distances_.empty()) return;
    const double n = static_cast<double>(distances_.size());
    double sum = 0.0;
    for (double d : distances_) sum += d;
    mean_ = sum / n;
    double ss = 0.0;
    for (double d : distances_) ss += (d - mean_) * (d - mean_);
    stddev_ = std::sqrt(ss / n);
  }

  // Convenience for tests and tools that have no natural ids.
  static DistanceSet from_values(std::vector<double> distances) {
    std::vector<std::string> ids;
    ids.reserve(distances.size());
    for (std::size_t i = 0; i < distances.size(); ++i) ids.push_back("row-" + std::to_string(i));
    return DistanceSet(std::move(ids), std::move(distances));
  }

  std::size_t size() const { return distances_.size(); }
  bool empty() const { return distances_.empty(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<double>& distances() const { return distances_; }
  std::span<const double> values() const { return distances_; }
  double mean() const { return mean_; }
  double stddev() const { return stddev_; }

 private:
  std::vector<std::string> ids_;
  std::vector<double> distances_;
  double mean_ = 0.0;
  double stddev_ = 0.0;
};

// λ = ε·trace(Σ)/D, never below 1e-12·max(1, trace/D) so the shrunk
// covariance stays positive definite even for ε = 0 or constant data.
inline double applied_shrinkage(double epsilon, double trace, std::size_t dims) {
  const double avg = trace / static_cast<double>(dims);
  return std::max(epsilon * avg, 1e-12 * std::max(1.0, avg));
}

inline GaussianStats fit_gaussian(const FeatureMatrix& labeled,
                                  double shrinkage_factor = kDefaultShrinkage) {
  if (labeled.rows() < 2) {
    throw data_error("insufficient data: fitting needs at least 2 labeled rows, got " +
                     std::to_string(labeled.rows()));
  }
  if (!std::isfinite(shrinkage_factor) || shrinkage_factor < 0.0) {
    throw data_error("shrinkage factor must be finite and >= 0");
  }
  const auto n = static_cast<double>(labeled.rows());
  const auto d = static_cast<Eigen::Index>(labeled.dims());

  GaussianStats out;
  out.mean = labeled.data().colwise().mean().transpose();
  const Eigen::MatrixXd centered = labeled.data().rowwise() - out.mean.transpose();
  Eigen::MatrixXd cov = (centered.transpose() * centered) / (n - 1.0);
  out.covariance = 0.5 * (cov + cov.transpose());
  out.shrinkage = applied_shrinkage(shrinkage_factor, out.covariance.trace(), labeled.dims());

  Eigen::LLT<Eigen::MatrixXd> llt(out.regularized_covariance());
  if (llt.info() != Eigen::Success) {
    throw numerical_error("regularized covariance is not positive definite (lambda=" +
                          std::to_string(out.shrinkage) + ")");
  }
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(d, d));
  out.inverse = 0.5 * (inv + inv.transpose());
  if (!out.inverse.allFinite()) throw numerical_error("covariance inverse is not finite");
  return out;
}

/// (mean - h)ᵀ Σ⁻¹ (mean - h). Squared form, no square root.
template <typename Derived>
double mahalanobis(const GaussianStats& stats, const Eigen::MatrixBase<Derived>& h) {
  if (static_cast<std::size_t>(h.size()) != stats.dims()) {
    throw data_error("dimension mismatch: vector has " + std::to_string(h.size()) +
                     " entries, model has " + std::to_string(stats.dims()));
  }
  const Eigen::VectorXd diff = stats.mean - h.derived().reshaped();
  return std::max(0.0, diff.dot(stats.inverse * diff));
}

inline double mahalanobis(const GaussianStats& stats, std::span<const double> h) {
  return mahalanobis(stats, Eigen::Map<const Eigen::VectorXd>(h.data(),
                                                              static_cast<Eigen::Index>(h.size())));
}

inline DistanceSet score_dataset(const GaussianStats& stats, const FeatureMatrix& unlabeled) {
  if (unlabeled.dims() != stats.dims()) {
    throw data_error("dimension mismatch: features have " + std::to_string(unlabeled.dims()) +
                     " dims, model has " + std::to_string(stats.dims()));
  }
  std::vector<double> distances(unlabeled.rows());
  for (std::size_t i = 0; i < unlabeled.rows(); ++i) {
    distances[i] = mahalanobis(stats, unlabeled.row(i));
  }
  return DistanceSet(unlabeled.ids(), std::move(distances));
}

// GSTA file: "GSTA", u32 version, u64 D, then mean, covariance,
// inverse (row-major) and λ as little-endian float64.
inline constexpr char kStatsMagic[] = "GSTA";
inline constexpr std::uint32_t kStatsVersion = 1;

inline std::vector<char> encode_stats(const GaussianStats& s) {
  detail::ByteWriter out;
  out.put_bytes(std::string_view(kStatsMagic, 4));
  out.put_uint<std::uint32_t>(kStatsVersion);
  out.put_uint<std::uint64_t>(s.dims());
  const auto d = static_cast<Eigen::Index>(s.dims());
  for (Eigen::Index i = 0; i < d; ++i) out.put_f64(s.mean(i));
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) out.put_f64(s.covariance(i, j));
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) out.put_f64(s.inverse(i, j));
  out.put_f64(s.shrinkage);
  return out.bytes();
}

inline GaussianStats decode_stats(std::vector<char> bytes) {
  detail::ByteReader in(std::move(bytes));
  if (in.take_bytes(4, "magic") != std::string_view(kStatsMagic, 4)) {
    throw data_error("malformed header: bad magic (expected GSTA)");
  }
  if (in.take_uint<std::uint32_t>("version") != kStatsVersion) {
    throw data_error("malformed header: unsupported GSTA version");
  }
  const auto dims = in.take_uint<std::uint64_t>("dimension count");
  if (dims == 0 || dims > in.remaining() / 8) throw data_error("malformed header: bad dims");
  const auto d = static_cast<Eigen::Index>(dims);
  GaussianStats s;
  s.mean.resize(d);
  s.covariance.resize(d, d);
  s.inverse.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i) s.mean(i) = in.take_f64("mean");
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) s.covariance(i, j) = in.take_f64("covariance");
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) s.inverse(i, j) = in.take_f64("inverse");
  s.shrinkage = in.take_f64("shrinkage");
  if (in.remaining() != 0) throw data_error("trailing bytes after GSTA payload");
  return s;
}

inline void save_stats(const GaussianStats& s, const std::filesystem::path& path) {
  const auto bytes = encode_stats(s);
  detail::write_file(path, bytes.data(), bytes.size());
}

inline GaussianStats load_stats(const std::filesystem::path& path) {
  return decode_stats(detail::read_file(path));
}

}  // namespace oodgate
