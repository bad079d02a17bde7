#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "oodgate/feature_store.hpp"

namespace oodgate::testing {

// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("oodgate_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

inline FeatureMatrix random_matrix(std::size_t rows, std::size_t dims, std::uint64_t seed,
                                   double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dims));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = static_cast<float>(g(rng));
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < rows; ++i) ids.push_back("s" + std::to_string(i));
  return FeatureMatrix(std::move(ids), std::move(m));
}

}  // namespace oodgate::testing
