#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "oodgate/error.hpp"
#include "oodgate/gaussian_stats.hpp"

namespace oodgate {

inline constexpr std::size_t kDefaultBins = 64;
inline constexpr std::size_t kDefaultMaxIters = 100;
inline constexpr double kDefaultKMeansTol = 1e-9;

enum class ThresholdMethod { otsu, kmeans };

inline std::string_view to_string(ThresholdMethod m) {
  return m == ThresholdMethod::otsu ? "otsu" : "kmeans";
}

/// Equal-width histogram over [min, max] of a score set. Bin i covers
/// [edges[i], edges[i+1]); the last bin is closed on the right.
struct ScoreHistogram {
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  std::size_t bins() const { return counts.size(); }
  double center(std::size_t i) const { return 0.5 * (edges[i] + edges[i + 1]); }
};

struct OtsuDiagnostics {
  ScoreHistogram histogram;
  // Indexed by split k: bins 0..k form the lower class. B-1 entries.
  std::vector<double> between_class_variance;
  std::vector<double> within_class_variance;
  double total_variance = 0.0;
  std::size_t split = 0;  // k*; meaningless when degenerate
  bool degenerate = false;
};

struct KMeansDiagnostics {
  std::array<double, 2> centroids{};
  std::array<std::size_t, 2> sizes{};
  std::size_t iterations = 0;
  bool converged = false;
  bool degenerate = false;
};

struct ThresholdResult {
  double tau = 0.0;
  ThresholdMethod method = ThresholdMethod::otsu;
  std::variant<OtsuDiagnostics, KMeansDiagnostics> diagnostics;
};

inline ScoreHistogram build_histogram(std::span<const double> scores,
                                      std::size_t bins = kDefaultBins) {
  if (scores.empty()) throw data_error("cannot build a histogram of an empty score set");
  if (bins == 0) throw data_error("histogram needs at least one bin");
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  const double lo = *lo_it;
  const double hi = *hi_it;

  ScoreHistogram h;
  h.total = scores.size();
  if (lo == hi) {
    h.edges = {lo, hi};
    h.counts = {h.total};
    return h;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i < bins; ++i) h.edges[i] = lo + static_cast<double>(i) * width;
  h.edges[bins] = hi;
  h.counts.assign(bins, 0);
  for (double x : scores) {
    auto idx = static_cast<std::size_t>(
        std::min(std::floor((x - lo) / width), static_cast<double>(bins - 1)));
    // Snap to the computed edges so binning agrees with them exactly.
    while (idx > 0 && x < h.edges[idx]) --idx;
    while (idx + 1 < bins && x >= h.edges[idx + 1]) ++idx;
    ++h.counts[idx];
  }
  return h;
}

inline ScoreHistogram build_histogram(const DistanceSet& d, std::size_t bins = kDefaultBins) {
  return build_histogram(d.values(), bins);
}

namespace detail {

// Relative tie tolerance for argmax/argmin scans; ties go to the first index.
inline constexpr double kTieTolerance = 1e-12;

inline bool strictly_greater(double candidate, double best) {
  return candidate - best > kTieTolerance * std::abs(best);
}

}  // namespace detail

/// Otsu's method on bin-center moments.
///
/// Scans every split k (bins 0..k lower) and picks the one maximizing the
/// between-class variance ω₀ω₁(μ₀−μ₁)², ties toward the smallest k. τ is
/// the upper edge of bin k*. A histogram with a single non-empty bin has
/// no usable split: τ is then the top edge and everything is lower class.
inline ThresholdResult otsu_threshold(const ScoreHistogram& h) {
  if (h.total < 2) throw data_error("otsu: histogram needs at least 2 samples");
  const std::size_t bins = h.bins();
  const double n = static_cast<double>(h.total);

  OtsuDiagnostics diag;
  diag.histogram = h;

  // Moments about the global mean keep the cumulative sums well conditioned.
  double mean = 0.0;
  for (std::size_t i = 0; i < bins; ++i) mean += static_cast<double>(h.counts[i]) * h.center(i);
  mean /= n;
  double total_ss = 0.0;
  for (std::size_t i = 0; i < bins; ++i) {
    const double c = h.center(i) - mean;
    total_ss += static_cast<double>(h.counts[i]) * c * c;
  }
  diag.total_variance = total_ss / n;

  const std::size_t splits = bins > 0 ? bins - 1 : 0;
  diag.between_class_variance.resize(splits);
  diag.within_class_variance.resize(splits);
  double n0 = 0.0, s0 = 0.0, q0 = 0.0;
  double best = 0.0;
  bool found = false;
  for (std::size_t k = 0; k < splits; ++k) {
    const double c = h.center(k) - mean;
    const double cnt = static_cast<double>(h.counts[k]);
    n0 += cnt;
    s0 += cnt * c;
    q0 += cnt * c * c;
    const double n1 = n - n0;
    double between = 0.0;
    double within = diag.total_variance;
    if (n0 > 0.0 && n1 > 0.0) {
      const double mu0 = s0 / n0;
      const double mu1 = -s0 / n1;  // upper-class sum is -s0 about the global mean
      const double w0 = n0 / n;
      const double w1 = n1 / n;
      between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
      const double var0 = std::max(0.0, q0 / n0 - mu0 * mu0);
      const double var1 = std::max(0.0, (total_ss - q0) / n1 - mu1 * mu1);
      within = w0 * var0 + w1 * var1;
    }
    diag.between_class_variance[k] = between;
    diag.within_class_variance[k] = within;
    if (between > 0.0 && (!found || detail::strictly_greater(between, best))) {
      best = between;
      diag.split = k;
      found = true;
    }
  }

  ThresholdResult out;
  out.method = ThresholdMethod::otsu;
  if (!found) {
    diag.degenerate = true;
    diag.split = bins - 1;
    out.tau = h.edges.back();
  } else {
    out.tau = h.edges[diag.split + 1];
  }
  out.diagnostics = std::move(diag);
  return out;
}

/// Lloyd's algorithm with k = 2 in one dimension.
///
/// Centroids start at min and max. A score joins the lower cluster when it
/// is <= the centroid midpoint, so the induced partition is always {x <= τ}.
/// Stops when assignments repeat, the largest centroid move is below `tol`,
/// or after `max_iters` rounds. τ is the final centroid midpoint.
inline ThresholdResult kmeans_threshold(std::span<const double> scores,
                                        std::size_t max_iters = kDefaultMaxIters,
                                        double tol = kDefaultKMeansTol) {
  if (scores.empty()) throw data_error("kmeans: empty score set");
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());

  ThresholdResult out;
  out.method = ThresholdMethod::kmeans;
  KMeansDiagnostics diag;
  if (*lo_it == *hi_it) {
    diag.centroids = {*lo_it, *hi_it};
    diag.sizes = {scores.size(), 0};
    diag.converged = true;
    diag.degenerate = true;
    out.tau = *lo_it;
    out.diagnostics = diag;
    return out;
  }

  std::array<double, 2> c{*lo_it, *hi_it};
  std::vector<std::uint8_t> assign(scores.size(), 2);  // 2 = unassigned
  for (std::size_t it = 1; it <= std::max<std::size_t>(max_iters, 1); ++it) {
    diag.iterations = it;
    const double mid = 0.5 * (c[0] + c[1]);
    std::array<double, 2> sum{0.0, 0.0};
    std::array<std::size_t, 2> cnt{0, 0};
    bool changed = false;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const std::uint8_t a = scores[i] <= mid ? 0 : 1;
      changed = changed || a != assign[i];
      assign[i] = a;
      sum[a] += scores[i];
      ++cnt[a];
    }
    // min <= c0 < c1 <= max keeps both clusters populated.
    const std::array<double, 2> next{sum[0] / static_cast<double>(cnt[0]),
                                     sum[1] / static_cast<double>(cnt[1])};
    const double moved = std::max(std::abs(next[0] - c[0]), std::abs(next[1] - c[1]));
    c = next;
    diag.sizes = cnt;
    if (!changed || moved < tol) {
      diag.converged = true;
      break;
    }
  }
  diag.centroids = c;
  out.tau = 0.5 * (c[0] + c[1]);
  out.diagnostics = diag;
  return out;
}

inline ThresholdResult kmeans_threshold(const DistanceSet& d,
                                        std::size_t max_iters = kDefaultMaxIters,
                                        double tol = kDefaultKMeansTol) {
  return kmeans_threshold(d.values(), max_iters, tol);
}

struct BestSplit {
  std::size_t lower_size = 0;  // sorted[0 .. lower_size) is the lower cluster
  double tau = 0.0;            // midpoint of the boundary gap
  double objective = 0.0;      // within-cluster sum of squared deviations
};

/// Exhaustive 2-means oracle: evaluates the within-cluster sum of squares
/// of every contiguous split of the sorted scores with a fresh two-pass
/// computation each time. O(N²); meant for checking the iterative
/// thresholds, not for production use.
inline BestSplit oracle_best_split(std::span<const double> scores) {
  if (scores.size() < 2) throw data_error("oracle: needs at least 2 scores");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());

  const auto sse = [&](std::size_t first, std::size_t last) {
    double m = 0.0;
    for (std::size_t i = first; i < last; ++i) m += sorted[i];
    m /= static_cast<double>(last - first);
    double s = 0.0;
    for (std::size_t i = first; i < last; ++i) s += (sorted[i] - m) * (sorted[i] - m);
    return s;
  };

  BestSplit best;
  bool found = false;
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    // Splitting between equal values would not be a threshold partition.
    if (sorted[k - 1] == sorted[k]) continue;
    const double obj = sse(0, k) + sse(k, sorted.size());
    if (!found || best.objective - obj > detail::kTieTolerance * best.objective) {
      best = {k, 0.5 * (sorted[k - 1] + sorted[k]), obj};
      found = true;
    }
  }
  if (!found) {
    // All scores equal: a single cluster.
    best = {sorted.size(), sorted.front(), 0.0};
  }
  return best;
}

inline BestSplit oracle_best_split(const DistanceSet& d) { return oracle_best_split(d.values()); }

}  // namespace oodgate
