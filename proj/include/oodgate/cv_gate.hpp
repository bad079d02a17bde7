#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "oodgate/auto_threshold.hpp"
#include "oodgate/error.hpp"
#include "oodgate/feature_store.hpp"
#include "oodgate/gaussian_stats.hpp"

namespace oodgate {

inline constexpr double kDefaultAlpha = 1.12;

// Divisor used for the gate's standard deviations: N or N-1.
enum class MomentConvention { population, sample };

// as_written: filter iff α·CV_tot < CV_lt + CV_gt.
// inverted:   filter iff that inequality is false.
// bypass:     always filter at τ (threshold-only); the gate is still recorded.
enum class GateMode { as_written, inverted, bypass };

inline std::string_view to_string(MomentConvention m) {
  return m == MomentConvention::population ? "population" : "sample";
}

inline std::string_view to_string(GateMode m) {
  switch (m) {
    case GateMode::as_written: return "as_written";
    case GateMode::inverted: return "inverted";
    case GateMode::bypass: return "bypass";
  }
  return "as_written";
}

struct Partition {
  DistanceSet lower;  // d <= τ
  DistanceSet upper;  // d > τ
};

inline Partition partition(const DistanceSet& d, double tau) {
  std::vector<std::string> lo_ids, hi_ids;
  std::vector<double> lo, hi;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.distances()[i] <= tau) {
      lo_ids.push_back(d.ids()[i]);
      lo.push_back(d.distances()[i]);
    } else {
      hi_ids.push_back(d.ids()[i]);
      hi.push_back(d.distances()[i]);
    }
  }
  return {DistanceSet(std::move(lo_ids), std::move(lo)),
          DistanceSet(std::move(hi_ids), std::move(hi))};
}

/// σ/μ of the set. Empty when undefined: empty set, zero mean, or a single
/// value under the sample convention.
inline std::optional<double> coefficient_of_variation(
    const DistanceSet& d, MomentConvention moments = MomentConvention::population) {
  if (d.empty() || d.mean() <= 0.0) return std::nullopt;
  double sd = d.stddev();
  if (moments == MomentConvention::sample) {
    if (d.size() < 2) return std::nullopt;
    const double n = static_cast<double>(d.size());
    sd *= std::sqrt(n / (n - 1.0));
  }
  return sd / d.mean();
}

struct GateStats {
  std::optional<double> cv_tot;
  std::optional<double> cv_lt;
  std::optional<double> cv_gt;
  double alpha = kDefaultAlpha;
  std::optional<double> lhs;  // α·CV_tot
  std::optional<double> rhs;  // CV_lt + CV_gt
  bool bimodal = false;       // the literal inequality lhs < rhs
  std::optional<std::string> degenerate;
  GateMode mode = GateMode::as_written;
  bool filter = false;  // final decision: true keeps only d <= τ
};

inline GateStats gate_decision(const DistanceSet& d, double tau, double alpha, GateMode mode,
                               MomentConvention moments = MomentConvention::population) {
  if (d.empty()) throw data_error("gate: empty distance set");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw data_error("gate: alpha must be > 0");

  GateStats g;
  g.alpha = alpha;
  g.mode = mode;
  const auto parts = partition(d, tau);
  g.cv_tot = coefficient_of_variation(d, moments);
  g.cv_lt = coefficient_of_variation(parts.lower, moments);
  g.cv_gt = coefficient_of_variation(parts.upper, moments);
  if (g.cv_tot) g.lhs = alpha * *g.cv_tot;
  if (g.cv_lt && g.cv_gt) g.rhs = *g.cv_lt + *g.cv_gt;

  if (parts.lower.empty()) {
    g.degenerate = "lower partition empty";
  } else if (parts.upper.empty()) {
    g.degenerate = "upper partition empty";
  } else if (!g.cv_tot || !g.cv_lt || !g.cv_gt) {
    g.degenerate = "undefined coefficient of variation";
  }

  if (g.degenerate) {
    g.bimodal = false;
    // Undefined statistics keep everything unless the caller asked for
    // threshold-only filtering.
    g.filter = mode == GateMode::bypass;
    return g;
  }
  g.bimodal = *g.lhs < *g.rhs;
  switch (mode) {
    case GateMode::as_written: g.filter = g.bimodal; break;
    case GateMode::inverted: g.filter = !g.bimodal; break;
    case GateMode::bypass: g.filter = true; break;
  }
  return g;
}

inline GateStats gate_decision(const DistanceSet& d, double tau, double alpha, bool invert) {
  return gate_decision(d, tau, alpha, invert ? GateMode::inverted : GateMode::as_written);
}

struct FilterConfig {
  ThresholdMethod method = ThresholdMethod::otsu;
  std::size_t bins = kDefaultBins;
  double alpha = kDefaultAlpha;
  double shrinkage = kDefaultShrinkage;
  GateMode gate = GateMode::as_written;
  MomentConvention moments = MomentConvention::population;
  std::size_t max_iters = kDefaultMaxIters;
  double tol = kDefaultKMeansTol;
  std::uint64_t seed = 0;  // echoed for audit; the pipeline itself draws no randomness
};

struct Verdict {
  std::string id;
  double distance = 0.0;
  bool kept = true;
};

struct FilterReport {
  ThresholdResult threshold;
  GateStats gate;
  std::vector<Verdict> verdicts;
  std::size_t kept_count = 0;
  std::size_t discarded_count = 0;
  FilterConfig parameters;
  std::optional<double> shrinkage_applied;  // λ, when the report came from features
};

inline ThresholdResult select_threshold(const DistanceSet& d, const FilterConfig& config) {
  if (config.method == ThresholdMethod::otsu) {
    return otsu_threshold(build_histogram(d, config.bins));
  }
  return kmeans_threshold(d, config.max_iters, config.tol);
}

/// Threshold, gate and verdicts for an already-scored set. Each stage's
/// errors are re-raised tagged with the stage name.
inline FilterReport filter_scores(const DistanceSet& d, const FilterConfig& config) {
  FilterReport report;
  report.parameters = config;
  if (d.size() < 2) throw data_error("input: need at least 2 unlabeled scores");
  try {
    report.threshold = select_threshold(d, config);
  } catch (const Error& e) {
    rethrow_tagged("threshold", e);
  }
  try {
    report.gate = gate_decision(d, report.threshold.tau, config.alpha, config.gate, config.moments);
  } catch (const Error& e) {
    rethrow_tagged("gate", e);
  }
  report.verdicts.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double di = d.distances()[i];
    const bool kept = !report.gate.filter || di <= report.threshold.tau;
    report.verdicts.push_back({d.ids()[i], di, kept});
    ++(kept ? report.kept_count : report.discarded_count);
  }
  return report;
}

/// Full pipeline: fit on the labeled set, score the unlabeled set, pick τ,
/// gate, and emit one verdict per unlabeled row in input order.
inline FilterReport run_filter(const FeatureMatrix& labeled, const FeatureMatrix& unlabeled,
                               const FilterConfig& config) {
  if (labeled.dims() != unlabeled.dims()) {
    throw data_error("input: labeled dims " + std::to_string(labeled.dims()) +
                     " != unlabeled dims " + std::to_string(unlabeled.dims()));
  }
  if (unlabeled.rows() < 2) throw data_error("input: need at least 2 unlabeled rows");
  GaussianStats stats;
  try {
    stats = fit_gaussian(labeled, config.shrinkage);
  } catch (const Error& e) {
    rethrow_tagged("fit", e);
  }
  DistanceSet scores;
  try {
    scores = score_dataset(stats, unlabeled);
  } catch (const Error& e) {
    rethrow_tagged("score", e);
  }
  auto report = filter_scores(scores, config);
  report.shrinkage_applied = stats.shrinkage;
  return report;
}

}  // namespace oodgate
