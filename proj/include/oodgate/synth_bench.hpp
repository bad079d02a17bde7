#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "oodgate/cv_gate.hpp"
#include "oodgate/error.hpp"
#include "oodgate/feature_store.hpp"

namespace oodgate {

/// Two isotropic Gaussian clouds: in-distribution at the origin and an
/// out-of-distribution cloud shifted by `separation` in every dimension.
struct MixtureSpec {
  std::size_t dims = 16;
  std::size_t n_labeled = 200;
  std::size_t n_unlabeled = 90;
  double contamination = 0.2;
  double separation = 8.0;
  double iod_sd = 1.0;
  double ood_sd = 1.0;
  std::uint64_t seed = 0;

  std::size_t ood_count() const {
    return static_cast<std::size_t>(std::lround(contamination * static_cast<double>(n_unlabeled)));
  }

  void validate() const {
    if (!(contamination >= 0.0 && contamination <= 1.0)) {
      throw data_error("contamination must lie in [0, 1]");
    }
    if (dims == 0 || n_labeled == 0 || n_unlabeled == 0) {
      throw data_error("dims, n_labeled and n_unlabeled must be positive");
    }
    if (!(iod_sd > 0.0) || !(ood_sd > 0.0) || !std::isfinite(iod_sd) || !std::isfinite(ood_sd)) {
      throw data_error("standard deviations must be positive and finite");
    }
    if (!std::isfinite(separation)) throw data_error("separation must be finite");
  }
};

// id -> is out-of-distribution
using TruthMap = std::map<std::string, bool>;

struct SyntheticDataset {
  FeatureMatrix labeled;
  FeatureMatrix unlabeled;
  TruthMap truth;
};

namespace detail {

inline std::string padded_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%05zu", prefix, i);
  return buf;
}

}  // namespace detail

/// Draws with std::mt19937_64 seeded by spec.seed. Values are rounded to
/// float32 so the matrices survive a FEAT round trip unchanged. Unlabeled
/// rows are shuffled; ids are positional and carry no label information.
inline SyntheticDataset generate(const MixtureSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(spec.dims);

  const auto draw_row = [&](auto& row, double shift, double sd) {
    for (Eigen::Index c = 0; c < d; ++c) {
      row(c) = static_cast<double>(static_cast<float>(shift + sd * unit(rng)));
    }
  };

  RowMatrix lab(static_cast<Eigen::Index>(spec.n_labeled), d);
  std::vector<std::string> lab_ids;
  for (std::size_t r = 0; r < spec.n_labeled; ++r) {
    auto row = lab.row(static_cast<Eigen::Index>(r));
    draw_row(row, 0.0, spec.iod_sd);
    lab_ids.push_back(detail::padded_id("l", r));
  }

  const std::size_t n_ood = spec.ood_count();
  std::vector<bool> is_ood(spec.n_unlabeled, false);
  std::fill(is_ood.end() - static_cast<std::ptrdiff_t>(n_ood), is_ood.end(), true);
  std::shuffle(is_ood.begin(), is_ood.end(), rng);

  RowMatrix unl(static_cast<Eigen::Index>(spec.n_unlabeled), d);
  std::vector<std::string> unl_ids;
  TruthMap truth;
  for (std::size_t r = 0; r < spec.n_unlabeled; ++r) {
    auto row = unl.row(static_cast<Eigen::Index>(r));
    if (is_ood[r]) {
      draw_row(row, spec.separation, spec.ood_sd);
    } else {
      draw_row(row, 0.0, spec.iod_sd);
    }
    unl_ids.push_back(detail::padded_id("u", r));
    truth.emplace(unl_ids.back(), is_ood[r]);
  }
  return {FeatureMatrix(std::move(lab_ids), std::move(lab)),
          FeatureMatrix(std::move(unl_ids), std::move(unl)), std::move(truth)};
}

/// Discard-vs-OOD confusion counts. A fraction whose denominator is zero
/// is left empty rather than reported as 0.
struct FilterQuality {
  std::size_t true_positive = 0;   // OOD, discarded
  std::size_t false_positive = 0;  // IOD, discarded
  std::size_t false_negative = 0;  // OOD, kept
  std::size_t true_negative = 0;   // IOD, kept
  std::optional<double> ood_recall;
  std::optional<double> ood_precision;
  std::optional<double> kept_contamination;
  std::size_t kept_count = 0;
};

inline FilterQuality evaluate(std::span<const Verdict> verdicts, const TruthMap& truth) {
  FilterQuality q;
  for (const auto& v : verdicts) {
    const auto it = truth.find(v.id);
    if (it == truth.end()) throw data_error("id '" + v.id + "' missing from truth map");
    const bool ood = it->second;
    if (v.kept) {
      ++(ood ? q.false_negative : q.true_negative);
    } else {
      ++(ood ? q.true_positive : q.false_positive);
    }
  }
  const auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  q.kept_count = q.false_negative + q.true_negative;
  q.ood_recall = ratio(q.true_positive, q.true_positive + q.false_negative);
  q.ood_precision = ratio(q.true_positive, q.true_positive + q.false_positive);
  q.kept_contamination = ratio(q.false_negative, q.kept_count);
  return q;
}

inline FilterQuality evaluate(const FilterReport& report, const TruthMap& truth) {
  return evaluate(std::span<const Verdict>(report.verdicts), truth);
}

}  // namespace oodgate
