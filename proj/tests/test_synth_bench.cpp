#include <gtest/gtest.h>

#include "oodgate/json_io.hpp"
#include "oodgate/synth_bench.hpp"

namespace oodgate {
namespace {

std::size_t count_ood(const TruthMap& t) {
  std::size_t n = 0;
  for (const auto& [id, ood] : t) n += ood ? 1 : 0;
  return n;
}

TEST(Synth, TwentyPercentOfNinety) {
  MixtureSpec spec;
  spec.contamination = 0.2;
  const auto d = generate(spec);
  EXPECT_EQ(d.unlabeled.rows(), 90u);
  EXPECT_EQ(d.labeled.rows(), 200u);
  EXPECT_EQ(d.labeled.dims(), 16u);
  EXPECT_EQ(count_ood(d.truth), 18u);
  EXPECT_EQ(d.truth.size(), 90u);
}

TEST(Synth, CleanMixtureHasNoOod) {
  MixtureSpec spec;
  spec.contamination = 0.0;
  EXPECT_EQ(count_ood(generate(spec).truth), 0u);
}

TEST(Synth, SeedDeterminesDataset) {
  MixtureSpec spec;
  spec.seed = 1234;
  const auto a = generate(spec);
  const auto b = generate(spec);
  EXPECT_EQ(a.labeled, b.labeled);
  EXPECT_EQ(a.unlabeled, b.unlabeled);
  EXPECT_EQ(a.truth, b.truth);
  spec.seed = 1235;
  EXPECT_FALSE(generate(spec).unlabeled == a.unlabeled);
}

TEST(Synth, OodRowsAreShifted) {
  MixtureSpec spec;
  spec.contamination = 0.5;
  const auto d = generate(spec);
  for (std::size_t r = 0; r < d.unlabeled.rows(); ++r) {
    const double m = d.unlabeled.row(r).mean();
    if (d.truth.at(d.unlabeled.ids()[r])) {
      EXPECT_GT(m, 6.0);
    } else {
      EXPECT_LT(m, 2.0);
    }
  }
}

TEST(Synth, RejectsBadMixtures) {
  MixtureSpec spec;
  spec.contamination = 1.5;
  EXPECT_THROW(generate(spec), Error);
  spec.contamination = -0.1;
  EXPECT_THROW(generate(spec), Error);
  spec = MixtureSpec{};
  spec.n_unlabeled = 0;
  EXPECT_THROW(generate(spec), Error);
  spec = MixtureSpec{};
  spec.iod_sd = 0.0;
  EXPECT_THROW(generate(spec), Error);
}

TEST(Evaluate, PerfectFilter) {
  const TruthMap truth{{"a", true}, {"b", false}, {"c", false}};
  const std::vector<Verdict> v{{"a", 9, false}, {"b", 1, true}, {"c", 2, true}};
  const auto q = evaluate(v, truth);
  EXPECT_EQ(*q.ood_recall, 1.0);
  EXPECT_EQ(*q.ood_precision, 1.0);
  EXPECT_EQ(*q.kept_contamination, 0.0);
  EXPECT_EQ(q.kept_count, 2u);
}

TEST(Evaluate, KeepAllAtTwentyPercent) {
  MixtureSpec spec;
  const auto d = generate(spec);
  std::vector<Verdict> v;
  for (const auto& id : d.unlabeled.ids()) v.push_back({id, 1.0, true});
  const auto q = evaluate(v, d.truth);
  EXPECT_EQ(*q.ood_recall, 0.0);
  EXPECT_FALSE(q.ood_precision.has_value());
  EXPECT_DOUBLE_EQ(*q.kept_contamination, 0.2);
  EXPECT_EQ(q.true_positive + q.false_positive + q.true_negative + q.false_negative, 90u);
}

TEST(Evaluate, UnknownIdIsAnError) {
  const TruthMap truth{{"a", true}};
  const std::vector<Verdict> v{{"zz", 1, true}};
  EXPECT_THROW(evaluate(v, truth), Error);
}

TEST(Evaluate, RecallAtFortyPercentWithInvertedGate) {
  MixtureSpec spec;
  spec.contamination = 0.4;
  spec.seed = 40;
  const auto d = generate(spec);
  FilterConfig cfg;
  cfg.gate = GateMode::inverted;
  const auto q = evaluate(run_filter(d.labeled, d.unlabeled, cfg), d.truth);
  EXPECT_GE(*q.ood_recall, 0.95);
}

TEST(TruthFile, RoundTrips) {
  const TruthMap truth{{"u-00000", false}, {"u-00001", true}};
  const auto dir = std::filesystem::temp_directory_path() / "oodgate_truth";
  std::filesystem::create_directories(dir);
  detail::write_file(dir / "t.json", encode_truth(truth));
  EXPECT_EQ(load_truth(dir / "t.json"), truth);
}

}  // namespace
}  // namespace oodgate
