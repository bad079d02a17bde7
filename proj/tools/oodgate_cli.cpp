// oodgate: score unlabeled features against a labeled reference set and
// filter out-of-distribution rows.
//
// Exit codes: 0 success, 1 usage error, 2 data/validation error,
// 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "oodgate/oodgate.hpp"

namespace {

namespace fs = std::filesystem;
using namespace oodgate;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

const std::map<std::string, FeatureFormat> kFormats{{"binary", FeatureFormat::binary},
                                                    {"csv", FeatureFormat::csv}};
const std::map<std::string, ThresholdMethod> kMethods{{"otsu", ThresholdMethod::otsu},
                                                      {"kmeans", ThresholdMethod::kmeans}};
const std::map<std::string, MomentConvention> kMoments{
    {"population", MomentConvention::population}, {"sample", MomentConvention::sample}};

void write_text(const fs::path& path, const std::string& text) {
  oodgate::detail::write_file(path, text);
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text(out_path, text);
  }
}

struct FitArgs {
  std::string labeled, out;
  double shrinkage = kDefaultShrinkage;
  FeatureFormat format = FeatureFormat::binary;
};

struct ScoreArgs {
  std::string stats, unlabeled, out;
  FeatureFormat format = FeatureFormat::binary;
};

struct ThresholdArgs {
  std::string scores, out;
  FilterConfig config;
};

struct FilterArgs {
  std::string labeled, unlabeled, out_prefix;
  FeatureFormat format = FeatureFormat::binary;
  bool invert_gate = false;
  bool no_gate = false;
  FilterConfig config;
};

struct SynthArgs {
  MixtureSpec spec;
  std::string out_prefix;
  FeatureFormat format = FeatureFormat::binary;
};

struct EvalArgs {
  std::string manifest, truth, out;
};

void add_format_option(CLI::App* cmd, FeatureFormat& f) {
  cmd->add_option_function<std::string>(
         "--format", [&f](const std::string& s) { f = kFormats.at(s); },
         "Feature file format: binary (default) or csv")
      ->check(CLI::IsMember(kFormats));
}

void add_threshold_options(CLI::App* cmd, FilterConfig& c) {
  cmd->add_option_function<std::string>(
         "--method", [&c](const std::string& s) { c.method = kMethods.at(s); },
         "Threshold method: otsu (default) or kmeans")
      ->check(CLI::IsMember(kMethods));
  cmd->add_option("--bins", c.bins, "Histogram bins for Otsu")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-iters", c.max_iters, "k-means iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--tol", c.tol, "k-means centroid movement tolerance")->capture_default_str();
}

int run_fit(const FitArgs& a) {
  const auto labeled = load_features(a.labeled, a.format);
  const auto stats = fit_gaussian(labeled, a.shrinkage);
  save_stats(stats, a.out);
  std::cout << "rows=" << labeled.rows() << " dims=" << stats.dims()
            << " lambda=" << stats.shrinkage << '\n';
  return 0;
}

int run_score(const ScoreArgs& a) {
  const auto stats = load_stats(a.stats);
  const auto unlabeled = load_features(a.unlabeled, a.format);
  emit(a.out, encode_scores(score_dataset(stats, unlabeled)));
  return 0;
}

int run_threshold(const ThresholdArgs& a) {
  const auto scores = load_scores(a.scores);
  if (scores.empty()) throw data_error("score file has no records");
  emit(a.out, to_json(select_threshold(scores, a.config)).dump() + '\n');
  return 0;
}

int run_filter_cmd(FilterArgs a) {
  if (a.invert_gate) a.config.gate = GateMode::inverted;
  if (a.no_gate) a.config.gate = GateMode::bypass;
  const auto labeled = load_features(a.labeled, a.format);
  const auto unlabeled = load_features(a.unlabeled, a.format);
  const auto report = run_filter(labeled, unlabeled, a.config);
  write_text(a.out_prefix + ".manifest.jsonl", encode_manifest(report));
  write_text(a.out_prefix + ".keep.txt", id_list(report, true));
  write_text(a.out_prefix + ".discard.txt", id_list(report, false));
  std::cout << "tau=" << report.threshold.tau << " decision="
            << (report.gate.filter ? "filter" : "keep_all") << " kept=" << report.kept_count
            << " discarded=" << report.discarded_count << '\n';
  return 0;
}

int run_synth(const SynthArgs& a) {
  const auto data = generate(a.spec);
  const std::string ext = a.format == FeatureFormat::binary ? ".feat" : ".csv";
  save_features(data.labeled, a.out_prefix + ".labeled" + ext, a.format);
  save_features(data.unlabeled, a.out_prefix + ".unlabeled" + ext, a.format);
  write_text(a.out_prefix + ".truth.json", encode_truth(data.truth));
  std::cout << "labeled=" << data.labeled.rows() << " unlabeled=" << data.unlabeled.rows()
            << " ood=" << a.spec.ood_count() << '\n';
  return 0;
}

int run_eval(const EvalArgs& a) {
  const auto manifest = load_manifest(a.manifest);
  const auto truth = load_truth(a.truth);
  emit(a.out, to_json(evaluate(manifest.verdicts, truth)).dump() + '\n');
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mahalanobis scoring and automatic-threshold OOD filtering"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the labeled Gaussian model to a GSTA file");
  fit_cmd->add_option("--labeled", fit.labeled, "Labeled feature file")->required();
  fit_cmd->add_option("--out", fit.out, "Output GSTA path")->required();
  fit_cmd->add_option("--shrinkage", fit.shrinkage, "Shrinkage factor epsilon")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  add_format_option(fit_cmd, fit.format);

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Score unlabeled features against a GSTA model");
  score_cmd->add_option("--stats", score.stats, "GSTA model file")->required();
  score_cmd->add_option("--unlabeled", score.unlabeled, "Unlabeled feature file")->required();
  score_cmd->add_option("--out", score.out, "Output JSONL (default stdout)");
  add_format_option(score_cmd, score.format);

  ThresholdArgs thr;
  auto* thr_cmd = app.add_subcommand("threshold", "Pick a threshold for a score JSONL file");
  thr_cmd->add_option("--scores", thr.scores, "Score JSONL from `score`")->required();
  thr_cmd->add_option("--out", thr.out, "Output JSON (default stdout)");
  add_threshold_options(thr_cmd, thr.config);

  FilterArgs flt;
  auto* flt_cmd = app.add_subcommand("filter", "Run the full filter and write a manifest");
  flt_cmd->add_option("--labeled", flt.labeled, "Labeled feature file")->required();
  flt_cmd->add_option("--unlabeled", flt.unlabeled, "Unlabeled feature file")->required();
  flt_cmd->add_option("--out-prefix", flt.out_prefix, "Prefix for manifest and id lists")
      ->required();
  add_format_option(flt_cmd, flt.format);
  add_threshold_options(flt_cmd, flt.config);
  flt_cmd->add_option("--alpha", flt.config.alpha, "Gate factor on CV_tot")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  flt_cmd->add_option("--shrinkage", flt.config.shrinkage, "Shrinkage factor epsilon")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  flt_cmd
      ->add_option_function<std::string>(
          "--cv-moments", [&flt](const std::string& s) { flt.config.moments = kMoments.at(s); },
          "CV divisor: population (default) or sample")
      ->check(CLI::IsMember(kMoments));
  flt_cmd->add_option("--seed", flt.config.seed, "Recorded in the manifest")
      ->capture_default_str();
  auto* invert = flt_cmd->add_flag("--invert-gate", flt.invert_gate,
                                   "Filter when the CV inequality is false");
  flt_cmd->add_flag("--no-gate", flt.no_gate, "Threshold-only filtering")->excludes(invert);

  SynthArgs syn;
  auto* syn_cmd = app.add_subcommand("synth", "Generate a synthetic mismatch dataset");
  syn_cmd->add_option("--dims", syn.spec.dims, "Feature dimensions")->check(CLI::PositiveNumber)->capture_default_str();
  syn_cmd->add_option("--n-labeled", syn.spec.n_labeled, "Labeled rows, all in-distribution")->capture_default_str();
  syn_cmd->add_option("--n-unlabeled", syn.spec.n_unlabeled, "Unlabeled rows")->capture_default_str();
  syn_cmd->add_option("--contamination", syn.spec.contamination, "Fraction of unlabeled rows that are OOD")->capture_default_str();
  syn_cmd->add_option("--separation", syn.spec.separation, "OOD mean shift per dimension")->capture_default_str();
  syn_cmd->add_option("--iod-sd", syn.spec.iod_sd, "In-distribution sd")->capture_default_str();
  syn_cmd->add_option("--ood-sd", syn.spec.ood_sd, "OOD sd")->capture_default_str();
  syn_cmd->add_option("--seed", syn.spec.seed, "RNG seed")->capture_default_str();
  syn_cmd->add_option("--out-prefix", syn.out_prefix, "Prefix for output files")->required();
  add_format_option(syn_cmd, syn.format);

  EvalArgs ev;
  auto* ev_cmd = app.add_subcommand("eval", "Score a manifest against a truth file");
  ev_cmd->add_option("--manifest", ev.manifest, "Manifest JSONL from `filter`")->required();
  ev_cmd->add_option("--truth", ev.truth, "Truth JSON from `synth`")->required();
  ev_cmd->add_option("--out", ev.out, "Output JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const char* stage = app.get_subcommands().front()->get_name().c_str();
  try {
    if (*fit_cmd) return run_fit(fit);
    if (*score_cmd) return run_score(score);
    if (*thr_cmd) return run_threshold(thr);
    if (*flt_cmd) return run_filter_cmd(flt);
    if (*syn_cmd) return run_synth(syn);
    if (*ev_cmd) return run_eval(ev);
  } catch (const Error& e) {
    std::cerr << stage << ": " << e.what() << '\n';
    return e.kind() == ErrorKind::numerical ? kExitNumerical : kExitData;
  } catch (const std::exception& e) {
    std::cerr << stage << ": " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
