#pragma once

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oodgate/auto_threshold.hpp"
#include "oodgate/cv_gate.hpp"
#include "oodgate/detail/byte_io.hpp"
#include "oodgate/error.hpp"
#include "oodgate/synth_bench.hpp"

// JSON and JSON Lines encodings for reports, score files, truth maps and
// quality summaries. Field order is fixed so identical inputs give
// byte-identical output.
namespace oodgate {

using Json = nlohmann::ordered_json;

namespace detail {

template <typename T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

inline std::vector<std::string> split_lines(const std::vector<char>& bytes) {
  std::vector<std::string> lines;
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

inline Json parse_json_line(const std::string& line, std::size_t lineno) {
  try {
    return Json::parse(line);
  } catch (const Json::exception& e) {
    throw data_error("malformed JSON on line " + std::to_string(lineno + 1) + ": " + e.what());
  }
}

}  // namespace detail

inline Json to_json(const ScoreHistogram& h) {
  return Json{{"edges", h.edges}, {"counts", h.counts}, {"total", h.total}};
}

inline Json to_json(const ThresholdResult& t) {
  Json j{{"tau", t.tau}, {"method", to_string(t.method)}};
  if (const auto* o = std::get_if<OtsuDiagnostics>(&t.diagnostics)) {
    j["diagnostics"] = Json{{"split", o->split},
                            {"degenerate", o->degenerate},
                            {"total_variance", o->total_variance},
                            {"between_class_variance", o->between_class_variance},
                            {"within_class_variance", o->within_class_variance},
                            {"histogram", to_json(o->histogram)}};
  } else if (const auto* k = std::get_if<KMeansDiagnostics>(&t.diagnostics)) {
    j["diagnostics"] = Json{{"centroids", k->centroids},
                            {"sizes", k->sizes},
                            {"iterations", k->iterations},
                            {"converged", k->converged},
                            {"degenerate", k->degenerate}};
  }
  return j;
}

inline Json to_json(const FilterConfig& c) {
  return Json{{"method", to_string(c.method)},
              {"bins", c.bins},
              {"alpha", c.alpha},
              {"shrinkage", c.shrinkage},
              {"invert_gate", c.gate == GateMode::inverted},
              {"gate_mode", to_string(c.gate)},
              {"cv_moments", to_string(c.moments)},
              {"max_iters", c.max_iters},
              {"tol", c.tol},
              {"seed", c.seed}};
}

inline Json manifest_header(const FilterReport& r) {
  const auto& g = r.gate;
  return Json{{"tau", r.threshold.tau},
              {"method", to_string(r.threshold.method)},
              {"alpha", g.alpha},
              {"cv_tot", detail::optional_json(g.cv_tot)},
              {"cv_lt", detail::optional_json(g.cv_lt)},
              {"cv_gt", detail::optional_json(g.cv_gt)},
              {"lhs", detail::optional_json(g.lhs)},
              {"rhs", detail::optional_json(g.rhs)},
              {"bimodal", g.bimodal},
              {"degenerate", detail::optional_json(g.degenerate)},
              {"gate_mode", to_string(g.mode)},
              {"decision", g.filter ? "filter" : "keep_all"},
              {"kept_count", r.kept_count},
              {"discarded_count", r.discarded_count},
              {"shrinkage_applied", detail::optional_json(r.shrinkage_applied)},
              {"threshold", to_json(r.threshold)},
              {"parameters", to_json(r.parameters)}};
}

/// Header record, then one {id, distance, kept} record per sample.
inline std::string encode_manifest(const FilterReport& r) {
  std::string out = manifest_header(r).dump() + '\n';
  for (const auto& v : r.verdicts) {
    out += Json{{"id", v.id}, {"distance", v.distance}, {"kept", v.kept}}.dump();
    out += '\n';
  }
  return out;
}

struct Manifest {
  Json header;
  std::vector<Verdict> verdicts;
};

inline Manifest decode_manifest(const std::vector<char>& bytes) {
  const auto lines = detail::split_lines(bytes);
  if (lines.empty()) throw data_error("manifest is empty");
  Manifest m;
  m.header = detail::parse_json_line(lines[0], 0);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto rec = detail::parse_json_line(lines[i], i);
    try {
      m.verdicts.push_back({rec.at("id").get<std::string>(), rec.at("distance").get<double>(),
                            rec.at("kept").get<bool>()});
    } catch (const Json::exception& e) {
      throw data_error("bad verdict record on line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return m;
}

inline Manifest load_manifest(const std::filesystem::path& path) {
  return decode_manifest(detail::read_file(path));
}

inline std::string id_list(const FilterReport& r, bool kept) {
  std::string out;
  for (const auto& v : r.verdicts) {
    if (v.kept == kept) out += v.id + '\n';
  }
  return out;
}

// Score files: header {count, mean, stddev}, then {id, distance} per row.
inline std::string encode_scores(const DistanceSet& d) {
  std::string out =
      Json{{"count", d.size()}, {"mean", d.mean()}, {"stddev", d.stddev()}}.dump() + '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    out += Json{{"id", d.ids()[i]}, {"distance", d.distances()[i]}}.dump() + '\n';
  }
  return out;
}

inline DistanceSet load_scores(const std::filesystem::path& path) {
  const auto lines = detail::split_lines(detail::read_file(path));
  if (lines.empty()) throw data_error("score file is empty");
  std::vector<std::string> ids;
  std::vector<double> values;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto rec = detail::parse_json_line(lines[i], i);
    try {
      ids.push_back(rec.at("id").get<std::string>());
      values.push_back(rec.at("distance").get<double>());
    } catch (const Json::exception& e) {
      throw data_error("bad score record on line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return DistanceSet(std::move(ids), std::move(values));
}

inline std::string encode_truth(const TruthMap& truth) {
  Json j = Json::object();
  for (const auto& [id, ood] : truth) j[id] = ood;
  return j.dump(1) + '\n';
}

inline TruthMap load_truth(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  TruthMap truth;
  try {
    const auto j = Json::parse(bytes.begin(), bytes.end());
    for (const auto& [id, flag] : j.items()) truth.emplace(id, flag.get<bool>());
  } catch (const Json::exception& e) {
    throw data_error(std::string("malformed truth file: ") + e.what());
  }
  return truth;
}

inline Json to_json(const FilterQuality& q) {
  return Json{{"ood_recall", detail::optional_json(q.ood_recall)},
              {"ood_precision", detail::optional_json(q.ood_precision)},
              {"kept_contamination", detail::optional_json(q.kept_contamination)},
              {"kept_count", q.kept_count},
              {"true_positive", q.true_positive},
              {"false_positive", q.false_positive},
              {"false_negative", q.false_negative},
              {"true_negative", q.true_negative}};
}

}  // namespace oodgate
