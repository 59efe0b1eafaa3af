#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rscir/composers.hpp"
#include "rscir/manifest.hpp"
#include "rscir/simcore.hpp"

namespace rscir {

/// Mean of precision@i over the ranks i holding a positive (no
/// interpolation). Throws Errc::EmptyPositives and
/// Errc::PositiveOutsidePool.
double average_precision(const RankedList& ranked,
                         const std::set<std::string, std::less<>>& positives);

/// Same value from a relevance mask in rank order; `num_positives` counts
/// every positive of the query, including any absent from `hits`.
double average_precision(std::span<const char> hits, std::size_t num_positives);

struct QueryAP {
  std::string query_id;
  std::string group;
  std::string target_value;
  double ap = 0.0;
};

enum class Aggregation { AttributeBalanced, DisasterBalanced };

struct EvalReport {
  Aggregation aggregation = Aggregation::AttributeBalanced;
  std::vector<QueryAP> per_query;
  std::map<std::pair<std::string, std::string>, double> per_value;
  std::map<std::string, double> per_group;
  std::map<std::string, std::size_t> group_counts;
  double macro_map = 0.0;
  double overall_map = 0.0;
  nlohmann::ordered_json config;
  std::map<std::string, std::string> checksums;  // role -> store checksum
  std::vector<std::pair<std::string, std::string>> skipped;  // (query_id, reason)
  std::vector<std::string> warnings;

  /// report_version 1. Everything but "generated_at" is a deterministic
  /// function of the inputs.
  nlohmann::ordered_json to_json(std::string_view generated_at = "") const;
};

/// PatternCom rule: queries -> (group, value) means -> group means -> macro.
/// overall_map is the plain mean over queries.
EvalReport aggregate_attribute_balanced(std::vector<QueryAP> per_query);
/// xView2-CIR rule: per-group means, macro over groups, overall over queries.
EvalReport aggregate_disaster_balanced(std::vector<QueryAP> per_query);

struct EvalOptions {
  unsigned threads = 1;
};

/// APs of every non-skipped query, in manifest order. Queries run in
/// parallel; results are independent of the thread count.
std::vector<QueryAP> evaluate_queries(const Manifest& manifest,
                                      const RelevanceTable& relevance,
                                      const ComposerConfig& cfg, const Resources& res,
                                      const EvalOptions& options = {});

EvalReport evaluate_patterncom(const Manifest& manifest, const RelevanceTable& relevance,
                               const ComposerConfig& cfg, const Resources& res,
                               const EvalOptions& options = {});
EvalReport evaluate_xview(const Manifest& manifest, const RelevanceTable& relevance,
                          const ComposerConfig& cfg, const Resources& res,
                          const EvalOptions& options = {});
/// Dispatches on the manifest's (homogeneous) protocol.
EvalReport evaluate(const Manifest& manifest, const RelevanceTable& relevance,
                    const ComposerConfig& cfg, const Resources& res,
                    const EvalOptions& options = {});

// --- sweeps -----------------------------------------------------------------

inline const std::vector<std::string>& sweep_params() {
  static const std::vector<std::string> params{
      "lambda", "k", "mn", "qe_k", "p", "alpha", "lambda_harris", "vocabulary"};
  return params;
}

/// Returns `base` with one parameter set from its textual value. "mn" sets
/// m and n together. Throws Errc::UnknownParam or Errc::InvalidConfig.
ComposerConfig apply_param(ComposerConfig base, std::string_view param,
                           std::string_view value);

/// Expands "a:step:b" (inclusive, decimal-rounded) or "v1,v2,...".
std::vector<std::string> parse_sweep_values(std::string_view spec);

struct SweepPoint {
  std::string value;
  ComposerConfig config;
  EvalReport report;
};

using EvalFn = std::function<EvalReport(const ComposerConfig&)>;

std::vector<SweepPoint> sweep(const ComposerConfig& base, std::string_view param,
                              std::span<const std::string> values, const EvalFn& eval_fn);

/// Header "param_value,<group>...,macro_map,overall_map,config"; LF endings.
std::string sweep_csv(std::span<const SweepPoint> points);
/// Same layout as a single row, labelled by the method.
std::string report_csv(const EvalReport& report, std::string_view label);
/// Rows = runs, columns = groups, then Avg. (and Total for disasters).
std::string report_markdown(std::span<const std::pair<std::string, EvalReport>> rows);

std::string format_value(double v);

}  // namespace rscir
