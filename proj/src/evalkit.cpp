#include "rscir/evalkit.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "rscir/error.hpp"

namespace rscir {

double average_precision(const RankedList& ranked,
                         const std::set<std::string, std::less<>>& positives) {
  if (positives.empty()) throw Error(Errc::EmptyPositives, "average_precision");
  std::vector<char> hits(ranked.ids.size(), 0);
  std::size_t found = 0;
  for (std::size_t i = 0; i < ranked.ids.size(); ++i) {
    if (positives.contains(ranked.ids[i])) {
      hits[i] = 1;
      ++found;
    }
  }
  if (found != positives.size()) {
    for (const auto& p : positives) {
      if (std::find(ranked.ids.begin(), ranked.ids.end(), p) == ranked.ids.end()) {
        throw Error(Errc::PositiveOutsidePool, fmt::format("'{}' is not ranked", p));
      }
    }
  }
  return average_precision(hits, positives.size());
}

double average_precision(std::span<const char> hits, std::size_t num_positives) {
  if (num_positives == 0) throw Error(Errc::EmptyPositives, "average_precision");
  double sum = 0.0;
  std::size_t seen = 0;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (!hits[i]) continue;
    ++seen;
    sum += static_cast<double>(seen) / static_cast<double>(i + 1);
  }
  return sum / static_cast<double>(num_positives);
}

// --- aggregation ------------------------------------------------------------

namespace {

template <typename Key>
std::map<Key, double> group_means(const std::vector<QueryAP>& per_query,
                                  Key (*key_of)(const QueryAP&)) {
  std::map<Key, std::pair<double, std::size_t>> acc;
  for (const auto& q : per_query) {
    auto& [sum, count] = acc[key_of(q)];
    sum += q.ap;
    ++count;
  }
  std::map<Key, double> out;
  for (const auto& [key, sc] : acc) out[key] = sc.first / static_cast<double>(sc.second);
  return out;
}

std::pair<std::string, std::string> value_key(const QueryAP& q) {
  return {q.group, q.target_value};
}
std::string group_key(const QueryAP& q) { return q.group; }

double mean_of(const std::map<std::string, double>& m) {
  if (m.empty()) return 0.0;
  double s = 0.0;
  for (const auto& [k, v] : m) s += v;
  return s / static_cast<double>(m.size());
}

void fill_common(EvalReport& r) {
  r.per_value = group_means(r.per_query, &value_key);
  for (const auto& q : r.per_query) ++r.group_counts[q.group];
  double s = 0.0;
  for (const auto& q : r.per_query) s += q.ap;
  r.overall_map = r.per_query.empty() ? 0.0 : s / static_cast<double>(r.per_query.size());
  if (r.per_query.empty()) r.warnings.push_back("no evaluated queries; mAP reported as 0");
}

}  // namespace

EvalReport aggregate_attribute_balanced(std::vector<QueryAP> per_query) {
  EvalReport r;
  r.aggregation = Aggregation::AttributeBalanced;
  r.per_query = std::move(per_query);
  fill_common(r);
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& [key, mean] : r.per_value) {
    auto& [sum, count] = acc[key.first];
    sum += mean;
    ++count;
  }
  for (const auto& [group, sc] : acc) {
    r.per_group[group] = sc.first / static_cast<double>(sc.second);
  }
  r.macro_map = mean_of(r.per_group);
  return r;
}

EvalReport aggregate_disaster_balanced(std::vector<QueryAP> per_query) {
  EvalReport r;
  r.aggregation = Aggregation::DisasterBalanced;
  r.per_query = std::move(per_query);
  fill_common(r);
  r.per_group = group_means(r.per_query, &group_key);
  r.macro_map = mean_of(r.per_group);
  return r;
}

nlohmann::ordered_json EvalReport::to_json(std::string_view generated_at) const {
  using json = nlohmann::ordered_json;
  json j;
  j["report_version"] = 1;
  j["generated_at"] = generated_at;
  if (aggregation == Aggregation::AttributeBalanced) {
    j["aggregation"] = "attribute_balanced";
    j["aggregation_rule"] =
        "AP averaged per (attribute type, target value); value means averaged within "
        "each attribute type; macro_map averages attribute types equally; overall_map "
        "averages all queries";
  } else {
    j["aggregation"] = "disaster_balanced";
    j["aggregation_rule"] =
        "AP averaged per disaster; macro_map averages disasters equally; overall_map "
        "averages all queries (query-count weighted)";
  }
  j["config"] = config;
  json sums = json::object();
  for (const auto& [role, sum] : checksums) sums[role] = sum;
  j["checksums"] = sums;
  j["macro_map"] = macro_map;
  j["overall_map"] = overall_map;

  json groups = json::object();
  for (const auto& [g, v] : per_group) {
    json e;
    e["map"] = v;
    e["queries"] = group_counts.contains(g) ? group_counts.at(g) : 0;
    groups[g] = e;
  }
  j["per_group"] = groups;

  json values = json::array();
  for (const auto& [key, v] : per_value) {
    values.push_back({{"group", key.first}, {"target_value", key.second}, {"map", v}});
  }
  j["per_value"] = values;

  json queries = json::array();
  for (const auto& q : per_query) {
    queries.push_back({{"query_id", q.query_id},
                       {"group", q.group},
                       {"target_value", q.target_value},
                       {"ap", q.ap}});
  }
  j["per_query"] = queries;

  json skip = json::array();
  for (const auto& [id, reason] : skipped) {
    skip.push_back({{"query_id", id}, {"reason", reason}});
  }
  j["skipped"] = skip;
  j["warnings"] = warnings;
  return j;
}

// --- evaluation -------------------------------------------------------------

std::vector<QueryAP> evaluate_queries(const Manifest& manifest,
                                      const RelevanceTable& relevance,
                                      const ComposerConfig& cfg, const Resources& res,
                                      const EvalOptions& options) {
  if (relevance.entries.size() != manifest.records.size()) {
    throw Error(Errc::LengthMismatch,
                fmt::format("{} relevance entries for {} queries",
                            relevance.entries.size(), manifest.records.size()));
  }
  const auto modifiers = manifest.modifiers();
  check_resources(cfg, res, modifiers);
  const EmbeddingStore& store = *res.images;

  const std::size_t total = manifest.records.size();
  std::vector<std::optional<double>> aps(total);
  std::vector<std::exception_ptr> errors(total);

  const auto run_one = [&](std::size_t qi) {
    const QueryRelevance& rel = relevance.entries[qi];
    if (rel.skipped) return;
    const QueryRecord& record = manifest.records[qi];
    try {
      const ScoreVector scores = compose(record.image_id, record.modifier, cfg, res, rel.pool);
      const auto order = rank_order(scores, store, rel.pool);
      std::vector<char> hits(order.size(), 0);
      for (std::size_t i = 0; i < order.size(); ++i) {
        hits[i] = std::binary_search(rel.positives.begin(), rel.positives.end(),
                                     rel.pool[order[i]]);
      }
      aps[qi] = average_precision(hits, rel.positives.size());
    } catch (...) {
      errors[qi] = std::current_exception();
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads,
                                                           static_cast<unsigned>(total)));
  if (threads <= 1) {
    for (std::size_t qi = 0; qi < total; ++qi) run_one(qi);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t qi = next++; qi < total; qi = next++) run_one(qi);
      });
    }
  }

  // First failure in manifest order, whatever the scheduling.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<QueryAP> out;
  out.reserve(total);
  for (std::size_t qi = 0; qi < total; ++qi) {
    if (!aps[qi]) continue;
    const QueryRecord& r = manifest.records[qi];
    out.push_back({r.query_id, r.group, r.target_value, *aps[qi]});
  }
  return out;
}

namespace {

void require_protocol(const Manifest& manifest, Protocol expected) {
  for (const auto& r : manifest.records) {
    if (r.protocol != expected) {
      throw Error(Errc::MixedProtocols,
                  fmt::format("query '{}' uses {}, expected {}", r.query_id,
                              to_string(r.protocol), to_string(expected)));
    }
  }
}

void fill_provenance(EvalReport& report, const Manifest& manifest,
                     const RelevanceTable& relevance, const ComposerConfig& cfg,
                     const Resources& res) {
  report.config = cfg.to_json();
  if (res.images) report.checksums["images"] = res.images->checksum();
  const bool uses_text = cfg.method != Method::ImageOnly && cfg.method != Method::FreeDom;
  const bool contextual = cfg.method == Method::Basic && cfg.toggles.contextualized_text;
  if (uses_text && !contextual && res.texts) report.checksums["texts"] = res.texts->checksum();
  if (uses_text && contextual && res.texts_contextualized) {
    report.checksums["texts_contextualized"] = res.texts_contextualized->checksum();
  }
  if (cfg.method == Method::FreeDom && res.memory) {
    report.checksums["vocabulary"] = res.memory->word_store().checksum();
    report.checksums["composed_table"] = res.memory->composed_table().checksum();
  }
  for (std::size_t i = 0; i < relevance.entries.size(); ++i) {
    if (relevance.entries[i].skipped) {
      report.skipped.emplace_back(manifest.records[i].query_id,
                                  relevance.entries[i].skip_reason);
    }
  }
  report.warnings.insert(report.warnings.begin(), relevance.warnings.begin(),
                         relevance.warnings.end());
}

}  // namespace

EvalReport evaluate_patterncom(const Manifest& manifest, const RelevanceTable& relevance,
                               const ComposerConfig& cfg, const Resources& res,
                               const EvalOptions& options) {
  require_protocol(manifest, Protocol::ClassAttribute);
  EvalReport report = aggregate_attribute_balanced(
      evaluate_queries(manifest, relevance, cfg, res, options));
  fill_provenance(report, manifest, relevance, cfg, res);
  return report;
}

EvalReport evaluate_xview(const Manifest& manifest, const RelevanceTable& relevance,
                          const ComposerConfig& cfg, const Resources& res,
                          const EvalOptions& options) {
  require_protocol(manifest, Protocol::SceneState);
  EvalReport report = aggregate_disaster_balanced(
      evaluate_queries(manifest, relevance, cfg, res, options));
  fill_provenance(report, manifest, relevance, cfg, res);
  for (std::size_t i = 0; i < relevance.entries.size(); ++i) {
    const auto& rel = relevance.entries[i];
    if (!rel.skipped && rel.positives.size() > 1) {
      report.warnings.push_back(fmt::format("MultiplePositives: query '{}' has {} positives",
                                            manifest.records[i].query_id,
                                            rel.positives.size()));
    }
  }
  return report;
}

EvalReport evaluate(const Manifest& manifest, const RelevanceTable& relevance,
                    const ComposerConfig& cfg, const Resources& res,
                    const EvalOptions& options) {
  if (!manifest.records.empty() &&
      manifest.records.front().protocol == Protocol::SceneState) {
    return evaluate_xview(manifest, relevance, cfg, res, options);
  }
  return evaluate_patterncom(manifest, relevance, cfg, res, options);
}

// --- sweeps -----------------------------------------------------------------

namespace {

double parse_double(std::string_view param, std::string_view s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(s), &used);
    if (used == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw Error(Errc::InvalidConfig, fmt::format("{}: '{}' is not a number", param, s));
}

std::size_t parse_count(std::string_view param, std::string_view s) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(Errc::InvalidConfig,
                fmt::format("{}: '{}' is not a non-negative integer", param, s));
  }
  return v;
}

std::string trim_number(double v) {
  std::string s = fmt::format("{:.10f}", v);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

std::optional<double> try_double(std::string_view s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(s), &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

}  // namespace

ComposerConfig apply_param(ComposerConfig cfg, std::string_view param,
                           std::string_view value) {
  if (param == "lambda") cfg.lambda = parse_double(param, value);
  else if (param == "k") cfg.k = parse_count(param, value);
  else if (param == "mn") cfg.m = cfg.n = parse_count(param, value);
  else if (param == "qe_k") cfg.qe_k = parse_count(param, value);
  else if (param == "p") cfg.p = parse_count(param, value);
  else if (param == "alpha") cfg.alpha = parse_double(param, value);
  else if (param == "lambda_harris") cfg.lambda_harris = parse_double(param, value);
  else if (param == "vocabulary") cfg.vocabulary = std::string(value);
  else throw Error(Errc::UnknownParam, fmt::format("'{}'", param));
  cfg.validate();
  return cfg;
}

std::vector<std::string> parse_sweep_values(std::string_view spec) {
  std::vector<std::string> parts;
  const auto split = [&](char sep) {
    parts.clear();
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = spec.find(sep, start);
      parts.emplace_back(spec.substr(start, pos - start));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
  };

  split(':');
  if (parts.size() == 3) {
    const auto a = try_double(parts[0]);
    const auto step = try_double(parts[1]);
    const auto b = try_double(parts[2]);
    if (a && step && b) {
      if (!(*step > 0.0) || *b < *a) {
        throw Error(Errc::InvalidConfig, fmt::format("bad range '{}'", spec));
      }
      const auto count = static_cast<std::size_t>(std::floor((*b - *a) / *step + 1e-9)) + 1;
      std::vector<std::string> out;
      for (std::size_t i = 0; i < count; ++i) {
        out.push_back(trim_number(*a + static_cast<double>(i) * *step));
      }
      return out;
    }
  }
  split(',');
  std::vector<std::string> out;
  for (auto& p : parts) {
    if (!p.empty()) out.push_back(std::move(p));
  }
  if (out.empty()) throw Error(Errc::InvalidConfig, "empty sweep value list");
  return out;
}

std::vector<SweepPoint> sweep(const ComposerConfig& base, std::string_view param,
                              std::span<const std::string> values, const EvalFn& eval_fn) {
  if (std::find(sweep_params().begin(), sweep_params().end(), param) ==
      sweep_params().end()) {
    throw Error(Errc::UnknownParam, fmt::format("'{}'", param));
  }
  std::vector<ComposerConfig> configs;
  for (const auto& v : values) configs.push_back(apply_param(base, param, v));

  std::vector<SweepPoint> out;
  out.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.push_back({values[i], configs[i], eval_fn(configs[i])});
  }
  return out;
}

std::string format_value(double v) { return fmt::format("{}", v); }

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> union_groups(std::span<const EvalReport* const> reports) {
  std::set<std::string> groups;
  for (const EvalReport* r : reports) {
    for (const auto& [g, v] : r->per_group) groups.insert(g);
  }
  return {groups.begin(), groups.end()};
}

std::string csv_rows(std::span<const std::pair<std::string, const EvalReport*>> rows,
                     std::span<const std::string> configs) {
  std::vector<const EvalReport*> reports;
  for (const auto& [label, r] : rows) reports.push_back(r);
  const auto groups = union_groups(reports);

  std::string out = "param_value";
  for (const auto& g : groups) out += "," + csv_field(g);
  out += ",macro_map,overall_map,config\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const EvalReport& r = *rows[i].second;
    out += csv_field(rows[i].first);
    for (const auto& g : groups) {
      out += ",";
      if (auto it = r.per_group.find(g); it != r.per_group.end()) {
        out += format_value(it->second);
      }
    }
    out += "," + format_value(r.macro_map) + "," + format_value(r.overall_map) + "," +
           csv_field(configs[i]) + "\n";
  }
  return out;
}

}  // namespace

std::string sweep_csv(std::span<const SweepPoint> points) {
  std::vector<std::pair<std::string, const EvalReport*>> rows;
  std::vector<std::string> configs;
  for (const auto& p : points) {
    rows.emplace_back(p.value, &p.report);
    configs.push_back(p.config.summary());
  }
  return csv_rows(rows, configs);
}

std::string report_csv(const EvalReport& report, std::string_view label) {
  std::vector<std::pair<std::string, const EvalReport*>> rows{{std::string(label), &report}};
  std::vector<std::string> configs;
  std::string summary;
  for (const auto& [key, value] : report.config.items()) {
    if (value.is_string() && key != "method" && key != "vocabulary") continue;
    if (value.is_object()) continue;
    if (!summary.empty()) summary += ' ';
    summary += key + "=" + (value.is_string() ? value.get<std::string>() : value.dump());
  }
  configs.push_back(summary);
  return csv_rows(rows, configs);
}

std::string report_markdown(std::span<const std::pair<std::string, EvalReport>> rows) {
  std::vector<const EvalReport*> reports;
  bool disaster = false;
  for (const auto& [label, r] : rows) {
    reports.push_back(&r);
    disaster = disaster || r.aggregation == Aggregation::DisasterBalanced;
  }
  const auto groups = union_groups(reports);

  std::string out = "| Method |";
  std::string rule = "|---|";
  for (const auto& g : groups) {
    out += " " + g + " |";
    rule += "---:|";
  }
  out += " Avg. |";
  rule += "---:|";
  if (disaster) {
    out += " Total |";
    rule += "---:|";
  }
  out += "\n" + rule + "\n";
  for (const auto& [label, r] : rows) {
    out += "| " + label + " |";
    for (const auto& g : groups) {
      auto it = r.per_group.find(g);
      out += it == r.per_group.end() ? " - |" : fmt::format(" {:.2f} |", 100.0 * it->second);
    }
    out += fmt::format(" {:.2f} |", 100.0 * r.macro_map);
    if (disaster) out += fmt::format(" {:.2f} |", 100.0 * r.overall_map);
    out += "\n";
  }
  return out;
}

}  // namespace rscir
