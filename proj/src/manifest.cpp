#include "rscir/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <unordered_map>

#include <fmt/format.h>

#include "json.hpp"
#include "rscir/error.hpp"

namespace rscir {

using nlohmann::json;

std::string_view to_string(Protocol p) {
  return p == Protocol::ClassAttribute ? "class_attribute" : "scene_state";
}

std::string_view to_string(PoolRule p) {
  switch (p) {
    case PoolRule::AllExceptQuery: return "all_except_query";
    case PoolRule::PostEventOnly: return "post_event_only";
    case PoolRule::ExplicitList: return "explicit_list";
  }
  return "?";
}

Protocol parse_protocol(std::string_view s) {
  if (s == "class_attribute") return Protocol::ClassAttribute;
  if (s == "scene_state") return Protocol::SceneState;
  throw Error(Errc::UnknownProtocol, fmt::format("'{}'", s));
}

PoolRule parse_pool_rule(std::string_view s) {
  if (s == "all_except_query") return PoolRule::AllExceptQuery;
  if (s == "post_event_only") return PoolRule::PostEventOnly;
  if (s == "explicit_list") return PoolRule::ExplicitList;
  throw Error(Errc::UnknownPool, fmt::format("'{}'", s));
}

namespace {

json parse_line(const std::string& line, std::size_t line_no) {
  try {
    json j = json::parse(line);
    if (!j.is_object()) {
      throw Error(Errc::ParseError, fmt::format("line {}: expected a JSON object", line_no));
    }
    return j;
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, fmt::format("line {}: {}", line_no, e.what()));
  }
}

std::string required_string(const json& j, const char* key, std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    throw Error(Errc::MissingField, fmt::format("line {}: '{}'", line_no, key));
  }
  if (!it->is_string()) {
    throw Error(Errc::ParseError,
                fmt::format("line {}: '{}' must be a string", line_no, key));
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& j, const char* key,
                                           std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw Error(Errc::ParseError,
                fmt::format("line {}: '{}' must be a string", line_no, key));
  }
  return it->get<std::string>();
}

bool is_schema_header(const json& j) {
  return !j.contains("query_id") &&
         (j.contains("attribute_types") || j.contains("disasters"));
}

template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    fn(line, line_no);
  }
}

}  // namespace

std::vector<std::string> Manifest::modifiers() const {
  std::set<std::string> distinct;
  for (const auto& r : records) distinct.insert(r.modifier);
  return {distinct.begin(), distinct.end()};
}

Manifest parse_manifest(std::istream& in) {
  Manifest manifest;
  bool first = true;
  std::set<std::string, std::less<>> seen_ids;
  for_each_line(in, [&](const std::string& line, std::size_t line_no) {
    const json j = parse_line(line, line_no);
    if (first && is_schema_header(j)) {
      try {
        if (j.contains("attribute_types")) {
          const auto v = j.at("attribute_types").get<std::vector<std::string>>();
          manifest.schema.attribute_types = {v.begin(), v.end()};
        }
        if (j.contains("disasters")) {
          const auto v = j.at("disasters").get<std::vector<std::string>>();
          manifest.schema.disasters = {v.begin(), v.end()};
        }
      } catch (const json::exception& e) {
        throw Error(Errc::ParseError, fmt::format("line {}: {}", line_no, e.what()));
      }
      first = false;
      return;
    }
    first = false;

    QueryRecord r;
    r.query_id = required_string(j, "query_id", line_no);
    r.image_id = required_string(j, "image_id", line_no);
    r.modifier = required_string(j, "modifier", line_no);
    r.group = required_string(j, "group", line_no);
    r.target_value = required_string(j, "target_value", line_no);
    try {
      r.protocol = parse_protocol(required_string(j, "protocol", line_no));
      if (auto pool = optional_string(j, "pool", line_no)) {
        r.pool = parse_pool_rule(*pool);
      } else {
        r.pool = r.protocol == Protocol::SceneState ? PoolRule::PostEventOnly
                                                    : PoolRule::AllExceptQuery;
      }
    } catch (const Error& e) {
      if (e.code() == Errc::MissingField) throw;
      throw Error(e.code(), fmt::format("line {}: {}", line_no, e.what()));
    }
    if (auto it = j.find("candidates"); it != j.end() && !it->is_null()) {
      try {
        r.candidates = it->get<std::vector<std::string>>();
      } catch (const json::exception& e) {
        throw Error(Errc::ParseError, fmt::format("line {}: {}", line_no, e.what()));
      }
    }

    const auto& allowed = r.protocol == Protocol::ClassAttribute
                              ? manifest.schema.attribute_types
                              : manifest.schema.disasters;
    if (!allowed.contains(r.group)) {
      throw Error(Errc::InvalidRecord,
                  fmt::format("line {}: group '{}' is not a declared {}", line_no,
                              r.group,
                              r.protocol == Protocol::ClassAttribute
                                  ? "attribute type"
                                  : "disaster"));
    }
    if (r.pool == PoolRule::ExplicitList && r.candidates.empty()) {
      throw Error(Errc::InvalidRecord,
                  fmt::format("line {}: explicit_list pool needs a non-empty "
                              "'candidates' list",
                              line_no));
    }
    if (r.modifier.find(VocabularyMemory::kSeparator) != std::string::npos) {
      throw Error(Errc::InvalidRecord,
                  fmt::format("line {}: modifier contains '||'", line_no));
    }
    if (!seen_ids.insert(r.query_id).second) {
      throw Error(Errc::InvalidRecord,
                  fmt::format("line {}: duplicate query_id '{}'", line_no, r.query_id));
    }
    manifest.records.push_back(std::move(r));
  });
  return manifest;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, fmt::format("cannot open '{}'", path.string()));
  try {
    return parse_manifest(in);
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string to_jsonl(const QueryRecord& r) {
  nlohmann::ordered_json j;
  j["query_id"] = r.query_id;
  j["image_id"] = r.image_id;
  j["modifier"] = r.modifier;
  j["group"] = r.group;
  j["target_value"] = r.target_value;
  j["protocol"] = to_string(r.protocol);
  j["pool"] = to_string(r.pool);
  if (!r.candidates.empty()) j["candidates"] = r.candidates;
  return j.dump();
}

std::vector<LabelRecord> parse_labels(std::istream& in) {
  std::vector<LabelRecord> labels;
  std::set<std::string, std::less<>> seen;
  for_each_line(in, [&](const std::string& line, std::size_t line_no) {
    const json j = parse_line(line, line_no);
    LabelRecord r;
    r.image_id = required_string(j, "image_id", line_no);
    r.class_label = optional_string(j, "class_label", line_no);
    r.scene_id = optional_string(j, "scene_id", line_no);
    r.state = optional_string(j, "state", line_no);
    if (auto it = j.find("attributes"); it != j.end() && !it->is_null()) {
      if (!it->is_object()) {
        throw Error(Errc::ParseError,
                    fmt::format("line {}: 'attributes' must be an object", line_no));
      }
      for (const auto& [type, value] : it->items()) {
        if (!value.is_string()) {
          throw Error(Errc::ParseError,
                      fmt::format("line {}: attribute '{}' must be a string",
                                  line_no, type));
        }
        r.attributes.emplace(type, value.get<std::string>());
      }
    }
    if (!seen.insert(r.image_id).second) {
      throw Error(Errc::InvalidRecord,
                  fmt::format("line {}: duplicate label for '{}'", line_no, r.image_id));
    }
    labels.push_back(std::move(r));
  });
  return labels;
}

std::vector<LabelRecord> load_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, fmt::format("cannot open '{}'", path.string()));
  try {
    return parse_labels(in);
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string to_jsonl(const LabelRecord& r) {
  nlohmann::ordered_json j;
  j["image_id"] = r.image_id;
  if (r.class_label) j["class_label"] = *r.class_label;
  if (!r.attributes.empty()) {
    nlohmann::ordered_json attrs = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.attributes) attrs[k] = v;
    j["attributes"] = attrs;
  }
  if (r.scene_id) j["scene_id"] = *r.scene_id;
  if (r.state) j["state"] = *r.state;
  return j.dump();
}

// --- relevance --------------------------------------------------------------

namespace {

bool is_post_event(const LabelRecord* label) {
  return label != nullptr && label->state && label->state->starts_with("post-");
}

}  // namespace

RelevanceTable build_relevance(const Manifest& manifest,
                               const std::vector<LabelRecord>& labels,
                               const EmbeddingStore& store,
                               EmptyPolicy on_empty) {
  // Row -> label, nullptr for unlabeled rows.
  std::unordered_map<std::string_view, const LabelRecord*> by_id;
  by_id.reserve(labels.size());
  for (const auto& l : labels) by_id.emplace(l.image_id, &l);
  std::vector<const LabelRecord*> row_label(store.size(), nullptr);
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (auto it = by_id.find(store.id(i)); it != by_id.end()) row_label[i] = it->second;
  }

  std::vector<std::size_t> post_event_rows;
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (is_post_event(row_label[i])) post_event_rows.push_back(i);
  }

  RelevanceTable table;
  table.entries.reserve(manifest.records.size());
  for (const auto& q : manifest.records) {
    const auto query_row = store.find(q.image_id);
    if (!query_row) {
      throw Error(Errc::UnresolvedImageId,
                  fmt::format("query '{}': image '{}' not in store", q.query_id,
                              q.image_id));
    }
    const LabelRecord* ql = row_label[*query_row];
    if (ql == nullptr) {
      throw Error(Errc::UnresolvedImageId,
                  fmt::format("query '{}': image '{}' has no label", q.query_id,
                              q.image_id));
    }

    QueryRelevance rel;
    switch (q.pool) {
      case PoolRule::AllExceptQuery:
        rel.pool.reserve(store.size() - 1);
        for (std::size_t i = 0; i < store.size(); ++i) {
          if (i != *query_row) rel.pool.push_back(i);
        }
        break;
      case PoolRule::PostEventOnly:
        for (std::size_t i : post_event_rows) {
          if (i != *query_row) rel.pool.push_back(i);
        }
        break;
      case PoolRule::ExplicitList: {
        for (const auto& id : q.candidates) {
          const auto row = store.find(id);
          if (!row) {
            throw Error(Errc::UnresolvedImageId,
                        fmt::format("query '{}': candidate '{}' not in store",
                                    q.query_id, id));
          }
          rel.pool.push_back(*row);
        }
        std::sort(rel.pool.begin(), rel.pool.end());
        rel.pool.erase(std::unique(rel.pool.begin(), rel.pool.end()), rel.pool.end());
        break;
      }
    }

    if (q.protocol == Protocol::ClassAttribute) {
      if (!ql->class_label || !ql->attributes.contains(q.group)) {
        throw Error(Errc::InvalidRecord,
                    fmt::format("query '{}': image '{}' lacks class_label or "
                                "attribute '{}'",
                                q.query_id, q.image_id, q.group));
      }
      for (std::size_t i : rel.pool) {
        const LabelRecord* xl = row_label[i];
        if (i == *query_row || xl == nullptr || xl->class_label != ql->class_label) {
          continue;
        }
        auto it = xl->attributes.find(q.group);
        if (it != xl->attributes.end() && it->second == q.target_value) {
          rel.positives.push_back(i);
        }
      }
    } else {
      if (!ql->scene_id || !ql->state) {
        throw Error(Errc::InvalidRecord,
                    fmt::format("query '{}': image '{}' lacks scene_id or state",
                                q.query_id, q.image_id));
      }
      for (std::size_t i : rel.pool) {
        const LabelRecord* xl = row_label[i];
        if (i == *query_row || xl == nullptr || xl->scene_id != ql->scene_id) continue;
        if (xl->state == q.target_value) rel.positives.push_back(i);
      }
    }

    if (rel.positives.empty()) {
      const std::string msg =
          fmt::format("query '{}' has no positives in its candidate pool", q.query_id);
      if (on_empty == EmptyPolicy::Abort) throw Error(Errc::EmptyPositives, msg);
      rel.skipped = true;
      rel.skip_reason = "EmptyPositives";
      table.warnings.push_back(msg);
    }
    table.entries.push_back(std::move(rel));
  }
  return table;
}

}  // namespace rscir
