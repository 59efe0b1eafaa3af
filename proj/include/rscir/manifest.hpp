#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rscir/embedstore.hpp"

namespace rscir {

enum class Protocol { ClassAttribute, SceneState };
enum class PoolRule { AllExceptQuery, PostEventOnly, ExplicitList };

std::string_view to_string(Protocol p);
std::string_view to_string(PoolRule p);
Protocol parse_protocol(std::string_view s);
PoolRule parse_pool_rule(std::string_view s);

struct QueryRecord {
  std::string query_id;
  std::string image_id;
  std::string modifier;
  std::string group;
  std::string target_value;
  Protocol protocol = Protocol::ClassAttribute;
  PoolRule pool = PoolRule::AllExceptQuery;
  std::vector<std::string> candidates;  // only for PoolRule::ExplicitList
};

// Groups a manifest may use. A manifest can override either set with a
// leading header line {"attribute_types":[...],"disasters":[...]}.
struct ManifestSchema {
  std::set<std::string, std::less<>> attribute_types{
      "color", "context", "density", "existence", "quantity", "shape"};
  std::set<std::string, std::less<>> disasters{
      "hurricane", "wildfire", "flood", "tsunami", "earthquake", "volcano"};
};

struct Manifest {
  ManifestSchema schema;
  std::vector<QueryRecord> records;

  std::vector<std::string> modifiers() const;  // distinct, sorted
};

Manifest parse_manifest(std::istream& in);
Manifest load_manifest(const std::filesystem::path& path);
std::string to_jsonl(const QueryRecord& record);

struct LabelRecord {
  std::string image_id;
  std::optional<std::string> class_label;
  std::map<std::string, std::string, std::less<>> attributes;
  std::optional<std::string> scene_id;
  std::optional<std::string> state;
};

std::vector<LabelRecord> parse_labels(std::istream& in);
std::vector<LabelRecord> load_labels(const std::filesystem::path& path);
std::string to_jsonl(const LabelRecord& record);

enum class EmptyPolicy { Skip, Abort };

/// Candidate pool and positives of one query, as row indices into the image
/// store, both ascending.
struct QueryRelevance {
  std::vector<std::size_t> pool;
  std::vector<std::size_t> positives;
  bool skipped = false;
  std::string skip_reason;
};

/// Index-aligned with the manifest records it was built from.
struct RelevanceTable {
  std::vector<QueryRelevance> entries;
  std::vector<std::string> warnings;
};

/// Protocol A (class_attribute): positives share the query's class and carry
/// the target value for the queried attribute type. Protocol B
/// (scene_state): positives show the query's scene in the target state.
/// The query image is never a positive.
RelevanceTable build_relevance(const Manifest& manifest,
                               const std::vector<LabelRecord>& labels,
                               const EmbeddingStore& store,
                               EmptyPolicy on_empty = EmptyPolicy::Skip);

}  // namespace rscir
