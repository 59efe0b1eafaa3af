#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rscir/embedstore.hpp"
#include "rscir/manifest.hpp"
#include "rscir/numerics.hpp"
#include "rscir/simcore.hpp"

namespace rscir {

enum class Method { TextOnly, ImageOnly, Sum, Product, WeiCom, FreeDom, Basic };

std::string_view to_string(Method m);
/// Throws Errc::UnknownMethod.
Method parse_method(std::string_view s);

// BASIC ablation switches. All on is the full pipeline.
struct BasicToggles {
  bool centering = true;
  bool projection = true;
  bool harris = true;
  bool minrange_norm = true;
  bool contextualized_text = true;
  bool query_expansion = true;

  static BasicToggles all_off() { return {false, false, false, false, false, false}; }
  /// Sets one switch by name; throws Errc::InvalidConfig for unknown names.
  void set(std::string_view name, bool on);
};

struct ComposerConfig {
  Method method = Method::ImageOnly;
  // WeiCom modality weight: 0 is image-only, 1 is text-only.
  double lambda = 0.5;
  // FreeDom: proxy images (query included), words kept, words per proxy.
  std::size_t k = 20;
  std::size_t m = 7;
  std::size_t n = 7;
  // BASIC
  std::size_t p = 250;
  double alpha = 0.2;
  std::size_t qe_k = 25;
  double lambda_harris = 0.1;
  BasicToggles toggles;
  // Label of the vocabulary memory a FreeDom run used (path or name).
  std::string vocabulary;

  /// Throws Errc::InvalidConfig when a parameter is out of range.
  void validate() const;
  /// Snapshot for reports; only the fields the method reads, plus the
  /// concrete formulas it applies.
  nlohmann::ordered_json to_json() const;
  /// One-line "key=value" summary of the same fields.
  std::string summary() const;
};

struct ComposedQuery {
  std::vector<double> image;  // v_y
  std::vector<double> text;   // v_t
  std::string modifier;
};

/// Looks up v_y by image ID and v_t by modifier.
ComposedQuery make_query(const EmbeddingStore& images, const EmbeddingStore& texts,
                         std::string_view image_id, std::string_view modifier);

/// Precomputed state shared by every BASIC query over one database:
/// centering means, the contrastive projection basis and the transformed
/// database rows.
class BasicContext {
 public:
  /// The corpora may be null when neither centering nor projection is on.
  BasicContext(const EmbeddingStore& database, const EmbeddingStore* c_plus,
               const EmbeddingStore* c_minus, const ComposerConfig& cfg);

  bool centering() const { return centering_; }
  bool projection() const { return basis_.has_value(); }
  std::size_t p() const { return basis_ ? basis_->p : 0; }
  double alpha() const { return basis_ ? basis_->alpha : 0.0; }
  const std::optional<ProjectionBasis>& basis() const { return basis_; }
  const std::vector<double>& image_mean() const { return image_mean_; }
  const std::vector<double>& text_mean() const { return text_mean_; }

  std::vector<double> transform_image(std::span<const double> v) const;
  std::vector<double> transform_text(std::span<const double> v) const;

  /// True when database rows differ from the stored embeddings.
  bool transforms_database() const { return !rows_.empty(); }
  RowView<double> database() const { return {rows_, dim_}; }

  /// Throws Errc::InvalidConfig when `cfg` disagrees with how this context
  /// was built.
  void check_compatible(const ComposerConfig& cfg) const;

 private:
  std::vector<double> transform(std::span<const double> v,
                                const std::vector<double>& mean) const;

  std::size_t dim_ = 0;
  bool centering_ = false;
  std::vector<double> image_mean_;
  std::vector<double> text_mean_;
  std::optional<ProjectionBasis> basis_;
  std::vector<double> rows_;
};

ScoreVector compose_text_only(const ComposedQuery& q, const EmbeddingStore& db,
                              const Pool& pool);
ScoreVector compose_image_only(const ComposedQuery& q, const EmbeddingStore& db,
                               const Pool& pool);
/// (s_f + s_g) / 2
ScoreVector compose_sum(const ComposedQuery& q, const EmbeddingStore& db,
                        const Pool& pool);
/// s_f * s_g on raw cosines
ScoreVector compose_product(const ComposedQuery& q, const EmbeddingStore& db,
                            const Pool& pool);
/// lambda * Phi(z(s_g)) + (1 - lambda) * Phi(z(s_f)), standardized over the pool.
ScoreVector compose_weicom(const ComposedQuery& q, const EmbeddingStore& db,
                           const Pool& pool, double lambda);

struct FreedomQuery {
  std::vector<double> vector;  // unit norm
  std::vector<std::size_t> proxies;  // database rows, query image excluded
  // Retained words with their frequencies, in retention order.
  std::vector<std::pair<std::string, std::size_t>> words;
};

/// Builds the memory-based query vector: proxies are the query image plus
/// its k-1 nearest pool rows; each proxy votes for its n nearest words; the
/// m most frequent words (ties: larger summed cosine, then word) are
/// composed with the modifier and averaged by frequency.
FreedomQuery freedom_query(const ComposedQuery& q, const EmbeddingStore& db,
                           const Pool& pool, const VocabularyMemory& memory,
                           std::size_t k, std::size_t m, std::size_t n);
ScoreVector compose_freedom(const ComposedQuery& q, const EmbeddingStore& db,
                            const Pool& pool, const VocabularyMemory& memory,
                            std::size_t k, std::size_t m, std::size_t n);

/// BASIC pipeline; `q.text` must already be the variant selected by the
/// contextualized_text toggle.
ScoreVector compose_basic(const ComposedQuery& q, const EmbeddingStore& db,
                          const Pool& pool, const BasicContext& context,
                          const ComposerConfig& cfg);

/// Everything a query may need; unused members may be null.
struct Resources {
  const EmbeddingStore* images = nullptr;
  const EmbeddingStore* texts = nullptr;
  const EmbeddingStore* texts_contextualized = nullptr;
  const VocabularyMemory* memory = nullptr;
  const BasicContext* basic = nullptr;
};

/// Checks that `res` holds what `cfg.method` needs for the given modifiers
/// (text embeddings, vocabulary coverage, BASIC context).
void check_resources(const ComposerConfig& cfg, const Resources& res,
                     std::span<const std::string> modifiers);

/// Scores of the configured method over `pool`, index-aligned with it.
ScoreVector compose(std::string_view image_id, std::string_view modifier,
                    const ComposerConfig& cfg, const Resources& res, const Pool& pool);

struct QueryResult {
  RankedList ranked;
  Pool pool;
};

/// Scores and ranks one manifest record over `pool`.
QueryResult run_query(const QueryRecord& record, const ComposerConfig& cfg,
                      const Resources& res, const Pool& pool);

}  // namespace rscir
