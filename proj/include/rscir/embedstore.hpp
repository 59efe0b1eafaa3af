#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rscir {

// Rows whose norm deviates from 1 by more than this are rejected when a
// file claims to be normalized.
inline constexpr double kNormTolerance = 1e-4;

/// Immutable n x d matrix of float32 embeddings indexed by unique string IDs.
///
/// Rows are always unit-norm once constructed: stores built from
/// unnormalized data are renormalized in memory and flagged as normalized.
class EmbeddingStore {
 public:
  /// Validates IDs and values. When `normalized` is false every row is
  /// renormalized; when true every row must already have unit norm.
  static EmbeddingStore create(std::vector<std::string> ids,
                               std::vector<float> matrix, std::size_t dim,
                               bool normalized);

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  bool normalized() const { return true; }

  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(std::size_t row) const { return ids_[row]; }
  std::span<const float> data() const { return matrix_; }
  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(matrix_).subspan(i * dim_, dim_);
  }
  std::vector<double> row_as_double(std::size_t i) const;

  std::optional<std::size_t> find(std::string_view id) const;
  /// Throws Errc::UnresolvedImageId when the ID is absent.
  std::size_t index_of(std::string_view id) const;

  /// FNV-1a 64 of the canonical EMB1 encoding, as 16 hex digits.
  std::string checksum() const;

 private:
  EmbeddingStore() = default;

  std::vector<std::string> ids_;
  std::vector<float> matrix_;
  std::size_t dim_ = 0;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// Returns a copy of the row-major matrix with every row scaled to unit norm.
/// Norms are computed in double precision. Throws Errc::ZeroNormRow.
std::vector<float> l2_normalize_rows(std::span<const float> matrix,
                                     std::size_t dim);

// EMB1 container:
//   "EMB1" | u32 LE header length H | H bytes JSON header | rows*dim f32 LE
std::string encode_emb1(const EmbeddingStore& store);
EmbeddingStore decode_emb1(std::string_view bytes);

struct Emb1Header {
  std::size_t rows = 0;
  std::size_t dim = 0;
  bool normalized = false;
  std::vector<std::string> ids;
  std::size_t payload_offset = 0;
};

/// Parses magic and JSON header only. Throws Errc::BadMagic / HeaderParse.
Emb1Header parse_emb1_header(std::string_view bytes);

EmbeddingStore load_embeddings(const std::filesystem::path& path);
void save_embeddings(const EmbeddingStore& store,
                     const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Word memory plus the precomputed "modifier||word" composed-text table.
class VocabularyMemory {
 public:
  static constexpr std::string_view kSeparator = "||";

  VocabularyMemory(EmbeddingStore word_store, EmbeddingStore composed_table);

  const std::vector<std::string>& words() const { return word_store_.ids(); }
  const EmbeddingStore& word_store() const { return word_store_; }
  const EmbeddingStore& composed_table() const { return composed_table_; }

  static std::string composed_key(std::string_view modifier,
                                  std::string_view word);
  std::optional<std::size_t> composed_row(std::string_view modifier,
                                          std::string_view word) const;

  /// Keys "modifier||word" absent from the composed table, over every
  /// vocabulary word and each given modifier, in modifier-then-word order.
  std::vector<std::string> missing_entries(
      std::span<const std::string> modifiers) const;
  /// Throws Errc::MissingComposedEntry listing every missing key.
  void require_coverage(std::span<const std::string> modifiers) const;

 private:
  EmbeddingStore word_store_;
  EmbeddingStore composed_table_;
};

VocabularyMemory load_vocabulary(const std::filesystem::path& words,
                                 const std::filesystem::path& composed);

}  // namespace rscir
