#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rscir/composers.hpp"
#include "rscir/embedstore.hpp"
#include "rscir/manifest.hpp"

namespace rscir::testing {

// 4 classes x 2 colour values x 50 items in d = 32. Item embedding =
// renormalize(class_dir + 0.5 * attribute_dir + 0.1 * noise) with
// noise ~ N(0, I/d); the class and attribute directions are distinct
// coordinate axes. Modifier text embeddings are the attribute directions.
// Every item is a query for the colour it does not have.
struct SyntheticArchive {
  static constexpr std::size_t kClasses = 4;
  static constexpr std::size_t kValues = 2;
  static constexpr std::size_t kPerCell = 50;
  static constexpr std::size_t kDim = 32;

  EmbeddingStore images;
  EmbeddingStore texts;
  EmbeddingStore texts_contextualized;
  EmbeddingStore words;     // vocabulary memory: class names, colours, distractors
  EmbeddingStore composed;  // "modifier||word" -> renormalize(word + modifier)
  EmbeddingStore corpus_pos;
  EmbeddingStore corpus_neg;
  std::vector<LabelRecord> labels;
  Manifest manifest;

  VocabularyMemory memory() const { return VocabularyMemory(words, composed); }

  /// images.emb1 texts.emb1 texts_ctx.emb1 words.emb1 composed.emb1
  /// corpus_pos.emb1 corpus_neg.emb1 labels.jsonl manifest.jsonl
  void write(const std::filesystem::path& dir) const;
};

SyntheticArchive make_synthetic_archive(std::uint64_t seed = 7);

/// Parameters used for the synthetic benchmark runs of FreeDom and BASIC.
ComposerConfig synthetic_config(Method method);

}  // namespace rscir::testing
