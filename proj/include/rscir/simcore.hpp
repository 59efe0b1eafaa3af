#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "rscir/embedstore.hpp"
#include "rscir/numerics.hpp"

namespace rscir {

/// Candidate rows of an EmbeddingStore, by index.
using Pool = std::vector<std::size_t>;

Pool full_pool(const EmbeddingStore& store);
Pool resolve_pool(const EmbeddingStore& store, std::span<const std::string> ids);

/// Best first; equal scores ordered by ascending ID.
struct RankedList {
  std::vector<std::string> ids;
  std::vector<double> scores;
};

/// Row-major embedding rows of any float type, used so that transformed
/// copies of a store can be scored through the same kernel.
template <typename T>
struct RowView {
  std::span<const T> data;
  std::size_t dim = 0;

  std::span<const T> row(std::size_t i) const { return data.subspan(i * dim, dim); }
};

/// Cosine scores (plain dot products of unit vectors) accumulated in double.
ScoreVector score_against(std::span<const double> query, const EmbeddingStore& store,
                          const Pool& pool);
ScoreVector score_rows(std::span<const double> query, RowView<float> rows,
                       const Pool& pool);
ScoreVector score_rows(std::span<const double> query, RowView<double> rows,
                       const Pool& pool);

/// Permutation of [0, scores.size()) in ranking order: descending score,
/// ties by ascending ID (`ids[i]` names candidate i).
std::vector<std::size_t> rank_order(const ScoreVector& scores,
                                    std::span<const std::string> ids);
/// Same order for pool candidates named by the store's IDs.
std::vector<std::size_t> rank_order(const ScoreVector& scores,
                                    const EmbeddingStore& store, const Pool& pool);

RankedList rank(const ScoreVector& scores, std::span<const std::string> ids);
RankedList rank(const ScoreVector& scores, const EmbeddingStore& store,
                const Pool& pool);

/// First k pool rows under the ranking order. Throws Errc::KTooLarge.
std::vector<std::size_t> top_k_rows(std::span<const double> query,
                                    const EmbeddingStore& store, const Pool& pool,
                                    std::size_t k);
std::vector<std::size_t> top_k_rows(std::span<const double> query,
                                    RowView<double> rows,
                                    const std::vector<std::string>& ids,
                                    const Pool& pool, std::size_t k);

/// IDs of the k most similar rows of `store`, skipping `exclude`.
std::vector<std::string> top_k_neighbors(std::span<const double> query,
                                         const EmbeddingStore& store, std::size_t k,
                                         const std::set<std::string, std::less<>>& exclude = {});

}  // namespace rscir
