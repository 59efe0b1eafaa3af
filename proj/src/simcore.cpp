#include "rscir/simcore.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "rscir/error.hpp"

namespace rscir {

namespace {

template <typename T>
ScoreVector score_impl(std::span<const double> query, RowView<T> rows, const Pool& pool) {
  if (query.size() != rows.dim) {
    throw Error(Errc::DimensionMismatch,
                fmt::format("query dim {} vs store dim {}", query.size(), rows.dim));
  }
  if (pool.empty()) throw Error(Errc::EmptyPool, "candidate pool is empty");
  const std::size_t n_rows = rows.dim == 0 ? 0 : rows.data.size() / rows.dim;

  ScoreVector out;
  out.values.resize(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i] >= n_rows) {
      throw Error(Errc::UnresolvedImageId, fmt::format("pool row {} out of range", pool[i]));
    }
    const auto r = rows.row(pool[i]);
    double s = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) s += query[j] * static_cast<double>(r[j]);
    out.values[i] = s;
  }
  return out;
}

template <typename IdOf>
std::vector<std::size_t> order_by(const ScoreVector& scores, IdOf&& id_of, std::size_t k) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto before = [&](std::size_t a, std::size_t b) {
    const double sa = scores.values[a];
    const double sb = scores.values[b];
    if (sa != sb) return sa > sb;
    return id_of(a) < id_of(b);
  };
  if (k >= order.size()) {
    std::sort(order.begin(), order.end(), before);
  } else {
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                      order.end(), before);
    order.resize(k);
  }
  return order;
}

}  // namespace

Pool full_pool(const EmbeddingStore& store) {
  Pool pool(store.size());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  return pool;
}

Pool resolve_pool(const EmbeddingStore& store, std::span<const std::string> ids) {
  Pool pool;
  pool.reserve(ids.size());
  for (const auto& id : ids) pool.push_back(store.index_of(id));
  return pool;
}

ScoreVector score_against(std::span<const double> query, const EmbeddingStore& store,
                          const Pool& pool) {
  return score_impl(query, RowView<float>{store.data(), store.dim()}, pool);
}

ScoreVector score_rows(std::span<const double> query, RowView<float> rows,
                       const Pool& pool) {
  return score_impl(query, rows, pool);
}

ScoreVector score_rows(std::span<const double> query, RowView<double> rows,
                       const Pool& pool) {
  return score_impl(query, rows, pool);
}

std::vector<std::size_t> rank_order(const ScoreVector& scores,
                                    std::span<const std::string> ids) {
  if (scores.size() != ids.size()) {
    throw Error(Errc::LengthMismatch,
                fmt::format("{} scores for {} ids", scores.size(), ids.size()));
  }
  return order_by(scores, [&](std::size_t i) -> const std::string& { return ids[i]; },
                  scores.size());
}

std::vector<std::size_t> rank_order(const ScoreVector& scores,
                                    const EmbeddingStore& store, const Pool& pool) {
  if (scores.size() != pool.size()) {
    throw Error(Errc::LengthMismatch,
                fmt::format("{} scores for a pool of {}", scores.size(), pool.size()));
  }
  return order_by(
      scores, [&](std::size_t i) -> const std::string& { return store.id(pool[i]); },
      scores.size());
}

RankedList rank(const ScoreVector& scores, std::span<const std::string> ids) {
  const auto order = rank_order(scores, ids);
  RankedList out;
  out.ids.reserve(order.size());
  out.scores.reserve(order.size());
  for (std::size_t i : order) {
    out.ids.push_back(ids[i]);
    out.scores.push_back(scores.values[i]);
  }
  return out;
}

RankedList rank(const ScoreVector& scores, const EmbeddingStore& store,
                const Pool& pool) {
  const auto order = rank_order(scores, store, pool);
  RankedList out;
  out.ids.reserve(order.size());
  out.scores.reserve(order.size());
  for (std::size_t i : order) {
    out.ids.push_back(store.id(pool[i]));
    out.scores.push_back(scores.values[i]);
  }
  return out;
}

std::vector<std::size_t> top_k_rows(std::span<const double> query,
                                    const EmbeddingStore& store, const Pool& pool,
                                    std::size_t k) {
  if (k > pool.size()) {
    throw Error(Errc::KTooLarge, fmt::format("k={} exceeds pool size {}", k, pool.size()));
  }
  if (k == 0) return {};
  const ScoreVector scores = score_against(query, store, pool);
  auto order = order_by(
      scores, [&](std::size_t i) -> const std::string& { return store.id(pool[i]); }, k);
  for (auto& i : order) i = pool[i];
  return order;
}

std::vector<std::size_t> top_k_rows(std::span<const double> query, RowView<double> rows,
                                    const std::vector<std::string>& ids, const Pool& pool,
                                    std::size_t k) {
  if (k > pool.size()) {
    throw Error(Errc::KTooLarge, fmt::format("k={} exceeds pool size {}", k, pool.size()));
  }
  if (k == 0) return {};
  const ScoreVector scores = score_rows(query, rows, pool);
  auto order = order_by(
      scores, [&](std::size_t i) -> const std::string& { return ids[pool[i]]; }, k);
  for (auto& i : order) i = pool[i];
  return order;
}

std::vector<std::string> top_k_neighbors(std::span<const double> query,
                                         const EmbeddingStore& store, std::size_t k,
                                         const std::set<std::string, std::less<>>& exclude) {
  Pool pool;
  pool.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (!exclude.contains(store.id(i))) pool.push_back(i);
  }
  std::vector<std::string> out;
  for (std::size_t row : top_k_rows(query, store, pool, k)) out.push_back(store.id(row));
  return out;
}

}  // namespace rscir
