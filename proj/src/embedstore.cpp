#include "rscir/embedstore.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "rscir/error.hpp"

namespace rscir {

namespace {

constexpr std::string_view kMagic = "EMB1";

void put_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }
}

std::uint32_t get_u32_le(const char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return v;
}

double row_norm(std::span<const float> row) {
  double sq = 0.0;
  for (float x : row) sq += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(sq);
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

EmbeddingStore EmbeddingStore::create(std::vector<std::string> ids,
                                      std::vector<float> matrix,
                                      std::size_t dim, bool normalized) {
  if (ids.empty() || dim == 0) {
    throw Error(Errc::DimensionMismatch,
                fmt::format("store needs n >= 1 and d >= 1 (n={}, d={})",
                            ids.size(), dim));
  }
  if (matrix.size() != ids.size() * dim) {
    throw Error(Errc::DimensionMismatch,
                fmt::format("expected {} values for {}x{}, got {}",
                            ids.size() * dim, ids.size(), dim, matrix.size()));
  }
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    if (!std::isfinite(matrix[i])) {
      throw Error(Errc::NonFiniteValue,
                  fmt::format("row {} ('{}') column {}", i / dim,
                              ids[i / dim], i % dim));
    }
  }

  EmbeddingStore store;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto [it, inserted] = store.index_.emplace(ids[i], i);
    if (!inserted) {
      throw Error(Errc::DuplicateId, fmt::format("'{}' at rows {} and {}",
                                                 ids[i], it->second, i));
    }
  }

  if (normalized) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const double norm =
          row_norm(std::span<const float>(matrix).subspan(i * dim, dim));
      if (std::abs(norm - 1.0) > kNormTolerance) {
        throw Error(Errc::NotNormalized,
                    fmt::format("row {} ('{}') has norm {:.6g}", i, ids[i],
                                norm));
      }
    }
    store.matrix_ = std::move(matrix);
  } else {
    try {
      store.matrix_ = l2_normalize_rows(matrix, dim);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " (store ids)");
    }
  }
  store.ids_ = std::move(ids);
  store.dim_ = dim;
  return store;
}

std::vector<double> EmbeddingStore::row_as_double(std::size_t i) const {
  const auto r = row(i);
  return {r.begin(), r.end()};
}

std::optional<std::size_t> EmbeddingStore::find(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t EmbeddingStore::index_of(std::string_view id) const {
  if (auto row = find(id)) return *row;
  throw Error(Errc::UnresolvedImageId, fmt::format("'{}' not in store", id));
}

std::string EmbeddingStore::checksum() const {
  return fmt::format("{:016x}", fnv1a(encode_emb1(*this)));
}

std::vector<float> l2_normalize_rows(std::span<const float> matrix,
                                     std::size_t dim) {
  if (dim == 0 || matrix.size() % dim != 0) {
    throw Error(Errc::DimensionMismatch,
                fmt::format("{} values do not form rows of width {}",
                            matrix.size(), dim));
  }
  std::vector<float> out(matrix.size());
  for (std::size_t r = 0; r * dim < matrix.size(); ++r) {
    const auto row = matrix.subspan(r * dim, dim);
    const double norm = row_norm(row);
    if (!(norm > 0.0)) {
      throw Error(Errc::ZeroNormRow, fmt::format("row {}", r));
    }
    for (std::size_t c = 0; c < dim; ++c) {
      out[r * dim + c] = static_cast<float>(row[c] / norm);
    }
  }
  return out;
}

std::string encode_emb1(const EmbeddingStore& store) {
  nlohmann::ordered_json header;
  header["version"] = 1;
  header["dtype"] = "f32";
  header["rows"] = store.size();
  header["dim"] = store.dim();
  header["normalized"] = store.normalized();
  header["ids"] = store.ids();
  const std::string header_text = header.dump();

  std::string out;
  out.reserve(8 + header_text.size() + store.data().size() * 4);
  out.append(kMagic);
  put_u32_le(out, static_cast<std::uint32_t>(header_text.size()));
  out.append(header_text);
  for (float x : store.data()) put_u32_le(out, std::bit_cast<std::uint32_t>(x));
  return out;
}

Emb1Header parse_emb1_header(std::string_view bytes) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != kMagic) {
    throw Error(Errc::BadMagic, "file does not start with \"EMB1\"");
  }
  if (bytes.size() < 8) throw Error(Errc::HeaderParse, "truncated header length");
  const std::uint32_t header_len = get_u32_le(bytes.data() + 4);
  if (bytes.size() - 8 < header_len) {
    throw Error(Errc::HeaderParse,
                fmt::format("header length {} exceeds file size", header_len));
  }

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(8, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::HeaderParse, e.what());
  }

  Emb1Header out;
  try {
    if (header.at("version").get<int>() != 1) {
      throw Error(Errc::HeaderParse, "unsupported version");
    }
    if (header.at("dtype").get<std::string>() != "f32") {
      throw Error(Errc::HeaderParse, "dtype must be f32");
    }
    out.rows = header.at("rows").get<std::size_t>();
    out.dim = header.at("dim").get<std::size_t>();
    out.normalized = header.at("normalized").get<bool>();
    out.ids = header.at("ids").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::HeaderParse, e.what());
  }
  if (out.ids.size() != out.rows) {
    throw Error(Errc::HeaderParse,
                fmt::format("rows={} but {} ids", out.rows, out.ids.size()));
  }
  out.payload_offset = 8 + header_len;
  return out;
}

EmbeddingStore decode_emb1(std::string_view bytes) {
  Emb1Header header = parse_emb1_header(bytes);
  const std::size_t rows = header.rows;
  const std::size_t dim = header.dim;
  const std::string_view payload = bytes.substr(header.payload_offset);
  if (payload.size() != rows * dim * 4) {
    throw Error(Errc::DimensionMismatch,
                fmt::format("payload has {} bytes, expected {} ({}x{}x4)",
                            payload.size(), rows * dim * 4, rows, dim));
  }
  std::vector<float> matrix(rows * dim);
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    matrix[i] = std::bit_cast<float>(get_u32_le(payload.data() + 4 * i));
  }
  return EmbeddingStore::create(std::move(header.ids), std::move(matrix), dim,
                                header.normalized);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, fmt::format("cannot write '{}'", path.string()));
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(Errc::Io, fmt::format("short write to '{}'", path.string()));
}

EmbeddingStore load_embeddings(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    return decode_emb1(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("{}: {}", path.string(), e.what()));
  }
}

void save_embeddings(const EmbeddingStore& store,
                     const std::filesystem::path& path) {
  write_file(path, encode_emb1(store));
}

// --- VocabularyMemory -------------------------------------------------------

VocabularyMemory::VocabularyMemory(EmbeddingStore word_store,
                                   EmbeddingStore composed_table)
    : word_store_(std::move(word_store)),
      composed_table_(std::move(composed_table)) {
  if (word_store_.dim() != composed_table_.dim()) {
    throw Error(Errc::DimensionMismatch,
                fmt::format("vocabulary dim {} vs composed table dim {}",
                            word_store_.dim(), composed_table_.dim()));
  }
  for (const auto& w : word_store_.ids()) {
    if (w.find(kSeparator) != std::string::npos) {
      throw Error(Errc::InvalidRecord,
                  fmt::format("word '{}' contains the separator '||'", w));
    }
  }
}

std::string VocabularyMemory::composed_key(std::string_view modifier,
                                           std::string_view word) {
  std::string key;
  key.reserve(modifier.size() + word.size() + 2);
  key.append(modifier).append(kSeparator).append(word);
  return key;
}

std::optional<std::size_t> VocabularyMemory::composed_row(
    std::string_view modifier, std::string_view word) const {
  return composed_table_.find(composed_key(modifier, word));
}

std::vector<std::string> VocabularyMemory::missing_entries(
    std::span<const std::string> modifiers) const {
  std::vector<std::string> missing;
  for (const auto& m : modifiers) {
    for (const auto& w : words()) {
      if (!composed_row(m, w)) missing.push_back(composed_key(m, w));
    }
  }
  return missing;
}

void VocabularyMemory::require_coverage(
    std::span<const std::string> modifiers) const {
  for (const auto& m : modifiers) {
    if (m.find(kSeparator) != std::string::npos) {
      throw Error(Errc::InvalidRecord,
                  fmt::format("modifier '{}' contains the separator '||'", m));
    }
  }
  const auto missing = missing_entries(modifiers);
  if (missing.empty()) return;
  std::string listing;
  for (std::size_t i = 0; i < missing.size(); ++i) {
    if (i == 20) {
      listing += fmt::format(", ... ({} more)", missing.size() - 20);
      break;
    }
    if (i > 0) listing += ", ";
    listing += "\"" + missing[i] + "\"";
  }
  throw Error(Errc::MissingComposedEntry,
              fmt::format("{} missing key(s): {}", missing.size(), listing));
}

VocabularyMemory load_vocabulary(const std::filesystem::path& words,
                                 const std::filesystem::path& composed) {
  return VocabularyMemory(load_embeddings(words), load_embeddings(composed));
}

}  // namespace rscir
