#include "rscir/composers.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "rscir/error.hpp"

namespace rscir {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::TextOnly: return "text_only";
    case Method::ImageOnly: return "image_only";
    case Method::Sum: return "sum";
    case Method::Product: return "product";
    case Method::WeiCom: return "weicom";
    case Method::FreeDom: return "freedom";
    case Method::Basic: return "basic";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  for (Method m : {Method::TextOnly, Method::ImageOnly, Method::Sum, Method::Product,
                   Method::WeiCom, Method::FreeDom, Method::Basic}) {
    if (to_string(m) == s) return m;
  }
  throw Error(Errc::UnknownMethod, fmt::format("'{}'", s));
}

void BasicToggles::set(std::string_view name, bool on) {
  if (name == "centering") centering = on;
  else if (name == "projection") projection = on;
  else if (name == "harris") harris = on;
  else if (name == "minrange_norm") minrange_norm = on;
  else if (name == "contextualized_text") contextualized_text = on;
  else if (name == "query_expansion") query_expansion = on;
  else throw Error(Errc::InvalidConfig, fmt::format("unknown toggle '{}'", name));
}

void ComposerConfig::validate() const {
  switch (method) {
    case Method::WeiCom:
      if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw Error(Errc::InvalidConfig, fmt::format("lambda must be in [0,1], got {}", lambda));
      }
      break;
    case Method::FreeDom:
      if (k < 1 || m < 1 || n < 1) {
        throw Error(Errc::InvalidConfig,
                    fmt::format("freedom needs k, m, n >= 1 (k={}, m={}, n={})", k, m, n));
      }
      break;
    case Method::Basic:
      if (p < 1) throw Error(Errc::InvalidConfig, "basic needs p >= 1");
      if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw Error(Errc::InvalidConfig, fmt::format("alpha must be >= 0, got {}", alpha));
      }
      if (!(lambda_harris >= 0.0) || !std::isfinite(lambda_harris)) {
        throw Error(Errc::InvalidConfig,
                    fmt::format("lambda_harris must be >= 0, got {}", lambda_harris));
      }
      break;
    default:
      break;
  }
}

nlohmann::ordered_json ComposerConfig::to_json() const {
  nlohmann::ordered_json j;
  j["method"] = to_string(method);
  switch (method) {
    case Method::Sum:
      j["fusion"] = "(s_f + s_g) / 2";
      break;
    case Method::Product:
      j["fusion"] = "s_f * s_g";
      break;
    case Method::WeiCom:
      j["lambda"] = lambda;
      j["calibration"] = "Phi(zscore(s)), population std over the query's candidate pool";
      j["fusion"] = "lambda * s_g' + (1 - lambda) * s_f'";
      break;
    case Method::FreeDom:
      j["k"] = k;
      j["m"] = m;
      j["n"] = n;
      j["vocabulary"] = vocabulary;
      j["proxies"] = "query image + (k-1) nearest pool images";
      j["template"] = "{modifier} {word}";
      j["word_tie_break"] = "frequency desc, summed cosine desc, word asc";
      break;
    case Method::Basic: {
      j["p"] = p;
      j["alpha"] = alpha;
      j["qe_k"] = qe_k;
      j["lambda_harris"] = lambda_harris;
      nlohmann::ordered_json t;
      t["centering"] = toggles.centering;
      t["projection"] = toggles.projection;
      t["harris"] = toggles.harris;
      t["minrange_norm"] = toggles.minrange_norm;
      t["contextualized_text"] = toggles.contextualized_text;
      t["query_expansion"] = toggles.query_expansion;
      j["toggles"] = t;
      j["centering_means"] = "image: database mean; text: C+ corpus mean";
      j["calibration"] = "(s - min) / (max - min) over the candidate pool";
      j["fusion"] = "s_f' * s_g' - lambda_harris * (s_f' + s_g')^2";
      j["expansion_rule"] = "uniform mean of query and qe_k nearest pool images";
      break;
    }
    default:
      break;
  }
  return j;
}

std::string ComposerConfig::summary() const {
  std::string out;
  const auto j = to_json();
  for (const auto& [key, value] : j.items()) {
    if (value.is_string() && key != "method" && key != "vocabulary") continue;
    if (!out.empty()) out += ' ';
    if (value.is_object()) {
      std::string on;
      for (const auto& [tk, tv] : value.items()) {
        if (tv.get<bool>()) on += (on.empty() ? "" : ",") + tk;
      }
      out += fmt::format("{}={}", key, on.empty() ? "none" : on);
    } else if (value.is_string()) {
      out += fmt::format("{}={}", key, value.get<std::string>());
    } else {
      out += fmt::format("{}={}", key, value.dump());
    }
  }
  return out;
}

ComposedQuery make_query(const EmbeddingStore& images, const EmbeddingStore& texts,
                         std::string_view image_id, std::string_view modifier) {
  if (images.dim() != texts.dim()) {
    throw Error(Errc::DimensionMismatch, fmt::format("image dim {} vs text dim {}",
                                                     images.dim(), texts.dim()));
  }
  const auto text_row = texts.find(modifier);
  if (!text_row) {
    throw Error(Errc::MissingResource,
                fmt::format("no text embedding for modifier '{}'", modifier));
  }
  return {images.row_as_double(images.index_of(image_id)),
          texts.row_as_double(*text_row), std::string(modifier)};
}

// --- unimodal and simple fusion --------------------------------------------

ScoreVector compose_text_only(const ComposedQuery& q, const EmbeddingStore& db,
                              const Pool& pool) {
  return score_against(q.text, db, pool);
}

ScoreVector compose_image_only(const ComposedQuery& q, const EmbeddingStore& db,
                               const Pool& pool) {
  return score_against(q.image, db, pool);
}

ScoreVector compose_sum(const ComposedQuery& q, const EmbeddingStore& db,
                        const Pool& pool) {
  ScoreVector out = score_against(q.image, db, pool);
  const ScoreVector text = score_against(q.text, db, pool);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.values[i] = 0.5 * (out.values[i] + text.values[i]);
  }
  return out;
}

ScoreVector compose_product(const ComposedQuery& q, const EmbeddingStore& db,
                            const Pool& pool) {
  ScoreVector out = score_against(q.image, db, pool);
  const ScoreVector text = score_against(q.text, db, pool);
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] *= text.values[i];
  return out;
}

ScoreVector compose_weicom(const ComposedQuery& q, const EmbeddingStore& db,
                           const Pool& pool, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(Errc::InvalidConfig, fmt::format("lambda must be in [0,1], got {}", lambda));
  }
  const ScoreVector image = cdf_calibrate(zscore(score_against(q.image, db, pool)));
  const ScoreVector text = cdf_calibrate(zscore(score_against(q.text, db, pool)));
  ScoreVector out;
  out.degenerate = image.degenerate || text.degenerate;
  out.values.resize(image.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.values[i] = lambda * text.values[i] + (1.0 - lambda) * image.values[i];
  }
  return out;
}

// --- FreeDom ----------------------------------------------------------------

FreedomQuery freedom_query(const ComposedQuery& q, const EmbeddingStore& db,
                           const Pool& pool, const VocabularyMemory& memory,
                           std::size_t k, std::size_t m, std::size_t n) {
  if (k < 1 || m < 1 || n < 1) {
    throw Error(Errc::InvalidConfig,
                fmt::format("freedom needs k, m, n >= 1 (k={}, m={}, n={})", k, m, n));
  }
  if (k > pool.size() + 1) {
    throw Error(Errc::KTooLarge,
                fmt::format("k={} proxies need a pool of at least {}, got {}", k, k - 1,
                            pool.size()));
  }
  const EmbeddingStore& words = memory.word_store();
  if (n > words.size()) {
    throw Error(Errc::KTooLarge,
                fmt::format("n={} exceeds vocabulary size {}", n, words.size()));
  }
  if (words.dim() != db.dim()) {
    throw Error(Errc::DimensionMismatch,
                fmt::format("vocabulary dim {} vs database dim {}", words.dim(), db.dim()));
  }

  FreedomQuery out;
  out.proxies = top_k_rows(q.image, db, pool, k - 1);

  struct Vote {
    std::size_t frequency = 0;
    double similarity = 0.0;
  };
  std::map<std::size_t, Vote> votes;  // word row -> vote
  const Pool all_words = full_pool(words);
  const auto vote_for = [&](std::span<const double> proxy) {
    for (std::size_t row : top_k_rows(proxy, words, all_words, n)) {
      Vote& v = votes[row];
      ++v.frequency;
      v.similarity += dot(proxy, words.row_as_double(row));
    }
  };
  vote_for(q.image);
  for (std::size_t row : out.proxies) vote_for(db.row_as_double(row));

  std::vector<std::pair<std::size_t, Vote>> ranked(votes.begin(), votes.end());
  std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    if (a.second.frequency != b.second.frequency) {
      return a.second.frequency > b.second.frequency;
    }
    if (a.second.similarity != b.second.similarity) {
      return a.second.similarity > b.second.similarity;
    }
    return words.id(a.first) < words.id(b.first);
  });
  if (ranked.size() > m) ranked.resize(m);

  const EmbeddingStore& table = memory.composed_table();
  std::vector<double> acc(db.dim(), 0.0);
  for (const auto& [row, vote] : ranked) {
    const std::string& word = words.id(row);
    const auto composed = memory.composed_row(q.modifier, word);
    if (!composed) {
      throw Error(Errc::MissingComposedEntry,
                  fmt::format("\"{}\"", VocabularyMemory::composed_key(q.modifier, word)));
    }
    const auto e = table.row(*composed);
    const double weight = static_cast<double>(vote.frequency);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += weight * static_cast<double>(e[j]);
    out.words.emplace_back(word, vote.frequency);
  }
  out.vector = renormalize(acc);
  return out;
}

ScoreVector compose_freedom(const ComposedQuery& q, const EmbeddingStore& db,
                            const Pool& pool, const VocabularyMemory& memory,
                            std::size_t k, std::size_t m, std::size_t n) {
  const FreedomQuery fq = freedom_query(q, db, pool, memory, k, m, n);
  return score_against(fq.vector, db, pool);
}

// --- BASIC ------------------------------------------------------------------

namespace {

std::vector<double> column_mean(const EmbeddingStore& store) {
  std::vector<double> mean(store.dim(), 0.0);
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto r = store.row(i);
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += r[j];
  }
  for (double& x : mean) x /= static_cast<double>(store.size());
  return mean;
}

}  // namespace

BasicContext::BasicContext(const EmbeddingStore& database, const EmbeddingStore* c_plus,
                           const EmbeddingStore* c_minus, const ComposerConfig& cfg)
    : dim_(database.dim()), centering_(cfg.toggles.centering) {
  const bool projection = cfg.toggles.projection;
  if ((centering_ || projection) && c_plus == nullptr) {
    throw Error(Errc::MissingResource, "BASIC centering/projection needs the C+ corpus");
  }
  if (projection && c_minus == nullptr) {
    throw Error(Errc::MissingResource, "BASIC projection needs the C- corpus");
  }
  for (const EmbeddingStore* corpus : {c_plus, c_minus}) {
    if (corpus != nullptr && corpus->dim() != dim_) {
      throw Error(Errc::DimensionMismatch,
                  fmt::format("corpus dim {} vs database dim {}", corpus->dim(), dim_));
    }
  }

  if (centering_) {
    image_mean_ = column_mean(database);
    text_mean_ = column_mean(*c_plus);
  }
  if (projection) {
    basis_ = contrastive_projection(*c_plus, *c_minus, cfg.alpha, cfg.p);
  }
  if (centering_ || projection) {
    rows_.resize(database.size() * dim_);
    for (std::size_t i = 0; i < database.size(); ++i) {
      const auto t = transform_image(database.row_as_double(i));
      std::copy(t.begin(), t.end(), rows_.begin() + static_cast<std::ptrdiff_t>(i * dim_));
    }
  }
}

std::vector<double> BasicContext::transform(std::span<const double> v,
                                            const std::vector<double>& mean) const {
  std::vector<double> out(v.begin(), v.end());
  if (centering_) {
    std::vector<double> centered(out.size());
    for (std::size_t j = 0; j < out.size(); ++j) centered[j] = out[j] - mean[j];
    // A vector equal to the mean has no direction left; it stays uncentered.
    if (norm(centered) > 1e-12) out = renormalize(centered);
  }
  if (basis_) out = project(*basis_, out).values;
  return out;
}

std::vector<double> BasicContext::transform_image(std::span<const double> v) const {
  return transform(v, image_mean_);
}

std::vector<double> BasicContext::transform_text(std::span<const double> v) const {
  return transform(v, text_mean_);
}

void BasicContext::check_compatible(const ComposerConfig& cfg) const {
  if (cfg.toggles.centering != centering_ || cfg.toggles.projection != projection()) {
    throw Error(Errc::InvalidConfig,
                "BASIC context was built with different centering/projection toggles");
  }
  if (projection() && (cfg.p != p() || cfg.alpha != alpha())) {
    throw Error(Errc::InvalidConfig,
                fmt::format("BASIC context built with p={} alpha={}, config has p={} alpha={}",
                            p(), alpha(), cfg.p, cfg.alpha));
  }
}

ScoreVector compose_basic(const ComposedQuery& q, const EmbeddingStore& db,
                          const Pool& pool, const BasicContext& context,
                          const ComposerConfig& cfg) {
  context.check_compatible(cfg);
  cfg.validate();

  std::vector<double> image = context.transform_image(q.image);
  const std::vector<double> text = context.transform_text(q.text);

  const auto score = [&](std::span<const double> v) {
    return context.transforms_database() ? score_rows(v, context.database(), pool)
                                         : score_against(v, db, pool);
  };

  if (cfg.toggles.query_expansion && cfg.qe_k > 0) {
    const std::size_t k = std::min(cfg.qe_k, pool.size());
    const auto neighbors =
        context.transforms_database()
            ? top_k_rows(image, context.database(), db.ids(), pool, k)
            : top_k_rows(image, db, pool, k);
    std::vector<double> mean = image;
    for (std::size_t row : neighbors) {
      if (context.transforms_database()) {
        const auto r = context.database().row(row);
        for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += r[j];
      } else {
        const auto r = db.row(row);
        for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += r[j];
      }
    }
    for (double& x : mean) x /= static_cast<double>(neighbors.size() + 1);
    image = renormalize(mean);
  }

  ScoreVector s_f = score(image);
  ScoreVector s_g = score(text);
  if (cfg.toggles.minrange_norm) {
    s_f = minrange_normalize(s_f);
    s_g = minrange_normalize(s_g);
  }

  ScoreVector out;
  out.degenerate = s_f.degenerate || s_g.degenerate;
  out.values.resize(s_f.size());
  const double penalty = cfg.toggles.harris ? cfg.lambda_harris : 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double a = s_f.values[i];
    const double b = s_g.values[i];
    out.values[i] = cfg.toggles.harris ? a * b - penalty * (a + b) * (a + b) : a * b;
  }
  return out;
}

// --- dispatch ---------------------------------------------------------------

void check_resources(const ComposerConfig& cfg, const Resources& res,
                     std::span<const std::string> modifiers) {
  cfg.validate();
  if (res.images == nullptr) throw Error(Errc::MissingResource, "image store");
  const bool needs_text = cfg.method != Method::ImageOnly && cfg.method != Method::FreeDom;
  const bool contextual = cfg.method == Method::Basic && cfg.toggles.contextualized_text;
  const EmbeddingStore* texts = contextual ? res.texts_contextualized : res.texts;
  if (needs_text) {
    if (texts == nullptr) {
      throw Error(Errc::MissingResource, contextual ? "contextualized text store"
                                                    : "text store");
    }
    if (texts->dim() != res.images->dim()) {
      throw Error(Errc::DimensionMismatch, fmt::format("text dim {} vs image dim {}",
                                                       texts->dim(), res.images->dim()));
    }
    for (const auto& m : modifiers) {
      if (!texts->find(m)) {
        throw Error(Errc::MissingResource,
                    fmt::format("no text embedding for modifier '{}'", m));
      }
    }
  }
  if (cfg.method == Method::FreeDom) {
    if (res.memory == nullptr) throw Error(Errc::MissingResource, "vocabulary memory");
    res.memory->require_coverage(modifiers);
  }
  if (cfg.method == Method::Basic) {
    if (res.basic == nullptr) throw Error(Errc::MissingResource, "BASIC context");
    res.basic->check_compatible(cfg);
  }
}

ScoreVector compose(std::string_view image_id, std::string_view modifier,
                    const ComposerConfig& cfg, const Resources& res, const Pool& pool) {
  if (res.images == nullptr) throw Error(Errc::MissingResource, "image store");
  const EmbeddingStore& db = *res.images;

  ComposedQuery q;
  q.image = db.row_as_double(db.index_of(image_id));
  q.modifier = std::string(modifier);
  if (cfg.method != Method::ImageOnly && cfg.method != Method::FreeDom) {
    const bool contextual = cfg.method == Method::Basic && cfg.toggles.contextualized_text;
    const EmbeddingStore* texts = contextual ? res.texts_contextualized : res.texts;
    if (texts == nullptr) {
      throw Error(Errc::MissingResource, contextual ? "contextualized text store"
                                                    : "text store");
    }
    q = make_query(db, *texts, image_id, modifier);
  }

  switch (cfg.method) {
    case Method::TextOnly: return compose_text_only(q, db, pool);
    case Method::ImageOnly: return compose_image_only(q, db, pool);
    case Method::Sum: return compose_sum(q, db, pool);
    case Method::Product: return compose_product(q, db, pool);
    case Method::WeiCom: return compose_weicom(q, db, pool, cfg.lambda);
    case Method::FreeDom:
      if (res.memory == nullptr) throw Error(Errc::MissingResource, "vocabulary memory");
      return compose_freedom(q, db, pool, *res.memory, cfg.k, cfg.m, cfg.n);
    case Method::Basic:
      if (res.basic == nullptr) throw Error(Errc::MissingResource, "BASIC context");
      return compose_basic(q, db, pool, *res.basic, cfg);
  }
  throw Error(Errc::UnknownMethod, fmt::format("{}", static_cast<int>(cfg.method)));
}

QueryResult run_query(const QueryRecord& record, const ComposerConfig& cfg,
                      const Resources& res, const Pool& pool) {
  const ScoreVector scores = compose(record.image_id, record.modifier, cfg, res, pool);
  return {rank(scores, *res.images, pool), pool};
}

}  // namespace rscir
