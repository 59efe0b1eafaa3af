#include "rscir/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <tuple>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "rscir/composers.hpp"
#include "rscir/embedstore.hpp"
#include "rscir/error.hpp"
#include "rscir/evalkit.hpp"
#include "rscir/manifest.hpp"

namespace rscir::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string store;
  std::string text_store;
  std::string text_store_ctx;
  std::string labels;
  std::string manifest;
  std::string vocab;
  std::string composed;
  std::string corpus_pos;
  std::string corpus_neg;

  std::string method = "image_only";
  double lambda = 0.5;
  std::size_t k = 20;
  std::size_t m = 7;
  std::size_t n = 7;
  std::size_t p = 250;
  double alpha = 0.2;
  std::size_t qe_k = 25;
  double lambda_harris = 0.1;
  std::vector<std::string> toggles;

  std::size_t topk = 10;
  std::string query_image;
  std::string text;
  bool exclude_query = false;

  std::string param;
  std::string values;
  std::string csv;

  std::string out;
  std::string format = "json";
  unsigned threads = 1;
  std::string on_empty = "skip";
};

unsigned default_threads() {
  if (const char* env = std::getenv("RSCIR_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string vocabulary_label(const std::string& words, const std::string& composed) {
  return words + ":" + composed;
}

// Translates flags into a ComposerConfig and checks that every input the
// method reads was given.
ComposerConfig build_config(const Options& o, bool text_required) {
  ComposerConfig cfg;
  try {
    cfg.method = parse_method(o.method);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  cfg.lambda = o.lambda;
  cfg.k = o.k;
  cfg.m = o.m;
  cfg.n = o.n;
  cfg.p = o.p;
  cfg.alpha = o.alpha;
  cfg.qe_k = o.qe_k;
  cfg.lambda_harris = o.lambda_harris;

  bool contextual_explicit = false;
  for (const auto& t : o.toggles) {
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw UsageError(fmt::format("--toggle '{}': expected name=on|off", t));
    const std::string name = t.substr(0, eq);
    const std::string state = t.substr(eq + 1);
    if (state != "on" && state != "off") {
      throw UsageError(fmt::format("--toggle '{}': state must be on or off", t));
    }
    try {
      cfg.toggles.set(name, state == "on");
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    if (name == "contextualized_text") contextual_explicit = true;
  }
  // Without a contextualized text store the plain modifier embeddings are used.
  if (!contextual_explicit && o.text_store_ctx.empty()) cfg.toggles.contextualized_text = false;
  if (!o.vocab.empty()) cfg.vocabulary = vocabulary_label(o.vocab, o.composed);

  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  const auto need = [](const std::string& value, const char* flag, std::string_view why) {
    if (value.empty()) throw UsageError(fmt::format("{} is required {}", flag, why));
  };
  need(o.store, "--store", "");
  const bool uses_text = cfg.method != Method::ImageOnly && cfg.method != Method::FreeDom;
  if (uses_text && text_required) {
    if (cfg.method == Method::Basic && cfg.toggles.contextualized_text) {
      need(o.text_store_ctx, "--text-store-ctx", "when contextualized_text is on");
    } else {
      need(o.text_store, "--text-store", fmt::format("for --method {}", o.method));
    }
  }
  if (cfg.method == Method::FreeDom) {
    need(o.vocab, "--vocab", "for --method freedom");
    need(o.composed, "--composed", "for --method freedom");
  }
  if (cfg.method == Method::Basic) {
    if (cfg.toggles.centering || cfg.toggles.projection) {
      need(o.corpus_pos, "--corpus-pos", "for BASIC centering/projection");
    }
    if (cfg.toggles.projection) need(o.corpus_neg, "--corpus-neg", "for BASIC projection");
  }
  return cfg;
}

// Stores and derived state, loaded lazily and shared across sweep points.
class Session {
 public:
  explicit Session(const Options& o) : o_(o) {}

  const EmbeddingStore& images() { return load(images_, o_.store); }

  Resources resources(const ComposerConfig& cfg) {
    Resources res;
    res.images = &images();
    if (!o_.text_store.empty()) res.texts = &load(texts_, o_.text_store);
    if (!o_.text_store_ctx.empty()) res.texts_contextualized = &load(texts_ctx_, o_.text_store_ctx);
    if (cfg.method == Method::FreeDom) res.memory = &memory(cfg.vocabulary);
    if (cfg.method == Method::Basic) res.basic = &basic(cfg);
    return res;
  }

 private:
  const EmbeddingStore& load(std::optional<EmbeddingStore>& slot, const std::string& path) {
    if (!slot) slot.emplace(load_embeddings(path));
    return *slot;
  }

  const VocabularyMemory& memory(const std::string& label) {
    auto it = memories_.find(label);
    if (it != memories_.end()) return *it->second;
    const auto sep = label.rfind(':');
    if (sep == std::string::npos) {
      throw UsageError(fmt::format("vocabulary '{}': expected WORDS.emb1:COMPOSED.emb1", label));
    }
    auto memory = std::make_unique<VocabularyMemory>(
        load_vocabulary(label.substr(0, sep), label.substr(sep + 1)));
    return *memories_.emplace(label, std::move(memory)).first->second;
  }

  const BasicContext& basic(const ComposerConfig& cfg) {
    const auto key = std::make_tuple(cfg.toggles.centering, cfg.toggles.projection,
                                     cfg.toggles.projection ? cfg.p : 0,
                                     cfg.toggles.projection ? cfg.alpha : 0.0);
    auto it = contexts_.find(key);
    if (it != contexts_.end()) return *it->second;
    const EmbeddingStore* pos = o_.corpus_pos.empty() ? nullptr : &load(corpus_pos_, o_.corpus_pos);
    const EmbeddingStore* neg = o_.corpus_neg.empty() ? nullptr : &load(corpus_neg_, o_.corpus_neg);
    auto ctx = std::make_unique<BasicContext>(images(), pos, neg, cfg);
    return *contexts_.emplace(key, std::move(ctx)).first->second;
  }

  const Options& o_;
  std::optional<EmbeddingStore> images_, texts_, texts_ctx_, corpus_pos_, corpus_neg_;
  std::map<std::string, std::unique_ptr<VocabularyMemory>> memories_;
  std::map<std::tuple<bool, bool, std::size_t, double>, std::unique_ptr<BasicContext>> contexts_;
};

EmptyPolicy parse_policy(const std::string& s) {
  if (s == "skip") return EmptyPolicy::Skip;
  if (s == "abort") return EmptyPolicy::Abort;
  throw UsageError(fmt::format("--on-empty must be skip or abort, got '{}'", s));
}

void emit(const Options& o, const std::string& contents, std::ostream& out) {
  if (o.out.empty() || o.out == "-") {
    out << contents;
  } else {
    write_file(o.out, contents);
  }
}

// --- validate ---------------------------------------------------------------

struct Findings {
  std::size_t errors = 0;
  std::size_t warnings = 0;
  std::ostream& out;

  void error(std::string_view file, std::string_view category, std::string_view msg) {
    ++errors;
    out << fmt::format("error [{}] {}: {}\n", category, file, msg);
  }
  void warning(std::string_view file, std::string_view category, std::string_view msg) {
    ++warnings;
    out << fmt::format("warning [{}] {}: {}\n", category, file, msg);
  }
};

std::optional<EmbeddingStore> check_store(Findings& f, const std::string& path) {
  if (path.empty()) return std::nullopt;
  try {
    const std::string bytes = read_file(path);
    const Emb1Header header = parse_emb1_header(bytes);
    EmbeddingStore store = decode_emb1(bytes);
    if (!header.normalized) {
      f.warning(path, "NotNormalized", "header declares normalized=false; rows renormalized on load");
    }
    return store;
  } catch (const Error& e) {
    f.error(path, to_string(e.code()), e.what());
    return std::nullopt;
  }
}

int cmd_validate(const Options& o, std::ostream& out) {
  Findings f{0, 0, out};
  const auto images = check_store(f, o.store);
  const auto texts = check_store(f, o.text_store);
  const auto texts_ctx = check_store(f, o.text_store_ctx);
  const auto words = check_store(f, o.vocab);
  const auto composed = check_store(f, o.composed);
  const auto pos = check_store(f, o.corpus_pos);
  const auto neg = check_store(f, o.corpus_neg);

  if (images) {
    const std::pair<const std::optional<EmbeddingStore>*, const std::string*> others[] = {
        {&texts, &o.text_store}, {&texts_ctx, &o.text_store_ctx}, {&words, &o.vocab},
        {&composed, &o.composed}, {&pos, &o.corpus_pos}, {&neg, &o.corpus_neg}};
    for (const auto& [store, path] : others) {
      if (*store && (*store)->dim() != images->dim()) {
        f.error(*path, "DimensionMismatch",
                fmt::format("dim {} differs from image store dim {}", (*store)->dim(), images->dim()));
      }
    }
  }

  std::optional<Manifest> manifest;
  if (!o.manifest.empty()) {
    try {
      manifest = load_manifest(o.manifest);
    } catch (const Error& e) {
      f.error(o.manifest, to_string(e.code()), e.what());
    }
  }
  std::optional<std::vector<LabelRecord>> labels;
  if (!o.labels.empty()) {
    try {
      labels = load_labels(o.labels);
    } catch (const Error& e) {
      f.error(o.labels, to_string(e.code()), e.what());
    }
  }

  if (labels && images) {
    std::size_t unknown = 0;
    for (const auto& l : *labels) {
      if (!images->find(l.image_id)) ++unknown;
    }
    if (unknown > 0) {
      f.warning(o.labels, "UnresolvedImageId",
                fmt::format("{} labelled image(s) are not in the image store", unknown));
    }
  }

  if (manifest) {
    std::set<std::string, std::less<>> labelled;
    if (labels) {
      for (const auto& l : *labels) labelled.insert(l.image_id);
    }
    bool refs_ok = true;
    for (const auto& r : manifest->records) {
      if (images && !images->find(r.image_id)) {
        refs_ok = false;
        f.error(o.manifest, "UnresolvedImageId",
                fmt::format("query '{}': image '{}' not in {}", r.query_id, r.image_id, o.store));
      }
      if (labels && !labelled.contains(r.image_id)) {
        refs_ok = false;
        f.error(o.manifest, "UnresolvedImageId",
                fmt::format("query '{}': image '{}' has no label in {}", r.query_id, r.image_id,
                            o.labels));
      }
      for (const auto& c : r.candidates) {
        if (images && !images->find(c)) {
          refs_ok = false;
          f.error(o.manifest, "UnresolvedImageId",
                  fmt::format("query '{}': candidate '{}' not in {}", r.query_id, c, o.store));
        }
      }
    }

    const auto modifiers = manifest->modifiers();
    for (const auto& [store, path] :
         {std::pair{&texts, &o.text_store}, std::pair{&texts_ctx, &o.text_store_ctx}}) {
      if (!*store) continue;
      for (const auto& m : modifiers) {
        if (!(*store)->find(m)) {
          f.error(*path, "MissingResource", fmt::format("no text embedding for modifier '{}'", m));
        }
      }
    }
    if (words && composed) {
      try {
        const VocabularyMemory memory(*words, *composed);
        for (const auto& key : memory.missing_entries(modifiers)) {
          f.error(o.composed, "MissingComposedEntry", fmt::format("\"{}\"", key));
        }
      } catch (const Error& e) {
        f.error(o.vocab, to_string(e.code()), e.what());
      }
    }

    if (refs_ok && images && labels) {
      try {
        const RelevanceTable rel = build_relevance(*manifest, *labels, *images, EmptyPolicy::Skip);
        for (const auto& w : rel.warnings) f.warning(o.manifest, "EmptyPositives", w);
        for (std::size_t i = 0; i < rel.entries.size(); ++i) {
          const auto& r = manifest->records[i];
          if (r.protocol == Protocol::SceneState && rel.entries[i].positives.size() > 1) {
            f.warning(o.manifest, "MultiplePositives",
                      fmt::format("query '{}' has {} positives", r.query_id,
                                  rel.entries[i].positives.size()));
          }
        }
      } catch (const Error& e) {
        f.error(o.manifest, to_string(e.code()), e.what());
      }
    }
  } else if (words && composed) {
    try {
      const VocabularyMemory memory(*words, *composed);
    } catch (const Error& e) {
      f.error(o.vocab, to_string(e.code()), e.what());
    }
  }

  out << fmt::format("{} errors, {} warnings\n", f.errors, f.warnings);
  return f.errors == 0 ? kExitOk : kExitDataError;
}

// --- retrieve ---------------------------------------------------------------

int cmd_retrieve(const Options& o, std::ostream& out) {
  if (o.query_image.empty()) throw UsageError("--query-image is required");
  ComposerConfig cfg = build_config(o, true);
  if (cfg.method != Method::ImageOnly && o.text.empty()) {
    throw UsageError(fmt::format("--text is required for --method {}", o.method));
  }
  if (o.format != "json" && o.format != "csv") {
    throw UsageError("retrieve supports --format json or csv");
  }
  Session session(o);
  const EmbeddingStore& images = session.images();
  Pool pool;
  const std::size_t query_row = images.index_of(o.query_image);
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (!o.exclude_query || i != query_row) pool.push_back(i);
  }
  const Resources res = session.resources(cfg);
  const std::vector<std::string> modifiers{o.text};
  check_resources(cfg, res, cfg.method == Method::ImageOnly ? std::vector<std::string>{} : modifiers);

  QueryRecord record;
  record.query_id = "adhoc";
  record.image_id = o.query_image;
  record.modifier = o.text;
  const QueryResult result = run_query(record, cfg, res, pool);

  const std::size_t n = std::min(o.topk, result.ranked.ids.size());
  std::string text;
  if (o.format == "json") {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < n; ++i) {
      nlohmann::ordered_json e;
      e["rank"] = i + 1;
      e["id"] = result.ranked.ids[i];
      e["score"] = result.ranked.scores[i];
      arr.push_back(e);
    }
    text = arr.dump(2) + "\n";
  } else {
    text = "rank,id,score\n";
    for (std::size_t i = 0; i < n; ++i) {
      text += fmt::format("{},{},{}\n", i + 1, result.ranked.ids[i],
                          format_value(result.ranked.scores[i]));
    }
  }
  emit(o, text, out);
  return kExitOk;
}

// --- evaluate / sweep -------------------------------------------------------

struct Prepared {
  Manifest manifest;
  RelevanceTable relevance;
};

Prepared prepare(const Options& o, Session& session) {
  if (o.manifest.empty()) throw UsageError("--manifest is required");
  if (o.labels.empty()) throw UsageError("--labels is required");
  const EmptyPolicy policy = parse_policy(o.on_empty);
  Prepared p{load_manifest(o.manifest), {}};
  if (p.manifest.records.empty()) {
    throw Error(Errc::InvalidRecord, fmt::format("{}: manifest has no queries", o.manifest));
  }
  const Protocol first = p.manifest.records.front().protocol;
  for (const auto& r : p.manifest.records) {
    if (r.protocol != first) {
      throw Error(Errc::MixedProtocols,
                  fmt::format("{}: query '{}' uses {}, first query uses {}", o.manifest,
                              r.query_id, to_string(r.protocol), to_string(first)));
    }
  }
  p.relevance = build_relevance(p.manifest, load_labels(o.labels), session.images(), policy);
  return p;
}

std::string render_report(const Options& o, const EvalReport& report) {
  if (o.format == "json") return report.to_json(utc_timestamp()).dump(2) + "\n";
  const std::string label = report.config.value("method", "run");
  if (o.format == "csv") return report_csv(report, label);
  const std::pair<std::string, EvalReport> rows[] = {{label, report}};
  return report_markdown(rows);
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const ComposerConfig cfg = build_config(o, true);
  Session session(o);
  const Prepared p = prepare(o, session);
  const EvalReport report =
      evaluate(p.manifest, p.relevance, cfg, session.resources(cfg), EvalOptions{o.threads});
  if (!o.out.empty()) write_file(o.out, render_report(o, report));
  out << fmt::format("macro_map={:.4f} overall_map={:.4f}\n", report.macro_map, report.overall_map);
  return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  if (o.param.empty() || o.values.empty()) throw UsageError("--param and --values are required");
  if (std::find(sweep_params().begin(), sweep_params().end(), o.param) == sweep_params().end()) {
    throw UsageError(fmt::format("unknown sweep parameter '{}'", o.param));
  }
  const ComposerConfig base = build_config(o, true);
  std::vector<std::string> values;
  try {
    values = parse_sweep_values(o.values);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  Session session(o);
  const Prepared p = prepare(o, session);
  const EvalFn eval_fn = [&](const ComposerConfig& cfg) {
    return evaluate(p.manifest, p.relevance, cfg, session.resources(cfg), EvalOptions{o.threads});
  };
  const auto points = sweep(base, o.param, values, eval_fn);

  const std::string csv = sweep_csv(points);
  if (!o.csv.empty()) write_file(o.csv, csv);
  if (!o.out.empty()) {
    std::string text;
    if (o.format == "json") {
      nlohmann::ordered_json j;
      j["report_version"] = 1;
      j["generated_at"] = utc_timestamp();
      j["param"] = o.param;
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const auto& pt : points) {
        nlohmann::ordered_json e;
        e["param_value"] = pt.value;
        e["report"] = pt.report.to_json();
        e["report"].erase("generated_at");
        arr.push_back(e);
      }
      j["points"] = arr;
      text = j.dump(2) + "\n";
    } else if (o.format == "csv") {
      text = csv;
    } else {
      std::vector<std::pair<std::string, EvalReport>> rows;
      for (const auto& pt : points) rows.emplace_back(o.param + "=" + pt.value, pt.report);
      text = report_markdown(rows);
    }
    write_file(o.out, text);
  }
  for (const auto& pt : points) {
    out << fmt::format("{}={} macro_map={:.4f} overall_map={:.4f}\n", o.param, pt.value,
                       pt.report.macro_map, pt.report.overall_map);
  }
  if (o.csv.empty() && o.out.empty()) out << csv;
  return kExitOk;
}

void add_inputs(CLI::App* cmd, Options& o) {
  cmd->add_option("--store", o.store, "Image embedding store (EMB1)");
  cmd->add_option("--text-store", o.text_store, "Modifier text embeddings (EMB1, ids = modifiers)");
  cmd->add_option("--text-store-ctx", o.text_store_ctx,
                  "Contextualized modifier text embeddings for BASIC");
  cmd->add_option("--labels", o.labels, "Label table (JSONL)");
  cmd->add_option("--manifest", o.manifest, "Query manifest (JSONL)");
  cmd->add_option("--vocab", o.vocab, "Vocabulary word embeddings (EMB1, ids = words)");
  cmd->add_option("--composed", o.composed, "Composed text table (EMB1, ids = modifier||word)");
  cmd->add_option("--corpus-pos", o.corpus_pos, "BASIC positive text corpus C+ (EMB1)");
  cmd->add_option("--corpus-neg", o.corpus_neg, "BASIC negative text corpus C- (EMB1)");
}

void add_method(CLI::App* cmd, Options& o) {
  cmd->add_option("--method", o.method,
                  "text_only|image_only|sum|product|weicom|freedom|basic")
      ->capture_default_str();
  cmd->add_option("--lambda", o.lambda, "WeiCom text weight")->capture_default_str();
  cmd->add_option("--k", o.k, "FreeDom proxy images (query included)")->capture_default_str();
  cmd->add_option("--m", o.m, "FreeDom words kept")->capture_default_str();
  cmd->add_option("--n", o.n, "FreeDom words per proxy")->capture_default_str();
  cmd->add_option("--p", o.p, "BASIC principal components")->capture_default_str();
  cmd->add_option("--alpha", o.alpha, "BASIC contrastive scale")->capture_default_str();
  cmd->add_option("--qe-k", o.qe_k, "BASIC query-expansion neighbours")->capture_default_str();
  cmd->add_option("--lambda-harris", o.lambda_harris, "BASIC Harris penalty weight")
      ->capture_default_str();
  cmd->add_option("--toggle", o.toggles,
                  "BASIC switch name=on|off (centering, projection, harris, minrange_norm, "
                  "contextualized_text, query_expansion)");
}

void add_run(CLI::App* cmd, Options& o) {
  cmd->add_option("--out", o.out, "Output file");
  cmd->add_option("--format", o.format, "json|csv|md")
      ->check(CLI::IsMember({"json", "csv", "md"}))
      ->capture_default_str();
  cmd->add_option("--threads", o.threads, "Worker threads (default: $RSCIR_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--on-empty", o.on_empty, "Queries without positives: skip|abort")
      ->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  o.threads = default_threads();

  CLI::App app{"Training-free composed image retrieval engine for Earth-observation archives",
               "rscir"};
  app.require_subcommand(1);

  auto* validate = app.add_subcommand("validate", "Check stores, manifests and cross-references");
  add_inputs(validate, o);

  auto* retrieve = app.add_subcommand("retrieve", "Rank the image store for one composed query");
  add_inputs(retrieve, o);
  add_method(retrieve, o);
  retrieve->add_option("--query-image", o.query_image, "Reference image ID");
  retrieve->add_option("--text", o.text, "Modifier (key into the text store)");
  retrieve->add_option("--topk", o.topk, "Results to print")->capture_default_str();
  retrieve->add_flag("--exclude-query", o.exclude_query, "Drop the reference image from the pool");
  retrieve->add_option("--out", o.out, "Output file (default: stdout)");
  retrieve->add_option("--format", o.format, "json|csv")->capture_default_str();

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate a manifest and write a report");
  add_inputs(evaluate_cmd, o);
  add_method(evaluate_cmd, o);
  add_run(evaluate_cmd, o);

  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate once per value of one parameter");
  add_inputs(sweep_cmd, o);
  add_method(sweep_cmd, o);
  add_run(sweep_cmd, o);
  sweep_cmd->add_option("--param", o.param,
                        "lambda|k|mn|qe_k|p|alpha|lambda_harris|vocabulary");
  sweep_cmd->add_option("--values", o.values,
                        "start:step:stop or comma list (vocabulary: WORDS.emb1:COMPOSED.emb1,...)");
  sweep_cmd->add_option("--csv", o.csv, "Flat CSV output");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(o, out);
    if (retrieve->parsed()) return cmd_retrieve(o, out);
    if (evaluate_cmd->parsed()) return cmd_evaluate(o, out);
    if (sweep_cmd->parsed()) return cmd_sweep(o, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.code()) {
      case Errc::UnknownMethod:
      case Errc::UnknownParam:
      case Errc::InvalidConfig:
        return kExitUsage;
      default:
        return kExitDataError;
    }
  }
  return kExitUsage;
}

}  // namespace rscir::cli
