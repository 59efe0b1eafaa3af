// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "json.hpp"
#include "oracles.hpp"
#include "reference.hpp"
#include "rscir/cli.hpp"
#include "rscir/composers.hpp"
#include "rscir/evalkit.hpp"
#include "rscir/numerics.hpp"
#include "rscir/simcore.hpp"
#include "synthetic.hpp"

using namespace rscir;
namespace rt = rscir::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && secs >= budget_s) {
    o.pass = false;
    o.detail += fmt::format(" (over budget {:.0f} s)", budget_s);
  }
  if (!o.pass) ++failures;
  std::cout << fmt::format("{} {:<34} {:7.3f} s  {}\n", o.pass ? "PASS" : "FAIL", name, secs,
                           o.detail)
            << std::flush;
}

std::vector<double> unit_gauss(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> g;
  std::vector<double> v(d);
  for (auto& x : v) x = g(rng);
  return renormalize(v);
}

EmbeddingStore random_store(std::mt19937_64& rng, std::size_t n, std::size_t d,
                            const std::string& prefix = "x") {
  std::normal_distribution<float> g;
  std::vector<float> m(n * d);
  for (auto& x : m) x = g(rng);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(fmt::format("{}{:04}", prefix, i));
  return EmbeddingStore::create(ids, m, d, false);
}

Matrix from_eigen(const Eigen::MatrixXd& e) {
  Matrix m(e.rows(), e.cols());
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j) m(i, j) = e(i, j);
  return m;
}

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows, m.cols);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) e(i, j) = m(i, j);
  return e;
}

// --- criteria ---------------------------------------------------------------

Outcome ap_oracle() {
  std::mt19937_64 rng(101);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng() % 50;
    RankedList r;
    for (std::size_t i = 0; i < n; ++i) {
      r.ids.push_back(fmt::format("c{}", rng() % 100000));
      r.scores.push_back(-double(i));
    }
    std::sort(r.ids.begin(), r.ids.end());
    r.ids.erase(std::unique(r.ids.begin(), r.ids.end()), r.ids.end());
    r.scores.resize(r.ids.size());
    std::shuffle(r.ids.begin(), r.ids.end(), rng);
    std::set<std::string> pos;
    std::set<std::string, std::less<>> pos2;
    const std::size_t k = 1 + rng() % r.ids.size();
    for (std::size_t i = 0; i < k; ++i) {
      const auto& id = r.ids[rng() % r.ids.size()];
      pos.insert(id);
      pos2.insert(id);
    }
    const double engine = average_precision(r, pos2);
    const double oracle = rt::brute_force_ap(r.ids, pos);
    if (std::memcmp(&engine, &oracle, sizeof(double)) != 0)
      return {false, fmt::format("instance {}: {} vs {}", t, engine, oracle)};
  }
  return {true, "1000/1000 bitwise equal"};
}

Outcome weicom_endpoints() {
  std::mt19937_64 rng(202);
  int checked = 0;
  while (checked < 200) {
    auto db = random_store(rng, 100, 16);
    ComposedQuery q{unit_gauss(rng, 16), unit_gauss(rng, 16), "m"};
    const Pool pool = full_pool(db);
    const auto f = compose_image_only(q, db, pool);
    const auto g = compose_text_only(q, db, pool);
    std::set<double> fs(f.values.begin(), f.values.end()), gs(g.values.begin(), g.values.end());
    if (fs.size() != f.size() || gs.size() != g.size()) continue;  // need distinct scores
    if (rank(compose_weicom(q, db, pool, 0.0), db, pool).ids != rank(f, db, pool).ids)
      return {false, fmt::format("query {}: lambda=0 differs from image-only", checked)};
    if (rank(compose_weicom(q, db, pool, 1.0), db, pool).ids != rank(g, db, pool).ids)
      return {false, fmt::format("query {}: lambda=1 differs from text-only", checked)};
    ++checked;
  }
  return {true, "200/200 queries, both endpoints exact"};
}

Outcome calibration() {
  double worst = 0, worst_sym = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double x = -6.0 + 12.0 * i / (n - 1);
    worst = std::max(worst, std::fabs(std_normal_cdf(x) - rt::phi_series(x)));
    worst_sym = std::max(worst_sym, std::fabs(std_normal_cdf(x) + std_normal_cdf(-x) - 1.0));
  }
  return {worst <= 1e-7 && worst_sym <= 1e-12,
          fmt::format("max |err| {:.2e} (tol 1e-7), max symmetry gap {:.2e} (tol 1e-12)", worst,
                      worst_sym)};
}

Outcome eigen() {
  std::mt19937_64 rng(303);
  double worst_res = 0, worst_orth = 0;
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + static_cast<int>(rng() % 64);
    const Eigen::MatrixXd a = rt::random_symmetric(rng, n);
    const auto e = sym_eigen(from_eigen(a));
    const Eigen::MatrixXd v = to_eigen(e.eigenvectors);
    const double scale = 1.0 + a.norm();
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd x = v.row(i).transpose();
      worst_res = std::max(worst_res, (a * x - e.eigenvalues[i] * x).norm() / scale);
      if (i > 0 && e.eigenvalues[i - 1] < e.eigenvalues[i])
        return {false, fmt::format("matrix {}: eigenvalues not descending", t)};
    }
    worst_orth = std::max(worst_orth,
                          (v * v.transpose() - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff());
  }
  double worst_angle = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 2 + rng() % 30, m = d + 5 + rng() % 20;
    Matrix cp(m, d), cm(m, d);
    std::normal_distribution<double> g;
    for (std::size_t j = 0; j < d; ++j) {
      const double s = 1.0 + 3.0 * double(j);  // separated spectrum
      for (std::size_t i = 0; i < m; ++i) cp(i, j) = s * g(rng);
    }
    for (auto& x : cm.data) x = g(rng);
    const std::size_t p = 1 + rng() % d;
    const auto b = contrastive_projection(cp, cm, 0.0, p);
    const Eigen::MatrixXd ref = rt::eigen_top_subspace(rt::eigen_covariance(to_eigen(cp)), int(p));
    worst_angle = std::max(worst_angle, rt::max_principal_angle(to_eigen(b.basis), ref));
  }
  const bool ok = worst_res <= 1e-8 && worst_orth <= 1e-8 && worst_angle <= 1e-6;
  return {ok, fmt::format("residual {:.1e}, orthonormality {:.1e}, PCA angle {:.1e}", worst_res,
                          worst_orth, worst_angle)};
}

Outcome pipeline_collapse() {
  std::mt19937_64 rng(404);
  ComposerConfig cfg;
  cfg.method = Method::Basic;
  cfg.toggles = BasicToggles::all_off();
  cfg.lambda_harris = 0.0;
  for (int t = 0; t < 100; ++t) {
    auto db = random_store(rng, 60, 12);
    ComposedQuery q{unit_gauss(rng, 12), unit_gauss(rng, 12), "m"};
    const Pool pool = full_pool(db);
    BasicContext ctx(db, nullptr, nullptr, cfg);
    if (rank(compose_basic(q, db, pool, ctx, cfg), db, pool).ids !=
        rank(compose_product(q, db, pool), db, pool).ids)
      return {false, fmt::format("instance {}: BASIC all-off differs from product", t)};
  }
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    auto words = random_store(rng, 40, 12, "w");
    std::vector<std::string> keys;
    std::vector<float> rows;
    std::normal_distribution<float> g;
    for (const auto& w : words.ids()) {
      keys.push_back("mod||" + w);
      for (int j = 0; j < 12; ++j) rows.push_back(g(rng));
    }
    VocabularyMemory memory(words, EmbeddingStore::create(keys, rows, 12, false));
    auto db = random_store(rng, 30, 12);
    ComposedQuery q{unit_gauss(rng, 12), {}, "mod"};
    const auto fq = freedom_query(q, db, full_pool(db), memory, 1, 1, 1);
    std::size_t best = 0;
    double best_s = -2;
    for (std::size_t i = 0; i < words.size(); ++i) {
      const double s = dot(q.image, words.row_as_double(i));
      if (s > best_s) best_s = s, best = i;
    }
    const auto row = memory.composed_table().row_as_double(
        *memory.composed_row("mod", words.id(best)));
    worst = std::max(worst, std::fabs(1.0 - dot(fq.vector, row) / norm(row)));
  }
  return {worst <= 1e-9,
          fmt::format("BASIC = product on 100/100; FreeDom k=m=n=1 max |1-cos| {:.1e}", worst)};
}

Outcome synthetic_benchmark() {
  const auto archive = rt::make_synthetic_archive();
  const auto memory = archive.memory();
  const auto relevance = build_relevance(archive.manifest, archive.labels, archive.images);
  std::string detail;
  double worst = 0;
  std::map<Method, double> maps;
  for (Method m : {Method::TextOnly, Method::ImageOnly, Method::Sum, Method::Product,
                   Method::WeiCom, Method::FreeDom, Method::Basic}) {
    const ComposerConfig cfg = rt::synthetic_config(m);
    std::optional<BasicContext> basic;
    if (m == Method::Basic) basic.emplace(archive.images, &archive.corpus_pos, &archive.corpus_neg, cfg);
    Resources res;
    res.images = &archive.images;
    res.texts = &archive.texts;
    res.texts_contextualized = &archive.texts_contextualized;
    res.memory = &memory;
    res.basic = basic ? &*basic : nullptr;
    const auto report = evaluate(archive.manifest, relevance, cfg, res);
    const auto ref = rt::reference_evaluate(archive, cfg);
    worst = std::max(worst, std::fabs(report.macro_map - ref.macro_map));
    maps[m] = report.macro_map;
    detail += fmt::format("{}={:.4f} ", to_string(m), report.macro_map);
  }
  const bool order = maps[Method::Product] > maps[Method::ImageOnly] &&
                     maps[Method::Product] > maps[Method::TextOnly];
  return {worst <= 1e-9 && order,
          detail + fmt::format("| max |engine-ref| {:.1e}{}", worst,
                               order ? "" : " | product does not beat unimodal")};
}

Outcome aggregation() {
  const auto q = [](std::string g, std::string v, double ap) { return QueryAP{g + v, g, v, ap}; };
  auto a = aggregate_attribute_balanced(
      {q("color", "x", 1.0), q("color", "x", 1.0), q("color", "x", 1.0), q("shape", "y", 0.0)});
  auto b = aggregate_attribute_balanced({q("color", "v1", 0.2), q("color", "v1", 0.4),
                                         q("color", "v2", 0.9)});
  std::vector<QueryAP> xq;
  for (int i = 0; i < 10; ++i) xq.push_back(q("hurricane", "post-hurricane", 0.3));
  for (int i = 0; i < 2; ++i) xq.push_back(q("flood", "post-flood", 0.9));
  auto c = aggregate_disaster_balanced(xq);
  // Hand values, each expressed in the same floating-point operations as the
  // worked arithmetic.
  const double group_b = ((0.2 + 0.4) / 2 + 0.9) / 2;
  double hurricane = 0;
  for (int i = 0; i < 10; ++i) hurricane += 0.3;
  const double macro_c = ((0.9 + 0.9) / 2 + hurricane / 10) / 2;  // flood, hurricane
  double overall_c = 0;
  for (const auto& e : xq) overall_c += e.ap;
  overall_c /= 12;
  const bool ok = a.macro_map == 0.5 && b.per_group.at("color") == group_b &&
                  std::fabs(group_b - 0.6) < 1e-15 && c.macro_map == macro_c &&
                  c.overall_map == overall_c && std::fabs(c.macro_map - 0.6) < 1e-15 &&
                  std::fabs(c.overall_map - 0.4) < 1e-15;
  return {ok, fmt::format("macro {} / group {} / xview macro {} overall {}", a.macro_map,
                          b.per_group.at("color"), c.macro_map, c.overall_map)};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "rscir_acceptance";
  fs::remove_all(dir);
  rt::make_synthetic_archive().write(dir);
  const auto at = [&](const char* f) { return (dir / f).string(); };
  std::vector<std::string> reports;
  std::string detail;
  for (const std::string method : {"weicom", "freedom", "basic"}) {
    std::vector<std::string> texts;
    for (const char* threads : {"1", "1", "8"}) {
      const std::string out = (dir / fmt::format("{}_{}_{}.json", method, threads, texts.size())).string();
      std::ostringstream so, se;
      const int code = cli::run(
          {"evaluate", "--store", at("images.emb1"), "--text-store", at("texts.emb1"),
           "--text-store-ctx", at("texts_ctx.emb1"), "--labels", at("labels.jsonl"), "--manifest",
           at("manifest.jsonl"), "--vocab", at("words.emb1"), "--composed", at("composed.emb1"),
           "--corpus-pos", at("corpus_pos.emb1"), "--corpus-neg", at("corpus_neg.emb1"),
           "--method", method, "--k", "5", "--m", "3", "--n", "3", "--p", "6", "--qe-k", "5",
           "--threads", threads, "--out", out},
          so, se);
      if (code != 0) return {false, method + ": " + se.str()};
      std::ifstream in(out);
      std::string line, text;
      while (std::getline(in, line))
        if (line.find("\"generated_at\"") == std::string::npos) text += line + "\n";
      texts.push_back(text);
    }
    if (texts[0] != texts[1]) return {false, method + ": repeated run differs"};
    if (texts[0] != texts[2]) return {false, method + ": --threads 8 differs from --threads 1"};
    detail += method + " ";
  }
  fs::remove_all(dir);
  return {true, detail + "byte-identical (timestamp line excluded)"};
}

}  // namespace

int main() {
  criterion("ap_oracle_equivalence", 5, ap_oracle);
  criterion("weicom_endpoint_identities", 5, weicom_endpoints);
  criterion("calibration_correctness", 0, calibration);
  criterion("eigendecomposition", 30, eigen);
  criterion("pipeline_collapse", 0, pipeline_collapse);
  criterion("synthetic_archive_benchmark", 10, synthetic_benchmark);
  criterion("evaluation_protocol_arithmetic", 0, aggregation);
  criterion("determinism", 0, determinism);
  std::cout << (failures == 0 ? "all criteria passed\n"
                              : fmt::format("{} criterion/criteria failed\n", failures));
  return failures == 0 ? 0 : 1;
}
