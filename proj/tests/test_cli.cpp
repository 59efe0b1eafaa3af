#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include "json.hpp"

#include "rscir/cli.hpp"
#include "rscir/embedstore.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;
using namespace rscir;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult rscir_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "rscir_cli_test";
    fs::remove_all(dir_);
    rscir::testing::make_synthetic_archive().write(dir_);
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static std::string at(const std::string& name) { return (dir_ / name).string(); }

  static std::vector<std::string> bundle_args(std::vector<std::string> head) {
    for (const std::string& s : std::vector<std::string>{"--store", at("images.emb1"), "--text-store", at("texts.emb1"), "--labels",
          at("labels.jsonl"), "--manifest", at("manifest.jsonl")})
      head.push_back(s);
    return head;
  }

  static inline fs::path dir_;
};

}  // namespace

TEST_F(Cli, ValidateCleanBundle) {
  auto r = rscir_cli(bundle_args({"validate", "--text-store-ctx", at("texts_ctx.emb1"), "--vocab",
                                  at("words.emb1"), "--composed", at("composed.emb1"),
                                  "--corpus-pos", at("corpus_pos.emb1"), "--corpus-neg",
                                  at("corpus_neg.emb1")}));
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("0 errors, 0 warnings"), std::string::npos) << r.out;
}

TEST_F(Cli, ValidateUnknownImage) {
  const auto bad = at("bad_manifest.jsonl");
  std::ofstream(bad)
      << R"({"query_id":"qx","image_id":"nowhere_17","modifier":"red","group":"color","target_value":"red","protocol":"class_attribute"})"
      << "\n";
  auto r = rscir_cli({"validate", "--store", at("images.emb1"), "--manifest", bad});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("nowhere_17"), std::string::npos) << r.out;
}

TEST_F(Cli, ValidateMissingComposedKey) {
  const auto full = load_embeddings(at("composed.emb1"));
  std::vector<std::string> ids;
  std::vector<float> rows;
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (full.id(i) == "red||noise3") continue;
    ids.push_back(full.id(i));
    rows.insert(rows.end(), full.row(i).begin(), full.row(i).end());
  }
  const auto path = at("composed_missing.emb1");
  save_embeddings(EmbeddingStore::create(ids, rows, full.dim(), true), path);
  auto r = rscir_cli(bundle_args({"validate", "--vocab", at("words.emb1"), "--composed", path}));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("MissingComposedEntry"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("red||noise3"), std::string::npos) << r.out;
}

TEST_F(Cli, ValidateCorruptStore) {
  const auto path = at("corrupt.emb1");
  std::ofstream(path, std::ios::binary) << "EMBX garbage";
  auto r = rscir_cli({"validate", "--store", path});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("BadMagic"), std::string::npos);
}

TEST_F(Cli, RetrieveSelfMatch) {
  auto r = rscir_cli({"retrieve", "--store", at("images.emb1"), "--method", "image_only",
                      "--query-image", "c1_red_07", "--topk", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0]["id"], "c1_red_07");
  EXPECT_EQ(j[0]["rank"], 1);
}

TEST_F(Cli, RetrieveWeicomLambdaZeroIsImageOnly) {
  const auto ids = [](const CliResult& r) {
    std::vector<std::string> out;
    for (const auto& e : nlohmann::json::parse(r.out)) out.push_back(e["id"]);
    return out;
  };
  auto w = rscir_cli({"retrieve", "--store", at("images.emb1"), "--text-store", at("texts.emb1"),
                      "--method", "weicom", "--lambda", "0", "--query-image", "c2_blue_11",
                      "--text", "red", "--topk", "50", "--exclude-query"});
  auto i = rscir_cli({"retrieve", "--store", at("images.emb1"), "--method", "image_only",
                      "--query-image", "c2_blue_11", "--topk", "50", "--exclude-query"});
  ASSERT_EQ(w.code, 0) << w.err;
  ASSERT_EQ(i.code, 0) << i.err;
  EXPECT_EQ(ids(w), ids(i));
}

TEST_F(Cli, RetrieveJsonRoundTrips) {
  auto r = rscir_cli({"retrieve", "--store", at("images.emb1"), "--text-store", at("texts.emb1"),
                      "--method", "product", "--query-image", "c0_red_00", "--text", "blue",
                      "--topk", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.size(), 5u);
  EXPECT_EQ(nlohmann::json::parse(j.dump()), j);
  for (std::size_t k = 1; k < j.size(); ++k)
    EXPECT_GE(j[k - 1]["score"].get<double>(), j[k]["score"].get<double>());
}

TEST_F(Cli, RetrieveUsageErrors) {
  auto unknown = rscir_cli({"retrieve", "--store", at("images.emb1"), "--method", "pic2word",
                            "--query-image", "c0_red_00", "--text", "blue"});
  EXPECT_EQ(unknown.code, 2);
  auto missing = rscir_cli({"retrieve", "--store", at("images.emb1"), "--method", "product"});
  EXPECT_EQ(missing.code, 2);
  auto bogus_flag = rscir_cli({"retrieve", "--frobnicate"});
  EXPECT_EQ(bogus_flag.code, 2);
  auto no_sub = rscir_cli({});
  EXPECT_EQ(no_sub.code, 2);
  auto data = rscir_cli({"retrieve", "--store", at("images.emb1"), "--method", "image_only",
                         "--query-image", "ghost"});
  EXPECT_EQ(data.code, 1);
}

TEST_F(Cli, EvaluatePrintsMaps) {
  auto r = rscir_cli(bundle_args({"evaluate", "--method", "product"}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("macro_map=", 0), 0u);
  EXPECT_NE(r.out.find(" overall_map="), std::string::npos);
}

TEST_F(Cli, EvaluatePerfectArchive) {
  // Every item is its own positive target under a trivially separable manifest.
  const auto man = at("perfect_manifest.jsonl");
  const auto lab = at("perfect_labels.jsonl");
  {
    std::ofstream m(man), l(lab);
    const auto archive = rscir::testing::make_synthetic_archive();
    for (const auto& rec : archive.manifest.records) {
      const std::string own = rec.image_id.find("_red_") != std::string::npos ? "red" : "blue";
      m << R"({"query_id":")" << rec.query_id << R"(","image_id":")" << rec.image_id
        << R"(","modifier":")" << own << R"(","group":"color","target_value":")" << own
        << R"(","protocol":"class_attribute"})" << "\n";
    }
    for (const auto& rec : archive.labels) l << to_jsonl(rec) << "\n";
  }
  auto r = rscir_cli({"evaluate", "--store", at("images.emb1"), "--labels", lab, "--manifest", man,
                      "--method", "image_only"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "macro_map=1.0000 overall_map=1.0000\n");
}

TEST_F(Cli, EvaluateReportsAreDeterministic) {
  const auto strip = [](const std::string& path) {
    auto j = nlohmann::ordered_json::parse(slurp(path));
    j.erase("generated_at");
    return j.dump();
  };
  std::vector<std::string> outs;
  for (const char* threads : {"1", "8", "1"}) {
    const auto out = at(std::string("report_") + threads + std::to_string(outs.size()) + ".json");
    auto r = rscir_cli(bundle_args({"evaluate", "--method", "freedom", "--vocab", at("words.emb1"),
                                    "--composed", at("composed.emb1"), "--k", "5", "--m", "3",
                                    "--n", "3", "--threads", threads, "--out", out}));
    ASSERT_EQ(r.code, 0) << r.err;
    outs.push_back(strip(out));
  }
  EXPECT_EQ(outs[0], outs[1]);
  EXPECT_EQ(outs[0], outs[2]);
}

TEST_F(Cli, EvaluateOutputFormats) {
  for (const char* fmt : {"csv", "md"}) {
    const auto out = at(std::string("report.") + fmt);
    auto r = rscir_cli(bundle_args({"evaluate", "--method", "sum", "--format", fmt, "--out", out}));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto text = slurp(out);
    EXPECT_NE(text.find("color"), std::string::npos) << text;
  }
}

TEST_F(Cli, EvaluateAbortOnEmpty) {
  const auto man = at("empty_manifest.jsonl");
  std::ofstream(man)
      << R"({"query_id":"q","image_id":"c0_red_00","modifier":"green","group":"color","target_value":"green","protocol":"class_attribute"})"
      << "\n";
  auto r = rscir_cli({"evaluate", "--store", at("images.emb1"), "--labels", at("labels.jsonl"),
                      "--manifest", man, "--method", "image_only", "--on-empty", "abort"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("EmptyPositives"), std::string::npos) << r.err;
}

TEST_F(Cli, SweepLambda) {
  const auto csv = at("sweep.csv");
  auto r = rscir_cli(bundle_args({"sweep", "--method", "weicom", "--param", "lambda", "--values",
                                  "0:0.5:1", "--csv", csv}));
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(slurp(csv));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u);

  const auto macro = [](const std::string& line) {
    std::istringstream f(line);
    std::string cell;
    for (int i = 0; i < 3; ++i) std::getline(f, cell, ',');
    return std::stod(cell);
  };
  const auto standalone = [&](const char* method) {
    const auto out = at(std::string("standalone_") + method + ".csv");
    auto e = rscir_cli(bundle_args({"evaluate", "--method", method, "--format", "csv", "--out", out}));
    EXPECT_EQ(e.code, 0) << e.err;
    std::istringstream s(slurp(out));
    std::string header, row;
    std::getline(s, header);
    std::getline(s, row);
    return macro(row);
  };
  EXPECT_EQ(macro(lines[1]), standalone("image_only"));
  EXPECT_EQ(macro(lines[3]), standalone("text_only"));
}

TEST_F(Cli, SweepMnRecordsK) {
  auto r = rscir_cli(bundle_args({"sweep", "--method", "freedom", "--vocab", at("words.emb1"),
                                  "--composed", at("composed.emb1"), "--k", "1", "--param", "mn",
                                  "--values", "1,7"}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("k=1"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("m=7 n=7"), std::string::npos) << r.out;
}

TEST_F(Cli, SweepUsageErrors) {
  EXPECT_EQ(rscir_cli(bundle_args({"sweep", "--param", "gamma", "--values", "1"})).code, 2);
  EXPECT_EQ(rscir_cli(bundle_args({"sweep", "--param", "lambda"})).code, 2);
  EXPECT_EQ(rscir_cli(bundle_args({"sweep", "--method", "weicom", "--param", "lambda", "--values",
                                   "0:-1:1"}))
                .code,
            2);
}

TEST_F(Cli, BasicRunsWithCorpora) {
  auto r = rscir_cli(bundle_args({"evaluate", "--method", "basic", "--text-store-ctx",
                                  at("texts_ctx.emb1"), "--corpus-pos", at("corpus_pos.emb1"),
                                  "--corpus-neg", at("corpus_neg.emb1"), "--p", "6", "--qe-k", "5",
                                  "--toggle", "harris=off"}));
  EXPECT_EQ(r.code, 0) << r.err;
  auto bad = rscir_cli(bundle_args({"evaluate", "--method", "basic", "--toggle", "sharpen=on"}));
  EXPECT_EQ(bad.code, 2);
}
