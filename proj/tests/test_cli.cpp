#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>

#include "alignkit/config.hpp"
#include "alignkit/core.hpp"
#include "test_util.hpp"

using namespace alignkit;

namespace {

const std::string kDemo = ALIGNKIT_DEMO_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const testutil::TempDir& dir, const std::string& args) {
  const auto err_path = dir.file("stderr.txt");
  const std::string cmd = std::string(ALIGNKIT_CLI) + " " + args + " 2>" + err_path;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, {}, {}};
  std::string out;
  char buf[4096];
  while (auto n = fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out, text::read_file(err_path)};
}

std::string demo(const std::string& name) { return kDemo + "/" + name; }

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Config, ParsesKeysCommentsAndBlankLines) {
  const auto s = parse_settings("# comment\n\niterations = 7\n  lambda=2.5  \nmethod = itermax\nmin_tokens = 3\n");
  EXPECT_EQ(s.train.iterations, 7);
  EXPECT_EQ(s.train.lambda, 2.5);
  EXPECT_EQ(s.sim.method, Method::itermax);
  EXPECT_EQ(s.filter.min_tokens, 3u);
  EXPECT_EQ(s.train.p0, TrainConfig{}.p0);
}

TEST(Config, ErrorsNameTheLine) {
  try {
    parse_settings("iterations = 3\ncolour = red\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()), "config line 2: unknown key 'colour'");
  }
  EXPECT_THROW(parse_settings("lambda = fast\n"), Error);
  EXPECT_THROW(parse_settings("lambda\n"), Error);
  EXPECT_THROW(parse_settings("iterations = -1\n"), Error);
  EXPECT_THROW(parse_settings("p0 = 1.5\n"), Error);
}

TEST(Config, FormatRoundTrips) {
  Settings s;
  s.train.iterations = 9;
  s.train.variant = Variant::model1;
  s.sim.level = Level::word;
  s.sent.skip_penalty = -0.25;
  const auto back = parse_settings(format_settings(s));
  EXPECT_EQ(format_settings(back), format_settings(s));
}

TEST(Cli, EvaluateIdenticalGold) {
  testutil::TempDir dir;
  const auto r = run(dir, "evaluate --hyp " + demo("gold.tsv") + " --gold " + demo("gold.tsv"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("P=1 R=1 AER=0", 0), 0u) << r.out;
  const auto tsv = run(dir, "evaluate --format tsv --hyp " + demo("gold.tsv") + " --gold " + demo("gold.tsv"));
  EXPECT_EQ(line_count(tsv.out), 2u);
}

TEST(Cli, TrainAlignEvaluate) {
  testutil::TempDir dir;
  const auto model = dir.file("model");
  auto r = run(dir, "train --src " + demo("train.de") + " --tgt " + demo("train.rm") + " --out " + model +
                        " --iterations 5");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(model + ".rev"));
  EXPECT_NE(r.err.find("iteration 5 log-likelihood"), std::string::npos);
  r = run(dir, "align --model " + model + " --src " + demo("train.de") + " --tgt " + demo("train.rm"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(r.out), line_count(text::read_file(demo("train.de"))));
  text::write_file(dir.file("hyp.txt"), r.out);
  r = run(dir, "evaluate --hyp " + dir.file("hyp.txt") + " --gold " + demo("gold.tsv"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("P=", 0), 0u);
  for (const char* sym : {"none", "intersection", "union"})
    EXPECT_EQ(run(dir, "align --sym " + std::string(sym) + " --model " + model + " --src " + demo("train.de") +
                           " --tgt " + demo("train.rm")).code, 0);
}

TEST(Cli, ScaleWritesOneRowPerSize) {
  testutil::TempDir dir;
  const auto r = run(dir, "scale --gold " + demo("gold.tsv") + " --src " + demo("train.de") + " --tgt " +
                              demo("train.rm") + " --sizes 2,5 --iterations 3");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("size\tprecision\trecall\taer\tseconds\n", 0), 0u);
  EXPECT_EQ(line_count(r.out), 3u);
  const auto bad = run(dir, "scale --gold " + demo("gold.tsv") + " --src " + demo("train.de") + " --tgt " +
                                demo("train.rm") + " --sizes 5,2");
  EXPECT_EQ(bad.code, 1);
}

TEST(Cli, SegmentAndSentalignDocuments) {
  testutil::TempDir dir;
  auto r = run(dir, "segment --docs " + demo("docs.jsonl"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(r.out), 2u);
  EXPECT_NE(r.out.find("\"Die Katze ist alt.\""), std::string::npos);
  r = run(dir, "sentalign --docs " + demo("docs.jsonl") + " --src-lang de --tgt-lang rm --dict " +
                   demo("dict.tsv") + " --out-src " + dir.file("s") + " --out-tgt " + dir.file("t") +
                   " --beads " + dir.file("b"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(text::read_file(dir.file("s")), "Der Hund schläft.\nDie Katze ist alt.\nDas Buch ist neu.\n");
  EXPECT_EQ(line_count(text::read_file(dir.file("t"))), 3u);
  EXPECT_EQ(line_count(text::read_file(dir.file("b"))), 4u);
}

TEST(Cli, FilterReportsDroppedLines) {
  testutil::TempDir dir;
  const auto src = dir.write("s", "ein kleines Haus\nja\neins zwei drei\n");
  const auto tgt = dir.write("t", "una chasa pitschna\ngea\nin dus trais quatter otg nov diesch indesch dudesch\n");
  const auto r = run(dir, "filter --src " + src + " --tgt " + tgt + " --out-src " + dir.file("os") + " --out-tgt " +
                              dir.file("ot") + " --report " + dir.file("rep"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(text::read_file(dir.file("os")), "ein kleines Haus\n");
  const auto rep = text::read_file(dir.file("rep"));
  EXPECT_EQ(line_count(rep), 3u);
  EXPECT_NE(rep.find("\n2\t"), std::string::npos);
  EXPECT_NE(rep.find("\n3\t"), std::string::npos);
}

TEST(Cli, SimalignReadsEmbeddingRecords) {
  testutil::TempDir dir;
  const auto emb = dir.write(
      "e.jsonl",
      R"({"id": 1, "layer": 8, "src_sub2word": [0, 1], "tgt_sub2word": [0, 1], "src_vecs": [[1, 0], [0, 1]], "tgt_vecs": [[0, 1], [1, 0]]})"
      "\n");
  const auto r = run(dir, "simalign --embeddings " + emb + " --method match --lines 3");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "\n0-1 1-0\n\n");
  EXPECT_EQ(run(dir, "simalign --embeddings " + emb + " --method nearest").code, 1);
}

TEST(Cli, GridWritesHtmlPerPair) {
  testutil::TempDir dir;
  const auto r = run(dir, "grid --gold " + demo("gold.tsv") + " --out-dir " + dir.file("g") + " --ids 1 --text");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir.file("g/pair-1.html")));
  EXPECT_TRUE(std::filesystem::exists(dir.file("g/pair-1.txt")));
  EXPECT_FALSE(std::filesystem::exists(dir.file("g/pair-0.html")));
}

TEST(Cli, ExportGoldFromStore) {
  testutil::TempDir dir;
  const auto store = dir.file("store.tsv");
  const auto gold = text::read_file(demo("gold.tsv"));
  text::write_file(store, gold.substr(0, gold.find('\n') + 1));
  const auto r = run(dir, "export-gold --src " + demo("train.de") + " --tgt " + demo("train.rm") + " --store " + store);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, gold.substr(0, gold.find('\n') + 1));
}

TEST(Cli, ExitCodes) {
  testutil::TempDir dir;
  EXPECT_EQ(run(dir, "").code, 2);
  EXPECT_EQ(run(dir, "evaluate --bogus x --hyp a --gold b").code, 2);
  EXPECT_EQ(run(dir, "evaluate --gold " + demo("gold.tsv")).code, 2);
  EXPECT_EQ(run(dir, "frobnicate").code, 2);
  EXPECT_EQ(run(dir, "--help").code, 0);
  EXPECT_EQ(run(dir, "--version").out, "0.1.0\n");
  const auto missing = run(dir, "evaluate --hyp " + dir.file("nope") + " --gold " + demo("gold.tsv"));
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.err.find("cannot open"), std::string::npos);
}

TEST(Cli, ConfigFileSetsDefaultsAndFlagsOverride) {
  testutil::TempDir dir;
  const auto conf = dir.write("a.conf", "iterations = 2\nlambda = 1.5\n");
  auto r = run(dir, "--config " + conf + " train --src " + demo("train.de") + " --tgt " + demo("train.rm") +
                        " --out " + dir.file("m"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("iterations = 2, variant = diagonal, lambda = 1.5"), std::string::npos) << r.err;
  EXPECT_EQ(r.err.find("iteration 3 "), std::string::npos);
  r = run(dir, "train --config " + conf + " --iterations 3 --src " + demo("train.de") + " --tgt " +
                   demo("train.rm") + " --out " + dir.file("m"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("iteration 3 "), std::string::npos);
  EXPECT_NE(r.err.find("config " + conf), std::string::npos);
  const auto bad = dir.write("b.conf", "colour = red\n");
  r = run(dir, "--config " + bad + " evaluate --hyp " + demo("gold.tsv") + " --gold " + demo("gold.tsv"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("unknown key 'colour'"), std::string::npos);
}

TEST(Cli, DemoConfigIsValid) {
  EXPECT_NO_THROW(read_settings(demo("alignkit.conf")));
}
