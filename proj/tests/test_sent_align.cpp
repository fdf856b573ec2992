#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "alignkit/sent_align.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace alignkit;

namespace {

Document doc(std::string key, std::string lang, std::string body) {
  return Document{std::move(key), std::move(lang), split_paragraphs(body)};
}

std::vector<std::pair<std::size_t, std::size_t>> shapes(const std::vector<AlignedPairCandidate>& beads) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& b : beads) out.emplace_back(b.src_count, b.tgt_count);
  return out;
}

}  // namespace

TEST(Segment, PlainSentences) {
  EXPECT_EQ(segment_sentences(doc("k", "de", "Er kam. Sie ging."), {}),
            (std::vector<std::string>{"Er kam.", "Sie ging."}));
}

TEST(Segment, AbbreviationSuppressesSplit) {
  EXPECT_EQ(segment_sentences(doc("k", "rm", "La pag. 5 è vegnida."), {"pag"}).size(), 1u);
  EXPECT_EQ(segment_sentences(doc("k", "rm", "La pag. 5 è vegnida."), {}).size(), 2u);
}

TEST(Segment, DigitOnlyWordSuppressesSplit) {
  EXPECT_EQ(segment_sentences(doc("k", "rm", "Anno 2003. Il chantun è grond."), {}).size(), 1u);
}

TEST(Segment, SingleLetterInitials) {
  EXPECT_EQ(segment_sentences(doc("k", "de", "Von J. Muster verfasst. Neu."), {}).size(), 2u);
}

TEST(Segment, QuotesAndOtherTerminators) {
  const auto s = segment_sentences(doc("k", "de", "Wer kam? «Ich!» Er lachte: «Gut.» Dann ging er."), {});
  EXPECT_EQ(s, (std::vector<std::string>{"Wer kam?", "«Ich!»", "Er lachte: «Gut.»", "Dann ging er."}));
}

TEST(Segment, LowercaseContinuationDoesNotSplit) {
  EXPECT_EQ(segment_sentences(doc("k", "de", "Das ist z. b. so."), {}).size(), 1u);
}

TEST(Segment, ParagraphsNeverMerge) {
  const auto d = doc("k", "de", "Erster Absatz\nohne Punkt\n\n  \nZweiter. Dritter.");
  EXPECT_EQ(d.paragraphs.size(), 2u);
  EXPECT_EQ(segment_sentences(d, {}),
            (std::vector<std::string>{"Erster Absatz ohne Punkt", "Zweiter.", "Dritter."}));
}

TEST(Documents, ReadJsonLines) {
  testutil::TempDir dir;
  const auto p = dir.write("d.jsonl",
                           "{\"doc_key\": \"a\", \"lang\": \"de\", \"text\": \"Eins. Zwei.\"}\n\n"
                           "{\"doc_key\": \"a\", \"lang\": \"rm\", \"text\": \"In. Dus.\"}\n");
  const auto docs = read_documents(p);
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[1].lang, "rm");
  const auto bad = dir.write("bad.jsonl", "{\"doc_key\": \"a\"}\n");
  EXPECT_THROW(read_documents(bad), Error);
}

TEST(PairDocuments, Examples) {
  const std::vector<Document> docs{doc("k1", "de", "a"), doc("k1", "rm", "b"), doc("k2", "de", "c")};
  const auto r = pair_documents(docs, "de", "rm");
  ASSERT_EQ(r.pairs.size(), 1u);
  EXPECT_EQ(r.pairs[0].first.doc_key, "k1");
  EXPECT_EQ(r.pairs[0].second.lang, "rm");
  ASSERT_EQ(r.unmatched.size(), 1u);
  EXPECT_EQ(r.unmatched[0].doc_key, "k2");

  const auto empty = pair_documents({}, "de", "rm");
  EXPECT_TRUE(empty.pairs.empty());
  EXPECT_TRUE(empty.unmatched.empty());

  EXPECT_THROW(pair_documents({doc("k1", "rm", "a"), doc("k1", "rm", "b")}, "de", "rm"), Error);
}

TEST(Dictionary, LowercasesAndMerges) {
  testutil::TempDir dir;
  const auto p = dir.write("d.tsv", "Haus\tchasa\nhaus\tcasa\n\nHund\tchaun\n");
  const auto d = read_dictionary(p);
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(*d.translations("haus"), (std::set<std::string>{"casa", "chasa"}));
  EXPECT_THROW(read_dictionary(dir.write("x.tsv", "only-one-field\n")), Error);
}

TEST(DictionaryScore, FractionOfTranslatedSourceTokens) {
  Dictionary d;
  d.add("hund", "chaun");
  d.add("haus", "chasa");
  EXPECT_DOUBLE_EQ(dictionary_score({"der", "hund", "haus"}, {"il", "chaun"}, d), 1.0 / 3.0);
  EXPECT_EQ(dictionary_score({"hund"}, {"chaun"}, Dictionary{}), 0.0);
}

TEST(AlignSentences, IdenticalListsGiveOneToOneBeads) {
  const std::vector<std::string> s{"Der Hund schläft.", "Die Katze ist alt und müde.", "Das Buch ist neu."};
  Dictionary d;
  for (const auto& sent : s)
    for (const auto& tok : tokenize(sent)) d.add(tok, tok);
  const auto beads = align_sentences(s, s, d);
  EXPECT_EQ(shapes(beads), (std::vector<std::pair<std::size_t, std::size_t>>{{1, 1}, {1, 1}, {1, 1}}));
  EXPECT_EQ(shapes(align_sentences(s, s, Dictionary{})), shapes(beads));
}

TEST(AlignSentences, SplitTranslationBecomesOneToTwo) {
  const std::vector<std::string> src{"Der Hund schläft im Haus.",
                                     "Die Katze trinkt Milch und der Bauer liest ein Buch."};
  const std::vector<std::string> tgt{"Il chaun dorma en chasa.", "Il giat beiva latg.",
                                     "Il pur legia in cudesch."};
  Dictionary d;
  d.add("hund", "chaun");
  d.add("haus", "chasa");
  d.add("katze", "giat");
  d.add("milch", "latg");
  d.add("bauer", "pur");
  d.add("buch", "cudesch");
  const auto beads = align_sentences(src, tgt, d);
  EXPECT_EQ(shapes(beads), (std::vector<std::pair<std::size_t, std::size_t>>{{1, 1}, {1, 2}}));
}

TEST(AlignSentences, BeadsTileBothSides) {
  std::mt19937 rng(8);
  for (int round = 0; round < 50; ++round) {
    std::vector<std::string> s(1 + rng() % 6), t(1 + rng() % 6);
    for (auto& x : s) x = std::string(5 + rng() % 60, 'a');
    for (auto& x : t) x = std::string(5 + rng() % 60, 'b');
    const auto beads = align_sentences(s, t, Dictionary{});
    std::size_t i = 0, j = 0;
    for (const auto& b : beads) {
      EXPECT_EQ(b.src_begin, i);
      EXPECT_EQ(b.tgt_begin, j);
      EXPECT_LE(b.src_count, 2u);
      EXPECT_LE(b.tgt_count, 2u);
      EXPECT_GT(b.src_count + b.tgt_count, 0u);
      i += b.src_count;
      j += b.tgt_count;
    }
    EXPECT_EQ(i, s.size());
    EXPECT_EQ(j, t.size());
  }
}

TEST(AlignSentences, MatchesExhaustiveBeadSearch) {
  // Score rebuilt from the definition: weighted Gaussian tail of the length
  // difference plus dictionary coverage, plus fixed bead penalties.
  const SentAlignConfig cfg;
  std::mt19937 rng(9);
  const std::vector<std::string> words{"alp", "bo", "cuna", "dav", "ers", "fo", "gal", "hom"};
  Dictionary d;
  for (const auto& w : words) d.add(w, w + "x");
  for (int round = 0; round < 40; ++round) {
    std::vector<std::string> s(1 + rng() % 4), t(1 + rng() % 4);
    std::vector<std::vector<std::string>> s_tok(s.size()), t_tok(t.size());
    auto fill = [&](std::string& sent, std::vector<std::string>& toks, bool target) {
      const auto n = 1 + rng() % 6;
      for (std::size_t k = 0; k < n; ++k) {
        const auto w = words[rng() % words.size()] + (target ? "x" : "");
        toks.push_back(w);
        sent += (k ? " " : "") + w;
      }
    };
    for (std::size_t k = 0; k < s.size(); ++k) fill(s[k], s_tok[k], false);
    for (std::size_t k = 0; k < t.size(); ++k) fill(t[k], t_tok[k], true);

    const oracle::BeadScore score = [&](std::size_t i, std::size_t a, std::size_t j, std::size_t b) {
      if (a == 0 || b == 0) return cfg.skip_penalty;
      double ls = 0, lt = 0;
      std::vector<std::string> st, tt;
      for (std::size_t k = i; k < i + a; ++k) {
        ls += static_cast<double>(s[k].size());
        st.insert(st.end(), s_tok[k].begin(), s_tok[k].end());
      }
      for (std::size_t k = j; k < j + b; ++k) {
        lt += static_cast<double>(t[k].size());
        tt.insert(tt.end(), t_tok[k].begin(), t_tok[k].end());
      }
      const double delta = (lt - ls * cfg.mean_ratio) / std::sqrt(std::max(ls, 1.0) * cfg.variance);
      const double len = std::log(std::erfc(std::abs(delta) / std::sqrt(2.0)));
      double hits = 0;
      for (const auto& w : st)
        if (std::find(tt.begin(), tt.end(), w + "x") != tt.end()) ++hits;
      double total = cfg.length_weight * len + cfg.dict_weight * hits / static_cast<double>(st.size());
      if (a + b == 3) total += cfg.merge_penalty;
      if (a == 2 && b == 2) total += cfg.double_merge_penalty;
      return total;
    };
    const auto ref = oracle::enumerate_beads(s.size(), t.size(), score);
    const auto got = align_sentences(s, t, d, cfg);
    // optimal under the reference score; equal-score sequences (skip order) may differ
    double rescored = 0, reported = 0;
    for (const auto& b : got) {
      rescored += score(b.src_begin, b.src_count, b.tgt_begin, b.tgt_count);
      reported += b.score;
    }
    EXPECT_NEAR(rescored, ref.score, 1e-9);
    EXPECT_NEAR(reported, ref.score, 1e-9);
  }
}

TEST(AlignSentences, RejectsEmptyInput) {
  EXPECT_THROW(align_sentences({}, {"a"}, Dictionary{}), Error);
}

TEST(BeadTexts, JoinsSpansAndDropsSkips) {
  const std::vector<std::string> s{"A.", "B.", "C."}, t{"X.", "Y."};
  const std::vector<AlignedPairCandidate> beads{{0, 2, 0, 1, 0}, {2, 1, 1, 0, 0}, {3, 0, 1, 1, 0}};
  EXPECT_EQ(bead_texts(beads, s, t), (std::vector<TextPair>{{"A. B.", "X."}}));
}

TEST(Filter, Examples) {
  EXPECT_EQ(filter_pairs({{"ein zwei", "in dus"}, {"ein zwei", "in dus"}}).kept,
            (std::vector<TextPair>{{"ein zwei", "in dus"}}));
  const auto same = filter_pairs({{"2003", "2003"}});
  EXPECT_TRUE(same.kept.empty());
  ASSERT_EQ(same.dropped.size(), 1u);
  EXPECT_EQ(same.dropped[0].rule, FilterRule::identical);
  const auto ratio = filter_pairs({{std::string(30, 'a') + " " + std::string(29, 'b'), "cccc ddddd"}});
  EXPECT_TRUE(ratio.kept.empty());
  EXPECT_EQ(ratio.dropped[0].rule, FilterRule::length_ratio);
  const auto short_side = filter_pairs({{"Haus", "la chasa"}});
  EXPECT_EQ(short_side.dropped[0].rule, FilterRule::too_few_tokens);
  EXPECT_EQ(short_side.dropped[0].index, 0u);
}

TEST(Filter, IdempotentAndOrderPreserving) {
  std::mt19937 rng(10);
  const std::vector<std::string> pool{"a b", "a b c", "c d e f", "x", "aaaa bbbb cccc dddd eeee", "g h"};
  for (int round = 0; round < 200; ++round) {
    std::vector<TextPair> in;
    for (int k = 0; k < 8; ++k) in.push_back({pool[rng() % pool.size()], pool[rng() % pool.size()]});
    const auto once = filter_pairs(in);
    const auto twice = filter_pairs(once.kept);
    EXPECT_EQ(twice.kept, once.kept);
    EXPECT_TRUE(twice.dropped.empty());
    EXPECT_EQ(once.kept.size() + once.dropped.size(), in.size());
    std::size_t cursor = 0;
    for (const auto& p : once.kept) {
      while (cursor < in.size() && !(in[cursor] == p)) ++cursor;
      ASSERT_LT(cursor, in.size());
      ++cursor;
    }
  }
}
