#pragma once

// Synthetic parallel data with known answers.

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "alignkit/core.hpp"

namespace synthetic {

/// Corpus generated from a bijective lexicon: each target sentence is the
/// word-by-word translation of its source in a random order.
struct LexiconCorpus {
  std::map<std::string, std::string> lexicon;  // source word -> target word
  alignkit::Corpus corpus;
  std::vector<alignkit::AlignmentSet> truth;  // per pair
};

inline LexiconCorpus lexicon_corpus(std::size_t pairs, std::size_t words, std::uint64_t seed,
                                    std::size_t min_len = 3, std::size_t max_len = 8) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> perm(words);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  LexiconCorpus out{{}, alignkit::Corpus{}, {}};
  for (std::size_t w = 0; w < words; ++w)
    out.lexicon["s" + std::to_string(w)] = "t" + std::to_string(perm[w]);
  std::uniform_int_distribution<std::size_t> len(min_len, max_len), word(0, words - 1);
  std::vector<alignkit::SentencePair> list;
  for (std::size_t k = 0; k < pairs; ++k) {
    const std::size_t n = len(rng);
    alignkit::Tokens src;
    for (std::size_t i = 0; i < n; ++i) src.push_back("s" + std::to_string(word(rng)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    alignkit::Tokens tgt;
    alignkit::AlignmentSet links;
    for (std::size_t j = 0; j < n; ++j) {
      tgt.push_back(out.lexicon[src[order[j]]]);
      links.insert({order[j], j});
    }
    list.emplace_back(k, std::move(src), std::move(tgt));
    out.truth.push_back(std::move(links));
  }
  out.corpus = alignkit::Corpus(std::move(list));
  return out;
}

}  // namespace synthetic
