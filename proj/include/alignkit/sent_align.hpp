#pragma once

// Sentence segmentation, hybrid length + dictionary sentence alignment,
// pair filtering and document pairing.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

#include "alignkit/core.hpp"

namespace alignkit {

struct Document {
  std::string doc_key;
  std::string lang;
  std::vector<std::string> paragraphs;
};

/// Paragraphs are separated by blank lines; line breaks inside a paragraph
/// become spaces.
inline std::vector<std::string> split_paragraphs(std::string_view body) {
  std::vector<std::string> out;
  std::string current;
  for (auto line : text::split(body, '\n')) {
    const auto t = text::trim(line);
    if (t.empty()) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (!current.empty()) current.push_back(' ');
    current += t;
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

/// Reads documents from JSON Lines: {"doc_key": str, "lang": str, "text": str}.
inline std::vector<Document> read_documents(const std::string& path) {
  std::vector<Document> out;
  std::size_t lineno = 0;
  for (const auto& line : text::read_lines(path)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Document d{j.at("doc_key").get<std::string>(), j.at("lang").get<std::string>(),
                 split_paragraphs(j.at("text").get<std::string>())};
      if (d.doc_key.empty()) throw Error("empty doc_key");
      out.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw Error(path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Segmentation

namespace detail {

inline bool is_closing(char32_t cp) {
  return cp == '"' || cp == '\'' || cp == ')' || cp == ']' || cp == 0xBB || cp == 0x201D ||
         cp == 0x2019 || cp == 0x203A || cp == 0x201C;
}

inline bool is_opening(char32_t cp) {
  return cp == '"' || cp == '\'' || cp == '(' || cp == '[' || cp == 0xAB || cp == 0x201E ||
         cp == 0x201C || cp == 0x2018 || cp == 0x2039;
}

}  // namespace detail

/// Lower-cased abbreviation list, entries without the final period.
using Abbreviations = std::set<std::string>;

inline Abbreviations read_abbreviations(const std::string& path) {
  Abbreviations out;
  for (const auto& line : text::read_lines(path)) {
    auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.back() == '.') t.remove_suffix(1);
    out.insert(text::to_lower(t));
  }
  return out;
}

/// Splits a paragraph after '.', '!' or '?' when followed by whitespace and a
/// sentence start (uppercase letter or digit, optionally after an opening
/// quote). A period does not split when the word before it is a listed
/// abbreviation, a single letter, or digits only.
inline std::vector<std::string> segment_paragraph(std::string_view para,
                                                  const Abbreviations& abbreviations) {
  const auto cps = text::code_points(para);
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    const auto t = text::trim(current);
    if (!t.empty()) out.emplace_back(t);
    current.clear();
  };
  std::size_t k = 0;
  while (k < cps.size()) {
    current += cps[k].bytes;
    const char32_t c = cps[k].value;
    if (c != '.' && c != '!' && c != '?') {
      ++k;
      continue;
    }
    std::size_t after = k + 1;
    while (after < cps.size() && (cps[after].value == '.' || cps[after].value == '!' ||
                                  cps[after].value == '?' || detail::is_closing(cps[after].value)))
      ++after;
    std::size_t next = after;
    bool saw_space = false;
    while (next < cps.size() && text::is_space(cps[next].value)) {
      ++next;
      saw_space = true;
    }
    while (next < cps.size() && detail::is_opening(cps[next].value)) ++next;
    const bool sentence_start =
        saw_space && next < cps.size() &&
        (text::is_upper(cps[next].value) || text::is_digit(cps[next].value));

    bool protected_period = false;
    if (c == '.') {
      std::size_t w = k;
      while (w > 0 && !text::is_space(cps[w - 1].value)) --w;
      std::string word;
      bool all_digits = true;
      std::size_t letters = 0;
      for (std::size_t p = w; p < k; ++p) {
        if (text::is_punctuation(cps[p].value) && word.empty()) continue;
        word += cps[p].bytes;
        if (!text::is_digit(cps[p].value)) all_digits = false;
        ++letters;
      }
      if (letters == 0) all_digits = false;
      protected_period = letters == 1 || (letters > 0 && all_digits) ||
                         abbreviations.count(text::to_lower(word)) > 0;
    }

    for (std::size_t p = k + 1; p < after; ++p) current += cps[p].bytes;
    k = after;
    if (sentence_start && !protected_period) flush();
  }
  flush();
  return out;
}

inline std::vector<std::string> segment_sentences(const Document& doc,
                                                  const Abbreviations& abbreviations) {
  std::vector<std::string> out;
  for (const auto& para : doc.paragraphs) {
    auto s = segment_paragraph(para, abbreviations);
    out.insert(out.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dictionary

/// Lower-cased bilingual dictionary; each source entry maps to a set of targets.
class Dictionary {
 public:
  void add(std::string_view source, std::string_view target) {
    const auto s = text::to_lower(text::trim(source));
    const auto t = text::to_lower(text::trim(target));
    if (s.empty() || t.empty()) throw Error("dictionary entries must be non-empty");
    entries_[s].insert(t);
  }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::set<std::string>* translations(const std::string& lowered_source) const {
    auto it = entries_.find(lowered_source);
    return it == entries_.end() ? nullptr : &it->second;
  }

 private:
  std::map<std::string, std::set<std::string>> entries_;
};

/// Reads "source<TAB>target" lines; repeated sources are merged.
inline Dictionary read_dictionary(const std::string& path) {
  Dictionary d;
  std::size_t lineno = 0;
  for (const auto& line : text::read_lines(path)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(line, '\t');
    if (fields.size() != 2)
      throw Error(path + ":" + std::to_string(lineno) + ": expected source<TAB>target");
    d.add(fields[0], fields[1]);
  }
  return d;
}

// ---------------------------------------------------------------------------
// Alignment

/// A bead: contiguous source and target sentence spans (0-2 sentences each).
struct AlignedPairCandidate {
  std::size_t src_begin = 0, src_count = 0;
  std::size_t tgt_begin = 0, tgt_count = 0;
  double score = 0.0;

  friend bool operator==(const AlignedPairCandidate& a, const AlignedPairCandidate& b) {
    return a.src_begin == b.src_begin && a.src_count == b.src_count &&
           a.tgt_begin == b.tgt_begin && a.tgt_count == b.tgt_count;
  }
};

struct SentAlignConfig {
  double length_weight = 1.0;
  double dict_weight = 2.0;
  double mean_ratio = 1.0;      // expected target/source character ratio
  double variance = 6.8;        // per-character variance of the length difference
  double skip_penalty = -0.5;   // 1-0 and 0-1 beads
  double merge_penalty = -1.0;  // 1-2 and 2-1 beads
  double double_merge_penalty = -2.0;  // 2-2 beads
};

namespace detail {

struct SentenceInfo {
  double chars = 0.0;
  std::vector<std::string> tokens;  // lower-cased, punctuation-only tokens removed
};

inline SentenceInfo describe(const std::string& s) {
  SentenceInfo info;
  info.chars = static_cast<double>(text::length_in_code_points(s));
  for (const auto& tok : tokenize(s)) {
    const auto cps = text::code_points(tok);
    const bool punct = std::all_of(cps.begin(), cps.end(),
                                   [](const text::CodePoint& c) { return text::is_punctuation(c.value); });
    if (!punct) info.tokens.push_back(text::to_lower(tok));
  }
  return info;
}

/// log P(|delta| or more) under a standard normal, delta being the
/// normalized length difference.
inline double length_log_prob(double src_chars, double tgt_chars, const SentAlignConfig& cfg) {
  const double expected = src_chars * cfg.mean_ratio;
  const double spread = std::sqrt(std::max(src_chars, 1.0) * cfg.variance);
  const double delta = (tgt_chars - expected) / spread;
  const double tail = std::erfc(std::abs(delta) / std::sqrt(2.0));
  return std::log(std::max(tail, 1e-300));
}

}  // namespace detail

/// Fraction of (non-punctuation) source tokens having a dictionary
/// translation among the target tokens. 0 for an empty dictionary.
inline double dictionary_score(const std::vector<std::string>& src_tokens,
                               const std::vector<std::string>& tgt_tokens, const Dictionary& dict) {
  if (dict.empty() || src_tokens.empty()) return 0.0;
  const std::unordered_set<std::string> targets(tgt_tokens.begin(), tgt_tokens.end());
  std::size_t hits = 0;
  for (const auto& s : src_tokens) {
    const auto* tr = dict.translations(s);
    if (!tr) continue;
    for (const auto& t : *tr) {
      if (targets.count(t)) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(src_tokens.size());
}

/// Monotone DP over bead types {1-1, 1-0, 0-1, 1-2, 2-1, 2-2} returning the
/// maximum-score bead sequence. Bead score is
///   length_weight * log-tail(length difference) + dict_weight * dictionary_score
/// plus a fixed penalty for skip and merge beads. Equal scores prefer the
/// bead type listed first, so 1-1 wins ties.
inline std::vector<AlignedPairCandidate> align_sentences(const std::vector<std::string>& src,
                                                         const std::vector<std::string>& tgt,
                                                         const Dictionary& dict,
                                                         const SentAlignConfig& cfg = {}) {
  if (src.empty() || tgt.empty()) throw Error("align_sentences needs non-empty inputs");
  std::vector<detail::SentenceInfo> s_info, t_info;
  for (const auto& s : src) s_info.push_back(detail::describe(s));
  for (const auto& t : tgt) t_info.push_back(detail::describe(t));

  constexpr std::array<std::pair<std::size_t, std::size_t>, 6> kBeads{
      {{1, 1}, {1, 0}, {0, 1}, {1, 2}, {2, 1}, {2, 2}}};

  auto bead_score = [&](std::size_t i, std::size_t a, std::size_t j, std::size_t b) {
    if (a == 0 || b == 0) return cfg.skip_penalty;
    double src_chars = 0.0, tgt_chars = 0.0;
    std::vector<std::string> s_tok, t_tok;
    for (std::size_t k = i; k < i + a; ++k) {
      src_chars += s_info[k].chars;
      s_tok.insert(s_tok.end(), s_info[k].tokens.begin(), s_info[k].tokens.end());
    }
    for (std::size_t k = j; k < j + b; ++k) {
      tgt_chars += t_info[k].chars;
      t_tok.insert(t_tok.end(), t_info[k].tokens.begin(), t_info[k].tokens.end());
    }
    double score = cfg.length_weight * detail::length_log_prob(src_chars, tgt_chars, cfg) +
                   cfg.dict_weight * dictionary_score(s_tok, t_tok, dict);
    if (a + b == 3) score += cfg.merge_penalty;
    if (a == 2 && b == 2) score += cfg.double_merge_penalty;
    return score;
  };

  const std::size_t n = src.size(), m = tgt.size();
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<double> best((n + 1) * (m + 1), neg_inf);
  std::vector<int> back((n + 1) * (m + 1), -1);
  auto at = [m](std::size_t i, std::size_t j) { return i * (m + 1) + j; };
  best[at(0, 0)] = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; j <= m; ++j) {
      if (i == 0 && j == 0) continue;
      for (std::size_t b = 0; b < kBeads.size(); ++b) {
        const auto [da, db] = kBeads[b];
        if (da > i || db > j) continue;
        const double prev = best[at(i - da, j - db)];
        if (prev == neg_inf) continue;
        const double cand = prev + bead_score(i - da, da, j - db, db);
        if (cand > best[at(i, j)]) {
          best[at(i, j)] = cand;
          back[at(i, j)] = static_cast<int>(b);
        }
      }
    }
  }

  std::vector<AlignedPairCandidate> beads;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const auto [da, db] = kBeads[static_cast<std::size_t>(back[at(i, j)])];
    AlignedPairCandidate bead{i - da, da, j - db, db, 0.0};
    bead.score = bead_score(bead.src_begin, da, bead.tgt_begin, db);
    beads.push_back(bead);
    i -= da;
    j -= db;
  }
  std::reverse(beads.begin(), beads.end());
  return beads;
}

// ---------------------------------------------------------------------------
// Filtering

struct TextPair {
  std::string src;
  std::string tgt;
  friend bool operator==(const TextPair&, const TextPair&) = default;
  friend auto operator<=>(const TextPair&, const TextPair&) = default;
};

struct FilterConfig {
  double max_length_ratio = 3.0;
  std::size_t min_tokens = 2;
};

enum class FilterRule { duplicate, identical, too_few_tokens, length_ratio };

inline std::string_view to_string(FilterRule r) {
  switch (r) {
    case FilterRule::duplicate: return "duplicate";
    case FilterRule::identical: return "identical";
    case FilterRule::too_few_tokens: return "too-few-tokens";
    case FilterRule::length_ratio: return "length-ratio";
  }
  return "?";
}

struct DroppedPair {
  std::size_t index;  // position in the input
  TextPair pair;
  FilterRule rule;  // first rule that fired, in FilterRule order
};

struct FilterResult {
  std::vector<TextPair> kept;
  std::vector<DroppedPair> dropped;
};

/// Order-preserving cleanup: exact duplicates (first kept), identical sides,
/// sides with fewer than `min_tokens` tokens, and character-length ratios
/// outside [1/r, r].
inline FilterResult filter_pairs(const std::vector<TextPair>& pairs, const FilterConfig& cfg = {}) {
  FilterResult out;
  std::set<TextPair> seen;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& p = pairs[k];
    std::optional<FilterRule> rule;
    if (!seen.insert(p).second) {
      rule = FilterRule::duplicate;
    } else if (p.src == p.tgt) {
      rule = FilterRule::identical;
    } else if (tokenize(p.src).size() < cfg.min_tokens || tokenize(p.tgt).size() < cfg.min_tokens) {
      rule = FilterRule::too_few_tokens;
    } else {
      const double ls = static_cast<double>(text::length_in_code_points(p.src));
      const double lt = static_cast<double>(text::length_in_code_points(p.tgt));
      if (ls == 0.0 || lt == 0.0 || ls / lt > cfg.max_length_ratio ||
          lt / ls > cfg.max_length_ratio)
        rule = FilterRule::length_ratio;
    }
    if (rule) out.dropped.push_back({k, p, *rule});
    else out.kept.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Document pairing

struct DocumentPairing {
  std::vector<std::pair<Document, Document>> pairs;  // (source-language, target-language)
  std::vector<Document> unmatched;
};

/// Pairs documents that share a doc_key across the two languages. Documents
/// in other languages are ignored; unmatched ones are reported.
inline DocumentPairing pair_documents(const std::vector<Document>& docs, std::string_view src_lang,
                                      std::string_view tgt_lang) {
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::vector<std::string> collisions;
  for (std::size_t k = 0; k < docs.size(); ++k) {
    const auto key = std::make_pair(docs[k].doc_key, docs[k].lang);
    if (!index.emplace(key, k).second) collisions.push_back(docs[k].doc_key + ":" + docs[k].lang);
  }
  if (!collisions.empty()) {
    std::string msg = "duplicate (doc_key, lang):";
    for (const auto& c : collisions) msg += " " + c;
    throw Error(msg);
  }
  DocumentPairing out;
  for (const auto& d : docs) {
    if (d.lang == src_lang) {
      auto it = index.find({d.doc_key, std::string(tgt_lang)});
      if (it != index.end()) out.pairs.emplace_back(d, docs[it->second]);
      else out.unmatched.push_back(d);
    } else if (d.lang == tgt_lang) {
      if (!index.count({d.doc_key, std::string(src_lang)})) out.unmatched.push_back(d);
    }
  }
  return out;
}

/// Text pairs for every bead with both sides non-empty; multi-sentence spans
/// are joined with a space.
inline std::vector<TextPair> bead_texts(const std::vector<AlignedPairCandidate>& beads,
                                        const std::vector<std::string>& src,
                                        const std::vector<std::string>& tgt) {
  std::vector<TextPair> out;
  auto span = [](const std::vector<std::string>& s, std::size_t b, std::size_t c) {
    std::vector<std::string> parts(s.begin() + static_cast<std::ptrdiff_t>(b),
                                   s.begin() + static_cast<std::ptrdiff_t>(b + c));
    return text::join(parts, " ");
  };
  for (const auto& bead : beads) {
    if (bead.src_count == 0 || bead.tgt_count == 0) continue;
    out.push_back({span(src, bead.src_begin, bead.src_count), span(tgt, bead.tgt_begin, bead.tgt_count)});
  }
  return out;
}

}  // namespace alignkit
