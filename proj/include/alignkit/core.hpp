#pragma once

// Domain types and file formats shared by every aligner: sentence pairs,
// alignment link sets, bitext loading, Pharaoh lines and gold-standard TSV.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "alignkit/text.hpp"

namespace alignkit {

using Tokens = std::vector<std::string>;

/// Raised for malformed Pharaoh items. Carries the offending item and its
/// 1-based column within the line.
class ParseError : public Error {
 public:
  ParseError(std::string item, std::size_t column, const std::string& reason)
      : Error("malformed alignment item '" + item + "' at column " + std::to_string(column) +
              ": " + reason),
        item_(std::move(item)),
        column_(column) {}

  const std::string& item() const noexcept { return item_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::string item_;
  std::size_t column_;
};

/// One (source position, target position) link; 0-based.
struct Link {
  std::size_t src = 0;
  std::size_t tgt = 0;

  friend auto operator<=>(const Link&, const Link&) = default;
};

/// A set of Sure links for one sentence pair. The gold standard carries no
/// Possible links, so the Possible set is this same set.
class AlignmentSet {
 public:
  using const_iterator = std::set<Link>::const_iterator;

  AlignmentSet() = default;
  AlignmentSet(std::initializer_list<Link> links) : links_(links) {}
  template <class It>
  AlignmentSet(It first, It last) : links_(first, last) {}

  bool insert(Link l) { return links_.insert(l).second; }
  bool erase(Link l) { return links_.erase(l) > 0; }
  bool contains(Link l) const { return links_.count(l) > 0; }
  std::size_t size() const noexcept { return links_.size(); }
  bool empty() const noexcept { return links_.empty(); }
  const_iterator begin() const noexcept { return links_.begin(); }
  const_iterator end() const noexcept { return links_.end(); }

  /// Swaps the roles of source and target.
  AlignmentSet transposed() const {
    AlignmentSet out;
    for (const auto& l : links_) out.insert({l.tgt, l.src});
    return out;
  }

  /// Throws if any link falls outside an n x m grid.
  void check_bounds(std::size_t n, std::size_t m) const {
    for (const auto& l : links_) {
      if (l.src >= n)
        throw Error("source index " + std::to_string(l.src) + " out of range (" +
                    std::to_string(n) + " source tokens)");
      if (l.tgt >= m)
        throw Error("target index " + std::to_string(l.tgt) + " out of range (" +
                    std::to_string(m) + " target tokens)");
    }
  }

  friend bool operator==(const AlignmentSet&, const AlignmentSet&) = default;

 private:
  std::set<Link> links_;
};

inline AlignmentSet intersect(const AlignmentSet& a, const AlignmentSet& b) {
  AlignmentSet out;
  for (const auto& l : a)
    if (b.contains(l)) out.insert(l);
  return out;
}

inline AlignmentSet unite(const AlignmentSet& a, const AlignmentSet& b) {
  AlignmentSet out = a;
  for (const auto& l : b) out.insert(l);
  return out;
}

inline std::size_t intersection_size(const AlignmentSet& a, const AlignmentSet& b) {
  std::size_t n = 0;
  for (const auto& l : a) n += b.contains(l) ? 1 : 0;
  return n;
}

/// A tokenized sentence pair. Immutable once built.
class SentencePair {
 public:
  SentencePair(std::size_t id, Tokens src, Tokens tgt)
      : id_(id), src_(std::move(src)), tgt_(std::move(tgt)) {
    if (src_.empty() || tgt_.empty())
      throw Error("sentence pair " + std::to_string(id_) + " has an empty side");
    for (const auto* side : {&src_, &tgt_}) {
      for (const auto& tok : *side) {
        if (tok.empty()) throw Error("sentence pair " + std::to_string(id_) + " has an empty token");
        if (tok.find_first_of(" \t\r\n\v\f") != std::string::npos)
          throw Error("sentence pair " + std::to_string(id_) + " has a token with whitespace");
      }
    }
  }

  std::size_t id() const noexcept { return id_; }
  const Tokens& src() const noexcept { return src_; }
  const Tokens& tgt() const noexcept { return tgt_; }

  SentencePair swapped() const { return SentencePair(id_, tgt_, src_); }
  SentencePair with_id(std::size_t id) const { return SentencePair(id, src_, tgt_); }

  friend bool operator==(const SentencePair&, const SentencePair&) = default;

 private:
  std::size_t id_;
  Tokens src_;
  Tokens tgt_;
};

/// Ordered collection of sentence pairs with unique ids.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<SentencePair> pairs) : pairs_(std::move(pairs)) {
    std::unordered_set<std::size_t> seen;
    for (const auto& p : pairs_)
      if (!seen.insert(p.id()).second)
        throw Error("duplicate sentence pair id " + std::to_string(p.id()));
  }

  const std::vector<SentencePair>& pairs() const noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }
  const SentencePair& operator[](std::size_t k) const { return pairs_[k]; }
  auto begin() const noexcept { return pairs_.begin(); }
  auto end() const noexcept { return pairs_.end(); }

  /// Same pairs with source and target exchanged (for reverse-direction training).
  Corpus swapped() const {
    std::vector<SentencePair> out;
    out.reserve(pairs_.size());
    for (const auto& p : pairs_) out.push_back(p.swapped());
    return Corpus(std::move(out));
  }

 private:
  std::vector<SentencePair> pairs_;
};

/// Whitespace split followed by detachment of leading and trailing
/// punctuation. A trailing apostrophe directly after a word character stays
/// attached, so elided clitics such as "d'" remain one token.
inline Tokens tokenize(std::string_view sentence) {
  Tokens out;
  const auto cps = text::code_points(sentence);
  std::size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && text::is_space(cps[i].value)) ++i;
    std::size_t j = i;
    while (j < cps.size() && !text::is_space(cps[j].value)) ++j;
    if (j == i) break;

    std::size_t lo = i, hi = j;
    while (lo < hi && text::is_punctuation(cps[lo].value)) {
      out.emplace_back(cps[lo].bytes);
      ++lo;
    }
    std::vector<std::string> trailing;
    while (hi > lo && text::is_punctuation(cps[hi - 1].value)) {
      if (text::is_apostrophe(cps[hi - 1].value) && hi - 1 > lo &&
          !text::is_punctuation(cps[hi - 2].value))
        break;
      trailing.emplace_back(cps[hi - 1].bytes);
      --hi;
    }
    if (hi > lo) {
      std::string word;
      for (std::size_t k = lo; k < hi; ++k) word += cps[k].bytes;
      out.push_back(std::move(word));
    }
    out.insert(out.end(), trailing.rbegin(), trailing.rend());
    i = j;
  }
  return out;
}

/// Parses a Pharaoh line ("i-j" items, 0-based). Duplicates collapse.
inline AlignmentSet parse_pharaoh(std::string_view line) {
  AlignmentSet out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t' && line[end] != '\r') ++end;
    const std::string_view item = line.substr(pos, end - pos);
    const std::size_t column = pos + 1;
    if (item.front() == '-') throw ParseError(std::string(item), column, "negative index");
    const auto dash = item.find('-');
    if (dash == std::string_view::npos) throw ParseError(std::string(item), column, "missing dash");
    const auto lhs = item.substr(0, dash);
    const auto rhs = item.substr(dash + 1);
    if (!rhs.empty() && rhs.front() == '-')
      throw ParseError(std::string(item), column, "negative index");
    const auto i = text::parse_index(lhs);
    const auto j = text::parse_index(rhs);
    if (!i || !j) throw ParseError(std::string(item), column, "non-integer index");
    out.insert({*i, *j});
    pos = end;
  }
  return out;
}

/// Links sorted by (i, j), single-space separated.
inline std::string serialize_pharaoh(const AlignmentSet& a) {
  std::string out;
  for (const auto& l : a) {
    if (!out.empty()) out.push_back(' ');
    out += std::to_string(l.src);
    out.push_back('-');
    out += std::to_string(l.tgt);
  }
  return out;
}

/// Builds a corpus from two line-parallel UTF-8 files; pair k gets id k.
inline Corpus load_bitext(const std::string& src_path, const std::string& tgt_path) {
  const auto src = text::read_lines(src_path);
  const auto tgt = text::read_lines(tgt_path);
  if (src.size() != tgt.size())
    throw Error("line count mismatch " + std::to_string(src.size()) + "≠" +
                std::to_string(tgt.size()) + " (" + src_path + " vs " + tgt_path + ")");
  std::vector<SentencePair> pairs;
  pairs.reserve(src.size());
  for (std::size_t k = 0; k < src.size(); ++k) {
    auto s = tokenize(src[k]);
    auto t = tokenize(tgt[k]);
    if (s.empty()) throw Error("empty line " + std::to_string(k + 1) + " in " + src_path);
    if (t.empty()) throw Error("empty line " + std::to_string(k + 1) + " in " + tgt_path);
    pairs.emplace_back(k, std::move(s), std::move(t));
  }
  return Corpus(std::move(pairs));
}

/// Reads a Pharaoh file; line k becomes entry k.
inline std::vector<AlignmentSet> read_pharaoh_file(const std::string& path) {
  std::vector<AlignmentSet> out;
  std::size_t lineno = 0;
  for (const auto& line : text::read_lines(path)) {
    ++lineno;
    try {
      out.push_back(parse_pharaoh(line));
    } catch (const ParseError& e) {
      throw Error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline std::string format_pharaoh_file(const std::vector<AlignmentSet>& sets) {
  std::string out;
  for (const auto& a : sets) {
    out += serialize_pharaoh(a);
    out.push_back('\n');
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gold standard: one record per line, "id<TAB>source<TAB>target<TAB>links".
// Sentences are stored as their tokens joined by single spaces, so link
// indices refer to whitespace-separated positions.

struct GoldRecord {
  SentencePair pair;
  AlignmentSet links;

  std::size_t id() const noexcept { return pair.id(); }
  friend bool operator==(const GoldRecord&, const GoldRecord&) = default;
};

inline std::string format_gold_line(const GoldRecord& r) {
  std::string out = std::to_string(r.id());
  out.push_back('\t');
  out += text::join(r.pair.src(), " ");
  out.push_back('\t');
  out += text::join(r.pair.tgt(), " ");
  out.push_back('\t');
  out += serialize_pharaoh(r.links);
  return out;
}

inline GoldRecord parse_gold_line(std::string_view line) {
  const auto fields = text::split(line, '\t');
  if (fields.size() != 4)
    throw Error("gold record needs 4 tab-separated fields, got " + std::to_string(fields.size()));
  const auto id = text::parse_index(fields[0]);
  if (!id) throw Error("gold record has invalid id '" + std::string(fields[0]) + "'");
  SentencePair pair(*id, text::split_whitespace(fields[1]), text::split_whitespace(fields[2]));
  AlignmentSet links = parse_pharaoh(fields[3]);
  links.check_bounds(pair.src().size(), pair.tgt().size());
  return GoldRecord{std::move(pair), std::move(links)};
}

/// Serializes records sorted by id; output is byte-stable for equal inputs.
inline std::string format_gold(std::vector<GoldRecord> records) {
  std::sort(records.begin(), records.end(),
            [](const GoldRecord& a, const GoldRecord& b) { return a.id() < b.id(); });
  std::string out;
  for (const auto& r : records) {
    out += format_gold_line(r);
    out.push_back('\n');
  }
  return out;
}

inline std::vector<GoldRecord> parse_gold(std::string_view content) {
  std::vector<GoldRecord> out;
  std::set<std::size_t> ids;
  std::size_t lineno = 0;
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      out.push_back(parse_gold_line(line));
    } catch (const Error& e) {
      throw Error("gold line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!ids.insert(out.back().id()).second)
      throw Error("gold line " + std::to_string(lineno) + ": duplicate id " +
                  std::to_string(out.back().id()));
  }
  return out;
}

inline std::vector<GoldRecord> read_gold(const std::string& path) {
  try {
    return parse_gold(text::read_file(path));
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

/// Gold links keyed by pair id.
inline std::map<std::size_t, AlignmentSet> gold_links(const std::vector<GoldRecord>& records) {
  std::map<std::size_t, AlignmentSet> out;
  for (const auto& r : records) out.emplace(r.id(), r.links);
  return out;
}

}  // namespace alignkit
