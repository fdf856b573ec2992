#pragma once

// Similarity-based word alignment from precomputed contextual embeddings.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "alignkit/assignment.hpp"
#include "alignkit/core.hpp"

namespace alignkit {

enum class Level { word, subword };

inline Level parse_level(std::string_view s) {
  if (s == "word") return Level::word;
  if (s == "subword") return Level::subword;
  throw Error("unknown level '" + std::string(s) + "'");
}

inline std::string_view to_string(Level l) { return l == Level::word ? "word" : "subword"; }

/// Per-pair subword vectors plus subword-to-word maps, as produced by the
/// embedding extractor.
struct EmbeddingRecord {
  std::size_t id = 0;
  int layer = 8;
  std::vector<std::size_t> src_sub2word, tgt_sub2word;
  std::vector<std::vector<double>> src_vecs, tgt_vecs;

  std::size_t src_word_count() const { return src_sub2word.empty() ? 0 : src_sub2word.back() + 1; }
  std::size_t tgt_word_count() const { return tgt_sub2word.empty() ? 0 : tgt_sub2word.back() + 1; }
  std::size_t dimension() const { return src_vecs.empty() ? 0 : src_vecs.front().size(); }

  void validate() const {
    auto where = [&] { return "embedding record " + std::to_string(id) + ": "; };
    check_map(src_sub2word, "src_sub2word", where);
    check_map(tgt_sub2word, "tgt_sub2word", where);
    if (src_vecs.size() != src_sub2word.size())
      throw Error(where() + "src_vecs has " + std::to_string(src_vecs.size()) +
                  " vectors for " + std::to_string(src_sub2word.size()) + " subwords");
    if (tgt_vecs.size() != tgt_sub2word.size())
      throw Error(where() + "tgt_vecs has " + std::to_string(tgt_vecs.size()) +
                  " vectors for " + std::to_string(tgt_sub2word.size()) + " subwords");
    const std::size_t d = dimension();
    if (d == 0) throw Error(where() + "zero-dimensional vectors");
    for (const auto* side : {&src_vecs, &tgt_vecs}) {
      for (const auto& vec : *side) {
        if (vec.size() != d)
          throw Error(where() + "dimension mismatch " + std::to_string(vec.size()) + " vs " +
                      std::to_string(d));
        for (double x : vec)
          if (!std::isfinite(x)) throw Error(where() + "non-finite vector component");
      }
    }
  }

 private:
  template <class Where>
  static void check_map(const std::vector<std::size_t>& map, const char* name, Where where) {
    if (map.empty()) throw Error(where() + name + " is empty");
    if (map.front() != 0) throw Error(where() + name + " must start at 0");
    for (std::size_t k = 1; k < map.size(); ++k)
      if (map[k] < map[k - 1] || map[k] > map[k - 1] + 1)
        throw Error(where() + name + " must be non-decreasing without gaps");
  }
};

inline EmbeddingRecord parse_embedding_record(const nlohmann::json& j) {
  EmbeddingRecord r;
  try {
    r.id = j.at("id").get<std::size_t>();
    r.layer = j.at("layer").get<int>();
    r.src_sub2word = j.at("src_sub2word").get<std::vector<std::size_t>>();
    r.tgt_sub2word = j.at("tgt_sub2word").get<std::vector<std::size_t>>();
    r.src_vecs = j.at("src_vecs").get<std::vector<std::vector<double>>>();
    r.tgt_vecs = j.at("tgt_vecs").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("embedding record: ") + e.what());
  }
  r.validate();
  return r;
}

inline nlohmann::json to_json(const EmbeddingRecord& r) {
  return nlohmann::json{{"id", r.id},
                        {"layer", r.layer},
                        {"src_sub2word", r.src_sub2word},
                        {"tgt_sub2word", r.tgt_sub2word},
                        {"src_vecs", r.src_vecs},
                        {"tgt_vecs", r.tgt_vecs}};
}

/// Reads a JSON Lines embedding file; blank lines are skipped.
inline std::vector<EmbeddingRecord> read_embedding_file(const std::string& path) {
  std::vector<EmbeddingRecord> out;
  std::size_t lineno = 0;
  for (const auto& line : text::read_lines(path)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(parse_embedding_record(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

/// Dense n x m matrix of similarities between source and target units.
class SimilarityMatrix {
 public:
  SimilarityMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                   Level level = Level::word)
      : rows_(rows), cols_(cols), values_(std::move(values)), level_(level) {
    if (rows_ == 0 || cols_ == 0) throw Error("similarity matrix must be at least 1x1");
    if (values_.size() != rows_ * cols_) throw Error("similarity matrix size mismatch");
  }

  SimilarityMatrix(const std::vector<std::vector<double>>& rows, Level level = Level::word)
      : SimilarityMatrix(rows.size(), rows.empty() ? 0 : rows.front().size(), flatten(rows),
                         level) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  Level level() const noexcept { return level_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  static std::vector<double> flatten(const std::vector<std::vector<double>>& rows) {
    std::vector<double> out;
    for (const auto& r : rows) {
      if (r.size() != rows.front().size()) throw Error("ragged similarity matrix");
      out.insert(out.end(), r.begin(), r.end());
    }
    return out;
  }

  std::size_t rows_, cols_;
  std::vector<double> values_;
  Level level_;
};

namespace detail {

inline std::vector<std::vector<double>> mean_pool(const std::vector<std::vector<double>>& vecs,
                                                  const std::vector<std::size_t>& sub2word) {
  const std::size_t words = sub2word.back() + 1;
  const std::size_t d = vecs.front().size();
  std::vector<std::vector<double>> out(words, std::vector<double>(d, 0.0));
  std::vector<std::size_t> counts(words, 0);
  for (std::size_t s = 0; s < vecs.size(); ++s) {
    auto& acc = out[sub2word[s]];
    for (std::size_t k = 0; k < d; ++k) acc[k] += vecs[s][k];
    ++counts[sub2word[s]];
  }
  for (std::size_t w = 0; w < words; ++w)
    for (auto& x : out[w]) x /= static_cast<double>(counts[w]);
  return out;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw Error("dimension mismatch " + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

/// Cells that are the maximum of both their row and their column (ties kept),
/// restricted to cells where `allowed` holds.
template <class Allowed>
AlignmentSet mutual_argmax(std::size_t n, std::size_t m, const std::vector<double>& v,
                           Allowed allowed) {
  std::vector<double> row_max(n, -std::numeric_limits<double>::infinity());
  std::vector<double> col_max(m, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      row_max[i] = std::max(row_max[i], v[i * m + j]);
      col_max[j] = std::max(col_max[j], v[i * m + j]);
    }
  AlignmentSet out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (v[i * m + j] == row_max[i] && v[i * m + j] == col_max[j] && allowed(i, j))
        out.insert({i, j});
  return out;
}

}  // namespace detail

/// Cosine similarity between every source and target unit. At word level a
/// word's vector is the mean of its subword vectors. Zero vectors give 0.
inline SimilarityMatrix cosine_matrix(const EmbeddingRecord& rec, Level level) {
  rec.validate();
  std::vector<std::vector<double>> src, tgt;
  if (level == Level::word) {
    src = detail::mean_pool(rec.src_vecs, rec.src_sub2word);
    tgt = detail::mean_pool(rec.tgt_vecs, rec.tgt_sub2word);
  } else {
    src = rec.src_vecs;
    tgt = rec.tgt_vecs;
  }
  std::vector<double> values;
  values.reserve(src.size() * tgt.size());
  for (const auto& a : src)
    for (const auto& b : tgt) values.push_back(detail::cosine(a, b));
  return SimilarityMatrix(src.size(), tgt.size(), std::move(values), level);
}

/// Mutual argmax: (i, j) is linked iff it is a maximum of row i and of
/// column j. All tied maxima are kept.
inline AlignmentSet extract_argmax(const SimilarityMatrix& m) {
  return detail::mutual_argmax(m.rows(), m.cols(), m.values(),
                               [](std::size_t, std::size_t) { return true; });
}

/// Iterative mutual argmax. Each round after the first re-runs mutual argmax
/// on a reweighted matrix: cells whose row and column are both aligned are
/// zeroed and excluded, cells with exactly one aligned side are scaled by
/// alpha, cells with neither side aligned by min(2 * alpha, 1). Rounds stop
/// early once every row or every column is aligned, or nothing new is found.
inline AlignmentSet extract_itermax(const SimilarityMatrix& m, int max_iters = 2,
                                    double alpha = 0.9) {
  if (max_iters < 1) throw Error("itermax: max_iters must be >= 1");
  const std::size_t n = m.rows(), c = m.cols();
  AlignmentSet links = extract_argmax(m);
  for (int round = 1; round < max_iters; ++round) {
    std::vector<bool> row_aligned(n, false), col_aligned(c, false);
    for (const auto& l : links) {
      row_aligned[l.src] = true;
      col_aligned[l.tgt] = true;
    }
    const bool rows_done = std::all_of(row_aligned.begin(), row_aligned.end(), [](bool b) { return b; });
    const bool cols_done = std::all_of(col_aligned.begin(), col_aligned.end(), [](bool b) { return b; });
    if (rows_done || cols_done) break;

    std::vector<double> weighted(n * c);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < c; ++j) {
        const double free_row = row_aligned[i] ? 0.0 : 1.0;
        const double free_col = col_aligned[j] ? 0.0 : 1.0;
        const double w = std::clamp(alpha * free_row + alpha * free_col, 0.0, 1.0);
        weighted[i * c + j] = m(i, j) * w;
      }
    const auto found = detail::mutual_argmax(
        n, c, weighted, [&](std::size_t i, std::size_t j) { return !(row_aligned[i] && col_aligned[j]); });
    std::size_t before = links.size();
    for (const auto& l : found) links.insert(l);
    if (links.size() == before) break;
  }
  return links;
}

/// Maximum-weight bipartite matching. Negative cells are treated as weight 0
/// and zero-weight links are dropped, so the result is the best partial
/// matching. Rectangular inputs are padded with zero-weight dummy cells.
/// Ties resolve to the lexicographically smallest assignment.
inline AlignmentSet extract_match(const SimilarityMatrix& m) {
  const std::size_t n = m.rows(), c = m.cols();
  const std::size_t size = std::max(n, c);
  CostMatrix cost{size, std::vector<double>(size * size, 0.0)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) cost.values[i * size + j] = -std::max(m(i, j), 0.0);
  const auto assignment = solve_assignment(cost);
  AlignmentSet out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = assignment[i];
    if (j < c && m(i, j) > 0.0) out.insert({i, j});
  }
  return out;
}

/// Bidirectional softmax agreement: (i, j) is linked iff both the row-wise and
/// the column-wise softmax probability of the cell exceed `threshold`.
inline AlignmentSet extract_softmax_threshold(const SimilarityMatrix& m, double threshold = 0.001) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error("softmax threshold must be in (0, 1)");
  const std::size_t n = m.rows(), c = m.cols();
  std::vector<double> by_row(n * c), by_col(n * c);
  for (std::size_t i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c; ++j) mx = std::max(mx, m(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += by_row[i * c + j] = std::exp(m(i, j) - mx);
    for (std::size_t j = 0; j < c; ++j) by_row[i * c + j] /= z;
  }
  for (std::size_t j = 0; j < c; ++j) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, m(i, j));
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) z += by_col[i * c + j] = std::exp(m(i, j) - mx);
    for (std::size_t i = 0; i < n; ++i) by_col[i * c + j] /= z;
  }
  AlignmentSet out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j)
      if (by_row[i * c + j] > threshold && by_col[i * c + j] > threshold) out.insert({i, j});
  return out;
}

/// Maps subword links to word links; a word pair is linked iff any of its
/// subword pairs is.
inline AlignmentSet aggregate_to_words(const AlignmentSet& sub_links,
                                       const std::vector<std::size_t>& src_sub2word,
                                       const std::vector<std::size_t>& tgt_sub2word) {
  AlignmentSet out;
  for (const auto& l : sub_links) {
    if (l.src >= src_sub2word.size())
      throw Error("source subword index " + std::to_string(l.src) + " outside map of size " +
                  std::to_string(src_sub2word.size()));
    if (l.tgt >= tgt_sub2word.size())
      throw Error("target subword index " + std::to_string(l.tgt) + " outside map of size " +
                  std::to_string(tgt_sub2word.size()));
    out.insert({src_sub2word[l.src], tgt_sub2word[l.tgt]});
  }
  return out;
}

enum class Method { argmax, itermax, match, softmax };

inline Method parse_method(std::string_view s) {
  if (s == "argmax") return Method::argmax;
  if (s == "itermax") return Method::itermax;
  if (s == "match") return Method::match;
  if (s == "softmax") return Method::softmax;
  throw Error("unknown extraction method '" + std::string(s) + "'");
}

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::argmax: return "argmax";
    case Method::itermax: return "itermax";
    case Method::match: return "match";
    case Method::softmax: return "softmax";
  }
  return "?";
}

struct SimAlignOptions {
  Method method = Method::match;
  Level level = Level::subword;
  int itermax_iterations = 2;
  double itermax_alpha = 0.9;
  double softmax_threshold = 0.001;
};

inline AlignmentSet extract(const SimilarityMatrix& m, const SimAlignOptions& opt) {
  switch (opt.method) {
    case Method::argmax: return extract_argmax(m);
    case Method::itermax: return extract_itermax(m, opt.itermax_iterations, opt.itermax_alpha);
    case Method::match: return extract_match(m);
    case Method::softmax: return extract_softmax_threshold(m, opt.softmax_threshold);
  }
  return {};
}

/// Word-level alignment of one record.
inline AlignmentSet align_record(const EmbeddingRecord& rec, const SimAlignOptions& opt) {
  const auto sim = cosine_matrix(rec, opt.level);
  auto links = extract(sim, opt);
  if (opt.level == Level::subword) links = aggregate_to_words(links, rec.src_sub2word, rec.tgt_sub2word);
  return links;
}

}  // namespace alignkit
