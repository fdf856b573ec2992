#pragma once

// Statistical word alignment: IBM Model 1 and a diagonal-prior variant in the
// style of fast_align, trained with EM, plus Viterbi extraction.
//
// Alignment prior for target position j of a pair with n source and m target
// tokens:
//   P(a_j = NULL) = p0
//   P(a_j = i)    = (1 - p0) * d(i, j) / sum_k d(k, j)
// with d = 1 for Model 1 and d(i, j) = exp(-lambda * |(i+1)/n - (j+1)/m|)
// for the diagonal variant. Lexical parameters t(f|e) are re-estimated by EM;
// the prior stays fixed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "alignkit/core.hpp"
#include "alignkit/symmetrize.hpp"

namespace alignkit {

enum class Variant { model1, diagonal };

inline Variant parse_variant(std::string_view name) {
  if (name == "model1") return Variant::model1;
  if (name == "diagonal") return Variant::diagonal;
  throw Error("unknown model variant '" + std::string(name) + "'");
}

inline std::string_view to_string(Variant v) {
  return v == Variant::model1 ? "model1" : "diagonal";
}

struct TrainConfig {
  int iterations = 5;
  Variant variant = Variant::diagonal;
  double lambda = 4.0;     // diagonal tension
  double p0 = 0.08;        // NULL alignment mass
  double min_prob = 1e-12; // floor for unseen (e, f)
  std::uint64_t seed = 0;  // unused by EM; initialization is uniform
  unsigned threads = 0;    // 0 = hardware concurrency

  void validate() const {
    if (iterations < 1) throw Error("config: iterations must be >= 1");
    if (!(p0 >= 0.0 && p0 < 1.0)) throw Error("config: p0 must be in [0, 1)");
    if (!(lambda >= 0.0)) throw Error("config: lambda must be non-negative");
    if (!(min_prob > 0.0 && min_prob < 1.0)) throw Error("config: min_prob must be in (0, 1)");
  }
};

/// Interned token strings. Id assignment follows first appearance.
class Vocabulary {
 public:
  std::uint32_t add(const std::string& token) {
    auto [it, inserted] = ids_.try_emplace(token, static_cast<std::uint32_t>(tokens_.size()));
    if (inserted) tokens_.push_back(token);
    return it->second;
  }
  std::optional<std::uint32_t> find(const std::string& token) const {
    auto it = ids_.find(token);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }
  const std::string& token(std::uint32_t id) const { return tokens_[id]; }
  std::size_t size() const noexcept { return tokens_.size(); }

 private:
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::string> tokens_;
};

/// Source token reserved for NULL alignment. Surface tokens are never empty,
/// so the empty string cannot collide with one.
inline const std::string kNullToken;

namespace detail {

/// Sparse row-major table over the (e, f) pairs that co-occur in training.
/// Column ids within a row are sorted, so lookups are binary searches.
struct CooccurrenceTable {
  std::vector<std::size_t> row_offsets{0};
  std::vector<std::uint32_t> cols;

  std::size_t rows() const noexcept { return row_offsets.size() - 1; }
  std::size_t cells() const noexcept { return cols.size(); }

  /// Cell index for (e, f), or npos when the pair never co-occurred.
  std::size_t find(std::uint32_t e, std::uint32_t f) const {
    if (e >= rows()) return npos;
    const auto first = cols.begin() + static_cast<std::ptrdiff_t>(row_offsets[e]);
    const auto last = cols.begin() + static_cast<std::ptrdiff_t>(row_offsets[e + 1]);
    const auto it = std::lower_bound(first, last, f);
    if (it == last || *it != f) return npos;
    return static_cast<std::size_t>(it - cols.begin());
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

inline double diagonal_weight(std::size_t i, std::size_t j, std::size_t n, std::size_t m,
                              Variant variant, double lambda) {
  if (variant == Variant::model1) return 1.0;
  const double pos_src = static_cast<double>(i + 1) / static_cast<double>(n);
  const double pos_tgt = static_cast<double>(j + 1) / static_cast<double>(m);
  return std::exp(-lambda * std::abs(pos_src - pos_tgt));
}

}  // namespace detail

/// Lexical translation table t(f|e) with the prior parameters it was trained
/// under. Immutable after construction; safe to share across threads.
class TranslationModel {
 public:
  TranslationModel() { src_vocab_.add(kNullToken); }

  TranslationModel(Vocabulary src_vocab, Vocabulary tgt_vocab, detail::CooccurrenceTable table,
                   std::vector<double> probs, Variant variant, double lambda, double p0,
                   double min_prob)
      : src_vocab_(std::move(src_vocab)),
        tgt_vocab_(std::move(tgt_vocab)),
        table_(std::move(table)),
        probs_(std::move(probs)),
        variant_(variant),
        lambda_(lambda),
        p0_(p0),
        min_prob_(min_prob) {}

  Variant variant() const noexcept { return variant_; }
  double lambda() const noexcept { return lambda_; }
  double p0() const noexcept { return p0_; }
  double min_prob() const noexcept { return min_prob_; }
  const Vocabulary& source_vocab() const noexcept { return src_vocab_; }
  const Vocabulary& target_vocab() const noexcept { return tgt_vocab_; }

  /// Stored t(f|e), or nullopt for a pair absent from the table.
  std::optional<double> find(const std::string& e, const std::string& f) const {
    const auto ei = src_vocab_.find(e);
    const auto fi = tgt_vocab_.find(f);
    if (!ei || !fi) return std::nullopt;
    const auto cell = table_.find(*ei, *fi);
    if (cell == detail::CooccurrenceTable::npos) return std::nullopt;
    return probs_[cell];
  }

  /// t(f|e) with the floor applied to unseen pairs. Pass kNullToken as e for NULL.
  double prob(const std::string& e, const std::string& f) const {
    return find(e, f).value_or(min_prob_);
  }

  double prob_by_id(std::optional<std::uint32_t> e, std::optional<std::uint32_t> f) const {
    if (!e || !f) return min_prob_;
    const auto cell = table_.find(*e, *f);
    return cell == detail::CooccurrenceTable::npos ? min_prob_ : probs_[cell];
  }

  /// All stored entries of row e, keyed by target token.
  std::map<std::string, double> row(const std::string& e) const {
    std::map<std::string, double> out;
    const auto ei = src_vocab_.find(e);
    if (!ei || *ei >= table_.rows()) return out;
    for (auto c = table_.row_offsets[*ei]; c < table_.row_offsets[*ei + 1]; ++c)
      out.emplace(tgt_vocab_.token(table_.cols[c]), probs_[c]);
    return out;
  }

  /// argmax_f t(f|e); ties go to the lexicographically smallest f.
  std::optional<std::string> best_translation(const std::string& e) const {
    std::optional<std::string> best;
    double best_p = -1.0;
    for (const auto& [f, p] : row(e)) {
      if (p > best_p) {
        best_p = p;
        best = f;
      }
    }
    return best;
  }

  /// Source tokens with a row in the table, NULL excluded.
  std::vector<std::string> source_tokens() const {
    std::vector<std::string> out;
    for (std::uint32_t e = 1; e < table_.rows(); ++e) out.push_back(src_vocab_.token(e));
    return out;
  }

  std::size_t entry_count() const noexcept { return probs_.size(); }

  /// Canonical text form: header line, then "e<TAB>f<TAB>prob" sorted by (e, f).
  /// NULL rows have an empty first field.
  std::string serialize() const {
    std::string out = "#alignkit-ttable v1\tvariant=" + std::string(to_string(variant_)) +
                      "\tlambda=" + text::format_double(lambda_) +
                      "\tp0=" + text::format_double(p0_) +
                      "\tmin_prob=" + text::format_double(min_prob_) + "\n";
    std::vector<std::tuple<std::string_view, std::string_view, double>> rows;
    rows.reserve(probs_.size());
    for (std::uint32_t e = 0; e < table_.rows(); ++e)
      for (auto c = table_.row_offsets[e]; c < table_.row_offsets[e + 1]; ++c)
        rows.emplace_back(src_vocab_.token(e), tgt_vocab_.token(table_.cols[c]), probs_[c]);
    std::sort(rows.begin(), rows.end());
    for (const auto& [e, f, p] : rows) {
      out += e;
      out.push_back('\t');
      out += f;
      out.push_back('\t');
      out += text::format_double(p);
      out.push_back('\n');
    }
    return out;
  }

  static TranslationModel parse(std::string_view content);

 private:
  Vocabulary src_vocab_;
  Vocabulary tgt_vocab_;
  detail::CooccurrenceTable table_;
  std::vector<double> probs_;
  Variant variant_ = Variant::model1;
  double lambda_ = 0.0;
  double p0_ = 0.0;
  double min_prob_ = 1e-12;
};

inline TranslationModel TranslationModel::parse(std::string_view content) {
  const auto lines = text::split(content, '\n');
  if (lines.empty() || lines[0].rfind("#alignkit-ttable v1", 0) != 0)
    throw Error("model file: missing '#alignkit-ttable v1' header");
  Variant variant = Variant::model1;
  double lambda = 0.0, p0 = 0.0, min_prob = 1e-12;
  const auto header = text::split(lines[0], '\t');
  for (std::size_t k = 1; k < header.size(); ++k) {
    const auto kv = header[k];
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) throw Error("model file: bad header field");
    const auto key = kv.substr(0, eq);
    const auto val = kv.substr(eq + 1);
    if (key == "variant") {
      variant = parse_variant(val);
      continue;
    }
    const auto num = text::parse_double(val);
    if (!num) throw Error("model file: bad number for " + std::string(key));
    if (key == "lambda") lambda = *num;
    else if (key == "p0") p0 = *num;
    else if (key == "min_prob") min_prob = *num;
    else throw Error("model file: unknown header key " + std::string(key));
  }

  Vocabulary src_vocab, tgt_vocab;
  src_vocab.add(kNullToken);
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(1);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    std::string_view line = lines[k];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = text::split(line, '\t');
    if (fields.size() != 3)
      throw Error("model file line " + std::to_string(k + 1) + ": expected 3 fields");
    const auto e = src_vocab.add(std::string(fields[0]));
    const auto f = tgt_vocab.add(std::string(fields[1]));
    const auto p = text::parse_double(fields[2]);
    if (!p || *p < 0.0 || *p > 1.0)
      throw Error("model file line " + std::to_string(k + 1) + ": bad probability");
    if (rows.size() <= e) rows.resize(e + 1);
    rows[e].emplace_back(f, *p);
  }
  detail::CooccurrenceTable table;
  std::vector<double> probs;
  for (auto& row : rows) {
    std::sort(row.begin(), row.end());
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k && row[k].first == row[k - 1].first) throw Error("model file: duplicate entry");
      table.cols.push_back(row[k].first);
      probs.push_back(row[k].second);
    }
    table.row_offsets.push_back(table.cols.size());
  }
  return TranslationModel(std::move(src_vocab), std::move(tgt_vocab), std::move(table),
                          std::move(probs), variant, lambda, p0, min_prob);
}

struct IterationStats {
  int iteration = 0;
  double log_likelihood = 0.0;  // of the parameters the E-step used
};

/// EM trainer. Expected counts are computed in fixed-size chunks, possibly in
/// parallel, and applied to the global counts in chunk order, so the result is
/// bit-identical for every thread count.
class EmTrainer {
 public:
  static constexpr std::size_t kChunkSize = 256;

  EmTrainer(const Corpus& corpus, TrainConfig config) : config_(config) {
    config_.validate();
    if (corpus.empty()) throw Error("cannot train on an empty corpus");
    src_vocab_.add(kNullToken);
    src_ids_.reserve(corpus.size());
    tgt_ids_.reserve(corpus.size());
    for (const auto& p : corpus) {
      std::vector<std::uint32_t> s, t;
      for (const auto& tok : p.src()) s.push_back(src_vocab_.add(tok));
      for (const auto& tok : p.tgt()) t.push_back(tgt_vocab_.add(tok));
      src_ids_.push_back(std::move(s));
      tgt_ids_.push_back(std::move(t));
    }
    build_table();
    probs_.assign(table_.cells(), 1.0 / static_cast<double>(tgt_vocab_.size()));
  }

  /// One E-step plus M-step. Returns the log-likelihood of the parameters
  /// before the update.
  IterationStats step() {
    counts_.assign(table_.cells(), 0.0);
    const double ll = run_e_step(&counts_);
    for (std::size_t e = 0; e < table_.rows(); ++e) {
      const auto lo = table_.row_offsets[e], hi = table_.row_offsets[e + 1];
      double total = 0.0;
      for (auto c = lo; c < hi; ++c) total += counts_[c];
      if (total > 0.0) {
        for (auto c = lo; c < hi; ++c) probs_[c] = counts_[c] / total;
      } else if (hi > lo) {
        for (auto c = lo; c < hi; ++c) probs_[c] = 1.0 / static_cast<double>(hi - lo);
      }
    }
    ++iterations_done_;
    return {iterations_done_, ll};
  }

  /// Corpus log-likelihood under the current parameters.
  double log_likelihood() const { return run_e_step(nullptr); }

  /// Expected counts from the most recent E-step, one per table cell.
  const std::vector<double>& last_counts() const noexcept { return counts_; }
  int iterations_done() const noexcept { return iterations_done_; }
  const TrainConfig& config() const noexcept { return config_; }

  TranslationModel model() const {
    return TranslationModel(src_vocab_, tgt_vocab_, table_, probs_, config_.variant,
                            config_.lambda, config_.p0, config_.min_prob);
  }

 private:
  struct ChunkResult {
    std::vector<std::pair<std::size_t, double>> contributions;
    std::vector<double> pair_ll;
  };

  void build_table() {
    std::vector<std::vector<std::uint32_t>> rows(src_vocab_.size());
    auto compact = [](std::vector<std::uint32_t>& r) {
      std::sort(r.begin(), r.end());
      r.erase(std::unique(r.begin(), r.end()), r.end());
    };
    std::vector<std::size_t> compacted_size(rows.size(), 0);
    for (std::size_t k = 0; k < src_ids_.size(); ++k) {
      std::vector<std::uint32_t> srcs = src_ids_[k];
      srcs.push_back(0);  // NULL
      std::sort(srcs.begin(), srcs.end());
      srcs.erase(std::unique(srcs.begin(), srcs.end()), srcs.end());
      for (auto e : srcs) {
        auto& r = rows[e];
        r.insert(r.end(), tgt_ids_[k].begin(), tgt_ids_[k].end());
        if (r.size() > 2 * compacted_size[e] + 1024) {
          compact(r);
          compacted_size[e] = r.size();
        }
      }
    }
    table_ = {};
    for (auto& r : rows) {
      compact(r);
      table_.cols.insert(table_.cols.end(), r.begin(), r.end());
      table_.row_offsets.push_back(table_.cols.size());
    }
  }

  ChunkResult process_chunk(std::size_t begin, std::size_t end, bool collect) const {
    ChunkResult out;
    out.pair_ll.reserve(end - begin);
    std::vector<double> prior, score;
    std::vector<std::size_t> cell;
    for (std::size_t k = begin; k < end; ++k) {
      const auto& src = src_ids_[k];
      const auto& tgt = tgt_ids_[k];
      const std::size_t n = src.size(), m = tgt.size();
      double pair_ll = 0.0;
      prior.resize(n);
      score.resize(n + 1);
      cell.resize(n + 1);
      for (std::size_t j = 0; j < m; ++j) {
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          prior[i] = detail::diagonal_weight(i, j, n, m, config_.variant, config_.lambda);
          norm += prior[i];
        }
        cell[0] = table_.find(0, tgt[j]);
        score[0] = config_.p0 * probs_[cell[0]];
        double z = score[0];
        for (std::size_t i = 0; i < n; ++i) {
          cell[i + 1] = table_.find(src[i], tgt[j]);
          score[i + 1] = (1.0 - config_.p0) * prior[i] / norm * probs_[cell[i + 1]];
          z += score[i + 1];
        }
        if (!(z > 0.0)) continue;
        pair_ll += std::log(z);
        if (collect)
          for (std::size_t i = 0; i <= n; ++i) out.contributions.emplace_back(cell[i], score[i] / z);
      }
      out.pair_ll.push_back(pair_ll);
    }
    return out;
  }

  double run_e_step(std::vector<double>* counts) const {
    const std::size_t total = src_ids_.size();
    const std::size_t chunks = (total + kChunkSize - 1) / kChunkSize;
    unsigned threads = config_.threads ? config_.threads : std::thread::hardware_concurrency();
    threads = std::max(1u, threads);
    double ll = 0.0;
    auto apply = [&](const ChunkResult& r) {
      if (counts)
        for (const auto& [c, v] : r.contributions) (*counts)[c] += v;
      for (double v : r.pair_ll) ll += v;
    };
    for (std::size_t wave = 0; wave < chunks; wave += threads) {
      const std::size_t wave_end = std::min(chunks, wave + threads);
      std::vector<std::future<ChunkResult>> pending;
      for (std::size_t c = wave + 1; c < wave_end; ++c) {
        pending.push_back(std::async(std::launch::async, [this, c, total, counts] {
          return process_chunk(c * kChunkSize, std::min(total, (c + 1) * kChunkSize),
                               counts != nullptr);
        }));
      }
      apply(process_chunk(wave * kChunkSize, std::min(total, (wave + 1) * kChunkSize),
                          counts != nullptr));
      for (auto& f : pending) apply(f.get());
    }
    return ll;
  }

  TrainConfig config_;
  Vocabulary src_vocab_, tgt_vocab_;
  std::vector<std::vector<std::uint32_t>> src_ids_, tgt_ids_;
  detail::CooccurrenceTable table_;
  std::vector<double> probs_;
  std::vector<double> counts_;
  int iterations_done_ = 0;
};

struct TrainResult {
  TranslationModel model;
  /// Entry k is the corpus log-likelihood after k EM iterations (entry 0 is
  /// the uniform initialization).
  std::vector<double> log_likelihood;
};

inline TrainResult train_with_history(const Corpus& corpus, const TrainConfig& config) {
  EmTrainer trainer(corpus, config);
  TrainResult out;
  for (int it = 0; it < config.iterations; ++it)
    out.log_likelihood.push_back(trainer.step().log_likelihood);
  out.log_likelihood.push_back(trainer.log_likelihood());
  out.model = trainer.model();
  return out;
}

inline TranslationModel train(const Corpus& corpus, const TrainConfig& config) {
  EmTrainer trainer(corpus, config);
  for (int it = 0; it < config.iterations; ++it) trainer.step();
  return trainer.model();
}

/// Most probable alignment of each target token under the model. NULL choices
/// produce no link; ties go to the smaller source index, and NULL wins only
/// when strictly better than every source position.
inline AlignmentSet viterbi_align(const TranslationModel& model, const SentencePair& pair) {
  const auto& src = pair.src();
  const auto& tgt = pair.tgt();
  const std::size_t n = src.size(), m = tgt.size();
  std::vector<std::optional<std::uint32_t>> src_ids(n);
  for (std::size_t i = 0; i < n; ++i) src_ids[i] = model.source_vocab().find(src[i]);
  const auto null_id = model.source_vocab().find(kNullToken);

  AlignmentSet out;
  std::vector<double> prior(n);
  for (std::size_t j = 0; j < m; ++j) {
    const auto f = model.target_vocab().find(tgt[j]);
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      prior[i] = detail::diagonal_weight(i, j, n, m, model.variant(), model.lambda());
      norm += prior[i];
    }
    std::size_t best_i = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = (1.0 - model.p0()) * prior[i] / norm * model.prob_by_id(src_ids[i], f);
      if (s > best) {
        best = s;
        best_i = i;
      }
    }
    const double null_score = model.p0() * model.prob_by_id(null_id, f);
    if (null_score > best) continue;
    out.insert({best_i, j});
  }
  return out;
}

inline std::vector<AlignmentSet> align_corpus(const TranslationModel& model, const Corpus& corpus) {
  std::vector<AlignmentSet> out;
  out.reserve(corpus.size());
  for (const auto& p : corpus) out.push_back(viterbi_align(model, p));
  return out;
}

/// Forward and reverse Viterbi alignments combined with a symmetrization
/// heuristic. `reverse` must be trained on the swapped corpus.
inline std::vector<AlignmentSet> align_symmetric(const TranslationModel& forward,
                                                 const TranslationModel& reverse,
                                                 const Corpus& corpus, Symmetrization heuristic) {
  std::vector<AlignmentSet> out;
  out.reserve(corpus.size());
  for (const auto& p : corpus) {
    const auto fwd = viterbi_align(forward, p);
    const auto rev = viterbi_align(reverse, p.swapped()).transposed();
    out.push_back(symmetrize(fwd, rev, heuristic));
  }
  return out;
}

}  // namespace alignkit
