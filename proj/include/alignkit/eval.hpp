#pragma once

// Precision / recall / AER scoring and the dataset-size scaling experiment.

#include <cassert>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "alignkit/core.hpp"
#include "alignkit/stat_align.hpp"

namespace alignkit {

/// Alignments keyed by sentence pair id.
using PairAlignments = std::map<std::size_t, AlignmentSet>;

struct EvalReport {
  double precision = 1.0;
  double recall = 0.0;
  double aer = 1.0;
  std::size_t hypothesis = 0;        // |A|
  std::size_t sure = 0;              // |S|
  std::size_t hyp_and_sure = 0;      // |A ∩ S|
  std::size_t hyp_and_possible = 0;  // |A ∩ P|

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Metrics from pooled counts. Precision is 1 for an empty hypothesis.
inline EvalReport report_from_counts(std::size_t a, std::size_t s, std::size_t a_s, std::size_t a_p) {
  if (s == 0) throw Error("evaluation needs at least one gold link");
  EvalReport r;
  r.hypothesis = a;
  r.sure = s;
  r.hyp_and_sure = a_s;
  r.hyp_and_possible = a_p;
  r.precision = a == 0 ? 1.0 : static_cast<double>(a_p) / static_cast<double>(a);
  r.recall = static_cast<double>(a_s) / static_cast<double>(s);
  r.aer = 1.0 - static_cast<double>(a_s + a_p) / static_cast<double>(a + s);
  return r;
}

/// Harmonic mean of precision and recall computed from counts (0 when both are 0).
inline double f1_score(std::size_t a, std::size_t s, std::size_t a_s) {
  if (a + s == 0) return 0.0;
  return 2.0 * static_cast<double>(a_s) / static_cast<double>(a + s);
}

namespace detail {

inline void check_ids(const PairAlignments& hyp, const PairAlignments& gold) {
  std::vector<std::size_t> missing_hyp, missing_gold;
  for (const auto& [id, _] : gold)
    if (!hyp.count(id)) missing_hyp.push_back(id);
  for (const auto& [id, _] : hyp)
    if (!gold.count(id)) missing_gold.push_back(id);
  if (missing_hyp.empty() && missing_gold.empty()) return;
  std::string msg = "pair id mismatch;";
  auto list = [&](const char* label, const std::vector<std::size_t>& ids) {
    if (ids.empty()) return;
    msg += std::string(" ") + label + ":";
    for (std::size_t k = 0; k < ids.size() && k < 20; ++k) msg += " " + std::to_string(ids[k]);
    if (ids.size() > 20) msg += " ... (" + std::to_string(ids.size()) + " total)";
  };
  list("missing from hypothesis", missing_hyp);
  list("missing from gold", missing_gold);
  throw Error(msg);
}

}  // namespace detail

/// Micro-averaged scores: link counts are pooled over all pairs first.
inline EvalReport evaluate(const PairAlignments& hyp, const PairAlignments& sure,
                           const PairAlignments& possible) {
  detail::check_ids(hyp, sure);
  detail::check_ids(hyp, possible);
  std::size_t a = 0, s = 0, a_s = 0, a_p = 0;
  for (const auto& [id, links] : hyp) {
    const auto& gold_s = sure.at(id);
    const auto& gold_p = possible.at(id);
    a += links.size();
    s += gold_s.size();
    a_s += intersection_size(links, gold_s);
    a_p += intersection_size(links, gold_p);
  }
  return report_from_counts(a, s, a_s, a_p);
}

/// Sure-only gold: the Possible set is the Sure set.
inline EvalReport evaluate(const PairAlignments& hyp, const PairAlignments& gold) {
  auto r = evaluate(hyp, gold, gold);
  assert(std::abs(r.aer - (1.0 - f1_score(r.hypothesis, r.sure, r.hyp_and_sure))) < 1e-12);
  return r;
}

/// Per-sentence agreement: F1 of one hypothesis against its gold links.
inline double accuracy(const AlignmentSet& hyp, const AlignmentSet& gold) {
  if (gold.empty()) throw Error("accuracy needs a non-empty gold alignment");
  return f1_score(hyp.size(), gold.size(), intersection_size(hyp, gold));
}

inline std::string format_report_line(const EvalReport& r) {
  return "P=" + text::format_double(r.precision) + " R=" + text::format_double(r.recall) +
         " AER=" + text::format_double(r.aer) + " |A|=" + std::to_string(r.hypothesis) +
         " |S|=" + std::to_string(r.sure) + " |A∩S|=" + std::to_string(r.hyp_and_sure);
}

inline std::string format_report_tsv(const EvalReport& r) {
  return "precision\trecall\taer\thypothesis\tsure\thyp_and_sure\thyp_and_possible\n" +
         text::format_double(r.precision) + "\t" + text::format_double(r.recall) + "\t" +
         text::format_double(r.aer) + "\t" + std::to_string(r.hypothesis) + "\t" +
         std::to_string(r.sure) + "\t" + std::to_string(r.hyp_and_sure) + "\t" +
         std::to_string(r.hyp_and_possible) + "\n";
}

// ---------------------------------------------------------------------------
// Scaling experiment

struct ScalingRow {
  std::size_t dataset_size = 0;  // corpus pairs appended after the gold pairs
  EvalReport report;
  double seconds = 0.0;
};

struct ScalingResult {
  std::vector<ScalingRow> rows;
};

/// Trains on `training` and returns alignments for its first `count` pairs.
using TrainAndAlign = std::function<std::vector<AlignmentSet>(const Corpus& training, std::size_t count)>;

/// Statistical aligner for the scaling experiment: a forward model, plus a
/// reverse model and symmetrization when `heuristic` is set.
inline TrainAndAlign statistical_aligner(TrainConfig config, std::optional<Symmetrization> heuristic) {
  return [config, heuristic](const Corpus& training, std::size_t count) {
    std::vector<SentencePair> head(training.begin(), training.begin() + static_cast<std::ptrdiff_t>(count));
    const Corpus evaluated(std::move(head));
    const auto fwd = train(training, config);
    if (!heuristic) return align_corpus(fwd, evaluated);
    const auto rev = train(training.swapped(), config);
    return align_symmetric(fwd, rev, evaluated, *heuristic);
  };
}

/// For each size N: train on the gold sentences followed by the first N
/// corpus pairs, align, and score only the gold sentences. Sizes must be
/// non-decreasing; a repeated size reruns the same configuration.
inline ScalingResult scaling_experiment(const std::vector<GoldRecord>& gold, const Corpus& corpus,
                                        const std::vector<std::size_t>& sizes,
                                        const TrainAndAlign& train_and_align,
                                        bool concurrent = false) {
  if (gold.empty()) throw Error("scaling experiment needs gold pairs");
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] > corpus.size())
      throw Error("size " + std::to_string(sizes[k]) + " exceeds corpus of " +
                  std::to_string(corpus.size()) + " pairs");
    if (k && sizes[k] < sizes[k - 1]) throw Error("sizes must be non-decreasing");
  }
  const PairAlignments gold_map = gold_links(gold);

  auto run = [&](std::size_t size) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<SentencePair> pairs;
    pairs.reserve(gold.size() + size);
    for (const auto& r : gold) pairs.push_back(r.pair.with_id(pairs.size()));
    for (std::size_t k = 0; k < size; ++k) pairs.push_back(corpus[k].with_id(pairs.size()));
    const Corpus training(std::move(pairs));
    std::vector<AlignmentSet> aligned;
    try {
      aligned = train_and_align(training, gold.size());
    } catch (const std::exception& e) {
      throw Error("size " + std::to_string(size) + ": " + e.what());
    }
    if (aligned.size() != gold.size())
      throw Error("size " + std::to_string(size) + ": aligner returned " +
                  std::to_string(aligned.size()) + " alignments for " +
                  std::to_string(gold.size()) + " gold pairs");
    PairAlignments hyp;
    for (std::size_t k = 0; k < gold.size(); ++k) hyp.emplace(gold[k].id(), aligned[k]);
    ScalingRow row;
    row.dataset_size = size;
    row.report = evaluate(hyp, gold_map);
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return row;
  };

  ScalingResult out;
  if (concurrent) {
    std::vector<std::future<ScalingRow>> futures;
    for (auto size : sizes) futures.push_back(std::async(std::launch::async, run, size));
    for (auto& f : futures) out.rows.push_back(f.get());
  } else {
    for (auto size : sizes) out.rows.push_back(run(size));
  }
  return out;
}

inline std::string format_scaling_tsv(const ScalingResult& r) {
  std::string out = "size\tprecision\trecall\taer\tseconds\n";
  char secs[32];
  for (const auto& row : r.rows) {
    std::snprintf(secs, sizeof secs, "%.3f", row.seconds);
    out += std::to_string(row.dataset_size) + "\t" + text::format_double(row.report.precision) +
           "\t" + text::format_double(row.report.recall) + "\t" +
           text::format_double(row.report.aer) + "\t" + secs + "\n";
  }
  return out;
}

/// Fixed-width table: method, dataset size, precision, recall, AER.
inline std::string format_scaling_table(const ScalingResult& r, const std::string& method) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-14s %12s %10s %8s %7s\n", "Method", "Dataset Size",
                "Precision", "Recall", "AER");
  out += line;
  bool first = true;
  for (const auto& row : r.rows) {
    std::snprintf(line, sizeof line, "%-14s %12zu %10.3f %8.3f %7.3f\n",
                  first ? method.c_str() : "", row.dataset_size, row.report.precision,
                  row.report.recall, row.report.aer);
    out += line;
    first = false;
  }
  return out;
}

}  // namespace alignkit
