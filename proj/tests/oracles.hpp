#pragma once

// Slow reference implementations used as test oracles. Each is written from
// the defining formula, shares no code with the library beyond plain data
// types, and is only practical on tiny inputs.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------------------
// Alignment metrics over links encoded as bits of a mask (cell i*m + j).

struct Scores {
  double precision, recall, aer;
};

inline Scores scores_from_masks(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& s,
                                const std::vector<std::uint64_t>& p) {
  double na = 0, ns = 0, nas = 0, nap = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    na += std::popcount(a[k]);
    ns += std::popcount(s[k]);
    nas += std::popcount(a[k] & s[k]);
    nap += std::popcount(a[k] & p[k]);
  }
  Scores r;
  r.precision = na == 0 ? 1.0 : nap / na;
  r.recall = nas / ns;
  r.aer = 1.0 - (nas + nap) / (na + ns);
  return r;
}

// ---------------------------------------------------------------------------
// Maximum-weight partial bipartite matching by exhaustive search. Only
// strictly positive cells may be used.

struct Matching {
  double weight = 0.0;
  std::set<std::pair<std::size_t, std::size_t>> links;
};

inline Matching brute_force_matching(const std::vector<std::vector<double>>& w) {
  const std::size_t n = w.size(), m = w.empty() ? 0 : w[0].size();
  Matching best;
  std::vector<bool> used(m, false);
  std::vector<std::pair<std::size_t, std::size_t>> current;
  std::function<void(std::size_t, double)> go = [&](std::size_t i, double total) {
    if (i == n) {
      if (total > best.weight) {
        best.weight = total;
        best.links = {current.begin(), current.end()};
      }
      return;
    }
    go(i + 1, total);  // row i unmatched
    for (std::size_t j = 0; j < m; ++j) {
      if (used[j] || !(w[i][j] > 0.0)) continue;
      used[j] = true;
      current.emplace_back(i, j);
      go(i + 1, total + w[i][j]);
      current.pop_back();
      used[j] = false;
    }
  };
  go(0, 0.0);
  return best;
}

// ---------------------------------------------------------------------------
// Dense EM for the NULL + position-prior mixture:
//   p(f_j | e) = p0 * t(f_j | NULL) + (1 - p0) * sum_i a(i | j) * t(f_j | e_i)
//   a(i | j)  = exp(-lambda |(i+1)/n - (j+1)/m|) / sum_k exp(...)   (uniform when lambda = 0)
// t is initialized uniformly over the target vocabulary and every row is
// renormalized over the targets it co-occurred with.

struct DenseEm {
  using Table = std::map<std::pair<std::string, std::string>, double>;
  Table t;
  std::vector<double> log_likelihood;  // before each iteration, then final
};

inline DenseEm dense_em(const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>& corpus,
                        int iterations, double lambda, double p0, bool diagonal) {
  const std::string null_token;
  std::set<std::string> tgt_vocab;
  DenseEm out;
  for (const auto& [src, tgt] : corpus)
    for (const auto& f : tgt) tgt_vocab.insert(f);
  for (const auto& [src, tgt] : corpus)
    for (const auto& f : tgt) {
      out.t[{null_token, f}] = 1.0 / static_cast<double>(tgt_vocab.size());
      for (const auto& e : src) out.t[{e, f}] = 1.0 / static_cast<double>(tgt_vocab.size());
    }
  auto prior = [&](std::size_t i, std::size_t j, std::size_t n, std::size_t m) {
    if (!diagonal) return 1.0 / static_cast<double>(n);
    double z = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      z += std::exp(-lambda * std::abs(double(k + 1) / double(n) - double(j + 1) / double(m)));
    return std::exp(-lambda * std::abs(double(i + 1) / double(n) - double(j + 1) / double(m))) / z;
  };
  auto e_step = [&](DenseEm::Table* counts) {
    double ll = 0.0;
    for (const auto& [src, tgt] : corpus) {
      const std::size_t n = src.size(), m = tgt.size();
      for (std::size_t j = 0; j < m; ++j) {
        const auto& f = tgt[j];
        double z = p0 * out.t.at({null_token, f});
        for (std::size_t i = 0; i < n; ++i) z += (1.0 - p0) * prior(i, j, n, m) * out.t.at({src[i], f});
        ll += std::log(z);
        if (!counts) continue;
        (*counts)[{null_token, f}] += p0 * out.t.at({null_token, f}) / z;
        for (std::size_t i = 0; i < n; ++i)
          (*counts)[{src[i], f}] += (1.0 - p0) * prior(i, j, n, m) * out.t.at({src[i], f}) / z;
      }
    }
    return ll;
  };
  for (int it = 0; it < iterations; ++it) {
    DenseEm::Table counts;
    out.log_likelihood.push_back(e_step(&counts));
    std::map<std::string, double> totals;
    for (const auto& [k, v] : counts) totals[k.first] += v;
    for (auto& [k, v] : out.t) v = counts[k] / totals[k.first];
  }
  out.log_likelihood.push_back(e_step(nullptr));
  return out;
}

// ---------------------------------------------------------------------------
// Sentence alignment by enumerating every monotone bead sequence.

struct Bead {
  std::size_t a, b;  // sentences taken from each side
};

/// Scores a bead covering src[i, i+a) and tgt[j, j+b). Supplied by the caller.
using BeadScore = std::function<double(std::size_t i, std::size_t a, std::size_t j, std::size_t b)>;

struct BestBeads {
  double score = -std::numeric_limits<double>::infinity();
  std::vector<Bead> beads;
};

inline BestBeads enumerate_beads(std::size_t n, std::size_t m, const BeadScore& score) {
  static const std::vector<Bead> kinds{{1, 1}, {1, 0}, {0, 1}, {1, 2}, {2, 1}, {2, 2}};
  BestBeads best;
  std::vector<Bead> path;
  std::function<void(std::size_t, std::size_t, double)> go = [&](std::size_t i, std::size_t j, double total) {
    if (i == n && j == m) {
      if (total > best.score) {
        best.score = total;
        best.beads = path;
      }
      return;
    }
    for (const auto& k : kinds) {
      if (i + k.a > n || j + k.b > m) continue;
      path.push_back(k);
      go(i + k.a, j + k.b, total + score(i, k.a, j, k.b));
      path.pop_back();
    }
  };
  go(0, 0, 0.0);
  return best;
}

// ---------------------------------------------------------------------------
// Random inputs

inline std::vector<std::vector<double>> random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t m,
                                                      double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<std::vector<double>> out(n, std::vector<double>(m));
  for (auto& row : out)
    for (auto& x : row) x = d(rng);
  return out;
}

}  // namespace oracle
