#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "alignkit/core.hpp"

namespace alignkit {

enum class Symmetrization { intersection, union_, grow_diag_final_and };

inline Symmetrization parse_symmetrization(std::string_view name) {
  if (name == "intersection" || name == "intersect") return Symmetrization::intersection;
  if (name == "union") return Symmetrization::union_;
  if (name == "grow-diag-final-and" || name == "gdfa") return Symmetrization::grow_diag_final_and;
  throw Error("unknown symmetrization heuristic '" + std::string(name) + "'");
}

inline std::string_view to_string(Symmetrization h) {
  switch (h) {
    case Symmetrization::intersection: return "intersection";
    case Symmetrization::union_: return "union";
    case Symmetrization::grow_diag_final_and: return "grow-diag-final-and";
  }
  return "?";
}

namespace detail {

inline constexpr std::array<std::array<int, 2>, 8> kGrowDiagNeighbors{{
    {-1, 0}, {0, -1}, {1, 0}, {0, 1},     // grow
    {-1, -1}, {-1, 1}, {1, -1}, {1, 1}}};  // diagonal

inline AlignmentSet grow_diag_final_and(const AlignmentSet& fwd, const AlignmentSet& rev) {
  const AlignmentSet uni = unite(fwd, rev);
  AlignmentSet out = intersect(fwd, rev);
  std::size_t n = 0, m = 0;
  for (const auto& l : uni) {
    n = std::max(n, l.src + 1);
    m = std::max(m, l.tgt + 1);
  }
  std::vector<bool> src_aligned(n, false), tgt_aligned(m, false);
  for (const auto& l : out) {
    src_aligned[l.src] = true;
    tgt_aligned[l.tgt] = true;
  }

  bool added = true;
  while (added) {
    added = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (!out.contains({i, j})) continue;
        for (const auto& [di, dj] : kGrowDiagNeighbors) {
          const auto ni = static_cast<long long>(i) + di;
          const auto nj = static_cast<long long>(j) + dj;
          if (ni < 0 || nj < 0 || ni >= static_cast<long long>(n) ||
              nj >= static_cast<long long>(m))
            continue;
          const Link cand{static_cast<std::size_t>(ni), static_cast<std::size_t>(nj)};
          if ((!src_aligned[cand.src] || !tgt_aligned[cand.tgt]) && uni.contains(cand) &&
              !out.contains(cand)) {
            out.insert(cand);
            src_aligned[cand.src] = true;
            tgt_aligned[cand.tgt] = true;
            added = true;
          }
        }
      }
    }
  }

  // final-and: only links whose both endpoints are still unaligned
  for (const auto* dir : {&fwd, &rev}) {
    for (const auto& l : *dir) {
      if (!src_aligned[l.src] && !tgt_aligned[l.tgt]) {
        out.insert(l);
        src_aligned[l.src] = true;
        tgt_aligned[l.tgt] = true;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Combines a source-to-target alignment with a target-to-source alignment
/// already transposed into (source, target) space.
inline AlignmentSet symmetrize(const AlignmentSet& fwd, const AlignmentSet& rev,
                               Symmetrization heuristic) {
  switch (heuristic) {
    case Symmetrization::intersection: return intersect(fwd, rev);
    case Symmetrization::union_: return unite(fwd, rev);
    case Symmetrization::grow_diag_final_and: return detail::grow_diag_final_and(fwd, rev);
  }
  return {};
}

}  // namespace alignkit
