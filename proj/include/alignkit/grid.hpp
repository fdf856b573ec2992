#pragma once

// Alignment grids for side-by-side inspection: source tokens are rows,
// target tokens are columns, gold links are filled cells, the first candidate
// is drawn as boxes and the second as circles.

#include <string>
#include <string_view>
#include <vector>

#include "alignkit/core.hpp"

namespace alignkit {

struct NamedAlignment {
  std::string name;
  AlignmentSet links;
};

struct GridDocument {
  std::string html;
  std::string text;
};

namespace detail {

inline std::string html_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace detail

/// Renders one pair. At most two candidates. Output bytes depend only on the inputs.
inline GridDocument render_grid(const SentencePair& pair, const AlignmentSet& gold,
                                const std::vector<NamedAlignment>& candidates) {
  if (candidates.size() > 2) throw Error("render_grid takes at most 2 candidate alignments");
  const std::size_t n = pair.src().size(), m = pair.tgt().size();
  gold.check_bounds(n, m);
  for (const auto& c : candidates) c.links.check_bounds(n, m);

  const AlignmentSet empty;
  const AlignmentSet& boxes = candidates.size() > 0 ? candidates[0].links : empty;
  const AlignmentSet& circles = candidates.size() > 1 ? candidates[1].links : empty;

  GridDocument doc;
  auto& h = doc.html;
  h += "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n";
  h += "<title>pair " + std::to_string(pair.id()) + "</title>\n";
  h += "<style>\n"
       "table{border-collapse:collapse;font-family:sans-serif;font-size:13px}\n"
       "td{width:22px;height:22px;border:1px solid #ccc;text-align:center;padding:0}\n"
       "td.gold{background:#2e7d32}\n"
       "th.col{height:110px;vertical-align:bottom;font-weight:normal}\n"
       "th.col div{transform:rotate(-60deg);width:22px;white-space:nowrap}\n"
       "th.row{text-align:right;font-weight:normal;padding-right:6px}\n"
       ".box{display:inline-block;width:14px;height:14px;border:2px solid #1565c0;box-sizing:border-box}\n"
       ".circle{display:inline-block;width:12px;height:12px;border:2px solid #c62828;border-radius:50%;box-sizing:border-box}\n"
       ".stack{position:relative;display:inline-block;width:16px;height:16px}\n"
       ".stack span{position:absolute;left:1px;top:1px}\n"
       "</style>\n</head>\n<body>\n";
  h += "<p>pair " + std::to_string(pair.id()) + ": filled = gold";
  if (candidates.size() > 0) h += ", box = " + detail::html_escape(candidates[0].name);
  if (candidates.size() > 1) h += ", circle = " + detail::html_escape(candidates[1].name);
  h += "</p>\n<table>\n<tr><th></th>";
  for (const auto& t : pair.tgt()) h += "<th class=\"col\"><div>" + detail::html_escape(t) + "</div></th>";
  h += "</tr>\n";
  for (std::size_t i = 0; i < n; ++i) {
    h += "<tr><th class=\"row\">" + detail::html_escape(pair.src()[i]) + "</th>";
    for (std::size_t j = 0; j < m; ++j) {
      const bool g = gold.contains({i, j});
      const bool b = boxes.contains({i, j});
      const bool c = circles.contains({i, j});
      h += g ? "<td class=\"gold\">" : "<td>";
      if (b && c) h += "<span class=\"stack\"><span class=\"box\"></span><span class=\"circle\"></span></span>";
      else if (b) h += "<span class=\"box\"></span>";
      else if (c) h += "<span class=\"circle\"></span>";
      h += "</td>";
    }
    h += "</tr>\n";
  }
  h += "</table>\n</body>\n</html>\n";

  // Plain text: each cell is three characters. Centre: '#' gold, 'o' circle,
  // '@' gold and circle, '.' none. Brackets mark a box.
  auto& t = doc.text;
  t += "pair " + std::to_string(pair.id()) + "\n";
  t += "# gold";
  if (candidates.size() > 0) t += "  [ ] " + candidates[0].name;
  if (candidates.size() > 1) t += "  o " + candidates[1].name;
  t += "\n";
  for (std::size_t j = 0; j < m; ++j)
    t += "col " + std::to_string(j) + ": " + pair.tgt()[j] + "\n";
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const bool g = gold.contains({i, j});
      const bool b = boxes.contains({i, j});
      const bool c = circles.contains({i, j});
      const char centre = g && c ? '@' : g ? '#' : c ? 'o' : '.';
      t.push_back(b ? '[' : ' ');
      t.push_back(centre);
      t.push_back(b ? ']' : ' ');
    }
    t += "  " + std::to_string(i) + ": " + pair.src()[i] + "\n";
  }
  return doc;
}

}  // namespace alignkit
