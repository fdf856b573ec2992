#pragma once

// Tunables in one place, loadable from a `key = value` file.
// Blank lines and lines starting with '#' are ignored; unknown keys are errors.

#include <functional>
#include <map>
#include <string>
#include <string_view>

#include "alignkit/sent_align.hpp"
#include "alignkit/sim_align.hpp"
#include "alignkit/stat_align.hpp"

namespace alignkit {

struct Settings {
  TrainConfig train;
  SimAlignOptions sim;
  SentAlignConfig sent;
  FilterConfig filter;
};

namespace detail {

inline double config_number(std::string_view key, std::string_view value) {
  const auto v = text::parse_double(value);
  if (!v) throw Error("'" + std::string(key) + "' expects a number, got '" + std::string(value) + "'");
  return *v;
}

inline std::size_t config_count(std::string_view key, std::string_view value) {
  const auto v = text::parse_index(value);
  if (!v) throw Error("'" + std::string(key) + "' expects a non-negative integer, got '" + std::string(value) + "'");
  return *v;
}

}  // namespace detail

/// Applies one setting. Throws on unknown keys or bad values.
inline void apply_setting(Settings& s, std::string_view key, std::string_view value) {
  using Setter = std::function<void(Settings&, std::string_view, std::string_view)>;
  static const std::map<std::string, Setter, std::less<>> setters = {
      {"iterations", [](Settings& c, auto k, auto v) { c.train.iterations = static_cast<int>(detail::config_count(k, v)); }},
      {"variant", [](Settings& c, auto, auto v) { c.train.variant = parse_variant(v); }},
      {"lambda", [](Settings& c, auto k, auto v) { c.train.lambda = detail::config_number(k, v); }},
      {"p0", [](Settings& c, auto k, auto v) { c.train.p0 = detail::config_number(k, v); }},
      {"min_prob", [](Settings& c, auto k, auto v) { c.train.min_prob = detail::config_number(k, v); }},
      {"threads", [](Settings& c, auto k, auto v) { c.train.threads = static_cast<unsigned>(detail::config_count(k, v)); }},
      {"seed", [](Settings& c, auto k, auto v) { c.train.seed = detail::config_count(k, v); }},
      {"method", [](Settings& c, auto, auto v) { c.sim.method = parse_method(v); }},
      {"level", [](Settings& c, auto, auto v) { c.sim.level = parse_level(v); }},
      {"itermax_iterations", [](Settings& c, auto k, auto v) { c.sim.itermax_iterations = static_cast<int>(detail::config_count(k, v)); }},
      {"itermax_alpha", [](Settings& c, auto k, auto v) { c.sim.itermax_alpha = detail::config_number(k, v); }},
      {"softmax_threshold", [](Settings& c, auto k, auto v) { c.sim.softmax_threshold = detail::config_number(k, v); }},
      {"length_weight", [](Settings& c, auto k, auto v) { c.sent.length_weight = detail::config_number(k, v); }},
      {"dict_weight", [](Settings& c, auto k, auto v) { c.sent.dict_weight = detail::config_number(k, v); }},
      {"mean_ratio", [](Settings& c, auto k, auto v) { c.sent.mean_ratio = detail::config_number(k, v); }},
      {"variance", [](Settings& c, auto k, auto v) { c.sent.variance = detail::config_number(k, v); }},
      {"skip_penalty", [](Settings& c, auto k, auto v) { c.sent.skip_penalty = detail::config_number(k, v); }},
      {"merge_penalty", [](Settings& c, auto k, auto v) { c.sent.merge_penalty = detail::config_number(k, v); }},
      {"double_merge_penalty", [](Settings& c, auto k, auto v) { c.sent.double_merge_penalty = detail::config_number(k, v); }},
      {"max_length_ratio", [](Settings& c, auto k, auto v) { c.filter.max_length_ratio = detail::config_number(k, v); }},
      {"min_tokens", [](Settings& c, auto k, auto v) { c.filter.min_tokens = detail::config_count(k, v); }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw Error("unknown key '" + std::string(key) + "'");
  it->second(s, key, value);
}

/// Parses a config file's text on top of `base`.
inline Settings parse_settings(std::string_view content, Settings base = {}) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    const auto nl = content.find('\n', pos);
    const auto raw = content.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? content.size() + 1 : nl + 1;
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error("config line " + std::to_string(line_no) + ": expected key = value");
    try {
      apply_setting(base, text::trim(line.substr(0, eq)), text::trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  base.train.validate();
  return base;
}

inline Settings read_settings(const std::string& path, Settings base = {}) {
  return parse_settings(text::read_file(path), std::move(base));
}

/// One `key = value` line per setting, readable by parse_settings.
inline std::string format_settings(const Settings& s) {
  auto d = [](double v) { return text::format_double(v); };
  std::string out;
  out += "iterations = " + std::to_string(s.train.iterations) + "\n";
  out += "variant = " + std::string(to_string(s.train.variant)) + "\n";
  out += "lambda = " + d(s.train.lambda) + "\n";
  out += "p0 = " + d(s.train.p0) + "\n";
  out += "min_prob = " + d(s.train.min_prob) + "\n";
  out += "threads = " + std::to_string(s.train.threads) + "\n";
  out += "method = " + std::string(to_string(s.sim.method)) + "\n";
  out += "level = " + std::string(to_string(s.sim.level)) + "\n";
  out += "itermax_iterations = " + std::to_string(s.sim.itermax_iterations) + "\n";
  out += "itermax_alpha = " + d(s.sim.itermax_alpha) + "\n";
  out += "softmax_threshold = " + d(s.sim.softmax_threshold) + "\n";
  out += "length_weight = " + d(s.sent.length_weight) + "\n";
  out += "dict_weight = " + d(s.sent.dict_weight) + "\n";
  out += "mean_ratio = " + d(s.sent.mean_ratio) + "\n";
  out += "variance = " + d(s.sent.variance) + "\n";
  out += "skip_penalty = " + d(s.sent.skip_penalty) + "\n";
  out += "merge_penalty = " + d(s.sent.merge_penalty) + "\n";
  out += "double_merge_penalty = " + d(s.sent.double_merge_penalty) + "\n";
  out += "max_length_ratio = " + d(s.filter.max_length_ratio) + "\n";
  out += "min_tokens = " + std::to_string(s.filter.min_tokens) + "\n";
  return out;
}

}  // namespace alignkit
