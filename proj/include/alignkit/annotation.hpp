#pragma once

// Annotation tasks, guideline checks, and the crash-safe gold store behind
// the annotation API.
//
// The store is two files:
//   <path>          gold TSV of finished pairs (the published format)
//   <path>.status   "#alignkit-status v1" header, then
//                   id<TAB>status<TAB>version<TAB>annotator<TAB>note
// Each is replaced atomically (temp file, fsync, rename); the status file is
// replaced first. On load a discarded status wins, a gold record otherwise
// marks the pair done, and a done status without a gold record falls back to
// pending, so a crash between the two renames leaves either the old or the
// new links.

#include <cstdio>
#include <fcntl.h>
#include <unistd.h>

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "alignkit/core.hpp"

namespace alignkit {

enum class TaskStatus { pending, done, discarded };

inline std::string_view to_string(TaskStatus s) {
  switch (s) {
    case TaskStatus::pending: return "pending";
    case TaskStatus::done: return "done";
    case TaskStatus::discarded: return "discarded";
  }
  return "?";
}

inline TaskStatus parse_task_status(std::string_view s) {
  if (s == "pending") return TaskStatus::pending;
  if (s == "done") return TaskStatus::done;
  if (s == "discarded") return TaskStatus::discarded;
  throw Error("unknown task status '" + std::string(s) + "'");
}

struct AnnotationTask {
  SentencePair pair;
  TaskStatus status = TaskStatus::pending;
  AlignmentSet links;
  std::string note;  // discard reason or annotator remark
  std::string annotator;
  std::uint64_t version = 0;
};

struct GuidelineWarning {
  std::string code;
  std::string message;
};

/// Non-blocking checks of the annotation principles:
///   many-links     a token takes part in 3 or more links
///   unaligned      the pair has no links at all
///   repeated-token two occurrences of the same word are both linked to one
///                  token on the other side (repeated words align only once)
inline std::vector<GuidelineWarning> validate_guidelines(const AnnotationTask& task) {
  std::vector<GuidelineWarning> out;
  const auto& src = task.pair.src();
  const auto& tgt = task.pair.tgt();
  if (task.links.empty()) {
    out.push_back({"unaligned", "sentence pair has no links"});
    return out;
  }
  std::map<std::size_t, std::vector<std::size_t>> by_src, by_tgt;
  for (const auto& l : task.links) {
    by_src[l.src].push_back(l.tgt);
    by_tgt[l.tgt].push_back(l.src);
  }
  for (const auto& [i, js] : by_src)
    if (js.size() >= 3)
      out.push_back({"many-links", "source token " + std::to_string(i) + " '" + src[i] +
                                       "' has " + std::to_string(js.size()) + " links"});
  for (const auto& [j, is] : by_tgt)
    if (is.size() >= 3)
      out.push_back({"many-links", "target token " + std::to_string(j) + " '" + tgt[j] +
                                       "' has " + std::to_string(is.size()) + " links"});
  for (const auto& [j, is] : by_tgt)
    for (std::size_t a = 0; a < is.size(); ++a)
      for (std::size_t b = a + 1; b < is.size(); ++b)
        if (src[is[a]] == src[is[b]])
          out.push_back({"repeated-token", "repeated source word '" + src[is[a]] +
                                               "' aligned twice to target token " +
                                               std::to_string(j)});
  for (const auto& [i, js] : by_src)
    for (std::size_t a = 0; a < js.size(); ++a)
      for (std::size_t b = a + 1; b < js.size(); ++b)
        if (tgt[js[a]] == tgt[js[b]])
          out.push_back({"repeated-token", "repeated target word '" + tgt[js[a]] +
                                               "' aligned twice to source token " +
                                               std::to_string(i)});
  return out;
}

/// Writes `content` to `path` via a temp file in the same directory, fsync
/// and rename.
inline void write_file_atomic(const std::string& path, std::string_view content,
                              const std::function<void(std::string_view)>& hook = {},
                              std::string_view stage = {}) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw Error("cannot write " + tmp);
  std::size_t off = 0;
  while (off < content.size()) {
    const auto w = ::write(fd, content.data() + off, content.size() - off);
    if (w <= 0) {
      ::close(fd);
      throw Error("write failed: " + tmp);
    }
    off += static_cast<std::size_t>(w);
  }
  ::fsync(fd);
  ::close(fd);
  if (hook) hook(std::string(stage) + "-written");
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error("rename failed: " + path);
  if (hook) hook(std::string(stage) + "-renamed");
}

/// In-memory task list plus its on-disk store.
class GoldStore {
 public:
  /// Test hook, called with "status-written", "status-renamed",
  /// "gold-written", "gold-renamed" during every save.
  std::function<void(std::string_view)> fault_hook;

  GoldStore(const Corpus& corpus, std::string path) : path_(std::move(path)) {
    for (const auto& p : corpus) {
      index_.emplace(p.id(), tasks_.size());
      tasks_.push_back(AnnotationTask{p, TaskStatus::pending, {}, {}, {}, 0});
    }
    load();
  }

  const std::string& path() const noexcept { return path_; }
  std::string status_path() const { return path_ + ".status"; }
  const std::vector<AnnotationTask>& tasks() const noexcept { return tasks_; }

  AnnotationTask* find(std::size_t id) {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &tasks_[it->second];
  }
  const AnnotationTask* find(std::size_t id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &tasks_[it->second];
  }

  /// Finished records, sorted by id.
  std::vector<GoldRecord> done_records() const {
    std::vector<GoldRecord> out;
    for (const auto& t : tasks_)
      if (t.status == TaskStatus::done) out.push_back({t.pair, t.links});
    return out;
  }

  std::string gold_text() const { return format_gold(done_records()); }

  std::string status_text() const {
    std::string out = "#alignkit-status v1\n";
    for (const auto& t : tasks_) {
      if (t.status == TaskStatus::pending && t.version == 0) continue;
      out += std::to_string(t.pair.id()) + "\t" + std::string(to_string(t.status)) + "\t" +
             std::to_string(t.version) + "\t" + sanitize(t.annotator) + "\t" + sanitize(t.note) +
             "\n";
    }
    return out;
  }

  void save() const {
    write_file_atomic(status_path(), status_text(), fault_hook, "status");
    write_file_atomic(path_, gold_text(), fault_hook, "gold");
  }

 private:
  static std::string sanitize(std::string_view s) {
    std::string out(s);
    for (auto& c : out)
      if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    return out;
  }

  void load() {
    namespace fs = std::filesystem;
    std::map<std::size_t, TaskStatus> status_of;
    if (fs::exists(status_path())) {
      const auto lines = text::read_lines(status_path());
      if (lines.empty() || lines[0] != "#alignkit-status v1")
        throw Error(status_path() + ": missing '#alignkit-status v1' header");
      for (std::size_t k = 1; k < lines.size(); ++k) {
        if (lines[k].empty()) continue;
        const auto f = text::split(lines[k], '\t');
        const auto id = f.size() == 5 ? text::parse_index(f[0]) : std::nullopt;
        const auto version = f.size() == 5 ? text::parse_index(f[2]) : std::nullopt;
        if (!id || !version)
          throw Error(status_path() + ":" + std::to_string(k + 1) + ": malformed status row");
        auto* task = find(*id);
        if (!task)
          throw Error(status_path() + ": unknown pair id " + std::to_string(*id));
        status_of[*id] = parse_task_status(f[1]);
        task->version = *version;
        task->annotator = std::string(f[3]);
        task->note = std::string(f[4]);
      }
    }
    std::map<std::size_t, const GoldRecord*> gold_of;
    std::vector<GoldRecord> gold;
    if (fs::exists(path_)) gold = read_gold(path_);
    for (const auto& r : gold) {
      auto* task = find(r.id());
      if (!task) throw Error(path_ + ": unknown pair id " + std::to_string(r.id()));
      if (task->pair.src() != r.pair.src() || task->pair.tgt() != r.pair.tgt())
        throw Error(path_ + ": pair " + std::to_string(r.id()) + " does not match the corpus");
      gold_of[r.id()] = &r;
    }
    for (auto& task : tasks_) {
      const auto st = status_of.find(task.pair.id());
      const auto g = gold_of.find(task.pair.id());
      if (st != status_of.end() && st->second == TaskStatus::discarded) {
        task.status = TaskStatus::discarded;
      } else if (g != gold_of.end()) {
        task.status = TaskStatus::done;
        task.links = g->second->links;
      } else {
        task.status = TaskStatus::pending;
      }
    }
  }

  std::string path_;
  std::vector<AnnotationTask> tasks_;
  std::map<std::size_t, std::size_t> index_;
};

/// Response of one API call: HTTP status, body, content type.
struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Request handling for the annotation API, independent of the transport.
/// All calls are serialized by a single writer lock; every mutation bumps the
/// task's version and persists before returning. Conflicting writes are
/// last-write-wins.
class AnnotationService {
 public:
  AnnotationService(const Corpus& corpus, std::string store_path, std::string annotator = {})
      : store_(corpus, std::move(store_path)), annotator_(std::move(annotator)) {}

  GoldStore& store() noexcept { return store_; }

  ApiResponse next_pending() const {
    std::lock_guard lock(mutex_);
    for (const auto& t : store_.tasks())
      if (t.status == TaskStatus::pending) return {200, task_json(t).dump()};
    return error(404, "no pending pairs");
  }

  ApiResponse get_pair(std::string_view id_text) const {
    std::lock_guard lock(mutex_);
    const auto* t = lookup(id_text);
    if (!t) return error(404, "unknown pair id " + std::string(id_text));
    return {200, task_json(*t).dump()};
  }

  /// Body is a Pharaoh string, or JSON {"links": "<pharaoh>"}.
  ApiResponse put_links(std::string_view id_text, std::string_view body) {
    std::lock_guard lock(mutex_);
    auto* t = lookup(id_text);
    if (!t) return error(404, "unknown pair id " + std::string(id_text));
    std::string links_text;
    if (!extract_field(body, "links", links_text)) return error(422, "body must be a Pharaoh string or {\"links\": ...}");
    AlignmentSet links;
    try {
      links = parse_pharaoh(links_text);
    } catch (const ParseError& e) {
      return error(422, e.what(), e.item());
    }
    for (const auto& l : links) {
      const std::string item = std::to_string(l.src) + "-" + std::to_string(l.tgt);
      if (l.src >= t->pair.src().size())
        return error(422, "source index " + std::to_string(l.src) + " out of range", item);
      if (l.tgt >= t->pair.tgt().size())
        return error(422, "target index " + std::to_string(l.tgt) + " out of range", item);
    }
    AnnotationTask updated = *t;
    updated.links = std::move(links);
    updated.status = TaskStatus::done;
    updated.annotator = annotator_;
    ++updated.version;
    return commit(*t, std::move(updated));
  }

  /// Body is the reason, or JSON {"reason": "..."}; the reason is required.
  ApiResponse discard(std::string_view id_text, std::string_view body) {
    std::lock_guard lock(mutex_);
    auto* t = lookup(id_text);
    if (!t) return error(404, "unknown pair id " + std::string(id_text));
    std::string reason;
    if (!extract_field(body, "reason", reason) || text::trim(reason).empty())
      return error(422, "a discard reason is required");
    AnnotationTask updated = *t;
    updated.status = TaskStatus::discarded;
    updated.note = std::string(text::trim(reason));
    updated.annotator = annotator_;
    ++updated.version;
    return commit(*t, std::move(updated));
  }

  ApiResponse progress() const {
    std::lock_guard lock(mutex_);
    std::size_t pending = 0, done = 0, discarded = 0;
    for (const auto& t : store_.tasks()) {
      if (t.status == TaskStatus::pending) ++pending;
      else if (t.status == TaskStatus::done) ++done;
      else ++discarded;
    }
    nlohmann::json j{{"pending", pending},
                     {"done", done},
                     {"discarded", discarded},
                     {"total", store_.tasks().size()}};
    return {200, j.dump()};
  }

  ApiResponse export_gold() const {
    std::lock_guard lock(mutex_);
    return {200, store_.gold_text(), "text/tab-separated-values; charset=utf-8"};
  }

  static nlohmann::json task_json(const AnnotationTask& t) {
    nlohmann::json warnings = nlohmann::json::array();
    for (const auto& w : validate_guidelines(t))
      warnings.push_back({{"code", w.code}, {"message", w.message}});
    return nlohmann::json{{"id", t.pair.id()},
                          {"src_tokens", t.pair.src()},
                          {"tgt_tokens", t.pair.tgt()},
                          {"status", std::string(to_string(t.status))},
                          {"links", serialize_pharaoh(t.links)},
                          {"version", t.version},
                          {"note", t.note},
                          {"warnings", warnings}};
  }

 private:
  static ApiResponse error(int status, const std::string& message, const std::string& link = {}) {
    nlohmann::json j{{"error", message}};
    if (!link.empty()) j["link"] = link;
    return {status, j.dump()};
  }

  static bool extract_field(std::string_view body, const char* field, std::string& out) {
    const auto trimmed = text::trim(body);
    if (!trimmed.empty() && trimmed.front() == '{') {
      const auto j = nlohmann::json::parse(trimmed, nullptr, false);
      if (j.is_discarded() || !j.contains(field) || !j[field].is_string()) return false;
      out = j[field].get<std::string>();
      return true;
    }
    out = std::string(trimmed);
    return true;
  }

  AnnotationTask* lookup(std::string_view id_text) {
    const auto id = text::parse_index(id_text);
    return id ? store_.find(*id) : nullptr;
  }
  const AnnotationTask* lookup(std::string_view id_text) const {
    const auto id = text::parse_index(id_text);
    return id ? store_.find(*id) : nullptr;
  }

  ApiResponse commit(AnnotationTask& slot, AnnotationTask updated) {
    AnnotationTask previous = slot;
    slot = std::move(updated);
    try {
      store_.save();
    } catch (const std::exception& e) {
      slot = std::move(previous);
      return error(500, std::string("store write failed: ") + e.what());
    }
    return {200, task_json(slot).dump()};
  }

  GoldStore store_;
  std::string annotator_;
  mutable std::mutex mutex_;
};

}  // namespace alignkit
