// alignkit command-line front end.
//
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "alignkit/alignkit.hpp"
#include "alignkit/annotation_server.hpp"

namespace fs = std::filesystem;
using namespace alignkit;

namespace {

void log(const std::string& msg) { std::cerr << "alignkit: " << msg << "\n"; }

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
  } else {
    text::write_file(path, content);
  }
}

std::string pharaoh_lines(const std::vector<AlignmentSet>& sets) { return format_pharaoh_file(sets); }

/// Looks for --config before CLI11 runs so file values become option defaults.
std::optional<std::string> prescan_config(int argc, char** argv) {
  for (int k = 1; k < argc; ++k) {
    const std::string_view a = argv[k];
    if (a == "--config" && k + 1 < argc) return std::string(argv[k + 1]);
    if (a.rfind("--config=", 0) == 0) return std::string(a.substr(9));
  }
  return std::nullopt;
}

/// Hypotheses are a Pharaoh file (line k = pair id k) or a gold TSV.
PairAlignments read_hypothesis(const std::string& path) {
  const auto content = text::read_file(path);
  const auto first = content.substr(0, content.find('\n'));
  if (first.find('\t') != std::string::npos) return gold_links(read_gold(path));
  PairAlignments out;
  const auto lines = read_pharaoh_file(path);
  for (std::size_t k = 0; k < lines.size(); ++k) out.emplace(k, lines[k]);
  return out;
}

/// Keep only the gold ids.
PairAlignments restrict_to(const PairAlignments& hyp, const PairAlignments& gold,
                           const std::string& path) {
  PairAlignments out;
  for (const auto& [id, _] : gold) {
    const auto it = hyp.find(id);
    if (it == hyp.end()) throw Error(path + " has no alignment for gold id " + std::to_string(id));
    out.emplace(id, it->second);
  }
  return out;
}

AnnotationServer* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  Settings settings;
  std::string config_path;
  try {
    if (auto p = prescan_config(argc, argv)) {
      config_path = *p;
      settings = read_settings(config_path);
    }
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return 2;
  }

  CLI::App app{"alignkit: bitext word alignment toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", config_path, "key = value settings file");

  std::string variant_name(to_string(settings.train.variant));
  std::string method_name(to_string(settings.sim.method));
  std::string level_name(to_string(settings.sim.level));
  std::function<void()> run;

  // segment
  auto* seg = app.add_subcommand("segment", "split JSONL documents into sentences");
  std::string seg_docs, seg_abbr, seg_out;
  seg->add_option("--docs", seg_docs, "documents (JSONL: doc_key, lang, text)")->required();
  seg->add_option("--abbrev", seg_abbr, "abbreviation list, one per line");
  seg->add_option("--out", seg_out, "output JSONL (default stdout)");
  seg->callback([&] {
    run = [&] {
      const auto abbr = seg_abbr.empty() ? Abbreviations{} : read_abbreviations(seg_abbr);
      std::string out;
      for (const auto& d : read_documents(seg_docs)) {
        nlohmann::json j{{"doc_key", d.doc_key}, {"lang", d.lang}, {"sentences", segment_sentences(d, abbr)}};
        out += j.dump() + "\n";
      }
      emit(seg_out, out);
    };
  });

  // pair-docs
  auto* pd = app.add_subcommand("pair-docs", "match documents across two languages by doc_key");
  std::string pd_docs, pd_src_lang, pd_tgt_lang, pd_out;
  pd->add_option("--docs", pd_docs)->required();
  pd->add_option("--src-lang", pd_src_lang)->required();
  pd->add_option("--tgt-lang", pd_tgt_lang)->required();
  pd->add_option("--out", pd_out, "TSV doc_key, src lang, tgt lang (default stdout)");
  pd->callback([&] {
    run = [&] {
      const auto pairing = pair_documents(read_documents(pd_docs), pd_src_lang, pd_tgt_lang);
      std::string out;
      for (const auto& [s, t] : pairing.pairs) out += s.doc_key + "\t" + s.lang + "\t" + t.lang + "\n";
      for (const auto& d : pairing.unmatched) log("unmatched document " + d.doc_key + " (" + d.lang + ")");
      log(std::to_string(pairing.pairs.size()) + " document pairs, " +
          std::to_string(pairing.unmatched.size()) + " unmatched");
      emit(pd_out, out);
    };
  });

  // sentalign
  auto* sa = app.add_subcommand("sentalign", "align sentences of paired documents");
  std::string sa_docs, sa_src_lang, sa_tgt_lang, sa_src, sa_tgt, sa_dict, sa_abbr, sa_out_src, sa_out_tgt, sa_beads;
  auto* sa_docs_opt = sa->add_option("--docs", sa_docs, "documents (JSONL)");
  sa->add_option("--src-lang", sa_src_lang)->needs(sa_docs_opt);
  sa->add_option("--tgt-lang", sa_tgt_lang)->needs(sa_docs_opt);
  auto* sa_src_opt = sa->add_option("--src", sa_src, "source sentences, one per line");
  auto* sa_tgt_opt = sa->add_option("--tgt", sa_tgt, "target sentences, one per line");
  sa_src_opt->needs(sa_tgt_opt)->excludes(sa_docs_opt);
  sa_tgt_opt->needs(sa_src_opt);
  sa->add_option("--dict", sa_dict, "bilingual dictionary TSV");
  sa->add_option("--abbrev", sa_abbr);
  sa->add_option("--out-src", sa_out_src)->required();
  sa->add_option("--out-tgt", sa_out_tgt)->required();
  sa->add_option("--beads", sa_beads, "bead report TSV");
  sa->add_option("--length-weight", settings.sent.length_weight)->capture_default_str();
  sa->add_option("--dict-weight", settings.sent.dict_weight)->capture_default_str();
  sa->add_option("--skip-penalty", settings.sent.skip_penalty)->capture_default_str();
  sa->add_option("--merge-penalty", settings.sent.merge_penalty)->capture_default_str();
  sa->callback([&] {
    run = [&] {
      if (sa_docs.empty() && sa_src.empty()) throw CLI::RequiredError("--docs or --src/--tgt");
      if (!sa_docs.empty() && (sa_src_lang.empty() || sa_tgt_lang.empty()))
        throw CLI::RequiredError("--src-lang and --tgt-lang");
      const auto dict = sa_dict.empty() ? Dictionary{} : read_dictionary(sa_dict);
      const auto abbr = sa_abbr.empty() ? Abbreviations{} : read_abbreviations(sa_abbr);
      std::vector<std::tuple<std::string, std::vector<std::string>, std::vector<std::string>>> jobs;
      if (!sa_docs.empty()) {
        const auto pairing = pair_documents(read_documents(sa_docs), sa_src_lang, sa_tgt_lang);
        for (const auto& d : pairing.unmatched) log("unmatched document " + d.doc_key + " (" + d.lang + ")");
        for (const auto& [s, t] : pairing.pairs)
          jobs.emplace_back(s.doc_key, segment_sentences(s, abbr), segment_sentences(t, abbr));
      } else {
        jobs.emplace_back("-", text::read_lines(sa_src), text::read_lines(sa_tgt));
      }
      std::string out_s, out_t, beads = "doc_key\tsrc_begin\tsrc_count\ttgt_begin\ttgt_count\tscore\n";
      std::size_t n_pairs = 0;
      for (const auto& [key, src, tgt] : jobs) {
        if (src.empty() || tgt.empty()) {
          log("document " + key + " has an empty side, skipped");
          continue;
        }
        const auto aligned = align_sentences(src, tgt, dict, settings.sent);
        for (const auto& b : aligned)
          beads += key + "\t" + std::to_string(b.src_begin) + "\t" + std::to_string(b.src_count) +
                   "\t" + std::to_string(b.tgt_begin) + "\t" + std::to_string(b.tgt_count) + "\t" +
                   text::format_double(b.score) + "\n";
        for (const auto& p : bead_texts(aligned, src, tgt)) {
          out_s += p.src + "\n";
          out_t += p.tgt + "\n";
          ++n_pairs;
        }
      }
      text::write_file(sa_out_src, out_s);
      text::write_file(sa_out_tgt, out_t);
      if (!sa_beads.empty()) text::write_file(sa_beads, beads);
      log(std::to_string(n_pairs) + " sentence pairs from " + std::to_string(jobs.size()) + " documents");
    };
  });

  // filter
  auto* fl = app.add_subcommand("filter", "drop duplicate, identical, short and length-mismatched pairs");
  std::string fl_src, fl_tgt, fl_out_src, fl_out_tgt, fl_report;
  fl->add_option("--src", fl_src)->required();
  fl->add_option("--tgt", fl_tgt)->required();
  fl->add_option("--out-src", fl_out_src)->required();
  fl->add_option("--out-tgt", fl_out_tgt)->required();
  fl->add_option("--report", fl_report, "dropped pairs TSV: line, rule, src, tgt");
  fl->add_option("--max-length-ratio", settings.filter.max_length_ratio)->capture_default_str();
  fl->add_option("--min-tokens", settings.filter.min_tokens)->capture_default_str();
  fl->callback([&] {
    run = [&] {
      const auto src = text::read_lines(fl_src);
      const auto tgt = text::read_lines(fl_tgt);
      if (src.size() != tgt.size())
        throw Error("line count mismatch " + std::to_string(src.size()) + "≠" + std::to_string(tgt.size()));
      std::vector<TextPair> pairs;
      for (std::size_t k = 0; k < src.size(); ++k) pairs.push_back({src[k], tgt[k]});
      const auto result = filter_pairs(pairs, settings.filter);
      std::string out_s, out_t;
      for (const auto& p : result.kept) {
        out_s += p.src + "\n";
        out_t += p.tgt + "\n";
      }
      text::write_file(fl_out_src, out_s);
      text::write_file(fl_out_tgt, out_t);
      if (!fl_report.empty()) {
        std::string report = "line\trule\tsrc\ttgt\n";
        for (const auto& d : result.dropped)
          report += std::to_string(d.index + 1) + "\t" + std::string(to_string(d.rule)) + "\t" +
                    d.pair.src + "\t" + d.pair.tgt + "\n";
        text::write_file(fl_report, report);
      }
      log("kept " + std::to_string(result.kept.size()) + ", dropped " + std::to_string(result.dropped.size()));
    };
  });

  // train
  auto* tr = app.add_subcommand("train", "train lexical translation models (forward and reverse)");
  std::string tr_src, tr_tgt, tr_out;
  bool tr_no_reverse = false;
  tr->add_option("--src", tr_src)->required();
  tr->add_option("--tgt", tr_tgt)->required();
  tr->add_option("--out", tr_out, "model file; the reverse model goes to <out>.rev")->required();
  tr->add_flag("--no-reverse", tr_no_reverse, "skip the reverse model");
  tr->add_option("--variant", variant_name, "model1 or diagonal")->capture_default_str();
  tr->add_option("--iterations", settings.train.iterations)->capture_default_str();
  tr->add_option("--lambda", settings.train.lambda)->capture_default_str();
  tr->add_option("--p0", settings.train.p0)->capture_default_str();
  tr->add_option("--threads", settings.train.threads, "0 = all cores")->capture_default_str();
  tr->callback([&] {
    run = [&] {
      settings.train.variant = parse_variant(variant_name);
      const auto corpus = load_bitext(tr_src, tr_tgt);
      auto fit = [&](const Corpus& c, const std::string& path, const char* label) {
        const auto r = train_with_history(c, settings.train);
        for (std::size_t k = 0; k < r.log_likelihood.size(); ++k)
          log(std::string(label) + " iteration " + std::to_string(k) +
              " log-likelihood " + text::format_double(r.log_likelihood[k]));
        text::write_file(path, r.model.serialize());
      };
      fit(corpus, tr_out, "forward");
      if (!tr_no_reverse) fit(corpus.swapped(), tr_out + ".rev", "reverse");
      log("trained on " + std::to_string(corpus.size()) + " pairs");
    };
  });

  // align
  auto* al = app.add_subcommand("align", "Viterbi word alignment with a trained model");
  std::string al_model, al_rev, al_src, al_tgt, al_out, al_sym = "gdfa";
  al->add_option("--model", al_model)->required();
  al->add_option("--reverse-model", al_rev, "default <model>.rev");
  al->add_option("--src", al_src)->required();
  al->add_option("--tgt", al_tgt)->required();
  al->add_option("--sym", al_sym, "none, intersection, union, gdfa")->capture_default_str();
  al->add_option("--out", al_out, "Pharaoh output (default stdout)");
  al->callback([&] {
    run = [&] {
      const auto corpus = load_bitext(al_src, al_tgt);
      const auto fwd = TranslationModel::parse(text::read_file(al_model));
      std::vector<AlignmentSet> out;
      if (al_sym == "none") {
        out = align_corpus(fwd, corpus);
      } else {
        const auto h = parse_symmetrization(al_sym);
        if (al_rev.empty()) al_rev = al_model + ".rev";
        if (!fs::exists(al_rev)) throw Error("reverse model not found: " + al_rev + " (use --sym none)");
        const auto rev = TranslationModel::parse(text::read_file(al_rev));
        out = align_symmetric(fwd, rev, corpus, h);
      }
      emit(al_out, pharaoh_lines(out));
      log("aligned " + std::to_string(out.size()) + " pairs");
    };
  });

  // simalign
  auto* sm = app.add_subcommand("simalign", "align from contextual embeddings");
  std::string sm_emb, sm_out;
  std::size_t sm_lines = 0;
  sm->add_option("--embeddings", sm_emb, "EmbeddingRecord JSONL")->required();
  sm->add_option("--method", method_name, "argmax, itermax, match, softmax")->capture_default_str();
  sm->add_option("--level", level_name, "word or subword")->capture_default_str();
  sm->add_option("--itermax-iterations", settings.sim.itermax_iterations)->capture_default_str();
  sm->add_option("--itermax-alpha", settings.sim.itermax_alpha)->capture_default_str();
  sm->add_option("--softmax-threshold", settings.sim.softmax_threshold)->capture_default_str();
  sm->add_option("--lines", sm_lines, "pad the output to this many lines");
  sm->add_option("--out", sm_out, "Pharaoh output by record id (default stdout)");
  sm->callback([&] {
    run = [&] {
      settings.sim.method = parse_method(method_name);
      settings.sim.level = parse_level(level_name);
      const auto records = read_embedding_file(sm_emb);
      std::map<std::size_t, AlignmentSet> by_id;
      for (const auto& r : records)
        if (!by_id.emplace(r.id, align_record(r, settings.sim)).second)
          throw Error("duplicate embedding record id " + std::to_string(r.id));
      std::size_t n = sm_lines;
      if (!by_id.empty()) n = std::max(n, by_id.rbegin()->first + 1);
      std::vector<AlignmentSet> out(n);
      for (auto& [id, links] : by_id) out[id] = std::move(links);
      if (by_id.size() < n) log(std::to_string(n - by_id.size()) + " ids without a record left empty");
      emit(sm_out, pharaoh_lines(out));
    };
  });

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "precision, recall and AER against gold");
  std::string ev_hyp, ev_gold, ev_possible, ev_out, ev_format = "line";
  ev->add_option("--hyp", ev_hyp, "Pharaoh file (line k = pair id k) or gold TSV")->required();
  ev->add_option("--gold", ev_gold, "gold TSV (Sure links)")->required();
  ev->add_option("--possible", ev_possible, "gold TSV with Possible links (default: Sure)");
  ev->add_option("--format", ev_format)->check(CLI::IsMember({"line", "tsv"}))->capture_default_str();
  ev->add_option("--out", ev_out, "report file (default stdout)");
  ev->callback([&] {
    run = [&] {
      const auto sure = gold_links(read_gold(ev_gold));
      const auto possible = ev_possible.empty() ? sure : gold_links(read_gold(ev_possible));
      const auto hyp = restrict_to(read_hypothesis(ev_hyp), sure, ev_hyp);
      const auto r = evaluate(hyp, sure, possible);
      emit(ev_out, ev_format == "tsv" ? format_report_tsv(r) : format_report_line(r) + "\n");
    };
  });

  // scale
  auto* sc = app.add_subcommand("scale", "AER as a function of training data size");
  std::string sc_gold, sc_src, sc_tgt, sc_out, sc_sym = "gdfa", sc_format = "tsv", sc_method = "statistical";
  std::vector<std::size_t> sc_sizes;
  bool sc_concurrent = false;
  sc->add_option("--gold", sc_gold)->required();
  sc->add_option("--src", sc_src, "extra training corpus, source side")->required();
  sc->add_option("--tgt", sc_tgt)->required();
  sc->add_option("--sizes", sc_sizes, "comma-separated corpus sizes")->required()->delimiter(',');
  sc->add_option("--sym", sc_sym, "none, intersection, union, gdfa")->capture_default_str();
  sc->add_option("--format", sc_format)->check(CLI::IsMember({"tsv", "table"}))->capture_default_str();
  sc->add_option("--label", sc_method, "method name in table output")->capture_default_str();
  sc->add_flag("--concurrent", sc_concurrent, "run sizes in parallel");
  sc->add_option("--variant", variant_name)->capture_default_str();
  sc->add_option("--iterations", settings.train.iterations)->capture_default_str();
  sc->add_option("--lambda", settings.train.lambda)->capture_default_str();
  sc->add_option("--p0", settings.train.p0)->capture_default_str();
  sc->add_option("--threads", settings.train.threads)->capture_default_str();
  sc->add_option("--out", sc_out, "report (default stdout)");
  sc->callback([&] {
    run = [&] {
      settings.train.variant = parse_variant(variant_name);
      std::optional<Symmetrization> h;
      if (sc_sym != "none") h = parse_symmetrization(sc_sym);
      const auto result = scaling_experiment(read_gold(sc_gold), load_bitext(sc_src, sc_tgt), sc_sizes,
                                             statistical_aligner(settings.train, h), sc_concurrent);
      emit(sc_out, sc_format == "table" ? format_scaling_table(result, sc_method) : format_scaling_tsv(result));
    };
  });

  // grid
  auto* gr = app.add_subcommand("grid", "render alignment grids, one HTML file per pair");
  std::string gr_gold, gr_out_dir;
  std::vector<std::string> gr_hyps, gr_names;
  std::vector<std::size_t> gr_ids;
  bool gr_text = false;
  gr->add_option("--gold", gr_gold)->required();
  gr->add_option("--hyp", gr_hyps, "up to two Pharaoh files (box, circle)");
  gr->add_option("--name", gr_names, "labels for --hyp files");
  gr->add_option("--ids", gr_ids, "pair ids (default all)")->delimiter(',');
  gr->add_option("--out-dir", gr_out_dir)->required();
  gr->add_flag("--text", gr_text, "also write plain-text grids");
  gr->callback([&] {
    run = [&] {
      if (gr_hyps.size() > 2) throw CLI::ValidationError("--hyp", "at most two hypothesis files");
      const auto gold = read_gold(gr_gold);
      std::vector<std::vector<AlignmentSet>> hyps;
      for (const auto& h : gr_hyps) hyps.push_back(read_pharaoh_file(h));
      fs::create_directories(gr_out_dir);
      std::set<std::size_t> wanted(gr_ids.begin(), gr_ids.end());
      std::size_t written = 0;
      for (const auto& r : gold) {
        if (!wanted.empty() && !wanted.count(r.id())) continue;
        std::vector<NamedAlignment> cands;
        for (std::size_t k = 0; k < hyps.size(); ++k) {
          if (r.id() >= hyps[k].size())
            throw Error(gr_hyps[k] + " has no line for pair " + std::to_string(r.id()));
          const std::string name = k < gr_names.size() ? gr_names[k] : fs::path(gr_hyps[k]).filename().string();
          cands.push_back({name, hyps[k][r.id()]});
        }
        const auto doc = render_grid(r.pair, r.links, cands);
        const auto base = (fs::path(gr_out_dir) / ("pair-" + std::to_string(r.id()))).string();
        text::write_file(base + ".html", doc.html);
        if (gr_text) text::write_file(base + ".txt", doc.text);
        ++written;
      }
      log("wrote " + std::to_string(written) + " grids to " + gr_out_dir);
    };
  });

  // annotate-serve
  auto* as = app.add_subcommand("annotate-serve", "serve the annotation HTTP API");
  std::string as_src, as_tgt, as_store, as_static, as_cors, as_annotator;
  ServerOptions server_opts;
  as->add_option("--src", as_src)->required();
  as->add_option("--tgt", as_tgt)->required();
  as->add_option("--store", as_store, "gold TSV store; status goes to <store>.status")->required();
  as->add_option("--host", server_opts.host)->capture_default_str();
  as->add_option("--port", server_opts.port, "0 picks a free port")->capture_default_str();
  as->add_option("--static", server_opts.static_dir, "directory with the annotation UI");
  as->add_option("--cors", server_opts.cors_origin, "Access-Control-Allow-Origin value");
  as->add_option("--annotator", as_annotator, "annotator name recorded with each save");
  as->callback([&] {
    run = [&] {
      AnnotationService service(load_bitext(as_src, as_tgt), as_store, as_annotator);
      AnnotationServer server(service, server_opts);
      const int port = server.bind();
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      log("listening on http://" + server_opts.host + ":" + std::to_string(port) + "/v1/");
      server.serve();
      g_server = nullptr;
      log("stopped");
    };
  });

  // export-gold
  auto* eg = app.add_subcommand("export-gold", "write the finished pairs of an annotation store");
  std::string eg_src, eg_tgt, eg_store, eg_out;
  eg->add_option("--src", eg_src)->required();
  eg->add_option("--tgt", eg_tgt)->required();
  eg->add_option("--store", eg_store)->required();
  eg->add_option("--out", eg_out, "gold TSV (default stdout)");
  eg->callback([&] {
    run = [&] {
      const GoldStore store(load_bitext(eg_src, eg_tgt), eg_store);
      emit(eg_out, store.gold_text());
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  log(std::string("version ") + kVersion + ", command " + sub +
      (config_path.empty() ? "" : ", config " + config_path));
  std::string cfg = format_settings(settings);
  cfg.pop_back();
  for (std::size_t p = cfg.find('\n'); p != std::string::npos; p = cfg.find('\n', p)) cfg.replace(p, 1, ", ");
  log("settings " + cfg);

  try {
    run();
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return 1;
  }
  return 0;
}
