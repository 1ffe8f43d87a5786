// csnorm: command-line front end.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "csnorm/csnorm.hpp"

namespace {

using namespace csnorm;

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

std::string fmt2(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    std::cout.flush();
  } else {
    write_file(out_path, text);
  }
}

LanguagePair parse_languages(const std::string& s) {
  auto comma = s.find(',');
  if (comma == std::string::npos) throw CLI::ValidationError("--languages", "expected two codes, e.g. TR,DE");
  LanguagePair p{s.substr(0, comma), s.substr(comma + 1)};
  if (p.first.empty() || p.second.empty() || p.first == p.second)
    throw CLI::ValidationError("--languages", "expected two distinct codes");
  return p;
}

// Options shared by the experiment commands. Flags override the config file.
struct Common {
  std::string config;
  std::string languages;
  std::uint64_t seed = 42;
  std::size_t threads = 0;
  std::vector<std::string> resources;  // LANG=PATH

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "JSON configuration file");
    cmd->add_option("--languages", languages, "language pair, e.g. TR,DE");
    cmd->add_option("--seed", seed, "random seed")->default_val(42);
    cmd->add_option("--threads", threads, "worker threads (0: all cores)");
    cmd->add_option("--resources", resources, "resource bundle per language, LANG=PATH (repeatable)");
  }

  Config load(const CLI::App* cmd) const {
    Config c = config.empty() ? Config{} : load_config(config);
    if (!languages.empty()) c.languages = parse_languages(languages);
    if (cmd->count("--seed")) c.set_seed(seed);
    if (cmd->count("--threads")) c.set_threads(threads);
    for (const auto& r : resources) {
      auto eq = r.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == r.size())
        throw CLI::ValidationError("--resources", "expected LANG=PATH, got " + r);
      c.resources[r.substr(0, eq)] = r.substr(eq + 1);
    }
    return c;
  }
};

Dataset read_dataset(const std::string& path, const LanguagePair& langs) {
  return parse_norm_file(read_file(path), langs);
}

// LID labels for a label-dependent strategy: from a tagger when given,
// otherwise the (coarse-mapped) LID column.
std::optional<TokenTable> lids_for(const Dataset& d, Strategy s, const std::string& lid_model) {
  if (!needs_lid(s)) return std::nullopt;
  if (!lid_model.empty()) return tag_lid(LinearSequenceModel::load(lid_model), d);
  if (!d.has_lid()) throw InvalidArgument(std::string(to_string(s)) + " needs LID labels: add a LID column or --lid-model");
  return lid_table(d);
}

std::string stats_header() { return "data\tn_words\tpct_norm\tpct_split\tpct_merge\tcmi\n"; }

std::string stats_row(const std::string& name, const CorpusStats& st) {
  return name + "\t" + std::to_string(st.n_words) + "\t" + fmt2(st.pct_norm) + "\t" + fmt2(st.pct_split) + "\t" +
         fmt2(st.pct_merge) + "\t" + (st.cmi ? fmt2(*st.cmi) : std::string("NA")) + "\n";
}

std::vector<std::vector<std::string>> read_token_lines(const std::string& path) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') throw FormatError("CR line ending", n);
    std::vector<std::string> toks;
    std::istringstream ls(unicode::nfc(line));
    for (std::string t; ls >> t;) toks.push_back(t);
    if (toks.empty()) throw FormatError("empty sentence", n);
    out.push_back(std::move(toks));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lexical normalization for code-switched text"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every subcommand");

  // ---- resources -------------------------------------------------------
  auto* res = app.add_subcommand("resources", "language resource bundles")->require_subcommand(1);
  auto* res_build = res->add_subcommand("build", "build a bundle from a lexicon, raw text and embeddings");
  std::string rb_lang, rb_lexicon, rb_embeddings, rb_out;
  std::vector<std::string> rb_raw;
  double rb_alpha = 1.0;
  std::size_t rb_min_count = 0;
  res_build->add_option("--language", rb_lang, "language code")->required();
  res_build->add_option("--lexicon", rb_lexicon, "word list, one word per line");
  res_build->add_option("--lexicon-min-count", rb_min_count,
                        "also add raw-text words seen at least this often (0: off)");
  res_build->add_option("--raw", rb_raw, "raw text, one sentence per line (repeatable)")->required();
  res_build->add_option("--embeddings", rb_embeddings, "word vectors in text format");
  res_build->add_option("--alpha", rb_alpha, "additive smoothing constant")->default_val(1.0);
  res_build->add_option("--out", rb_out, "output bundle")->required();
  res_build->callback([&] {
    NGramBuilder b;
    for (const auto& path : rb_raw) {
      std::ifstream in(path);
      if (!in) throw Error("cannot open " + path);
      b.add_stream(in);
    }
    LanguageResources r;
    r.language = rb_lang;
    r.ngrams = b.finish(rb_alpha);
    std::vector<std::string> words;
    if (!rb_lexicon.empty()) words = Lexicon::from_text(rb_lang, read_file(rb_lexicon)).words();
    if (rb_min_count > 0)
      for (const auto& w : r.ngrams.vocabulary())
        if (w != kBoundary && r.ngrams.count(w) >= rb_min_count) words.push_back(w);
    r.lexicon = Lexicon(rb_lang, std::move(words));
    if (!rb_embeddings.empty()) r.embeddings = EmbeddingStore::from_text(read_file(rb_embeddings));
    r.save(rb_out);
    std::cout << "language\tlexicon\tvocabulary\ttokens\tembeddings\n"
              << r.language << '\t' << r.lexicon.size() << '\t' << r.ngrams.vocab_size() << '\t' << r.ngrams.total_tokens()
              << '\t' << r.embeddings.size() << '\n';
  });

  // ---- lid ---------------------------------------------------------------
  auto* lid = app.add_subcommand("lid", "word-level language identification")->require_subcommand(1);
  Common lid_common;
  std::string lid_data, lid_model, lid_out;
  std::size_t lid_epochs = 0;
  auto* lid_train = lid->add_subcommand("train", "train a LID tagger on the LID column");
  lid_common.attach(lid_train);
  lid_train->add_option("--data", lid_data, "training norm file")->required();
  lid_train->add_option("--epochs", lid_epochs, "perceptron epochs (default 10)");
  lid_train->add_option("--out", lid_model, "output model")->required();
  lid_train->callback([&] {
    auto cfg = lid_common.load(lid_train);
    if (lid_train->count("--epochs")) cfg.lid.epochs = lid_epochs;
    auto d = read_dataset(lid_data, cfg.languages);
    auto model = train_lid(with_lid(d, lid_table(d)), cfg.lid);
    model.save(lid_model);
  });

  auto* lid_tag = lid->add_subcommand("tag", "fill the LID column with predicted labels");
  lid_tag->add_option("--model", lid_model, "LID model")->required();
  lid_tag->add_option("--data", lid_data, "input norm file")->required();
  lid_tag->add_option("--out", lid_out, "output norm file (default stdout)");
  std::string lid_tag_langs;
  lid_tag->add_option("--languages", lid_tag_langs, "language pair, e.g. TR,DE");
  lid_tag->callback([&] {
    LanguagePair langs = lid_tag_langs.empty() ? LanguagePair{} : parse_languages(lid_tag_langs);
    auto d = read_dataset(lid_data, langs);
    auto model = LinearSequenceModel::load(lid_model);
    emit(lid_out, write_norm_file(with_lid(d, tag_lid(model, d))));
  });

  auto* lid_eval = lid->add_subcommand("eval", "LID accuracy against the gold LID column");
  lid_eval->add_option("--model", lid_model, "LID model")->required();
  lid_eval->add_option("--data", lid_data, "gold norm file")->required();
  std::string lid_eval_langs;
  lid_eval->add_option("--languages", lid_eval_langs, "language pair, e.g. TR,DE");
  lid_eval->callback([&] {
    LanguagePair langs = lid_eval_langs.empty() ? LanguagePair{} : parse_languages(lid_eval_langs);
    auto d = read_dataset(lid_data, langs);
    auto gold = lid_table(d);
    auto pred = tag_lid(LinearSequenceModel::load(lid_model), d);
    std::vector<std::string> g, p;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      g.insert(g.end(), gold[i].begin(), gold[i].end());
      p.insert(p.end(), pred[i].begin(), pred[i].end());
    }
    std::cout << "metric\tvalue\n"
              << "tokens\t" << g.size() << '\n'
              << "accuracy\t" << fmt2(100.0 * tag_accuracy(g, p)) << '\n';
  });

  // ---- norm --------------------------------------------------------------
  auto* norm = app.add_subcommand("norm", "lexical normalization")->require_subcommand(1);

  Common nt_common;
  std::string nt_data, nt_out, nt_strategy, nt_mono;
  double nt_bias = 1.0;
  auto* norm_train = norm->add_subcommand("train", "train a normalization model");
  nt_common.attach(norm_train);
  norm_train->add_option("--data", nt_data, "training norm file")->required();
  norm_train->add_option("--strategy", nt_strategy, "monolingual | fragments | multilingual | language-aware");
  norm_train->add_option("--monolingual-language", nt_mono, "language for the monolingual strategy");
  norm_train->add_option("--bias", nt_bias, "original-word bias");
  norm_train->add_option("--out", nt_out, "output model")->required();
  norm_train->callback([&] {
    auto cfg = nt_common.load(norm_train);
    if (!nt_strategy.empty()) cfg.ranker.strategy = parse_strategy(nt_strategy);
    if (!nt_mono.empty()) cfg.ranker.monolingual_language = nt_mono;
    if (norm_train->count("--bias")) cfg.ranker.original_bias = nt_bias;
    auto d = read_dataset(nt_data, cfg.languages);
    auto lids = lids_for(d, cfg.ranker.strategy, "");
    auto model = train_normalization_model(d, load_resource_set(cfg.resources), cfg.ranker, lids ? &*lids : nullptr);
    save_model(model, nt_out);
  });

  std::string nr_model, nr_data, nr_out, nr_lid_model, nr_langs;
  std::vector<std::string> nr_resources;
  std::size_t nr_threads = 0;
  double nr_bias = 1.0;
  auto* norm_run = norm->add_subcommand("run", "normalize a norm file (NORM column replaced)");
  norm_run->add_option("--model", nr_model, "normalization model")->required();
  norm_run->add_option("--data", nr_data, "input norm file")->required();
  norm_run->add_option("--lid-model", nr_lid_model, "tag LID instead of reading the LID column");
  norm_run->add_option("--bias", nr_bias, "override the original-word bias");
  norm_run->add_option("--resources", nr_resources, "relocated resource bundle, LANG=PATH (repeatable)");
  norm_run->add_option("--threads", nr_threads, "worker threads (0: all cores)");
  norm_run->add_option("--out", nr_out, "output norm file (default stdout)");
  norm_run->callback([&] {
    std::map<std::string, std::string> paths;
    for (const auto& r : nr_resources) {
      auto eq = r.find('=');
      if (eq == std::string::npos) throw CLI::ValidationError("--resources", "expected LANG=PATH");
      paths[r.substr(0, eq)] = r.substr(eq + 1);
    }
    auto model = load_model(nr_model, paths);
    if (norm_run->count("--bias")) {
      if (!(nr_bias > 0)) throw CLI::ValidationError("--bias", "must be positive");
      model.original_bias = nr_bias;
    }
    auto d = read_dataset(nr_data, model.languages);
    auto lids = lids_for(d, model.strategy, nr_lid_model);
    auto pred = normalize_dataset(model, d, lids ? &*lids : nullptr, nr_threads);
    emit(nr_out, write_norm_file(with_norms(d, pred)));
  });

  std::string ne_gold, ne_pred, ne_compare;
  bool ne_lai = false, ne_per_lang = false;
  std::size_t ne_samples = 1000;
  std::uint64_t ne_seed = 42;
  std::string ne_langs;
  auto* norm_eval = norm->add_subcommand("eval", "accuracy, precision, recall and ERR");
  norm_eval->add_option("--gold", ne_gold, "gold norm file")->required();
  norm_eval->add_option("--pred", ne_pred, "predicted norm file (ORIG column must match)");
  norm_eval->add_flag("--lai", ne_lai, "also report the leave-as-is baseline; without --pred, score it");
  norm_eval->add_flag("--per-language", ne_per_lang, "accuracy per gold LID label");
  norm_eval->add_option("--compare", ne_compare, "second prediction file for a paired bootstrap test");
  norm_eval->add_option("--samples", ne_samples, "bootstrap samples")->default_val(1000);
  norm_eval->add_option("--seed", ne_seed, "random seed")->default_val(42);
  norm_eval->add_option("--languages", ne_langs, "language pair, e.g. TR,DE");
  norm_eval->callback([&] {
    LanguagePair langs = ne_langs.empty() ? LanguagePair{} : parse_languages(ne_langs);
    auto gold = read_dataset(ne_gold, langs);
    auto load_pred = [&](const std::string& path) {
      auto p = read_dataset(path, langs);
      if (originals_table(p) != originals_table(gold))
        throw InvalidArgument(path + ": ORIG column does not match the gold file");
      return norm_table(p);
    };
    if (ne_pred.empty() && !ne_lai) throw CLI::ValidationError("--pred", "give --pred, --lai or both");
    const auto pred = ne_pred.empty() ? lai(gold) : load_pred(ne_pred);
    auto r = evaluate_normalization(gold, pred);
    std::ostringstream os;
    os << "metric\tvalue\n";
    os << "tokens\t" << r.tokens << '\n';
    os << "accuracy\t" << fmt2(r.accuracy) << '\n';
    os << "precision\t" << fmt2(r.pr.precision) << '\n';
    os << "recall\t" << fmt2(r.pr.recall) << '\n';
    os << "err\t" << (r.err ? fmt2(*r.err) : std::string("NA")) << '\n';
    if (ne_lai) os << "lai_accuracy\t" << fmt2(r.lai_accuracy) << '\n';
    if (ne_per_lang) {
      auto labels = lid_table(gold);
      for (const auto& [label, a] : per_language_breakdown(norm_table(gold), pred, labels))
        os << "accuracy." << label << '\t' << fmt2(a.accuracy) << '\n';
    }
    if (!ne_compare.empty()) {
      auto other = load_pred(ne_compare);
      os << "compare_accuracy\t" << fmt2(accuracy(norm_table(gold), other)) << '\n';
      os << "p_value\t" << std::setprecision(6) << paired_bootstrap(norm_table(gold), pred, other, ne_samples, ne_seed)
         << '\n';
    }
    std::cout << os.str();
  });

  Common cv_common;
  std::string cv_data, cv_strategy, cv_mono, cv_lid_mode, cv_out;
  std::size_t cv_folds = 10;
  auto* norm_cv = norm->add_subcommand("cv", "k-fold cross-validation with LAI and MFR baselines");
  cv_common.attach(norm_cv);
  norm_cv->add_option("--data", cv_data, "norm file")->required();
  norm_cv->add_option("--folds", cv_folds, "number of folds")->default_val(10);
  norm_cv->add_option("--strategy", cv_strategy, "monolingual | fragments | multilingual | language-aware");
  norm_cv->add_option("--monolingual-language", cv_mono, "language for the monolingual strategy");
  norm_cv->add_option("--lid-mode", cv_lid_mode, "gold | predicted LID labels on test folds");
  norm_cv->add_option("--out", cv_out, "write all test-fold predictions as a norm file");
  norm_cv->callback([&] {
    auto cfg = cv_common.load(norm_cv);
    if (!cv_strategy.empty()) cfg.ranker.strategy = parse_strategy(cv_strategy);
    if (!cv_mono.empty()) cfg.ranker.monolingual_language = cv_mono;
    if (cv_lid_mode == "predicted") cfg.lid_mode = LidMode::predicted;
    else if (cv_lid_mode == "gold") cfg.lid_mode = LidMode::gold;
    else if (!cv_lid_mode.empty()) throw CLI::ValidationError("--lid-mode", "expected gold or predicted");
    auto d = read_dataset(cv_data, cfg.languages);
    auto res = cross_validate(d, load_resource_set(cfg.resources), cfg, cv_folds);
    std::ostringstream os;
    os << "fold\ttrain\ttest\ttokens\taccuracy\tlai\tmfr\tprecision\trecall";
    const bool show_lid = cfg.lid_mode == LidMode::predicted && needs_lid(cfg.ranker.strategy);
    if (show_lid) os << "\tlid_accuracy";
    os << '\n';
    for (const auto& f : res.folds) {
      os << f.fold + 1 << '\t' << f.train_sentences << '\t' << f.test_sentences << '\t' << f.test_tokens << '\t'
         << fmt2(f.accuracy) << '\t' << fmt2(f.lai) << '\t' << fmt2(f.mfr) << '\t' << fmt2(f.pr.precision) << '\t'
         << fmt2(f.pr.recall);
      if (show_lid) os << '\t' << fmt2(f.lid_accuracy.value_or(0));
      os << '\n';
    }
    os << "mean\t\t\t\t" << fmt2(res.mean_accuracy) << '\t' << fmt2(res.mean_lai) << '\t' << fmt2(res.mean_mfr)
       << "\t\t" << (show_lid ? "\t\n" : "\n");
    std::cout << os.str();
    if (!cv_out.empty()) write_file(cv_out, write_norm_file(with_norms(d, res.predictions)));
  });

  // ---- pos ---------------------------------------------------------------
  auto* pos = app.add_subcommand("pos", "POS tagging of normalized text")->require_subcommand(1);
  std::vector<std::string> pt_data, pt_conllu;
  std::string pt_out;
  Common pt_common;
  std::size_t pt_epochs = 0;
  auto* pos_train = pos->add_subcommand("train", "train a POS tagger");
  pt_common.attach(pos_train);
  pos_train->add_option("--data", pt_data, "norm file with a POS column (repeatable)");
  pos_train->add_option("--conllu", pt_conllu, "CoNLL-U treebank (repeatable)");
  pos_train->add_option("--epochs", pt_epochs, "perceptron epochs (default 10)");
  pos_train->add_option("--out", pt_out, "output model")->required();
  pos_train->callback([&] {
    auto cfg = pt_common.load(pos_train);
    if (pos_train->count("--epochs")) cfg.pos.epochs = pt_epochs;
    if (pt_data.empty() && pt_conllu.empty()) throw CLI::ValidationError("--data", "give --data or --conllu");
    Dataset all;
    for (const auto& p : pt_data) {
      auto d = read_dataset(p, cfg.languages);
      // train on what the tagger sees at test time: normalized words
      for (auto& s : d.sentences) {
        Sentence norm_sent;
        auto al = output_alignment(s.norms());
        for (const auto& l : al.links)
          for (std::size_t j = l.tgt_begin; j < l.tgt_end; ++j)
            norm_sent.tokens.push_back({al.words[j], al.words[j], std::nullopt, s.tokens[l.src_begin].pos});
        all.sentences.push_back(std::move(norm_sent));
      }
    }
    for (const auto& p : pt_conllu) {
      auto d = parse_conllu(read_file(p));
      all.sentences.insert(all.sentences.end(), d.sentences.begin(), d.sentences.end());
    }
    if (!all.sentences.empty()) {
      // shuffled concatenation
      Rng rng(cfg.seed);
      rng.shuffle(all.sentences);
    }
    train_pos(all, cfg.pos).save(pt_out);
  });

  std::string pg_model, pg_data, pg_out;
  bool pg_orig = false;
  auto* pos_tag = pos->add_subcommand("tag", "tag the NORM column; tags of split words are joined with '+'");
  pos_tag->add_option("--model", pg_model, "POS model")->required();
  pos_tag->add_option("--data", pg_data, "input norm file")->required();
  pos_tag->add_flag("--orig", pg_orig, "tag the ORIG column instead");
  pos_tag->add_option("--out", pg_out, "output norm file (default stdout)");
  pos_tag->callback([&] {
    auto d = read_dataset(pg_data, {});
    auto model = LinearSequenceModel::load(pg_model);
    for (auto& s : d.sentences) {
      auto words = pg_orig ? s.originals() : s.norms();
      auto tags = token_tags(tag_normalized(model, words), s.size());
      for (std::size_t i = 0; i < s.size(); ++i) s.tokens[i].pos = tags[i];
    }
    emit(pg_out, write_norm_file(d));
  });

  std::string pe_model, pe_gold, pe_pred;
  bool pe_lai = false, pe_confusion = false;
  auto* pos_eval_cmd = pos->add_subcommand("eval", "oracle POS accuracy through the normalization alignment");
  pos_eval_cmd->add_option("--model", pe_model, "POS model")->required();
  pos_eval_cmd->add_option("--gold", pe_gold, "gold norm file with POS")->required();
  pos_eval_cmd->add_option("--pred", pe_pred, "normalization to tag (default: gold NORM column)");
  pos_eval_cmd->add_flag("--lai", pe_lai, "tag the original words");
  pos_eval_cmd->add_flag("--confusion", pe_confusion, "print the confusion matrix");
  pos_eval_cmd->callback([&] {
    auto gold = read_dataset(pe_gold, {});
    TokenTable norms;
    if (pe_lai) norms = originals_table(gold);
    else if (!pe_pred.empty()) {
      auto p = read_dataset(pe_pred, {});
      if (originals_table(p) != originals_table(gold))
        throw InvalidArgument(pe_pred + ": ORIG column does not match the gold file");
      norms = norm_table(p);
    } else norms = norm_table(gold);
    auto r = pos_eval(LinearSequenceModel::load(pe_model), gold, norms);
    std::cout << "metric\tvalue\n"
              << "tokens\t" << r.tokens << '\n'
              << "oracle_accuracy\t" << fmt2(r.oracle) << '\n'
              << "first_tag_accuracy\t" << fmt2(r.first) << '\n';
    if (pe_confusion) std::cout << '\n' << r.confusion.to_tsv();
  });

  // ---- stats -------------------------------------------------------------
  std::vector<std::string> st_data;
  std::string st_langs;
  bool st_no_cmi = false;
  auto* stats = app.add_subcommand("stats", "corpus statistics");
  stats->add_option("--data", st_data, "norm file (repeatable)")->required();
  stats->add_option("--languages", st_langs, "language pair, e.g. TR,DE");
  stats->add_flag("--no-cmi", st_no_cmi, "skip the code-mixing index (no LID column needed)");
  stats->callback([&] {
    LanguagePair langs = st_langs.empty() ? LanguagePair{} : parse_languages(st_langs);
    std::string out = stats_header();
    for (const auto& p : st_data) out += stats_row(p, compute_stats(read_dataset(p, langs), !st_no_cmi));
    std::cout << out;
  });

  // ---- project -----------------------------------------------------------
  std::string pj_norm, pj_segments, pj_out, pj_langs;
  auto* project = app.add_subcommand("project", "project segment-level LID/POS onto original tokens");
  project->add_option("--norm", pj_norm, "norm file (ORIG, NORM)")->required();
  project->add_option("--segments", pj_segments, "segment file: FORM LID POS [+]")->required();
  project->add_option("--languages", pj_langs, "language pair, e.g. TR,DE");
  project->add_option("--out", pj_out, "output norm file (default stdout)");
  project->callback([&] {
    LanguagePair langs = pj_langs.empty() ? LanguagePair{} : parse_languages(pj_langs);
    auto d = read_dataset(pj_norm, langs);
    auto segs = parse_segment_file(read_file(pj_segments));
    emit(pj_out, write_norm_file(project_tags(d, segs)));
  });

  // ---- align -------------------------------------------------------------
  std::string al_orig, al_norm, al_out;
  bool al_links = false;
  auto* align = app.add_subcommand("align", "build a norm file from parallel original/normalized sentences");
  align->add_option("--orig", al_orig, "original sentences, one per line, space-tokenized")->required();
  align->add_option("--norm", al_norm, "normalized sentences, same layout")->required();
  align->add_flag("--links", al_links, "print the links as TSV instead");
  align->add_option("--out", al_out, "output (default stdout)");
  align->callback([&] {
    auto src = read_token_lines(al_orig);
    auto tgt = read_token_lines(al_norm);
    if (src.size() != tgt.size()) throw InvalidArgument("sentence counts differ");
    Dataset d;
    std::ostringstream links;
    links << "sentence\tsrc_begin\tsrc_end\ttgt_begin\ttgt_end\tkind\n";
    std::size_t c11 = 0, c1n = 0, cn1 = 0;
    for (std::size_t i = 0; i < src.size(); ++i) {
      auto al = align_tokens_with_cost(src[i], tgt[i]);
      for (const auto& l : al.links) {
        links << i + 1 << '\t' << l.src_begin << '\t' << l.src_end << '\t' << l.tgt_begin << '\t' << l.tgt_end << '\t'
              << to_string(l.kind) << '\n';
        (l.kind == LinkKind::one_to_one ? c11 : l.kind == LinkKind::one_to_many ? c1n : cn1)++;
      }
      d.sentences.push_back(alignment_to_sentence(src[i], tgt[i], al.links));
    }
    emit(al_out, al_links ? links.str() : write_norm_file(d));
    std::cerr << "links\t1:1=" << c11 << "\t1:n=" << c1n << "\tn:1=" << cn1 << '\n';
  });

  // ---- compare -----------------------------------------------------------
  std::string cmp_gold, cmp_a, cmp_b;
  std::size_t cmp_samples = 1000;
  std::uint64_t cmp_seed = 42;
  auto* compare = app.add_subcommand("compare", "paired bootstrap test: is A more accurate than B?");
  compare->add_option("--gold", cmp_gold, "gold norm file")->required();
  compare->add_option("--a", cmp_a, "system A predictions")->required();
  compare->add_option("--b", cmp_b, "system B predictions")->required();
  compare->add_option("--samples", cmp_samples, "bootstrap samples")->default_val(1000);
  compare->add_option("--seed", cmp_seed, "random seed")->default_val(42);
  compare->callback([&] {
    auto gold = read_dataset(cmp_gold, {});
    auto load = [&](const std::string& path) {
      auto p = read_dataset(path, {});
      if (originals_table(p) != originals_table(gold))
        throw InvalidArgument(path + ": ORIG column does not match the gold file");
      return norm_table(p);
    };
    auto a = load(cmp_a), b = load(cmp_b);
    const auto g = norm_table(gold);
    std::cout << "metric\tvalue\n"
              << "sentences\t" << g.size() << '\n'
              << "accuracy_a\t" << fmt2(accuracy(g, a)) << '\n'
              << "accuracy_b\t" << fmt2(accuracy(g, b)) << '\n'
              << "samples\t" << cmp_samples << '\n'
              << "p_value\t" << std::setprecision(6) << paired_bootstrap(g, a, b, cmp_samples, cmp_seed) << '\n';
  });

  // ---- split -------------------------------------------------------------
  std::string sp_data, sp_train, sp_test;
  double sp_ratio = 0.2;
  std::uint64_t sp_seed = 42;
  auto* split = app.add_subcommand("split", "sentence-level train/test split");
  split->add_option("--data", sp_data, "norm file")->required();
  split->add_option("--test-ratio", sp_ratio, "fraction of sentences for testing")->default_val(0.2);
  split->add_option("--seed", sp_seed, "random seed")->default_val(42);
  split->add_option("--train-out", sp_train, "training part")->required();
  split->add_option("--test-out", sp_test, "test part")->required();
  split->callback([&] {
    auto d = read_dataset(sp_data, {});
    auto [train, test] = train_test_split(d, sp_ratio, sp_seed);
    write_file(sp_train, write_norm_file(train));
    write_file(sp_test, write_norm_file(test));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  } catch (const csnorm::Error& e) {
    std::cerr << "csnorm: " << e.what() << '\n';
    return kDataError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "csnorm: " << e.what() << '\n';
    return kDataError;
  }
  return 0;
}
