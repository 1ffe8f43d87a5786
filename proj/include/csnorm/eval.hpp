#pragma once

// Word-level metrics, the LAI and MFR baselines, a sentence-level paired
// bootstrap test, per-language breakdowns and POS scoring through
// normalization alignments.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "csnorm/align.hpp"
#include "csnorm/corpus.hpp"
#include "csnorm/error.hpp"
#include "csnorm/resources.hpp"
#include "csnorm/rng.hpp"

namespace csnorm {

namespace detail {

inline void check_aligned(const TokenTable& a, const TokenTable& b, const char* what) {
  if (a.size() != b.size()) throw InvalidArgument(std::string(what) + ": sentence counts differ");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].size() != b[i].size())
      throw InvalidArgument(std::string(what) + ": token counts differ in sentence " + std::to_string(i + 1));
}

// 100 - 100*wrong/n, so that accuracy(LAI) and 100 - pct_norm agree bit for bit.
inline double percent_correct(std::size_t wrong, std::size_t n) {
  if (n == 0) return 100.0;
  return 100.0 - 100.0 * static_cast<double>(wrong) / static_cast<double>(n);
}

inline double percent(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace detail

inline TokenTable originals_table(const Dataset& d) {
  TokenTable out;
  for (const auto& s : d.sentences) out.push_back(s.originals());
  return out;
}

// Exact, case-sensitive token match over all words, in percent. An empty
// corpus scores 100.
inline double accuracy(const TokenTable& gold, const TokenTable& pred) {
  detail::check_aligned(gold, pred, "accuracy");
  std::size_t n = 0, wrong = 0;
  for (std::size_t i = 0; i < gold.size(); ++i)
    for (std::size_t j = 0; j < gold[i].size(); ++j) {
      ++n;
      if (gold[i][j] != pred[i][j]) ++wrong;
    }
  return detail::percent_correct(wrong, n);
}

inline double accuracy(const Dataset& gold, const TokenTable& pred) { return accuracy(norm_table(gold), pred); }

inline TokenTable lai(const Dataset& d) { return originals_table(d); }

inline TokenTable mfr(const ReplacementDict& dict, const Dataset& d) {
  TokenTable out;
  for (const auto& s : d.sentences) {
    std::vector<std::string> row;
    for (const auto& t : s.tokens) row.push_back(mfr_lookup(dict, t.orig));
    out.push_back(std::move(row));
  }
  return out;
}

struct PrecisionRecall {
  double precision = 0;
  double recall = 0;
  std::size_t needed = 0, changed = 0, true_positives = 0;
};

// needed: gold differs from the original; changed: prediction differs from
// the original; TP: changed and correct. Percent; 0 for an empty denominator.
inline PrecisionRecall precision_recall(const TokenTable& gold, const TokenTable& orig, const TokenTable& pred) {
  detail::check_aligned(gold, orig, "precision_recall");
  detail::check_aligned(gold, pred, "precision_recall");
  PrecisionRecall pr;
  for (std::size_t i = 0; i < gold.size(); ++i)
    for (std::size_t j = 0; j < gold[i].size(); ++j) {
      const bool needed = gold[i][j] != orig[i][j];
      const bool changed = pred[i][j] != orig[i][j];
      pr.needed += needed;
      pr.changed += changed;
      pr.true_positives += changed && pred[i][j] == gold[i][j];
    }
  pr.precision = detail::percent(pr.true_positives, pr.changed);
  pr.recall = detail::percent(pr.true_positives, pr.needed);
  return pr;
}

// Error reduction rate over leave-as-is, from fractions, in percent.
inline double err(double acc_sys, double acc_lai) {
  if (acc_lai >= 1.0) throw InvalidArgument("error reduction rate is undefined when leave-as-is is perfect");
  return 100.0 * (acc_sys - acc_lai) / (1.0 - acc_lai);
}

// One-sided p-value for "A is more accurate than B": sentences resampled with
// replacement, p = (1 + #{delta* <= 0}) / (1 + samples).
inline double paired_bootstrap(const TokenTable& gold, const TokenTable& pred_a, const TokenTable& pred_b,
                               std::size_t samples = 1000, std::uint64_t seed = 42) {
  detail::check_aligned(gold, pred_a, "paired_bootstrap");
  detail::check_aligned(gold, pred_b, "paired_bootstrap");
  const std::size_t n = gold.size();
  std::vector<std::int64_t> diff(n);
  std::vector<std::size_t> len(n);
  for (std::size_t i = 0; i < n; ++i) {
    len[i] = gold[i].size();
    for (std::size_t j = 0; j < len[i]; ++j)
      diff[i] += static_cast<int>(pred_a[i][j] == gold[i][j]) - static_cast<int>(pred_b[i][j] == gold[i][j]);
  }
  Rng rng(seed);
  std::size_t not_better = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    // acc_A - acc_B has the sign of the summed per-sentence differences
    std::int64_t delta = 0;
    for (std::size_t k = 0; k < n; ++k) delta += diff[rng.below(n)];
    if (delta <= 0) ++not_better;
  }
  return static_cast<double>(1 + not_better) / static_cast<double>(1 + samples);
}

struct LabelAccuracy {
  std::size_t tokens = 0;
  std::size_t correct = 0;
  double accuracy = 0;
};

inline std::map<std::string, LabelAccuracy> per_language_breakdown(const TokenTable& gold, const TokenTable& pred,
                                                                   const TokenTable& labels) {
  detail::check_aligned(gold, pred, "per_language_breakdown");
  detail::check_aligned(gold, labels, "per_language_breakdown");
  std::map<std::string, LabelAccuracy> out;
  for (std::size_t i = 0; i < gold.size(); ++i)
    for (std::size_t j = 0; j < gold[i].size(); ++j) {
      auto& a = out[labels[i][j]];
      ++a.tokens;
      if (gold[i][j] == pred[i][j]) ++a.correct;
    }
  for (auto& [label, a] : out) a.accuracy = detail::percent_correct(a.tokens - a.correct, a.tokens);
  return out;
}

// ---------------------------------------------------------------------------
// POS through alignments

namespace detail {

inline void check_links(std::span<const AlignmentLink> links, std::size_t n_src, std::size_t n_tgt) {
  std::size_t s = 0, t = 0;
  for (const auto& l : links) {
    if (l.src_begin != s || l.tgt_begin != t || l.src_end <= l.src_begin || l.tgt_end <= l.tgt_begin)
      throw InvalidArgument("alignment links are not contiguous");
    s = l.src_end;
    t = l.tgt_end;
  }
  if (s != n_src || t != n_tgt) throw InvalidArgument("alignment does not cover both sequences");
}

}  // namespace detail

// Correct POS tokens per source token, counting a token as correct when any
// tag of the output words it aligns to equals its gold tag.
struct PosCounts {
  std::size_t tokens = 0;
  std::size_t correct = 0;
};

inline PosCounts pos_oracle_counts(std::span<const std::string> gold_pos, std::span<const AlignmentLink> links,
                                   std::span<const std::string> pred_tags) {
  detail::check_links(links, gold_pos.size(), pred_tags.size());
  PosCounts c;
  for (const auto& l : links)
    for (std::size_t i = l.src_begin; i < l.src_end; ++i) {
      ++c.tokens;
      for (std::size_t j = l.tgt_begin; j < l.tgt_end; ++j)
        if (pred_tags[j] == gold_pos[i]) {
          ++c.correct;
          break;
        }
    }
  return c;
}

inline double pos_eval_oracle(std::span<const std::string> gold_pos, std::span<const AlignmentLink> links,
                              std::span<const std::string> pred_tags) {
  auto c = pos_oracle_counts(gold_pos, links, pred_tags);
  return detail::percent_correct(c.tokens - c.correct, c.tokens);
}

// Same scoring, but only the first aligned tag is considered.
inline double pos_eval_first(std::span<const std::string> gold_pos, std::span<const AlignmentLink> links,
                             std::span<const std::string> pred_tags) {
  detail::check_links(links, gold_pos.size(), pred_tags.size());
  std::size_t n = 0, wrong = 0;
  for (const auto& l : links)
    for (std::size_t i = l.src_begin; i < l.src_end; ++i) {
      ++n;
      if (pred_tags[l.tgt_begin] != gold_pos[i]) ++wrong;
    }
  return detail::percent_correct(wrong, n);
}

struct ConfusionMatrix {
  std::vector<std::string> labels;               // sorted union of gold and predicted
  std::vector<std::vector<std::size_t>> counts;  // [gold][pred]

  std::size_t at(const std::string& gold, const std::string& pred) const {
    auto g = std::lower_bound(labels.begin(), labels.end(), gold);
    auto p = std::lower_bound(labels.begin(), labels.end(), pred);
    if (g == labels.end() || *g != gold || p == labels.end() || *p != pred) return 0;
    return counts[g - labels.begin()][p - labels.begin()];
  }

  // Rows are gold labels, columns predicted labels.
  std::string to_tsv() const {
    std::ostringstream os;
    os << "gold\\pred";
    for (const auto& l : labels) os << '\t' << l;
    os << '\n';
    for (std::size_t i = 0; i < labels.size(); ++i) {
      os << labels[i];
      for (auto c : counts[i]) os << '\t' << c;
      os << '\n';
    }
    return os.str();
  }
};

inline ConfusionMatrix confusion_matrix(std::span<const std::string> gold, std::span<const std::string> pred) {
  if (gold.size() != pred.size()) throw InvalidArgument("confusion_matrix: sequence lengths differ");
  std::set<std::string> all(gold.begin(), gold.end());
  all.insert(pred.begin(), pred.end());
  ConfusionMatrix m;
  m.labels.assign(all.begin(), all.end());
  m.counts.assign(m.labels.size(), std::vector<std::size_t>(m.labels.size(), 0));
  auto index = [&](const std::string& l) {
    return static_cast<std::size_t>(std::lower_bound(m.labels.begin(), m.labels.end(), l) - m.labels.begin());
  };
  for (std::size_t i = 0; i < gold.size(); ++i) ++m.counts[index(gold[i])][index(pred[i])];
  return m;
}

inline ConfusionMatrix confusion_matrix(const TokenTable& gold, const TokenTable& pred) {
  detail::check_aligned(gold, pred, "confusion_matrix");
  std::vector<std::string> g, p;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    g.insert(g.end(), gold[i].begin(), gold[i].end());
    p.insert(p.end(), pred[i].begin(), pred[i].end());
  }
  return confusion_matrix(g, p);
}

// ---------------------------------------------------------------------------
// Report

struct NormReport {
  std::size_t tokens = 0;
  double accuracy = 0;
  double lai_accuracy = 0;
  PrecisionRecall pr;
  std::optional<double> err;  // absent when leave-as-is is already perfect
};

inline NormReport evaluate_normalization(const Dataset& gold, const TokenTable& pred) {
  NormReport r;
  const auto g = norm_table(gold);
  const auto o = originals_table(gold);
  r.tokens = gold.token_count();
  r.accuracy = accuracy(g, pred);
  r.lai_accuracy = accuracy(g, o);
  r.pr = precision_recall(g, o, pred);
  if (r.lai_accuracy < 100.0) r.err = err(r.accuracy / 100.0, r.lai_accuracy / 100.0);
  return r;
}

}  // namespace csnorm
