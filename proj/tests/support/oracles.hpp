#pragma once

// Brute-force reference implementations. Deliberately naive: no shared code
// with the library beyond the data types and UTF-8 decoding.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "csnorm/corpus.hpp"
#include "csnorm/rng.hpp"
#include "csnorm/seqlab.hpp"
#include "csnorm/unicode.hpp"

namespace csnorm::oracle {

// Plain recursive edit distance with memo, over code points.
inline std::size_t levenshtein(const std::u32string& a, const std::u32string& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> std::size_t {
    if (i == 0) return j;
    if (j == 0) return i;
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::size_t best = std::min(go(i - 1, j) + 1, go(i, j - 1) + 1);
    best = std::min(best, go(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1));
    return memo[key] = best;
  };
  return go(a.size(), b.size());
}

inline std::size_t levenshtein(const std::string& a, const std::string& b) {
  return levenshtein(unicode::to_code_points(a), unicode::to_code_points(b));
}

// Lexicon scan: every word within max_dist, sorted by (distance, word).
inline std::vector<std::pair<std::string, std::size_t>> lexicon_scan(const std::vector<std::string>& words,
                                                                     const std::string& query, std::size_t max_dist) {
  std::set<std::string> uniq(words.begin(), words.end());
  std::vector<std::pair<std::string, std::size_t>> out;
  for (const auto& w : uniq) {
    auto d = levenshtein(w, query);
    if (d <= max_dist) out.emplace_back(w, d);
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return x.second != y.second ? x.second < y.second : x.first < y.first;
  });
  return out;
}

// Exhaustive argmax over all |L|^n label sequences; ties keep the
// lexicographically smallest index sequence (enumeration order).
inline std::vector<std::size_t> exhaustive_decode(const ScoreLattice& lat) {
  const std::size_t n = lat.length, L = lat.labels;
  if (n == 0) return {};
  std::vector<std::size_t> cur(n, 0), best;
  double best_score = -INFINITY;
  while (true) {
    double s = lat.start[cur[0]] + lat.emission[cur[0]];
    for (std::size_t i = 1; i < n; ++i) s += lat.transition[cur[i - 1] * L + cur[i]] + lat.emission[i * L + cur[i]];
    if (s > best_score) {
      best_score = s;
      best = cur;
    }
    std::size_t pos = n;
    while (pos > 0) {
      --pos;
      if (++cur[pos] < L) break;
      cur[pos] = 0;
      if (pos == 0) return best;
    }
  }
}

// ---------------------------------------------------------------------------
// Metrics, computed from a flat token list

struct FlatToken {
  std::string gold, orig, pred, lid;
  std::size_t sentence;
};

inline std::vector<FlatToken> flatten(const TokenTable& gold, const TokenTable& orig, const TokenTable& pred,
                                      const TokenTable& lids) {
  std::vector<FlatToken> out;
  for (std::size_t i = 0; i < gold.size(); ++i)
    for (std::size_t j = 0; j < gold[i].size(); ++j) out.push_back({gold[i][j], orig[i][j], pred[i][j], lids[i][j], i});
  return out;
}

inline double pct_correct(std::size_t correct, std::size_t n) {
  if (n == 0) return 100.0;
  return 100.0 - 100.0 * static_cast<double>(n - correct) / static_cast<double>(n);
}

inline double pct(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

inline double accuracy(const std::vector<FlatToken>& toks) {
  auto ok = std::count_if(toks.begin(), toks.end(), [](const FlatToken& t) { return t.gold == t.pred; });
  return pct_correct(static_cast<std::size_t>(ok), toks.size());
}

inline double lai_accuracy(const std::vector<FlatToken>& toks) {
  auto ok = std::count_if(toks.begin(), toks.end(), [](const FlatToken& t) { return t.gold == t.orig; });
  return pct_correct(static_cast<std::size_t>(ok), toks.size());
}

inline std::pair<double, double> precision_recall(const std::vector<FlatToken>& toks) {
  std::set<std::size_t> needed, changed, tp;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].gold != toks[i].orig) needed.insert(i);
    if (toks[i].pred != toks[i].orig) changed.insert(i);
  }
  for (auto i : changed)
    if (toks[i].pred == toks[i].gold) tp.insert(i);
  return {pct(tp.size(), changed.size()), pct(tp.size(), needed.size())};
}

inline double err(double acc, double acc_lai) { return 100.0 * (acc - acc_lai) / (1.0 - acc_lai); }

// Code-mixing index of one sentence from a label histogram.
inline double sentence_cmi(const std::vector<std::string>& labels, const LanguagePair& langs) {
  std::map<std::string, std::size_t> hist;
  for (const auto& l : labels)
    if (l == langs.first || l == langs.second) ++hist[l];
  std::size_t n = 0, top = 0;
  for (const auto& [l, c] : hist) {
    n += c;
    top = std::max(top, c);
  }
  return n == 0 ? 0.0 : 100.0 * static_cast<double>(n - top) / static_cast<double>(n);
}

inline double corpus_cmi(const TokenTable& lids, const LanguagePair& langs) {
  if (lids.empty()) return 0.0;
  double sum = 0;
  for (const auto& s : lids) sum += sentence_cmi(s, langs);
  return sum / static_cast<double>(lids.size());
}

inline std::map<std::pair<std::string, std::string>, std::size_t> confusion(const std::vector<std::string>& gold,
                                                                           const std::vector<std::string>& pred) {
  std::map<std::pair<std::string, std::string>, std::size_t> m;
  for (std::size_t i = 0; i < gold.size(); ++i) ++m[{gold[i], pred[i]}];
  return m;
}

// ---------------------------------------------------------------------------
// Random small corpora

// Random aligned (gold, orig, pred, lid) tables over a tiny vocabulary so that
// collisions (correct predictions, unchanged words) are frequent.
struct RandomCorpus {
  TokenTable gold, orig, pred, lids;
  Dataset dataset;  // orig/gold/lid as a Dataset
};

inline RandomCorpus random_corpus(Rng& rng, std::size_t max_sentences = 10, std::size_t max_tokens = 8) {
  static const char* kWords[] = {"a", "b", "c", "ab", "ba", "Ç", "ı"};
  static const char* kLabels[] = {"TR", "DE", "UN"};
  RandomCorpus c;
  c.dataset.languages = {"TR", "DE"};
  const std::size_t n_sent = rng.below(max_sentences + 1);
  for (std::size_t i = 0; i < n_sent; ++i) {
    const std::size_t n_tok = 1 + rng.below(max_tokens);
    std::vector<std::string> g, o, p, l;
    Sentence s;
    for (std::size_t j = 0; j < n_tok; ++j) {
      o.push_back(kWords[rng.below(7)]);
      g.push_back(rng.below(2) ? o.back() : kWords[rng.below(7)]);
      const auto r = rng.below(3);
      p.push_back(r == 0 ? o.back() : r == 1 ? g.back() : kWords[rng.below(7)]);
      l.push_back(kLabels[rng.below(3)]);
      s.tokens.push_back({o.back(), g.back(), l.back(), std::nullopt});
    }
    c.gold.push_back(g);
    c.orig.push_back(o);
    c.pred.push_back(p);
    c.lids.push_back(l);
    c.dataset.sentences.push_back(std::move(s));
  }
  return c;
}

}  // namespace csnorm::oracle
