#pragma once

// Synthetic code-switched normalization data. Two invented languages under
// the codes TR and DE with disjoint vocabularies, Markov word order, social
// media style noise (dropped vowels, stripped diacritics, letter repeats,
// typos, lowercase sentence starts, run-together words, broken-up words)
// and matching resources: clean raw text, a lexicon and embeddings in which
// noisy spellings sit next to their canonical word.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "csnorm/corpus.hpp"
#include "csnorm/resources.hpp"
#include "csnorm/rng.hpp"
#include "csnorm/unicode.hpp"

namespace csnorm::synth {

struct SyntheticOptions {
  std::size_t vocab = 160;           // words per language
  std::size_t successors = 6;        // Markov fan-out
  double switch_prob = 0.18;         // per-token language switch
  double noise_prob = 0.28;          // per-word noise
  double split_prob = 0.04;          // two words written as one token (1:n)
  double merge_prob = 0.015;         // one word written as two tokens (n:1)
  double punct_prob = 0.08;
  std::size_t min_len = 5, max_len = 11;
  std::size_t raw_sentences = 1500;  // per language
  std::size_t dim = 16;
};

class SyntheticWorld {
public:
  explicit SyntheticWorld(std::uint64_t seed = 7, SyntheticOptions opt = {}) : opt_(opt), rng_(seed) {
    build_language(0, {"ka", "ne", "rde", "yor", "lar", "ın", "ım", "şe", "çı", "ğı", "gü", "dö", "ba", "kı",
                       "sun", "ol", "mu", "da", "ye", "tı", "şı", "öz", "ça", "ku"});
    build_language(1, {"sch", "ein", "ge", "ver", "ung", "ich", "ach", "ße", "ä", "ü", "te", "en", "wa", "ber",
                       "lich", "keit", "sto", "rau", "mö", "zu", "hei", "pf", "au", "st"});
  }

  const std::string& code(int l) const { return codes_[l]; }
  LanguagePair languages() const { return {codes_[0], codes_[1]}; }
  const std::vector<std::string>& vocab(int l) const { return vocab_[l]; }

  // Code-switched corpus with gold NORM, coarse LID and POS columns.
  Dataset corpus(std::size_t n_sentences) {
    Dataset d;
    d.languages = languages();
    for (std::size_t i = 0; i < n_sentences; ++i) d.sentences.push_back(sentence());
    return d;
  }

  // Clean monolingual text, one sentence per line.
  std::string raw_text(int l) {
    std::string out;
    for (std::size_t i = 0; i < opt_.raw_sentences; ++i) {
      const std::size_t len = opt_.min_len + rng_.below(opt_.max_len - opt_.min_len + 1);
      std::size_t w = start_word(l);
      for (std::size_t k = 0; k < len; ++k) {
        if (k) out += ' ';
        out += k == 0 ? unicode::capitalize_first(vocab_[l][w], codes_[l]) : vocab_[l][w];
        w = next_word(l, w);
      }
      out += " .\n";
    }
    return out;
  }

  Lexicon lexicon(int l) const {
    auto words = vocab_[l];
    for (const auto& w : vocab_[l]) words.push_back(unicode::capitalize_first(w, codes_[l]));
    words.push_back(".");
    return Lexicon(codes_[l], words);
  }

  // Canonical words get random unit directions; their noisy spellings are
  // small perturbations of the same direction.
  EmbeddingStore embeddings(int l) {
    EmbeddingStore store;
    for (const auto& w : vocab_[l]) {
      auto base = random_vector();
      store.add(w, base);
      for (const auto& v : variants(w, l)) {
        auto near = base;
        for (auto& x : near) x += 0.15 * (rng_.uniform() - 0.5);
        store.add(v, near);
      }
    }
    return store;
  }

  LanguageResources resources(int l) {
    LanguageResources r;
    r.language = codes_[l];
    r.lexicon = lexicon(l);
    r.ngrams = build_ngrams(raw_text(l));
    r.embeddings = embeddings(l);
    return r;
  }

  // Noisy spellings the generator can produce deterministically.
  std::vector<std::string> variants(const std::string& w, int l) const {
    std::set<std::string> out;
    for (auto v : {drop_vowels(w), strip_diacritics(w), repeat_last(w)})
      if (v != w && !v.empty()) out.insert(v);
    (void)l;
    return {out.begin(), out.end()};
  }

  static std::string drop_vowels(const std::string& w) {
    auto cps = unicode::to_code_points(w);
    std::u32string out;
    for (std::size_t i = 0; i < cps.size(); ++i)
      if (i == 0 || !is_vowel(cps[i])) out += cps[i];
    return out.size() >= 2 ? unicode::from_code_points(out) : w;
  }

  static std::string strip_diacritics(const std::string& w) {
    static const std::map<char32_t, std::u32string> kMap{{U'ı', U"i"}, {U'ş', U"s"}, {U'ç', U"c"}, {U'ğ', U"g"},
                                                         {U'ü', U"u"}, {U'ö', U"o"}, {U'ä', U"a"}, {U'ß', U"ss"}};
    std::u32string out;
    for (char32_t c : unicode::to_code_points(w)) {
      auto it = kMap.find(c);
      out += it == kMap.end() ? std::u32string(1, c) : it->second;
    }
    return unicode::from_code_points(out);
  }

  static std::string repeat_last(const std::string& w) {
    auto cps = unicode::to_code_points(w);
    cps += std::u32string(2, cps.back());
    return unicode::from_code_points(cps);
  }

private:
  static bool is_vowel(char32_t c) {
    return std::u32string_view(U"aeiouıüöä").find(c) != std::u32string_view::npos;
  }

  void build_language(int l, const std::vector<std::string>& syllables) {
    std::set<std::string> seen;
    for (const auto& w : vocab_[1 - l]) seen.insert(w);
    while (vocab_[l].size() < opt_.vocab) {
      std::string w;
      const std::size_t n = 1 + rng_.below(3);
      for (std::size_t k = 0; k < n; ++k) w += syllables[rng_.below(syllables.size())];
      if (unicode::length(w) < 2 || !seen.insert(w).second) continue;
      vocab_[l].push_back(w);
      static const char* kTags[] = {"NOUN", "VERB", "ADJ", "ADV", "PRON", "ADP"};
      pos_[w] = kTags[rng_.below(6)];
    }
    // Zipf-like unigram weights and sparse successor lists
    for (std::size_t i = 0; i < vocab_[l].size(); ++i) {
      weight_[l].push_back(1.0 / static_cast<double>(i + 1));
      std::vector<std::size_t> succ;
      for (std::size_t k = 0; k < opt_.successors; ++k) succ.push_back(zipf(l));
      succ_[l].push_back(succ);
      // each word has a habitual misspelling
      const auto& w = vocab_[l][i];
      const int kind = static_cast<int>(rng_.below(3));
      habit_[w] = kind == 0 ? drop_vowels(w) : kind == 1 ? strip_diacritics(w) : repeat_last(w);
      if (habit_[w] == w) habit_[w] = repeat_last(w);
    }
  }

  std::size_t zipf(int l) {
    double total = 0;
    for (double x : weight_[l]) total += x;
    double r = rng_.uniform() * total;
    for (std::size_t i = 0; i < weight_[l].size(); ++i) {
      r -= weight_[l][i];
      if (r <= 0) return i;
    }
    return weight_[l].size() - 1;
  }

  std::size_t start_word(int l) { return zipf(l); }
  std::size_t next_word(int l, std::size_t w) { return succ_[l][w][rng_.below(succ_[l][w].size())]; }

  std::vector<double> random_vector() {
    std::vector<double> v(opt_.dim);
    for (auto& x : v) x = rng_.uniform() - 0.5;
    return v;
  }

  std::string noisy(const std::string& w) {
    const double r = rng_.uniform();
    if (r < 0.6) return habit_.at(w);
    if (r < 0.75) return drop_vowels(w);
    if (r < 0.85) return strip_diacritics(w);
    if (r < 0.93) return repeat_last(w);
    auto cps = unicode::to_code_points(w);  // adjacent swap
    if (cps.size() >= 3) {
      const std::size_t i = 1 + rng_.below(cps.size() - 2);
      std::swap(cps[i], cps[i + 1]);
    }
    return unicode::from_code_points(cps);
  }

  Sentence sentence() {
    struct Gold {
      std::string word, lid, pos, base;  // base: uncapitalized vocabulary form
    };
    std::vector<Gold> gold;
    const std::size_t len = opt_.min_len + rng_.below(opt_.max_len - opt_.min_len + 1);
    int l = static_cast<int>(rng_.below(2));
    std::size_t w = start_word(l);
    for (std::size_t k = 0; k < len; ++k) {
      if (k > 0 && rng_.uniform() < opt_.punct_prob) {
        static const char* kPunct[] = {".", ",", "!", ":)", "?"};
        gold.push_back({kPunct[rng_.below(5)], "UN", "PUNCT", kPunct[0]});
        continue;
      }
      if (k > 0 && rng_.uniform() < opt_.switch_prob) {
        l = 1 - l;
        w = start_word(l);
      } else if (k > 0) {
        w = next_word(l, w);
      }
      gold.push_back({vocab_[l][w], codes_[l], pos_.at(vocab_[l][w]), vocab_[l][w]});
    }
    if (gold.front().lid != "UN") gold.front().word = unicode::capitalize_first(gold.front().word, gold.front().lid);

    Sentence s;
    for (std::size_t k = 0; k < gold.size(); ++k) {
      const auto& g = gold[k];
      if (g.lid == "UN") {
        s.tokens.push_back({g.word, g.word, g.lid, g.pos});
        continue;
      }
      const bool initial = k == 0;
      const std::string& base = g.base;
      if (!initial && k + 1 < gold.size() && gold[k + 1].lid == g.lid && rng_.uniform() < opt_.split_prob) {
        const auto& h = gold[k + 1];
        s.tokens.push_back({g.word + h.word, g.word + " " + h.word, g.lid, h.pos});
        ++k;
        continue;
      }
      auto cps = unicode::to_code_points(g.word);
      if (!initial && cps.size() >= 6 && rng_.uniform() < opt_.merge_prob) {
        const std::size_t cut = cps.size() / 2;
        s.tokens.push_back({unicode::from_code_points(cps.substr(0, cut)), g.word, g.lid, g.pos});
        s.tokens.push_back({unicode::from_code_points(cps.substr(cut)), std::string(kMergeMarker), g.lid, g.pos});
        continue;
      }
      std::string orig = g.word;
      if (rng_.uniform() < opt_.noise_prob) orig = noisy(base);
      if (initial && rng_.uniform() < 0.6) orig = unicode::lowercase(orig, g.lid);
      else if (initial && orig == base) orig = g.word;
      s.tokens.push_back({orig, g.word, g.lid, g.pos});
    }
    return s;
  }

  SyntheticOptions opt_;
  Rng rng_;
  std::string codes_[2] = {"TR", "DE"};
  std::vector<std::string> vocab_[2];
  std::vector<double> weight_[2];
  std::vector<std::vector<std::size_t>> succ_[2];
  std::map<std::string, std::string> habit_, pos_;
};

}  // namespace csnorm::synth
