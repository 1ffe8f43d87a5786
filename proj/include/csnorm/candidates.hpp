#pragma once

// Candidate generation: the original word, training-data lookup, lexicon
// spelling correction, embedding neighbours, two-way splits and case
// variants. generate_all merges the sources into one deterministic set.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csnorm/error.hpp"
#include "csnorm/resources.hpp"
#include "csnorm/unicode.hpp"

namespace csnorm {

enum Source : std::uint8_t {
  kFromOriginal = 1 << 0,
  kFromLookup = 1 << 1,
  kFromSpelling = 1 << 2,
  kFromEmbedding = 1 << 3,
  kFromSplit = 1 << 4,
  kFromCase = 1 << 5,
};

struct Candidate {
  std::string form;
  std::uint8_t sources = 0;
  std::uint32_t lookup_count = 0;
  std::size_t edit_distance = 0;
  std::optional<std::size_t> embedding_rank;  // 1-based
  std::optional<double> embedding_cosine;
  std::optional<std::string> source_language;

  bool has(Source s) const { return (sources & s) != 0; }
  bool operator==(const Candidate&) const = default;
};

struct GeneratorConfig {
  std::size_t embedding_k = 10;
  std::size_t max_dist_long = 2;
  std::size_t max_dist_short = 1;
  std::size_t long_word_min_length = 5;
  std::size_t split_min_part = 2;

  std::size_t max_dist_for(std::string_view word) const {
    return unicode::length(word) >= long_word_min_length ? max_dist_long : max_dist_short;
  }
  bool operator==(const GeneratorConfig&) const = default;
};

inline Candidate gen_original(std::string_view word) {
  if (word.empty()) throw InvalidArgument("empty word");
  Candidate c;
  c.form = std::string(word);
  c.sources = kFromOriginal;
  return c;
}

inline std::vector<Candidate> gen_lookup(const ReplacementDict& dict, std::string_view word) {
  std::vector<Candidate> out;
  for (const auto& r : dict.lookup(word)) {
    Candidate c;
    c.form = r.norm;
    c.sources = kFromLookup;
    c.lookup_count = r.count;
    c.edit_distance = unicode::levenshtein(word, r.norm);
    out.push_back(std::move(c));
  }
  return out;
}

inline std::vector<Candidate> gen_spelling(const Lexicon& lex, std::string_view word, std::size_t max_dist = 2) {
  if (max_dist < 1 || max_dist > 2) throw InvalidArgument("max_dist must be 1 or 2");
  std::vector<Candidate> out;
  for (auto& [w, d] : lex.within_distance(word, max_dist)) {
    Candidate c;
    c.form = w;
    c.sources = kFromSpelling;
    c.edit_distance = d;
    c.source_language = lex.language();
    out.push_back(std::move(c));
  }
  return out;
}

inline std::vector<Candidate> gen_embedding(const EmbeddingStore& store, std::string_view word, std::size_t k = 10,
                                            std::string_view language = {}) {
  std::vector<Candidate> out;
  std::size_t rank = 0;
  for (auto& [w, cos] : store.knn(word, k)) {
    if (unicode::has_whitespace(w)) continue;
    Candidate c;
    c.form = w;
    c.sources = kFromEmbedding;
    c.edit_distance = unicode::levenshtein(word, w);
    c.embedding_rank = ++rank;
    c.embedding_cosine = cos;
    if (!language.empty()) c.source_language = std::string(language);
    out.push_back(std::move(c));
  }
  return out;
}

inline std::vector<Candidate> gen_split(const Lexicon& lex, std::string_view word, std::size_t min_part = 2) {
  std::vector<Candidate> out;
  const auto cps = unicode::to_code_points(word);
  if (cps.size() < 2 * min_part) return out;
  for (std::size_t cut = min_part; cut + min_part <= cps.size(); ++cut) {
    auto left = unicode::from_code_points(cps.substr(0, cut));
    auto right = unicode::from_code_points(cps.substr(cut));
    if (!lex.contains(left) || !lex.contains(right)) continue;
    Candidate c;
    c.form = left + " " + right;
    c.sources = kFromSplit;
    c.edit_distance = 1;
    c.source_language = lex.language();
    out.push_back(std::move(c));
  }
  return out;
}

// {word, lowercase(word), capitalized lowercase}; the capitalized form is
// offered at sentence start or when the word already carries capitals.
// Case maps follow the language's locale (Turkish dotted/dotless i).
inline std::vector<Candidate> gen_case_variants(std::string_view word, bool sentence_initial,
                                                std::string_view language = {}) {
  std::vector<std::string> forms{std::string(word)};
  const auto lower = unicode::lowercase(word, language);
  forms.push_back(lower);
  if (sentence_initial || unicode::has_upper(word)) forms.push_back(unicode::capitalize_first(lower, language));
  std::vector<Candidate> out;
  for (auto& f : forms) {
    if (f.empty() || std::any_of(out.begin(), out.end(), [&](const Candidate& c) { return c.form == f; })) continue;
    Candidate c;
    c.form = f;
    c.sources = kFromCase;
    c.edit_distance = unicode::levenshtein(word, f);
    if (!language.empty()) c.source_language = std::string(language);
    out.push_back(std::move(c));
  }
  return out;
}

// Merges b into a: flags OR-ed, best per-source scores kept.
inline void merge_candidate(Candidate& a, const Candidate& b) {
  a.sources |= b.sources;
  a.lookup_count = std::max(a.lookup_count, b.lookup_count);
  a.edit_distance = std::min(a.edit_distance, b.edit_distance);
  if (b.embedding_rank && (!a.embedding_rank || *b.embedding_rank < *a.embedding_rank)) a.embedding_rank = b.embedding_rank;
  if (b.embedding_cosine && (!a.embedding_cosine || *b.embedding_cosine > *a.embedding_cosine))
    a.embedding_cosine = b.embedding_cosine;
  if (!a.source_language) a.source_language = b.source_language;
}

// Union over all generators and supplied language bundles. The original word
// comes first, the rest in byte-lexicographic order. Spelling, embedding and
// split generators also run on the lowercased word when it differs.
inline std::vector<Candidate> generate_all(std::string_view word, bool sentence_initial,
                                           std::span<const LanguageResources* const> languages,
                                           const ReplacementDict* dict, const GeneratorConfig& cfg = {}) {
  Candidate original = gen_original(word);
  std::map<std::string, Candidate> pool;
  auto add = [&](const Candidate& c) {
    if (c.form == original.form) {
      merge_candidate(original, c);
      return;
    }
    auto [it, inserted] = pool.emplace(c.form, c);
    if (!inserted) merge_candidate(it->second, c);
  };
  auto add_all = [&](const std::vector<Candidate>& cs) {
    for (const auto& c : cs) add(c);
  };

  if (dict) add_all(gen_lookup(*dict, word));
  const std::size_t max_dist = cfg.max_dist_for(word);
  for (const LanguageResources* res : languages) {
    if (!res) continue;
    auto variants = gen_case_variants(word, sentence_initial, res->language);
    add_all(variants);
    std::vector<std::string> queries{std::string(word)};
    const auto lower = unicode::lowercase(word, res->language);
    if (lower != word) queries.push_back(lower);
    for (const auto& q : queries) {
      for (auto c : gen_spelling(res->lexicon, q, max_dist)) {
        c.edit_distance = unicode::levenshtein(word, c.form);
        add(c);
      }
      for (auto c : gen_embedding(res->embeddings, q, cfg.embedding_k, res->language)) {
        c.edit_distance = unicode::levenshtein(word, c.form);
        add(c);
      }
      for (auto c : gen_split(res->lexicon, q, cfg.split_min_part)) {
        c.edit_distance = unicode::levenshtein(word, c.form);
        add(c);
      }
    }
  }

  std::vector<Candidate> out;
  out.reserve(pool.size() + 1);
  out.push_back(std::move(original));
  for (auto& [form, c] : pool) out.push_back(std::move(c));
  return out;
}

}  // namespace csnorm
