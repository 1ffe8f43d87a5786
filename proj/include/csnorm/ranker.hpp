#pragma once

// Candidate ranking with a random forest under four strategies:
//
//   monolingual     one language's resources for every word
//   fragments       sentences cut at language switches, each piece handled
//                   by a monolingual ranker trained on that language's pieces
//   multilingual    both languages' features side by side
//   language-aware  features and candidates from the word's LID language,
//                   plus the language id as a feature
//
// Bigram context is the previous output word (greedy, left to right) and the
// next input word.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "csnorm/binary_io.hpp"
#include "csnorm/candidates.hpp"
#include "csnorm/corpus.hpp"
#include "csnorm/error.hpp"
#include "csnorm/forest.hpp"
#include "csnorm/hash.hpp"
#include "csnorm/lid.hpp"
#include "csnorm/parallel.hpp"
#include "csnorm/resources.hpp"
#include "csnorm/unicode.hpp"

namespace csnorm {

enum class Strategy : std::uint8_t { monolingual = 0, fragments = 1, multilingual = 2, language_aware = 3 };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::monolingual: return "monolingual";
    case Strategy::fragments: return "fragments";
    case Strategy::multilingual: return "multilingual";
    case Strategy::language_aware: return "language-aware";
  }
  return "?";
}

inline Strategy parse_strategy(std::string_view s) {
  std::string k = unicode::lowercase(s);
  std::replace(k.begin(), k.end(), '_', '-');
  if (k == "monolingual") return Strategy::monolingual;
  if (k == "fragments") return Strategy::fragments;
  if (k == "multilingual") return Strategy::multilingual;
  if (k == "language-aware" || k == "languageaware") return Strategy::language_aware;
  throw InvalidArgument("unknown strategy '" + std::string(s) + "'");
}

inline bool needs_lid(Strategy s) { return s == Strategy::fragments || s == Strategy::language_aware; }

// ---------------------------------------------------------------------------
// Feature schema

inline constexpr std::array<std::string_view, 14> kAgnosticFeatures{
    "is_original", "from_lookup",      "from_spelling", "from_embedding", "from_split",
    "from_case",   "edit_distance",    "length_ratio",  "has_alpha",      "starts_upper",
    "sentence_initial", "has_space",   "lookup_count_log1p", "lookup_share"};

inline constexpr std::array<std::string_view, 6> kLanguageFeatures{
    "unigram_logprob", "bigram_prev_logprob", "bigram_next_logprob",
    "in_lexicon",      "embedding_cosine",    "embedding_rank"};

inline constexpr double kMissing = -1.0;

// `block_languages` names the LANGUAGE blocks; "LID" stands for the block
// filled from each word's language label.
inline std::vector<std::string> feature_schema(Strategy s, std::span<const std::string> block_languages) {
  std::vector<std::string> names(kAgnosticFeatures.begin(), kAgnosticFeatures.end());
  for (const auto& lang : block_languages)
    for (auto f : kLanguageFeatures) names.push_back(lang + "." + std::string(f));
  if (s == Strategy::language_aware) names.push_back("language_id");
  return names;
}

// ---------------------------------------------------------------------------
// Featurization

using RankMap = std::unordered_map<std::string, std::size_t>;

// Embedding-neighbour ranks of word (or its lowercase form) in one bundle.
inline RankMap embedding_ranks(const LanguageResources& r, std::string_view word, std::size_t k) {
  RankMap ranks;
  std::vector<std::string> queries{std::string(word)};
  auto lower = unicode::lowercase(word, r.language);
  if (lower != word) queries.push_back(std::move(lower));
  for (const auto& q : queries) {
    std::size_t rank = 0;
    for (const auto& [w, cos] : r.embeddings.knn(q, k)) {
      ++rank;
      auto [it, inserted] = ranks.emplace(w, rank);
      if (!inserted) it->second = std::min(it->second, rank);
    }
  }
  return ranks;
}

struct FeatureInput {
  std::span<const std::string> words;  // raw words of the sentence (or fragment)
  std::size_t index = 0;
  std::string prev_output = std::string(kBoundary);
  std::uint32_t lookup_total = 0;  // dictionary occurrences of words[index]
  std::size_t offset = 0;          // sentence position of words[0]; a fragment starts mid-sentence

  bool sentence_initial() const { return offset + index == 0; }
};

namespace detail {

inline std::vector<std::string_view> split_spaces(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(' ', start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string last_word(std::string_view s) {
  auto pos = s.rfind(' ');
  return std::string(pos == std::string_view::npos ? s : s.substr(pos + 1));
}

inline void language_block(std::vector<double>& out, const LanguageResources& r, const Candidate& c,
                           const FeatureInput& in, const RankMap* ranks, std::size_t k) {
  const std::string_view word = in.words[in.index];
  const auto parts = split_spaces(c.form);
  const std::string next = in.index + 1 < in.words.size() ? in.words[in.index + 1] : std::string(kBoundary);

  double uni = 0, prev_lp = 0;
  bool in_lex = true;
  std::string_view prev = in.prev_output;
  for (auto p : parts) {
    uni += r.ngrams.logprob(p);
    prev_lp += r.ngrams.logprob(p, prev);
    prev = p;
    in_lex = in_lex && r.lexicon.contains(p);
  }
  const double next_lp = r.ngrams.logprob(next, parts.back());

  double cos = kMissing, rank = kMissing;
  if (parts.size() == 1) {
    auto v = r.embeddings.cosine(word, c.form);
    if (!v) v = r.embeddings.cosine(unicode::lowercase(word, r.language), c.form);
    if (v) cos = *v;
    if (ranks) {
      if (auto it = ranks->find(c.form); it != ranks->end()) rank = static_cast<double>(it->second);
    } else {
      auto local = embedding_ranks(r, word, k);
      if (auto it = local.find(c.form); it != local.end()) rank = static_cast<double>(it->second);
    }
  }
  out.insert(out.end(), {uni, prev_lp, next_lp, in_lex ? 1.0 : 0.0, cos, rank});
}

}  // namespace detail

// One feature vector for candidate c of in.words[in.index]. `blocks` holds
// one bundle per LANGUAGE block (two for multilingual, the word's language
// for language-aware). `ranks`, when given, are precomputed per block.
inline std::vector<double> featurize(const Candidate& c, const FeatureInput& in,
                                     std::span<const LanguageResources* const> blocks, Strategy s,
                                     std::optional<std::size_t> language_id = std::nullopt,
                                     std::span<const RankMap* const> ranks = {}, std::size_t embedding_k = 10) {
  if (in.index >= in.words.size()) throw InvalidArgument("token index out of range");
  const std::size_t expected = s == Strategy::multilingual ? 2 : 1;
  if (blocks.size() != expected)
    throw InvalidArgument(std::string(to_string(s)) + " needs " + std::to_string(expected) + " resource bundle(s)");
  if (s == Strategy::language_aware && !language_id) throw InvalidArgument("language-aware features need a LID label");

  const std::string_view word = in.words[in.index];
  std::vector<double> f;
  f.reserve(kAgnosticFeatures.size() + 2 * kLanguageFeatures.size() + 1);
  const double orig_len = static_cast<double>(unicode::length(word));
  f.push_back(c.form == word ? 1.0 : 0.0);
  for (Source src : {kFromLookup, kFromSpelling, kFromEmbedding, kFromSplit, kFromCase}) f.push_back(c.has(src) ? 1.0 : 0.0);
  f.push_back(static_cast<double>(unicode::levenshtein(word, c.form)));
  f.push_back(orig_len > 0 ? static_cast<double>(unicode::length(c.form)) / orig_len : 0.0);
  f.push_back(unicode::has_alpha(c.form) ? 1.0 : 0.0);
  f.push_back(unicode::starts_upper(c.form) ? 1.0 : 0.0);
  f.push_back(in.sentence_initial() ? 1.0 : 0.0);
  f.push_back(c.form.find(' ') != std::string::npos ? 1.0 : 0.0);
  f.push_back(std::log1p(static_cast<double>(c.lookup_count)));
  f.push_back(in.lookup_total ? static_cast<double>(c.lookup_count) / in.lookup_total : 0.0);

  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (!blocks[b]) throw InvalidArgument("missing resource bundle");
    detail::language_block(f, *blocks[b], c, in, b < ranks.size() ? ranks[b] : nullptr, embedding_k);
  }
  if (s == Strategy::language_aware) f.push_back(static_cast<double>(*language_id));
  return f;
}

// ---------------------------------------------------------------------------
// Candidate cache

// Generator output without the dictionary, per (word, sentence-initial,
// bundle list). Thread-safe; entries are computed outside the lock and
// never change once inserted.
class CandidateCache {
public:
  struct Entry {
    std::vector<Candidate> base;
    std::vector<RankMap> ranks;  // one per bundle
  };

  explicit CandidateCache(GeneratorConfig cfg = {}) : cfg_(cfg) {}

  const GeneratorConfig& config() const { return cfg_; }

  const Entry& get(const std::string& word, bool initial, std::span<const LanguageResources* const> bundles) {
    std::string key = word;
    key += '\x1f';
    key += initial ? '1' : '0';
    for (const auto* b : bundles) {
      key += '\x1f';
      key += b->language;
    }
    {
      std::lock_guard lock(mu_);
      if (auto it = map_.find(key); it != map_.end()) return it->second;
    }
    Entry e;
    e.base = generate_all(word, initial, bundles, nullptr, cfg_);
    for (const auto* b : bundles) e.ranks.push_back(embedding_ranks(*b, word, cfg_.embedding_k));
    std::lock_guard lock(mu_);
    return map_.emplace(std::move(key), std::move(e)).first->second;
  }

private:
  GeneratorConfig cfg_;
  std::mutex mu_;
  std::map<std::string, Entry> map_;
};

// Adds dictionary candidates to a dictionary-free candidate list. With
// `exclude`, one occurrence of (word -> *exclude) is left out of the counts.
inline std::vector<Candidate> with_lookup(std::vector<Candidate> cands, const ReplacementDict& dict,
                                          std::string_view word, const std::string* exclude = nullptr) {
  for (const auto& r : dict.lookup(word)) {
    std::uint32_t count = r.count;
    if (exclude && r.norm == *exclude) --count;
    if (count == 0) continue;
    Candidate c;
    c.form = r.norm;
    c.sources = kFromLookup;
    c.lookup_count = count;
    c.edit_distance = unicode::levenshtein(word, r.norm);
    auto it = std::find_if(cands.begin(), cands.end(), [&](const Candidate& x) { return x.form == c.form; });
    if (it != cands.end()) merge_candidate(*it, c);
    else cands.push_back(std::move(c));
  }
  std::sort(cands.begin() + 1, cands.end(), [](const Candidate& a, const Candidate& b) { return a.form < b.form; });
  return cands;
}

// ---------------------------------------------------------------------------
// Model

struct ResourceRef {
  std::string language;
  std::string path;
  std::string sha256;  // hex digest of the bundle file

  bool operator==(const ResourceRef&) const = default;
};

// One trained ranker. Monolingual/fragments parts have a single block
// language; multilingual has two; language-aware has the placeholder "LID".
struct RankerPart {
  std::string language;  // fragments: the fragment language; otherwise empty
  std::vector<std::string> block_languages;
  std::vector<std::string> schema;
  RandomForest forest;
  ReplacementDict dict;

  bool operator==(const RankerPart&) const = default;
};

inline constexpr std::string_view kLidBlock = "LID";

struct NormalizationModel {
  Strategy strategy = Strategy::multilingual;
  LanguagePair languages;
  GeneratorConfig generator;
  double original_bias = 1.0;
  std::vector<ResourceRef> resources;
  std::vector<RankerPart> parts;

  // Runtime only; filled by training or by load_model.
  std::map<std::string, std::shared_ptr<const LanguageResources>> bundles;

  bool operator==(const NormalizationModel& o) const {
    return strategy == o.strategy && languages.first == o.languages.first &&
           languages.second == o.languages.second && generator == o.generator &&
           original_bias == o.original_bias && resources == o.resources && parts == o.parts;
  }

  const LanguageResources* bundle(const std::string& lang) const {
    auto it = bundles.find(lang);
    if (it == bundles.end() || !it->second) throw InvalidArgument("no resources loaded for language '" + lang + "'");
    return it->second.get();
  }

  const RankerPart& part_for(const std::string& lang) const {
    for (const auto& p : parts)
      if (p.language == lang) return p;
    throw InvalidArgument("model has no ranker for language '" + lang + "'");
  }

  // The fragments model's ranker for one language, as a standalone
  // monolingual model.
  NormalizationModel submodel(const std::string& lang) const {
    if (strategy != Strategy::fragments) throw InvalidArgument("submodel needs a fragments model");
    NormalizationModel m = *this;
    m.strategy = Strategy::monolingual;
    m.parts = {part_for(lang)};
    m.parts[0].language.clear();
    return m;
  }
};

struct ResourceHandle {
  ResourceRef ref;
  std::shared_ptr<const LanguageResources> bundle;
};

using ResourceSet = std::map<std::string, ResourceHandle>;

inline ResourceHandle load_resource_handle(const std::string& path) {
  auto bytes = read_file(path);
  auto bundle = std::make_shared<const LanguageResources>(LanguageResources::deserialize(bytes));
  return {{bundle->language, path, to_hex(sha256(bytes))}, bundle};
}

// In-memory bundle; the reference has no path, so a model trained with it
// can be saved but must be given resource paths when loaded.
inline ResourceHandle memory_resource_handle(LanguageResources res) {
  auto bytes = res.serialize();
  auto bundle = std::make_shared<const LanguageResources>(std::move(res));
  return {{bundle->language, "", to_hex(sha256(bytes))}, bundle};
}

struct RankerConfig {
  Strategy strategy = Strategy::multilingual;
  std::string monolingual_language;  // empty: first language
  GeneratorConfig generator;
  ForestConfig forest;
  double original_bias = 1.0;
  std::size_t threads = 0;
};

namespace detail {

// A sentence or fragment processed as one unit.
struct Unit {
  std::size_t sentence = 0;
  std::size_t begin = 0, end = 0;
  std::string language;  // fragments only
};

inline std::vector<Unit> make_units(const Dataset& d, Strategy s, const TokenTable* lids) {
  std::vector<Unit> units;
  for (std::size_t i = 0; i < d.sentences.size(); ++i) {
    if (s != Strategy::fragments) {
      units.push_back({i, 0, d.sentences[i].size(), ""});
      continue;
    }
    for (const auto& f : fragment_split((*lids)[i], d.languages)) units.push_back({i, f.begin, f.end, f.language});
  }
  return units;
}

inline void check_lids(const Dataset& d, const TokenTable& lids) {
  if (lids.size() != d.sentences.size()) throw InvalidArgument("LID labels do not match the sentence count");
  for (std::size_t i = 0; i < lids.size(); ++i) {
    if (lids[i].size() != d.sentences[i].size()) throw InvalidArgument("LID labels do not match the token count");
    for (const auto& l : lids[i])
      if (!is_coarse_label(l, d.languages)) throw InvalidArgument("LID label '" + l + "' is not a coarse label");
  }
}

// Last word of the gold normalization before position j of a unit, walking
// back over merge continuations.
inline std::string gold_context(const Sentence& s, std::size_t begin, std::size_t j) {
  for (std::size_t k = j; k > begin; --k) {
    const auto& n = s.tokens[k - 1].norm;
    if (n != kMergeMarker) return last_word(n);
  }
  return std::string(kBoundary);
}

struct PartLayout {
  std::vector<const LanguageResources*> blocks;
  std::optional<std::size_t> language_id;
};

// Resources for the token at sentence position `pos`.
inline PartLayout layout_for(const NormalizationModel& m, const RankerPart& part, const std::vector<std::string>* lids,
                             std::size_t pos) {
  PartLayout l;
  if (m.strategy == Strategy::language_aware) {
    const auto& lab = (*lids)[pos];
    l.blocks.push_back(m.bundle(lab));
    l.language_id = lab == m.languages.first ? 0 : 1;
  } else {
    for (const auto& lang : part.block_languages) l.blocks.push_back(m.bundle(lang));
  }
  return l;
}

}  // namespace detail

struct TrainingSet {
  std::string language;  // fragments part language; empty otherwise
  ForestData data;
  std::vector<std::pair<std::size_t, std::size_t>> groups;  // (sentence, token) per row
  std::size_t injected = 0;
};

// Builds the model skeleton (parts, schema, dictionaries) for a strategy.
inline NormalizationModel model_skeleton(const Dataset& train, const ResourceSet& resources, const RankerConfig& cfg,
                                         const TokenTable* lids) {
  NormalizationModel m;
  m.strategy = cfg.strategy;
  m.languages = train.languages;
  m.generator = cfg.generator;
  m.original_bias = cfg.original_bias;
  if (!(cfg.original_bias > 0) || !std::isfinite(cfg.original_bias))
    throw InvalidArgument("original_bias must be a positive finite number");

  auto require = [&](const std::string& lang) {
    auto it = resources.find(lang);
    if (it == resources.end() || !it->second.bundle) throw InvalidArgument("no resources for language '" + lang + "'");
    if (it->second.bundle->language != lang)
      throw InvalidArgument("resource bundle for '" + lang + "' declares language '" + it->second.bundle->language + "'");
    if (!m.bundles.count(lang)) {
      m.bundles[lang] = it->second.bundle;
      m.resources.push_back(it->second.ref);
    }
  };

  switch (cfg.strategy) {
    case Strategy::monolingual: {
      const auto lang = cfg.monolingual_language.empty() ? train.languages.first : cfg.monolingual_language;
      require(lang);
      RankerPart p;
      p.block_languages = {lang};
      m.parts.push_back(std::move(p));
      break;
    }
    case Strategy::multilingual: {
      require(train.languages.first);
      require(train.languages.second);
      RankerPart p;
      p.block_languages = {train.languages.first, train.languages.second};
      m.parts.push_back(std::move(p));
      break;
    }
    case Strategy::language_aware: {
      require(train.languages.first);
      require(train.languages.second);
      RankerPart p;
      p.block_languages = {std::string(kLidBlock)};
      m.parts.push_back(std::move(p));
      break;
    }
    case Strategy::fragments: {
      for (const auto& lang : {train.languages.first, train.languages.second}) {
        require(lang);
        RankerPart p;
        p.language = lang;
        p.block_languages = {lang};
        m.parts.push_back(std::move(p));
      }
      break;
    }
  }
  for (auto& p : m.parts) p.schema = feature_schema(cfg.strategy, p.block_languages);
  std::sort(m.resources.begin(), m.resources.end(),
            [](const ResourceRef& a, const ResourceRef& b) { return a.language < b.language; });

  // Dictionaries come from the training data, per fragment language for the
  // fragments strategy.
  auto units = detail::make_units(train, cfg.strategy, lids);
  for (auto& p : m.parts)
    for (const auto& u : units) {
      if (!p.language.empty() && u.language != p.language) continue;
      for (std::size_t j = u.begin; j < u.end; ++j) {
        const auto& t = train.sentences[u.sentence].tokens[j];
        if (!t.is_merge_continuation()) p.dict.add(t.orig, t.norm);
      }
    }
  return m;
}

// Ranking instances, one training set per model part. Every non-continuation
// token contributes its candidates; dictionary counts leave the token's own
// occurrence out, and the gold form is added when no generator proposes it.
inline std::vector<TrainingSet> build_training_instances(const Dataset& train, const NormalizationModel& m,
                                                         const TokenTable* lids, CandidateCache& cache,
                                                         std::size_t threads = 0) {
  if (needs_lid(m.strategy)) {
    if (!lids) throw InvalidArgument(std::string(to_string(m.strategy)) + " needs LID labels");
    detail::check_lids(train, *lids);
  }
  std::vector<TrainingSet> sets(m.parts.size());
  for (std::size_t p = 0; p < m.parts.size(); ++p) {
    sets[p].language = m.parts[p].language;
    sets[p].data.n_features = m.parts[p].schema.size();
  }

  const auto units = detail::make_units(train, m.strategy, lids);
  struct UnitRows {
    std::size_t part = 0;
    ForestData data;
    std::vector<std::pair<std::size_t, std::size_t>> groups;
    std::size_t injected = 0;
  };
  std::vector<UnitRows> rows(units.size());

  parallel_for(units.size(), threads, [&](std::size_t ui) {
    const auto& u = units[ui];
    std::size_t pi = 0;
    if (m.strategy == Strategy::fragments)
      while (m.parts[pi].language != u.language) ++pi;
    const auto& part = m.parts[pi];
    const auto& sent = train.sentences[u.sentence];
    std::vector<std::string> words;
    for (std::size_t j = u.begin; j < u.end; ++j) words.push_back(sent.tokens[j].orig);
    const std::vector<std::string>* sent_lids = lids ? &(*lids)[u.sentence] : nullptr;
    std::vector<std::string> resolved;
    if (sent_lids) resolved = resolve_unknown_labels(*sent_lids, train.languages);

    auto& out = rows[ui];
    out.part = pi;
    out.data.n_features = part.schema.size();
    for (std::size_t j = 0; j < words.size(); ++j) {
      const auto& tok = sent.tokens[u.begin + j];
      if (tok.is_merge_continuation()) continue;
      auto layout = detail::layout_for(m, part, sent_lids ? &resolved : nullptr, u.begin + j);
      const auto& entry = cache.get(words[j], u.begin + j == 0, layout.blocks);
      auto cands = with_lookup(entry.base, part.dict, words[j], &tok.norm);
      if (std::none_of(cands.begin(), cands.end(), [&](const Candidate& c) { return c.form == tok.norm; })) {
        Candidate gold;
        gold.form = tok.norm;
        gold.edit_distance = unicode::levenshtein(words[j], tok.norm);
        cands.push_back(std::move(gold));
        ++out.injected;
      }
      FeatureInput in{words, j, detail::gold_context(sent, u.begin, u.begin + j), part.dict.total(words[j]) - 1, u.begin};
      std::vector<const RankMap*> ranks;
      for (const auto& r : entry.ranks) ranks.push_back(&r);
      for (const auto& c : cands) {
        out.data.add(featurize(c, in, layout.blocks, m.strategy, layout.language_id, ranks, m.generator.embedding_k),
                     c.form == tok.norm);
        out.groups.emplace_back(u.sentence, u.begin + j);
      }
    }
  });

  for (auto& r : rows) {
    auto& s = sets[r.part];
    s.data.x.insert(s.data.x.end(), r.data.x.begin(), r.data.x.end());
    s.data.y.insert(s.data.y.end(), r.data.y.begin(), r.data.y.end());
    s.groups.insert(s.groups.end(), r.groups.begin(), r.groups.end());
    s.injected += r.injected;
  }
  return sets;
}

inline NormalizationModel train_normalization_model(const Dataset& train, const ResourceSet& resources,
                                                    const RankerConfig& cfg, const TokenTable* lids = nullptr) {
  if (train.sentences.empty()) throw InvalidArgument("empty training data");
  if (needs_lid(cfg.strategy)) {
    if (!lids) throw InvalidArgument(std::string(to_string(cfg.strategy)) + " needs LID labels");
    detail::check_lids(train, *lids);
  }
  auto m = model_skeleton(train, resources, cfg, lids);
  CandidateCache cache(cfg.generator);
  auto sets = build_training_instances(train, m, lids, cache, cfg.threads);
  for (std::size_t p = 0; p < m.parts.size(); ++p) {
    ForestConfig fc = cfg.forest;
    if (fc.threads == 0) fc.threads = cfg.threads;
    try {
      m.parts[p].forest = train_forest(sets[p].data, fc);
    } catch (const InvalidArgument& e) {
      const std::string where = m.parts[p].language.empty() ? "" : " for " + m.parts[p].language;
      throw InvalidArgument("cannot train ranker" + where + ": " + e.what());
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Inference

namespace detail {

inline constexpr double kBiasEpsilon = 1e-3;

inline std::vector<std::string> rank_unit(const NormalizationModel& m, const RankerPart& part,
                                          std::span<const std::string> words, const std::vector<std::string>* lids,
                                          std::size_t offset, CandidateCache* cache) {
  std::vector<std::string> out;
  std::string prev(kBoundary);
  for (std::size_t j = 0; j < words.size(); ++j) {
    auto layout = layout_for(m, part, lids, offset + j);
    std::vector<Candidate> base;
    std::vector<RankMap> local_ranks;
    std::vector<const RankMap*> ranks;
    if (cache) {
      const auto& e = cache->get(words[j], offset + j == 0, layout.blocks);
      base = e.base;
      for (const auto& r : e.ranks) ranks.push_back(&r);
    } else {
      base = generate_all(words[j], offset + j == 0, layout.blocks, nullptr, m.generator);
      for (const auto* b : layout.blocks) local_ranks.push_back(embedding_ranks(*b, words[j], m.generator.embedding_k));
      for (const auto& r : local_ranks) ranks.push_back(&r);
    }
    auto cands = with_lookup(std::move(base), part.dict, words[j]);
    FeatureInput in{words, j, prev, part.dict.total(words[j]), offset};

    std::size_t best = 0;
    double best_score = -1;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      auto fv = featurize(cands[c], in, layout.blocks, m.strategy, layout.language_id, ranks, m.generator.embedding_k);
      double score = part.forest.predict_proba(fv) + kBiasEpsilon;
      const bool original = cands[c].form == words[j];
      if (original) score *= m.original_bias;
      bool better = score > best_score;
      if (!better && score == best_score) {
        const auto& b = cands[best];
        const bool b_original = b.form == words[j];
        if (original != b_original) better = original;
        else if (cands[c].lookup_count != b.lookup_count) better = cands[c].lookup_count > b.lookup_count;
        else better = cands[c].form < b.form;
      }
      if (better) {
        best = c;
        best_score = score;
      }
    }
    out.push_back(cands[best].form);
    prev = last_word(out.back());
  }
  return out;
}

}  // namespace detail

// Per-token output for one sentence; a chosen split candidate keeps its space.
inline std::vector<std::string> normalize_sentence(const NormalizationModel& m, std::span<const std::string> words,
                                                   const std::vector<std::string>* lids = nullptr,
                                                   CandidateCache* cache = nullptr) {
  if (words.empty()) return {};
  if (m.parts.empty()) throw InvalidArgument("model has no trained ranker");
  std::vector<std::string> resolved;
  if (needs_lid(m.strategy)) {
    if (!lids) throw InvalidArgument(std::string(to_string(m.strategy)) + " needs LID labels");
    if (lids->size() != words.size()) throw InvalidArgument("LID labels do not match the token count");
    for (const auto& l : *lids)
      if (!is_coarse_label(l, m.languages)) throw InvalidArgument("LID label '" + l + "' is not a coarse label");
    resolved = resolve_unknown_labels(*lids, m.languages);
  }
  if (m.strategy != Strategy::fragments) return detail::rank_unit(m, m.parts.front(), words, &resolved, 0, cache);

  std::vector<std::string> out;
  for (const auto& f : fragment_split(*lids, m.languages)) {
    auto piece = detail::rank_unit(m, m.part_for(f.language), words.subspan(f.begin, f.end - f.begin), &resolved,
                                   f.begin, cache);
    out.insert(out.end(), piece.begin(), piece.end());
  }
  return out;
}

struct FragmentOutput {
  Fragment fragment;
  std::vector<std::string> norms;
};

// Fragments strategy, piece by piece; normalize_sentence is the concatenation.
inline std::vector<FragmentOutput> normalize_fragments(const NormalizationModel& m, std::span<const std::string> words,
                                                       const std::vector<std::string>& lids,
                                                       CandidateCache* cache = nullptr) {
  if (m.strategy != Strategy::fragments) throw InvalidArgument("normalize_fragments needs a fragments model");
  if (lids.size() != words.size()) throw InvalidArgument("LID labels do not match the token count");
  for (const auto& l : lids)
    if (!is_coarse_label(l, m.languages)) throw InvalidArgument("LID label '" + l + "' is not a coarse label");
  const auto resolved = resolve_unknown_labels(lids, m.languages);
  std::vector<FragmentOutput> out;
  for (const auto& f : fragment_split(lids, m.languages))
    out.push_back({f, detail::rank_unit(m, m.part_for(f.language), words.subspan(f.begin, f.end - f.begin), &resolved,
                                        f.begin, cache)});
  return out;
}

inline TokenTable normalize_dataset(const NormalizationModel& m, const Dataset& d, const TokenTable* lids = nullptr,
                                    std::size_t threads = 0) {
  if (needs_lid(m.strategy) && (!lids || lids->size() != d.sentences.size()))
    throw InvalidArgument(std::string(to_string(m.strategy)) + " needs LID labels for every sentence");
  CandidateCache cache(m.generator);
  TokenTable out(d.sentences.size());
  parallel_for(d.sentences.size(), threads, [&](std::size_t i) {
    const auto words = d.sentences[i].originals();
    out[i] = normalize_sentence(m, words, lids ? &(*lids)[i] : nullptr, &cache);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

inline std::string serialize_model(const NormalizationModel& m) {
  BinaryWriter w;
  w.u8(static_cast<std::uint8_t>(m.strategy));
  w.str(m.languages.first);
  w.str(m.languages.second);
  w.f64(m.original_bias);
  const auto& g = m.generator;
  for (auto v : {g.embedding_k, g.max_dist_long, g.max_dist_short, g.long_word_min_length, g.split_min_part})
    w.u32(static_cast<std::uint32_t>(v));
  w.u32(static_cast<std::uint32_t>(m.resources.size()));
  for (const auto& r : m.resources) {
    w.str(r.language);
    w.str(r.path);
    w.str(r.sha256);
  }
  w.u32(static_cast<std::uint32_t>(m.parts.size()));
  for (const auto& p : m.parts) {
    w.str(p.language);
    w.u32(static_cast<std::uint32_t>(p.block_languages.size()));
    for (const auto& l : p.block_languages) w.str(l);
    w.u32(static_cast<std::uint32_t>(p.schema.size()));
    for (const auto& s : p.schema) w.str(s);
    p.forest.save(w);
    p.dict.save(w);
  }
  return seal_container(PayloadKind::normalization_model, w.bytes());
}

// Parses a model without touching its resource files.
inline NormalizationModel deserialize_model(std::string_view bytes) {
  BinaryReader r(open_container(bytes, PayloadKind::normalization_model));
  NormalizationModel m;
  const auto s = r.u8();
  if (s > 3) throw IntegrityError("unknown strategy tag " + std::to_string(s));
  m.strategy = static_cast<Strategy>(s);
  m.languages.first = r.str();
  m.languages.second = r.str();
  m.original_bias = r.f64();
  auto& g = m.generator;
  for (auto* v : {&g.embedding_k, &g.max_dist_long, &g.max_dist_short, &g.long_word_min_length, &g.split_min_part})
    *v = r.u32();
  const auto n_res = r.u32();
  for (std::uint32_t i = 0; i < n_res; ++i) {
    ResourceRef ref;
    ref.language = r.str();
    ref.path = r.str();
    ref.sha256 = r.str();
    m.resources.push_back(std::move(ref));
  }
  const auto n_parts = r.u32();
  for (std::uint32_t i = 0; i < n_parts; ++i) {
    RankerPart p;
    p.language = r.str();
    const auto nb = r.u32();
    for (std::uint32_t k = 0; k < nb; ++k) p.block_languages.push_back(r.str());
    const auto ns = r.u32();
    for (std::uint32_t k = 0; k < ns; ++k) p.schema.push_back(r.str());
    p.forest = RandomForest::load(r);
    p.dict = ReplacementDict::load(r);
    if (p.forest.n_features() != p.schema.size()) throw IntegrityError("forest does not match feature schema");
    m.parts.push_back(std::move(p));
  }
  if (!r.at_end()) throw IntegrityError("trailing bytes in model");
  const std::size_t expected_parts = m.strategy == Strategy::fragments ? 2 : 1;
  if (m.parts.size() != expected_parts) throw IntegrityError("wrong number of rankers for strategy");
  return m;
}

inline void save_model(const NormalizationModel& m, const std::string& path) { write_file(path, serialize_model(m)); }

// Loads a model and its resource bundles. Each bundle file must hash to the
// digest recorded at training time. `paths` overrides recorded locations.
inline NormalizationModel load_model(const std::string& path, const std::map<std::string, std::string>& paths = {}) {
  auto m = deserialize_model(read_file(path));
  for (const auto& ref : m.resources) {
    auto it = paths.find(ref.language);
    const std::string p = it != paths.end() ? it->second : ref.path;
    if (p.empty()) throw InvalidArgument("no path for the " + ref.language + " resource bundle");
    auto bytes = read_file(p);
    if (to_hex(sha256(bytes)) != ref.sha256)
      throw IntegrityError("resource bundle " + p + " does not match the hash recorded in the model");
    auto bundle = std::make_shared<const LanguageResources>(LanguageResources::deserialize(bytes));
    if (bundle->language != ref.language)
      throw IntegrityError("resource bundle " + p + " is for language " + bundle->language);
    m.bundles[ref.language] = std::move(bundle);
  }
  return m;
}

}  // namespace csnorm
