#pragma once

// Per-language monolingual resources: a word-list lexicon with an
// edit-distance index, an add-alpha smoothed unigram/bigram model, a
// text-format embedding store, and the training-data replacement dictionary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "csnorm/binary_io.hpp"
#include "csnorm/corpus.hpp"
#include "csnorm/error.hpp"
#include "csnorm/unicode.hpp"

namespace csnorm {

namespace detail {

inline std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool all_digits_ascii(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Lexicon

class Lexicon {
public:
  Lexicon() = default;
  Lexicon(std::string language, std::vector<std::string> words) : language_(std::move(language)) {
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    words_ = std::move(words);
    set_.insert(words_.begin(), words_.end());
    build_trie();
  }

  static Lexicon from_text(std::string language, std::string_view text) {
    std::vector<std::string> words;
    std::size_t start = 0;
    while (start < text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      auto w = detail::trim(text.substr(start, end - start));
      start = end + 1;
      if (w.empty() || w.find_first_of(" \t") != std::string_view::npos) continue;
      words.push_back(unicode::nfc(w));
    }
    return Lexicon(std::move(language), std::move(words));
  }

  const std::string& language() const { return language_; }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  bool contains(std::string_view w) const { return set_.count(std::string(w)) > 0; }

  // All entries within Levenshtein distance max_dist, sorted by (distance, word).
  std::vector<std::pair<std::string, std::size_t>> within_distance(std::string_view word, std::size_t max_dist) const {
    std::vector<std::pair<std::string, std::size_t>> out;
    if (words_.empty()) return out;
    const auto query = unicode::to_code_points(word);
    std::vector<std::size_t> row(query.size() + 1);
    for (std::size_t j = 0; j <= query.size(); ++j) row[j] = j;
    for (const auto& [c, child] : nodes_[0].children) search(child, c, query, row, max_dist, out);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second < b.second : a.first < b.first;
    });
    return out;
  }

  bool operator==(const Lexicon& o) const { return language_ == o.language_ && words_ == o.words_; }

private:
  struct Node {
    std::vector<std::pair<char32_t, std::uint32_t>> children;  // sorted by code point
    std::int64_t word = -1;
  };

  void build_trie() {
    nodes_.assign(1, Node{});
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint32_t cur = 0;
      for (char32_t c : unicode::to_code_points(words_[w])) {
        auto& ch = nodes_[cur].children;
        auto it = std::lower_bound(ch.begin(), ch.end(), c, [](const auto& p, char32_t v) { return p.first < v; });
        if (it != ch.end() && it->first == c) {
          cur = it->second;
        } else {
          auto idx = static_cast<std::uint32_t>(nodes_.size());
          ch.insert(it, {c, idx});
          nodes_.push_back(Node{});
          cur = idx;
        }
      }
      nodes_[cur].word = static_cast<std::int64_t>(w);
    }
  }

  void search(std::uint32_t node, char32_t c, const std::u32string& query, const std::vector<std::size_t>& prev,
              std::size_t max_dist, std::vector<std::pair<std::string, std::size_t>>& out) const {
    std::vector<std::size_t> row(query.size() + 1);
    row[0] = prev[0] + 1;
    std::size_t best = row[0];
    for (std::size_t j = 1; j <= query.size(); ++j) {
      std::size_t sub = prev[j - 1] + (query[j - 1] == c ? 0 : 1);
      row[j] = std::min({row[j - 1] + 1, prev[j] + 1, sub});
      best = std::min(best, row[j]);
    }
    if (nodes_[node].word >= 0 && row.back() <= max_dist)
      out.emplace_back(words_[static_cast<std::size_t>(nodes_[node].word)], row.back());
    if (best > max_dist) return;
    for (const auto& [cc, child] : nodes_[node].children) search(child, cc, query, row, max_dist, out);
  }

  std::string language_;
  std::vector<std::string> words_;
  std::unordered_set<std::string> set_;
  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// N-gram model

inline constexpr std::string_view kBoundary = "<s>";

class NGramModel {
public:
  NGramModel() = default;

  std::size_t vocab_size() const { return words_.size(); }
  std::uint64_t total_tokens() const { return total_; }
  double alpha() const { return alpha_; }

  std::uint64_t count(std::string_view w) const {
    auto id = find(w);
    return id ? unigrams_[*id] : 0;
  }
  std::uint64_t count(std::string_view prev, std::string_view w) const {
    auto a = find(prev), b = find(w);
    if (!a || !b) return 0;
    auto it = bigrams_.find(key(*a, *b));
    return it == bigrams_.end() ? 0 : it->second;
  }

  // Natural-log probability with add-alpha smoothing over the vocabulary
  // plus one unknown-word slot. With prev, conditions on the previous word
  // (the boundary symbol for sentence start).
  double logprob(std::string_view w, std::optional<std::string_view> prev = std::nullopt) const {
    const double slots = alpha_ * static_cast<double>(words_.size() + 1);
    auto wid = find(w);
    if (!prev) {
      double c = wid ? static_cast<double>(unigrams_[*wid]) : 0.0;
      return std::log((c + alpha_) / (static_cast<double>(total_) + slots));
    }
    auto pid = find(*prev);
    double ctx = pid ? static_cast<double>(contexts_[*pid]) : 0.0;
    double c = 0.0;
    if (pid && wid) {
      auto it = bigrams_.find(key(*pid, *wid));
      if (it != bigrams_.end()) c = static_cast<double>(it->second);
    }
    return std::log((c + alpha_) / (ctx + slots));
  }

  const std::vector<std::string>& vocabulary() const { return words_; }

  void save(BinaryWriter& w) const {
    w.f64(alpha_);
    w.u64(total_);
    w.u32(static_cast<std::uint32_t>(words_.size()));
    for (std::size_t i = 0; i < words_.size(); ++i) {
      w.str(words_[i]);
      w.u64(unigrams_[i]);
    }
    std::vector<std::pair<std::uint64_t, std::uint64_t>> bg(bigrams_.begin(), bigrams_.end());
    std::sort(bg.begin(), bg.end());
    w.u64(bg.size());
    for (auto [k, c] : bg) {
      w.u64(k);
      w.u64(c);
    }
  }

  static NGramModel load(BinaryReader& r) {
    NGramModel m;
    m.alpha_ = r.f64();
    m.total_ = r.u64();
    auto n = r.u32();
    m.words_.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      m.words_.push_back(r.str());
      m.unigrams_.push_back(r.u64());
      m.index_.emplace(m.words_.back(), i);
    }
    auto nb = r.u64();
    m.contexts_.assign(n, 0);
    m.bigrams_.reserve(nb);
    for (std::uint64_t i = 0; i < nb; ++i) {
      auto k = r.u64();
      auto c = r.u64();
      if ((k >> 32) >= n || (k & 0xffffffffu) >= n) throw IntegrityError("bigram refers to unknown word");
      m.bigrams_.emplace(k, c);
      m.contexts_[k >> 32] += c;
    }
    return m;
  }

  bool operator==(const NGramModel& o) const {
    return alpha_ == o.alpha_ && total_ == o.total_ && words_ == o.words_ && unigrams_ == o.unigrams_ &&
           bigrams_ == o.bigrams_;
  }

private:
  friend class NGramBuilder;

  static std::uint64_t key(std::uint32_t a, std::uint32_t b) { return (static_cast<std::uint64_t>(a) << 32) | b; }

  std::optional<std::uint32_t> find(std::string_view w) const {
    auto it = index_.find(std::string(w));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  double alpha_ = 1.0;
  std::uint64_t total_ = 0;
  std::vector<std::string> words_;
  std::vector<std::uint64_t> unigrams_;
  std::vector<std::uint64_t> contexts_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::unordered_map<std::uint64_t, std::uint64_t> bigrams_;
};

// Streaming counter. Lines are whitespace-tokenized and deduplicated; each
// line contributes one boundary token, which also serves as the bigram
// context of the first word and the successor of the last word.
class NGramBuilder {
public:
  void add_line(std::string_view raw) {
    auto line = detail::trim(raw);
    if (line.empty()) return;
    std::string normalized = unicode::nfc(line);
    auto toks = detail::split_ws(normalized);
    if (toks.empty()) return;
    std::string canonical;
    for (const auto& t : toks) {
      if (!canonical.empty()) canonical += ' ';
      canonical += t;
    }
    if (!seen_.insert(std::move(canonical)).second) return;
    std::uint32_t prev = id(kBoundary);
    for (const auto& t : toks) {
      auto cur = id(t);
      ++m_.unigrams_[cur];
      ++m_.bigrams_[NGramModel::key(prev, cur)];
      prev = cur;
    }
    auto b = id(kBoundary);
    ++m_.unigrams_[b];
    ++m_.bigrams_[NGramModel::key(prev, b)];
    m_.total_ += toks.size() + 1;
  }

  void add_stream(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) add_line(line);
  }

  NGramModel finish(double alpha = 1.0) {
    if (m_.total_ == 0) throw InvalidArgument("n-gram corpus is empty");
    if (!(alpha > 0)) throw InvalidArgument("smoothing alpha must be positive");
    m_.alpha_ = alpha;
    m_.contexts_.assign(m_.words_.size(), 0);
    for (auto [k, c] : m_.bigrams_) m_.contexts_[k >> 32] += c;
    seen_.clear();
    return std::move(m_);
  }

private:
  std::uint32_t id(std::string_view w) {
    auto [it, inserted] = m_.index_.emplace(std::string(w), static_cast<std::uint32_t>(m_.words_.size()));
    if (inserted) {
      m_.words_.emplace_back(w);
      m_.unigrams_.push_back(0);
    }
    return it->second;
  }

  NGramModel m_;
  std::unordered_set<std::string> seen_;
};

inline NGramModel build_ngrams(std::string_view corpus, double alpha = 1.0) {
  NGramBuilder b;
  std::size_t start = 0;
  while (start < corpus.size()) {
    auto end = corpus.find('\n', start);
    if (end == std::string_view::npos) end = corpus.size();
    b.add_line(corpus.substr(start, end - start));
    start = end + 1;
  }
  return b.finish(alpha);
}

inline double ngram_logprob(const NGramModel& m, std::string_view word,
                            std::optional<std::string_view> prev = std::nullopt) {
  return m.logprob(word, prev);
}

// ---------------------------------------------------------------------------
// Embeddings

class EmbeddingStore {
public:
  EmbeddingStore() = default;

  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  bool contains(std::string_view w) const { return index_.count(std::string(w)) > 0; }
  const std::vector<std::string>& words() const { return words_; }

  std::optional<double> cosine(std::string_view a, std::string_view b) const {
    auto ia = index_.find(std::string(a)), ib = index_.find(std::string(b));
    if (ia == index_.end() || ib == index_.end()) return std::nullopt;
    return dot(ia->second, ib->second);
  }

  // Top-k neighbours by cosine, excluding the query itself; ties ordered by word.
  std::vector<std::pair<std::string, double>> knn(std::string_view word, std::size_t k) const {
    std::vector<std::pair<std::string, double>> out;
    auto it = index_.find(std::string(word));
    if (it == index_.end() || k == 0) return out;
    const auto q = it->second;
    std::vector<std::pair<double, std::uint32_t>> scored;
    scored.reserve(words_.size());
    for (std::uint32_t i = 0; i < words_.size(); ++i)
      if (i != q) scored.emplace_back(dot(q, i), i);
    auto cmp = [&](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : words_[a.second] < words_[b.second];
    };
    const std::size_t n = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), cmp);
    for (std::size_t i = 0; i < n; ++i) out.emplace_back(words_[scored[i].second], scored[i].first);
    return out;
  }

  static EmbeddingStore from_text(std::string_view text) {
    EmbeddingStore s;
    std::size_t start = 0, line_no = 0;
    bool first = true;
    while (start < text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      auto line = text.substr(start, end - start);
      start = end + 1;
      ++line_no;
      auto fields = detail::split_ws(line);
      if (fields.empty()) continue;
      if (first) {
        first = false;
        if (fields.size() == 2 && detail::all_digits_ascii(fields[0]) && detail::all_digits_ascii(fields[1])) continue;
      }
      if (fields.size() < 2) throw FormatError("embedding line without vector", line_no);
      const std::size_t d = fields.size() - 1;
      if (s.dim_ == 0) s.dim_ = d;
      if (d != s.dim_)
        throw FormatError("inconsistent embedding dimension " + std::to_string(d) + " (expected " +
                              std::to_string(s.dim_) + ")",
                          line_no);
      std::vector<double> v(d);
      for (std::size_t i = 0; i < d; ++i) {
        try {
          std::size_t used = 0;
          v[i] = std::stod(fields[i + 1], &used);
          if (used != fields[i + 1].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
          throw FormatError("bad vector component '" + fields[i + 1] + "'", line_no);
        }
      }
      s.add(unicode::nfc(fields[0]), v);
    }
    return s;
  }

  void add(const std::string& word, const std::vector<double>& v) {
    if (dim_ == 0) dim_ = v.size();
    if (v.size() != dim_) throw InvalidArgument("embedding dimension mismatch");
    if (index_.count(word)) return;  // first occurrence wins
    double norm = 0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    index_.emplace(word, static_cast<std::uint32_t>(words_.size()));
    words_.push_back(word);
    for (double x : v) unit_.push_back(static_cast<float>(norm > 0 ? x / norm : 0.0));
  }

  void save(BinaryWriter& w) const {
    w.u32(static_cast<std::uint32_t>(dim_));
    w.u32(static_cast<std::uint32_t>(words_.size()));
    for (std::size_t i = 0; i < words_.size(); ++i) {
      w.str(words_[i]);
      for (std::size_t j = 0; j < dim_; ++j) w.f32(unit_[i * dim_ + j]);
    }
  }

  static EmbeddingStore load(BinaryReader& r) {
    EmbeddingStore s;
    s.dim_ = r.u32();
    auto n = r.u32();
    s.words_.reserve(n);
    s.unit_.reserve(static_cast<std::size_t>(n) * s.dim_);
    for (std::uint32_t i = 0; i < n; ++i) {
      s.words_.push_back(r.str());
      s.index_.emplace(s.words_.back(), i);
      for (std::size_t j = 0; j < s.dim_; ++j) s.unit_.push_back(r.f32());
    }
    return s;
  }

  bool operator==(const EmbeddingStore& o) const { return dim_ == o.dim_ && words_ == o.words_ && unit_ == o.unit_; }

private:
  double dot(std::uint32_t a, std::uint32_t b) const {
    const float* x = unit_.data() + static_cast<std::size_t>(a) * dim_;
    const float* y = unit_.data() + static_cast<std::size_t>(b) * dim_;
    double s = 0;
    for (std::size_t i = 0; i < dim_; ++i) s += static_cast<double>(x[i]) * static_cast<double>(y[i]);
    return s;
  }

  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<float> unit_;
};

inline EmbeddingStore load_embeddings(std::string_view text) { return EmbeddingStore::from_text(text); }

inline std::vector<std::pair<std::string, double>> knn(const EmbeddingStore& s, std::string_view word, std::size_t k) {
  return s.knn(word, k);
}

// ---------------------------------------------------------------------------
// Replacement dictionary

struct Replacement {
  std::string norm;
  std::uint32_t count = 0;

  bool operator==(const Replacement&) const = default;
};

class ReplacementDict {
public:
  ReplacementDict() = default;

  void add(const std::string& orig, const std::string& norm, std::uint32_t n = 1) {
    auto& list = map_[orig];
    auto it = std::find_if(list.begin(), list.end(), [&](const Replacement& r) { return r.norm == norm; });
    if (it == list.end()) list.push_back({norm, n});
    else it->count += n;
    sort_list(list);
  }

  // Entries sorted by (count desc, norm asc); empty for unseen words.
  const std::vector<Replacement>& lookup(std::string_view word) const {
    static const std::vector<Replacement> kEmpty;
    auto it = map_.find(std::string(word));
    return it == map_.end() ? kEmpty : it->second;
  }

  std::uint32_t count(std::string_view word, std::string_view norm) const {
    for (const auto& r : lookup(word))
      if (r.norm == norm) return r.count;
    return 0;
  }

  std::uint32_t total(std::string_view word) const {
    std::uint32_t t = 0;
    for (const auto& r : lookup(word)) t += r.count;
    return t;
  }

  std::size_t size() const { return map_.size(); }
  const std::map<std::string, std::vector<Replacement>>& entries() const { return map_; }

  void save(BinaryWriter& w) const {
    w.u32(static_cast<std::uint32_t>(map_.size()));
    for (const auto& [orig, list] : map_) {
      w.str(orig);
      w.u32(static_cast<std::uint32_t>(list.size()));
      for (const auto& r : list) {
        w.str(r.norm);
        w.u32(r.count);
      }
    }
  }

  static ReplacementDict load(BinaryReader& r) {
    ReplacementDict d;
    auto n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      auto orig = r.str();
      auto m = r.u32();
      auto& list = d.map_[orig];
      for (std::uint32_t j = 0; j < m; ++j) {
        auto norm = r.str();
        list.push_back({norm, r.u32()});
      }
      sort_list(list);
    }
    return d;
  }

  bool operator==(const ReplacementDict&) const = default;

private:
  static void sort_list(std::vector<Replacement>& list) {
    std::sort(list.begin(), list.end(), [](const Replacement& a, const Replacement& b) {
      return a.count != b.count ? a.count > b.count : a.norm < b.norm;
    });
  }

  std::map<std::string, std::vector<Replacement>> map_;
};

// Counts orig -> norm over every token except merge continuations (identity
// pairs included).
inline ReplacementDict build_replacement_dict(const Dataset& train) {
  ReplacementDict d;
  for (const auto& s : train.sentences)
    for (const auto& t : s.tokens)
      if (!t.is_merge_continuation()) d.add(t.orig, t.norm);
  return d;
}

// Most frequent replacement; the word itself wins any tie it takes part in,
// otherwise ties go to the lexicographically smallest norm.
inline std::string mfr_lookup(const ReplacementDict& d, std::string_view word) {
  const auto& list = d.lookup(word);
  if (list.empty()) return std::string(word);
  const auto top = list.front().count;
  for (const auto& r : list) {
    if (r.count != top) break;
    if (r.norm == word) return r.norm;
  }
  return list.front().norm;
}

// ---------------------------------------------------------------------------
// Language bundle

struct LanguageResources {
  std::string language;
  Lexicon lexicon;
  NGramModel ngrams;
  EmbeddingStore embeddings;

  std::string serialize() const {
    BinaryWriter w;
    w.str(language);
    w.u32(static_cast<std::uint32_t>(lexicon.size()));
    for (const auto& word : lexicon.words()) w.str(word);
    ngrams.save(w);
    embeddings.save(w);
    return seal_container(PayloadKind::resource_bundle, w.bytes());
  }

  static LanguageResources deserialize(std::string_view bytes) {
    BinaryReader r(open_container(bytes, PayloadKind::resource_bundle));
    LanguageResources res;
    res.language = r.str();
    auto n = r.u32();
    std::vector<std::string> words;
    words.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) words.push_back(r.str());
    res.lexicon = Lexicon(res.language, std::move(words));
    res.ngrams = NGramModel::load(r);
    res.embeddings = EmbeddingStore::load(r);
    if (!r.at_end()) throw IntegrityError("trailing bytes in resource bundle");
    return res;
  }

  void save(const std::string& path) const { write_file(path, serialize()); }
  static LanguageResources load(const std::string& path) { return deserialize(read_file(path)); }
};

}  // namespace csnorm
