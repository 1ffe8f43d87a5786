#pragma once

// Normalization corpora: data model, the tab-separated norm file format,
// descriptive statistics, fold planning and label mapping.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "csnorm/error.hpp"
#include "csnorm/rng.hpp"
#include "csnorm/unicode.hpp"

namespace csnorm {

// Norm field of every token after the first of an n:1 merge group.
inline constexpr std::string_view kMergeMarker = "__MERGE__";
// Placeholder for an absent LID column when a POS column follows.
inline constexpr std::string_view kEmptyField = "_";
inline constexpr std::string_view kUnknownLabel = "UN";

struct Token {
  std::string orig;
  std::string norm;
  std::optional<std::string> lid;
  std::optional<std::string> pos;

  bool is_merge_continuation() const { return norm == kMergeMarker; }
  bool is_normalized() const { return norm != orig; }
  bool is_split() const { return norm.find(' ') != std::string::npos; }

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  std::vector<std::string> originals() const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(t.orig);
    return out;
  }
  std::vector<std::string> norms() const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(t.norm);
    return out;
  }

  bool operator==(const Sentence&) const = default;
};

enum class LabelScheme { coarse, fine };

// (lang1, lang2) as upper-case codes, e.g. ("TR", "DE").
struct LanguagePair {
  std::string first = "TR";
  std::string second = "DE";

  bool contains(std::string_view label) const { return label == first || label == second; }
  bool operator==(const LanguagePair&) const = default;
};

struct Dataset {
  std::vector<Sentence> sentences;
  LabelScheme label_scheme = LabelScheme::coarse;
  LanguagePair languages;

  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.size();
    return n;
  }
  bool has_lid() const {
    for (const auto& s : sentences)
      for (const auto& t : s.tokens)
        if (!t.lid) return false;
    return !sentences.empty();
  }
  Dataset subset(std::span<const std::size_t> indices) const {
    Dataset d;
    d.label_scheme = label_scheme;
    d.languages = languages;
    d.sentences.reserve(indices.size());
    for (auto i : indices) d.sentences.push_back(sentences.at(i));
    return d;
  }

  bool operator==(const Dataset&) const = default;
};

// Per-sentence, per-token output strings (a norm, a label, a tag...).
using TokenTable = std::vector<std::vector<std::string>>;

// ---------------------------------------------------------------------------
// Label mapping

// Maps the 12-label fine LID inventory onto {lang1, lang2, UN}.
inline std::string map_labels_coarse(std::string_view fine, const LanguagePair& langs = {}) {
  if (fine.starts_with("NE.")) {
    auto rest = fine.substr(3);
    if (rest.starts_with("NE.")) throw InvalidArgument("unknown fine LID label: " + std::string(fine));
    return map_labels_coarse(rest, langs);
  }
  if (langs.contains(fine)) return std::string(fine);
  if (fine == "Mixed") return langs.second;
  if (fine == "Lang3" || fine == "Ambig" || fine == "Other" || fine == kUnknownLabel) return std::string(kUnknownLabel);
  throw InvalidArgument("unknown fine LID label: " + std::string(fine));
}

inline bool is_coarse_label(std::string_view label, const LanguagePair& langs) {
  return langs.contains(label) || label == kUnknownLabel;
}

// Rewrites every LID label to the coarse scheme (no-op when already coarse).
inline Dataset to_coarse(Dataset d) {
  for (auto& s : d.sentences)
    for (auto& t : s.tokens)
      if (t.lid) t.lid = map_labels_coarse(*t.lid, d.languages);
  d.label_scheme = LabelScheme::coarse;
  return d;
}

// ---------------------------------------------------------------------------
// Norm file format

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

inline bool valid_norm_spacing(std::string_view norm) {
  if (norm.empty() || norm.front() == ' ' || norm.back() == ' ') return false;
  return norm.find("  ") == std::string_view::npos;
}

inline LabelScheme detect_scheme(const std::vector<Sentence>& sentences, const LanguagePair& langs) {
  for (const auto& s : sentences)
    for (const auto& t : s.tokens)
      if (t.lid && !is_coarse_label(*t.lid, langs)) return LabelScheme::fine;
  return LabelScheme::coarse;
}

}  // namespace detail

inline Dataset parse_norm_file(std::string_view text, const LanguagePair& langs = {}) {
  Dataset d;
  d.languages = langs;
  Sentence current;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;

    if (line.empty()) {
      if (!current.tokens.empty()) d.sentences.push_back(std::move(current));
      current = Sentence{};
      continue;
    }
    if (line.back() == '\r') throw FormatError("CR line ending (LF required)", line_no);
    auto fields = detail::split_tabs(line);
    if (fields.size() < 2 || fields.size() > 4)
      throw FormatError("expected 2-4 tab-separated fields, got " + std::to_string(fields.size()), line_no);

    Token tok;
    try {
      tok.orig = unicode::nfc(fields[0]);
      tok.norm = unicode::nfc(fields[1]);
    } catch (const FormatError& e) {
      throw FormatError(e.what(), line_no);
    }
    if (tok.orig.empty()) throw FormatError("empty ORIG field", line_no);
    if (unicode::has_whitespace(tok.orig)) throw FormatError("ORIG contains whitespace", line_no);
    if (tok.norm.empty()) throw FormatError("empty NORM field", line_no);
    if (!detail::valid_norm_spacing(tok.norm) || tok.norm.find('\t') != std::string::npos)
      throw FormatError("NORM has leading, trailing or repeated spaces", line_no);
    if (tok.is_merge_continuation() && current.tokens.empty())
      throw FormatError("merge marker at sentence start", line_no);
    if (fields.size() >= 3 && fields[2] != kEmptyField) tok.lid = unicode::nfc(fields[2]);
    if (fields.size() == 4 && fields[3] != kEmptyField) tok.pos = unicode::nfc(fields[3]);
    current.tokens.push_back(std::move(tok));
  }
  if (!current.tokens.empty()) d.sentences.push_back(std::move(current));
  d.label_scheme = detail::detect_scheme(d.sentences, langs);
  return d;
}

inline std::string write_norm_file(const Dataset& d) {
  std::string out;
  for (const auto& s : d.sentences) {
    for (const auto& t : s.tokens) {
      out += t.orig;
      out += '\t';
      out += t.norm;
      if (t.lid || t.pos) {
        out += '\t';
        out += t.lid ? *t.lid : std::string(kEmptyField);
      }
      if (t.pos) {
        out += '\t';
        out += *t.pos;
      }
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

// Replaces the NORM column with predictions, keeping ORIG/LID/POS.
inline Dataset with_norms(Dataset d, const TokenTable& norms) {
  if (norms.size() != d.sentences.size()) throw InvalidArgument("prediction/sentence count mismatch");
  for (std::size_t i = 0; i < norms.size(); ++i) {
    if (norms[i].size() != d.sentences[i].size()) throw InvalidArgument("prediction/token count mismatch");
    for (std::size_t j = 0; j < norms[i].size(); ++j) d.sentences[i].tokens[j].norm = norms[i][j];
  }
  return d;
}

inline TokenTable norm_table(const Dataset& d) {
  TokenTable t;
  for (const auto& s : d.sentences) t.push_back(s.norms());
  return t;
}

// ---------------------------------------------------------------------------
// Statistics

struct CorpusStats {
  std::size_t n_words = 0;
  double pct_norm = 0;
  double pct_split = 0;
  double pct_merge = 0;
  std::optional<double> cmi;
};

// Code-mixing index of one sentence: 100 * (N - max_i t_i) / N over the two
// content languages, UN excluded; 0 when no content-language token exists.
inline double cmi(std::span<const std::string> labels, const LanguagePair& langs = {}) {
  if (labels.empty()) throw InvalidArgument("cmi of empty label sequence");
  std::size_t first = 0, second = 0;
  for (const auto& l : labels) {
    if (l == langs.first) ++first;
    else if (l == langs.second) ++second;
    else if (l != kUnknownLabel) throw InvalidArgument("cmi expects coarse labels, got " + l);
  }
  const std::size_t n = first + second;
  if (n == 0) return 0.0;
  return 100.0 * static_cast<double>(n - std::max(first, second)) / static_cast<double>(n);
}

inline CorpusStats compute_stats(const Dataset& d, bool with_cmi = true) {
  CorpusStats st;
  std::size_t normed = 0, split = 0, merged = 0;
  double cmi_sum = 0;
  for (const auto& s : d.sentences) {
    std::vector<std::string> labels;
    for (const auto& t : s.tokens) {
      ++st.n_words;
      if (t.is_normalized()) ++normed;
      if (t.is_split()) ++split;
      if (t.is_merge_continuation()) ++merged;
      if (with_cmi) {
        if (!t.lid) throw InvalidArgument("CMI requested but token '" + t.orig + "' has no LID label");
        labels.push_back(d.label_scheme == LabelScheme::fine ? map_labels_coarse(*t.lid, d.languages) : *t.lid);
      }
    }
    if (with_cmi) cmi_sum += cmi(labels, d.languages);
  }
  if (st.n_words) {
    const double n = static_cast<double>(st.n_words);
    st.pct_norm = 100.0 * static_cast<double>(normed) / n;
    st.pct_split = 100.0 * static_cast<double>(split) / n;
    st.pct_merge = 100.0 * static_cast<double>(merged) / n;
  }
  if (with_cmi) st.cmi = d.sentences.empty() ? 0.0 : cmi_sum / static_cast<double>(d.sentences.size());
  return st;
}

// ---------------------------------------------------------------------------
// Splits

struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignment;  // sentence index -> fold id
  std::uint64_t seed = 0;

  std::vector<std::size_t> test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (assignment[i] == fold) out.push_back(i);
    return out;
  }
  std::vector<std::size_t> train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (assignment[i] != fold) out.push_back(i);
    return out;
  }

  bool operator==(const FoldPlan&) const = default;
};

inline FoldPlan make_folds(const Dataset& d, std::size_t k, std::uint64_t seed) {
  const std::size_t n = d.sentences.size();
  if (k < 2) throw InvalidArgument("fold count must be at least 2");
  if (k > n) throw InvalidArgument("fold count " + std::to_string(k) + " exceeds sentence count " + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  FoldPlan plan{k, std::vector<std::size_t>(n), seed};
  for (std::size_t pos = 0; pos < n; ++pos) plan.assignment[order[pos]] = pos % k;
  return plan;
}

// Sentence-level split; both halves keep corpus order.
inline std::pair<Dataset, Dataset> train_test_split(const Dataset& d, double test_ratio, std::uint64_t seed) {
  if (!(test_ratio > 0.0 && test_ratio < 1.0)) throw InvalidArgument("test ratio must be in (0, 1)");
  const std::size_t n = d.sentences.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  auto n_test = static_cast<std::size_t>(std::llround(test_ratio * static_cast<double>(n)));
  std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {d.subset(train), d.subset(test)};
}

// ---------------------------------------------------------------------------
// Tag projection through segmentation merges

struct Segment {
  std::string form;
  std::string lid;
  std::string pos;
};

// Ordered POS pair -> merged POS. Consulted left to right while folding
// segments; pairs not listed take the later segment's tag.
using PosMergeExceptions = std::map<std::pair<std::string, std::string>, std::string>;

inline std::pair<std::string, std::string> project_tags_merge(std::span<const Segment> segments,
                                                              const PosMergeExceptions& exceptions = {}) {
  if (segments.empty()) throw InvalidArgument("project_tags_merge needs at least one segment");
  std::string pos = segments.front().pos;
  bool same_lid = true;
  for (std::size_t i = 1; i < segments.size(); ++i) {
    same_lid = same_lid && segments[i].lid == segments.front().lid;
    auto it = exceptions.find({pos, segments[i].pos});
    pos = it != exceptions.end() ? it->second : segments[i].pos;
  }
  return {same_lid ? segments.front().lid : std::string("Mixed"), pos};
}

}  // namespace csnorm
