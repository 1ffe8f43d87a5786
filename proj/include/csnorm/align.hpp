#pragma once

// Monotone token alignment between an original token sequence and its
// normalization. Each link is 1:1, 1:n or n:1; the cost of a link is the
// Levenshtein distance between the concatenated span forms, and the total
// cost is minimized exactly by dynamic programming.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "csnorm/corpus.hpp"
#include "csnorm/error.hpp"
#include "csnorm/unicode.hpp"

namespace csnorm {

enum class LinkKind { one_to_one, one_to_many, many_to_one };

struct AlignmentLink {
  std::size_t src_begin = 0, src_end = 0;  // half-open
  std::size_t tgt_begin = 0, tgt_end = 0;
  LinkKind kind = LinkKind::one_to_one;

  bool operator==(const AlignmentLink&) const = default;
};

inline const char* to_string(LinkKind k) {
  switch (k) {
    case LinkKind::one_to_one: return "1:1";
    case LinkKind::one_to_many: return "1:n";
    case LinkKind::many_to_one: return "n:1";
  }
  return "?";
}

namespace detail {

// Link shapes in tie-break preference order: 1:1, 1:2, 2:1, 1:3, 3:1, ...
// Spans are capped at max(4, ceil(longer/shorter)), which keeps every pair
// of non-empty sequences alignable.
inline std::vector<std::pair<std::size_t, std::size_t>> link_shapes(std::size_t n_src, std::size_t n_tgt) {
  std::vector<std::pair<std::size_t, std::size_t>> shapes{{1, 1}};
  const std::size_t lo = std::min(n_src, n_tgt), hi = std::max(n_src, n_tgt);
  const std::size_t cap = std::max<std::size_t>(4, (hi + lo - 1) / lo);
  for (std::size_t k = 2; k <= std::min(hi, cap); ++k) {
    if (k <= n_tgt) shapes.emplace_back(1, k);
    if (k <= n_src) shapes.emplace_back(k, 1);
  }
  return shapes;
}

inline std::u32string concat_span(std::span<const std::u32string> toks, std::size_t begin, std::size_t end) {
  std::u32string s;
  for (std::size_t i = begin; i < end; ++i) s += toks[i];
  return s;
}

}  // namespace detail

struct Alignment {
  std::vector<AlignmentLink> links;
  std::size_t cost = 0;
};

inline Alignment align_tokens_with_cost(std::span<const std::string> src, std::span<const std::string> tgt) {
  if (src.empty() || tgt.empty()) throw InvalidArgument("align_tokens needs non-empty sequences");
  const std::size_t n = src.size(), m = tgt.size();
  std::vector<std::u32string> s, t;
  for (const auto& w : src) s.push_back(unicode::to_code_points(w));
  for (const auto& w : tgt) t.push_back(unicode::to_code_points(w));

  const auto shapes = detail::link_shapes(n, m);
  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
  // cost[i][j]: best cost aligning src[0,i) with tgt[0,j).
  std::vector<std::vector<std::size_t>> cost(n + 1, std::vector<std::size_t>(m + 1, kInf));
  auto link_cost = [&](std::size_t i, std::size_t j, std::size_t a, std::size_t b) {
    return unicode::levenshtein(detail::concat_span(s, i - a, i), detail::concat_span(t, j - b, j));
  };
  cost[0][0] = 0;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      for (auto [a, b] : shapes) {
        if (a > i || b > j || cost[i - a][j - b] == kInf) continue;
        auto c = cost[i - a][j - b] + link_cost(i, j, a, b);
        if (c < cost[i][j]) cost[i][j] = c;
      }

  Alignment out;
  out.cost = cost[n][m];
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    bool moved = false;
    for (auto [a, b] : shapes) {
      if (a > i || b > j || cost[i - a][j - b] == kInf) continue;
      if (cost[i - a][j - b] + link_cost(i, j, a, b) != cost[i][j]) continue;
      LinkKind kind = a == 1 && b == 1 ? LinkKind::one_to_one : a == 1 ? LinkKind::one_to_many : LinkKind::many_to_one;
      out.links.push_back({i - a, i, j - b, j, kind});
      i -= a;
      j -= b;
      moved = true;
      break;
    }
    if (!moved) throw Error("alignment backtrace failed");
  }
  std::reverse(out.links.begin(), out.links.end());
  return out;
}

inline std::vector<AlignmentLink> align_tokens(std::span<const std::string> src, std::span<const std::string> tgt) {
  return align_tokens_with_cost(src, tgt).links;
}

// Encodes an alignment as norm-file tokens: 1:n joins target words with a
// space, n:1 puts the target on the first source token and the merge marker
// on the rest.
inline Sentence alignment_to_sentence(std::span<const std::string> src, std::span<const std::string> tgt,
                                      std::span<const AlignmentLink> links) {
  Sentence out;
  for (const auto& l : links) {
    std::string joined;
    for (std::size_t j = l.tgt_begin; j < l.tgt_end; ++j) {
      if (!joined.empty()) joined += ' ';
      joined += tgt[j];
    }
    for (std::size_t i = l.src_begin; i < l.src_end; ++i)
      out.tokens.push_back({src[i], i == l.src_begin ? joined : std::string(kMergeMarker), std::nullopt, std::nullopt});
  }
  return out;
}

// Recovers the (source token -> output words) links implied by per-token
// normalizations: spaces split a norm into several words, merge markers
// attach a token to the preceding group.
struct OutputAlignment {
  std::vector<std::string> words;
  std::vector<AlignmentLink> links;
};

inline OutputAlignment output_alignment(std::span<const std::string> norms) {
  OutputAlignment out;
  for (std::size_t i = 0; i < norms.size(); ++i) {
    if (norms[i] == kMergeMarker) {
      if (out.links.empty()) throw InvalidArgument("merge marker at sentence start");
      auto& l = out.links.back();
      l.src_end = i + 1;
      l.kind = LinkKind::many_to_one;
      continue;
    }
    std::size_t begin = out.words.size();
    std::size_t start = 0;
    while (true) {
      auto pos = norms[i].find(' ', start);
      out.words.push_back(norms[i].substr(start, pos == std::string::npos ? std::string::npos : pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    std::size_t end = out.words.size();
    out.links.push_back({i, i + 1, begin, end, end - begin > 1 ? LinkKind::one_to_many : LinkKind::one_to_one});
  }
  return out;
}

}  // namespace csnorm
