#pragma once

// Projecting LID/POS from morphological segments onto normalized words and
// from there onto the original tokens.
//
// Segment file: one segment per line, FORM TAB LID TAB POS [TAB +]; a
// trailing "+" joins the segment to the previous one (same normalized word).
// Blank lines end sentences.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csnorm/align.hpp"
#include "csnorm/corpus.hpp"
#include "csnorm/error.hpp"
#include "csnorm/unicode.hpp"

namespace csnorm {

// Segments grouped per normalized word, per sentence.
using SegmentedSentence = std::vector<std::vector<Segment>>;

inline std::vector<SegmentedSentence> parse_segment_file(std::string_view text) {
  std::vector<SegmentedSentence> out;
  SegmentedSentence cur;
  std::size_t line_no = 0, start = 0;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (line.find('\r') != std::string_view::npos) throw FormatError("CR line ending", line_no);
    if (line.empty()) {
      flush();
      if (end == text.size()) break;
      continue;
    }
    auto f = detail::split_tabs(line);
    if (f.size() < 3 || f.size() > 4) throw FormatError("expected 3 or 4 TAB-separated fields", line_no);
    for (std::size_t i = 0; i < 3; ++i)
      if (f[i].empty()) throw FormatError("empty field", line_no);
    const bool join = f.size() == 4;
    if (join && f[3] != "+") throw FormatError("fourth field must be '+'", line_no);
    Segment s{unicode::nfc(f[0]), std::string(f[1]), std::string(f[2])};
    if (join) {
      if (cur.empty()) throw FormatError("join marker on the first segment of a sentence", line_no);
      cur.back().push_back(std::move(s));
    } else {
      cur.push_back({std::move(s)});
    }
    if (end == text.size()) break;
  }
  flush();
  return out;
}

// Fills LID and POS of every token of `d` from segmented normalized words.
// Segments merge into one (LID, POS) per normalized word; a token with
// several normalized words merges their tags the same way, and tokens merged
// into one normalized word each receive its tags.
inline Dataset project_tags(Dataset d, std::span<const SegmentedSentence> segs,
                            const PosMergeExceptions& exceptions = {}) {
  if (segs.size() != d.sentences.size())
    throw InvalidArgument("segment file has " + std::to_string(segs.size()) + " sentences, norm file has " +
                          std::to_string(d.sentences.size()));
  for (std::size_t i = 0; i < segs.size(); ++i) {
    auto& sent = d.sentences[i];
    const auto al = output_alignment(sent.norms());
    if (al.words.size() != segs[i].size())
      throw InvalidArgument("sentence " + std::to_string(i + 1) + ": " + std::to_string(segs[i].size()) +
                            " segmented words for " + std::to_string(al.words.size()) + " normalized words");
    std::vector<Segment> word_tags;
    for (const auto& w : segs[i]) {
      auto [lid, pos] = project_tags_merge(w, exceptions);
      word_tags.push_back({"", lid, pos});
    }
    for (const auto& l : al.links) {
      std::span<const Segment> span(word_tags.data() + l.tgt_begin, l.tgt_end - l.tgt_begin);
      auto [lid, pos] = project_tags_merge(span, exceptions);
      for (std::size_t t = l.src_begin; t < l.src_end; ++t) {
        sent.tokens[t].lid = lid;
        sent.tokens[t].pos = pos;
      }
    }
  }
  d.label_scheme = detail::detect_scheme(d.sentences, d.languages);
  return d;
}

}  // namespace csnorm
