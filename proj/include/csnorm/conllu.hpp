#pragma once

// Minimal CoNLL-U reader: keeps FORM and UPOS of syntactic words.

#include <string>
#include <string_view>
#include <vector>

#include "csnorm/corpus.hpp"
#include "csnorm/error.hpp"
#include "csnorm/unicode.hpp"

namespace csnorm {

namespace detail {

inline bool all_ascii_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace detail

inline Dataset parse_conllu(std::string_view text) {
  Dataset d;
  Sentence current;
  std::size_t line_no = 0, start = 0;
  auto flush = [&] {
    if (!current.tokens.empty()) d.sentences.push_back(std::move(current));
    current = Sentence{};
  };
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') continue;

    auto cols = detail::split_tabs(line);
    if (cols.size() != 10) throw FormatError("expected 10 CoNLL-U columns, got " + std::to_string(cols.size()), line_no);
    auto id = cols[0];
    if (auto dash = id.find('-'); dash != std::string_view::npos) {
      if (!detail::all_ascii_digits(id.substr(0, dash)) || !detail::all_ascii_digits(id.substr(dash + 1)))
        throw FormatError("malformed range ID '" + std::string(id) + "'", line_no);
      continue;  // multiword token line; its parts follow
    }
    if (auto dot = id.find('.'); dot != std::string_view::npos) {
      if (!detail::all_ascii_digits(id.substr(0, dot)) || !detail::all_ascii_digits(id.substr(dot + 1)))
        throw FormatError("malformed empty-node ID '" + std::string(id) + "'", line_no);
      continue;  // empty node
    }
    if (!detail::all_ascii_digits(id)) throw FormatError("non-integer token ID '" + std::string(id) + "'", line_no);

    std::string form = unicode::nfc(cols[1]);
    for (auto& c : form)
      if (c == ' ') c = '_';
    if (form.empty()) throw FormatError("empty FORM", line_no);
    Token t{form, form, std::nullopt, std::string(cols[3])};
    current.tokens.push_back(std::move(t));
  }
  flush();
  return d;
}

}  // namespace csnorm
