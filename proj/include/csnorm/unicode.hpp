#pragma once

// UTF-8 helpers backed by ICU: NFC normalization, locale-aware case mapping,
// character classes, and code-point Levenshtein distance.

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "csnorm/error.hpp"

namespace csnorm::unicode {

inline std::u32string to_code_points(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  int32_t i = 0;
  const auto len = static_cast<int32_t>(s.size());
  while (i < len) {
    UChar32 c;
    U8_NEXT(p, i, len, c);
    if (c < 0) throw FormatError("invalid UTF-8 sequence");
    out.push_back(static_cast<char32_t>(c));
  }
  return out;
}

inline std::string from_code_points(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t c : cps) {
    uint8_t buf[4];
    int32_t n = 0;
    UBool err = false;
    U8_APPEND(buf, n, 4, static_cast<UChar32>(c), err);
    if (err) throw FormatError("invalid code point");
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
  }
  return out;
}

inline bool is_valid_utf8(std::string_view s) {
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  int32_t i = 0;
  const auto len = static_cast<int32_t>(s.size());
  while (i < len) {
    UChar32 c;
    U8_NEXT(p, i, len, c);
    if (c < 0) return false;
  }
  return true;
}

inline std::string nfc(std::string_view s) {
  bool ascii = std::all_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
  if (ascii) return std::string(s);
  if (!is_valid_utf8(s)) throw FormatError("invalid UTF-8 sequence");
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  icu::UnicodeString src = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  icu::UnicodeString dst = norm->normalize(src, status);
  if (U_FAILURE(status)) throw FormatError("NFC normalization failed");
  std::string out;
  dst.toUTF8String(out);
  return out;
}

// Language labels are upper-case codes ("TR", "DE"); ICU wants "tr", "de".
inline icu::Locale locale_for(std::string_view language) {
  std::string code(language);
  for (auto& c : code) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (code.empty()) return icu::Locale::getRoot();
  return icu::Locale(code.c_str());
}

inline std::string lowercase(std::string_view s, std::string_view language = {}) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u.toLower(locale_for(language));
  std::string out;
  u.toUTF8String(out);
  return out;
}

inline std::string uppercase(std::string_view s, std::string_view language = {}) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u.toUpper(locale_for(language));
  std::string out;
  u.toUTF8String(out);
  return out;
}

// Upper-cases the first code point, leaves the rest untouched.
inline std::string capitalize_first(std::string_view s, std::string_view language = {}) {
  if (s.empty()) return {};
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  int32_t i = 0;
  UChar32 c;
  U8_NEXT(p, i, static_cast<int32_t>(s.size()), c);
  if (c < 0) throw FormatError("invalid UTF-8 sequence");
  return uppercase(s.substr(0, static_cast<std::size_t>(i)), language) + std::string(s.substr(static_cast<std::size_t>(i)));
}

inline bool has_alpha(std::string_view s) {
  for (char32_t c : to_code_points(s))
    if (u_isalpha(static_cast<UChar32>(c))) return true;
  return false;
}

inline bool starts_upper(std::string_view s) {
  auto cps = to_code_points(s);
  if (cps.empty()) return false;
  auto c = static_cast<UChar32>(cps.front());
  return u_isupper(c) || u_istitle(c);
}

inline bool has_upper(std::string_view s) {
  for (char32_t c : to_code_points(s))
    if (u_isupper(static_cast<UChar32>(c)) || u_istitle(static_cast<UChar32>(c))) return true;
  return false;
}

inline bool all_digits(std::string_view s) {
  auto cps = to_code_points(s);
  return !cps.empty() && std::all_of(cps.begin(), cps.end(), [](char32_t c) { return u_isdigit(static_cast<UChar32>(c)); });
}

inline bool all_punct(std::string_view s) {
  auto cps = to_code_points(s);
  return !cps.empty() && std::all_of(cps.begin(), cps.end(), [](char32_t c) {
    auto u = static_cast<UChar32>(c);
    return u_ispunct(u) || (u_charType(u) == U_MATH_SYMBOL) || (u_charType(u) == U_OTHER_SYMBOL);
  });
}

inline bool has_non_ascii(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) >= 0x80; });
}

inline bool has_whitespace(std::string_view s) {
  for (char32_t c : to_code_points(s))
    if (u_isUWhiteSpace(static_cast<UChar32>(c))) return true;
  return false;
}

// Coarse word shape: upper -> X, lower -> x, digit -> d, other kept; runs collapsed.
inline std::string word_shape(std::string_view s) {
  std::u32string shape;
  for (char32_t c : to_code_points(s)) {
    auto u = static_cast<UChar32>(c);
    char32_t m = c;
    if (u_isupper(u) || u_istitle(u)) m = U'X';
    else if (u_islower(u) || u_isalpha(u)) m = U'x';
    else if (u_isdigit(u)) m = U'd';
    if (shape.empty() || shape.back() != m) shape.push_back(m);
  }
  return from_code_points(shape);
}

inline std::size_t length(std::string_view s) { return to_code_points(s).size(); }

inline std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t up = row[j];
      std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  return levenshtein(std::u32string_view(to_code_points(a)), std::u32string_view(to_code_points(b)));
}

}  // namespace csnorm::unicode
