#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace conjnli {

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline bool has_alpha(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isalpha(c); });
}

// First alphabetic character upper-case ("Worcester", "McCain", "F").
inline bool is_title_case(std::string_view s) {
  for (unsigned char c : s)
    if (std::isalpha(c)) return std::isupper(c) != 0;
  return false;
}

inline std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

namespace detail {

inline bool attaches_left(std::string_view tok) {
  static constexpr std::array<std::string_view, 13> kLeft = {
      ",", ".", ":", ";", "'", "''", "%", "!", "?", ")", "]", "}", "n't"};
  if (std::find(kLeft.begin(), kLeft.end(), tok) != kLeft.end()) return true;
  // Clitics such as 's, 're, 've.
  return tok.size() > 1 && tok.front() == '\'' && std::isalpha(static_cast<unsigned char>(tok[1]));
}

inline bool opens(std::string_view tok) {
  return tok == "(" || tok == "[" || tok == "{" || tok == "``";
}

inline bool is_trailing_punct(char c) {
  return c == ',' || c == '.' || c == ';' || c == ':' || c == '!' || c == '?' || c == ')' ||
         c == ']' || c == '}' || c == '"';
}

inline bool is_leading_punct(char c) { return c == '(' || c == '[' || c == '{' || c == '"'; }

}  // namespace detail

// Joins tokens with single spaces, except no space before closing punctuation
// and clitics and none after opening brackets.
inline std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  bool suppress_next = true;
  for (const auto& tok : tokens) {
    if (tok.empty()) continue;
    if (!suppress_next && !detail::attaches_left(tok)) out.push_back(' ');
    out += tok;
    suppress_next = detail::opens(tok);
  }
  return out;
}

inline std::string detokenize(std::string_view text) { return detokenize(split_whitespace(text)); }

// Light word tokenizer for raw sentence text: splits leading/trailing
// punctuation and the n't clitic off whitespace-separated chunks.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (std::string chunk : split_whitespace(text)) {
    std::vector<std::string> trailing;
    std::size_t lead = 0;
    while (lead < chunk.size() && chunk.size() - lead > 1 && detail::is_leading_punct(chunk[lead])) {
      out.emplace_back(1, chunk[lead]);
      ++lead;
    }
    chunk.erase(0, lead);
    while (chunk.size() > 1 && detail::is_trailing_punct(chunk.back())) {
      trailing.emplace_back(1, chunk.back());
      chunk.pop_back();
    }
    const std::string lower = to_lower(chunk);
    if (lower.size() > 3 && lower.ends_with("n't")) {
      out.push_back(chunk.substr(0, chunk.size() - 3));
      out.push_back(chunk.substr(chunk.size() - 3));
    } else if (lower.size() > 2 && lower.ends_with("'s")) {
      out.push_back(chunk.substr(0, chunk.size() - 2));
      out.push_back(chunk.substr(chunk.size() - 2));
    } else {
      out.push_back(chunk);
    }
    out.insert(out.end(), trailing.rbegin(), trailing.rend());
  }
  return out;
}

}  // namespace conjnli
