#pragma once

#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>

#include "conjnli/error.hpp"

namespace conjnli {

enum class Label { Entailment = 0, Neutral = 1, Contradiction = 2 };

inline constexpr std::array<Label, 3> kAllLabels = {
    Label::Entailment, Label::Neutral, Label::Contradiction};

inline constexpr std::size_t label_index(Label l) { return static_cast<std::size_t>(l); }

inline std::string_view to_string(Label l) {
  switch (l) {
    case Label::Entailment: return "entailment";
    case Label::Neutral: return "neutral";
    case Label::Contradiction: return "contradiction";
  }
  return "neutral";
}

// Accepts the full names plus the short forms used in annotation tooling.
inline std::optional<Label> try_parse_label(std::string_view s) {
  std::string lower;
  for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "entailment" || lower == "ent" || lower == "e") return Label::Entailment;
  if (lower == "neutral" || lower == "neu" || lower == "n") return Label::Neutral;
  if (lower == "contradiction" || lower == "contra" || lower == "c") return Label::Contradiction;
  return std::nullopt;
}

inline Label parse_label(std::string_view s) {
  if (auto l = try_parse_label(s)) return *l;
  throw Error("unknown label '" + std::string(s) + "'");
}

}  // namespace conjnli
