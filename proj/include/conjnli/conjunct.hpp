#pragma once

// Coordinating conjunctions, their flanking conjuncts, and sentence-level
// conjunction/quantifier/negation features.

#include <algorithm>
#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "conjnli/error.hpp"
#include "conjnli/text.hpp"
#include "conjnli/treebank.hpp"
#include "conjnli/util/jsonl.hpp"

namespace conjnli {

inline constexpr std::array<std::string_view, 4> kConjunctionWords = {"and", "or", "but", "nor"};

inline bool is_conjunction_word(std::string_view token) {
  const std::string lower = to_lower(token);
  return std::find(kConjunctionWords.begin(), kConjunctionWords.end(), lower) != kConjunctionWords.end();
}

// Reporting bucket for a conjunction word; "nor" is grouped with "or".
inline std::string_view conjunction_bucket(std::string_view word) {
  return word == "nor" ? std::string_view("or") : word;
}

struct Lexicons {
  std::set<std::string> quantifiers{"all", "every", "each", "some", "any", "most", "few",
                                    "many", "several", "both", "no", "none", "total"};
  std::set<std::string> negations{"not", "n't", "no", "never", "none", "nor", "neither"};

  // Keys "quantifiers" and "negations"; absent keys keep the defaults.
  static Lexicons from_json(const util::ordered_json& j) {
    Lexicons lex;
    auto load = [&](const char* key, std::set<std::string>& into) {
      if (!j.contains(key)) return;
      into.clear();
      for (const auto& w : j.at(key)) into.insert(to_lower(w.get<std::string>()));
    };
    load("quantifiers", lex.quantifiers);
    load("negations", lex.negations);
    return lex;
  }
};

// Where in_named_entity came from. Capitalization is the heuristic fallback.
enum class EntitySource { None, Ner, Capitalization };

inline std::string_view to_string(EntitySource s) {
  switch (s) {
    case EntitySource::Ner: return "ner";
    case EntitySource::Capitalization: return "capitalization";
    case EntitySource::None: break;
  }
  return "none";
}

struct CoordinationInstance {
  std::string conj_word;
  std::size_t conj_index = 0;
  Span left_conjunct;
  Span right_conjunct;
  std::string left_label;
  std::string right_label;
  std::string parent_label;
  bool negated = false;
  bool in_named_entity = false;
  EntitySource entity_source = EntitySource::None;
  // Span of the clause used as negation scope.
  Span negation_scope;

  friend bool operator==(const CoordinationInstance&, const CoordinationInstance&) = default;
};

struct CoordinationWarning {
  std::string source_id;
  std::size_t conj_index = 0;
  std::string conj_word;
  std::string reason;
};

struct CoordinationResult {
  std::vector<CoordinationInstance> instances;
  std::vector<CoordinationWarning> warnings;
};

struct SentenceFeatures {
  std::size_t conjunction_count = 0;
  bool has_quantifier = false;
  bool has_negation = false;
  std::set<std::string> conjunction_types;

  bool multiple() const { return conjunction_count >= 2; }
};

inline SentenceFeatures detect_features(const std::vector<std::string>& tokens,
                                        const Lexicons& lex = {}) {
  SentenceFeatures f;
  for (const auto& tok : tokens) {
    const std::string lower = to_lower(tok);
    if (is_conjunction_word(lower)) {
      ++f.conjunction_count;
      f.conjunction_types.insert(lower);
    }
    if (lex.quantifiers.count(lower)) f.has_quantifier = true;
    if (lex.negations.count(lower)) f.has_negation = true;
  }
  return f;
}

inline SentenceFeatures detect_features(const Sentence& s, const Lexicons& lex = {}) {
  return detect_features(s.tokens, lex);
}

namespace detail {

inline bool is_punctuation_label(std::string_view label) {
  return label == "," || label == "." || label == ":";
}

inline bool is_clause_label(std::string_view base) { return !base.empty() && base.front() == 'S'; }

// Head category of a conjunct: the last nominal leaf, else the last leaf.
inline std::string_view head_category(const ParseNode& n) {
  if (n.is_leaf()) return n.label();
  const ParseNode* last = nullptr;
  const ParseNode* last_nominal = nullptr;
  std::vector<const ParseNode*> stack{&n};
  while (!stack.empty()) {
    const ParseNode* cur = stack.back();
    stack.pop_back();
    if (cur->is_leaf()) {
      if (!last || cur->span().start > last->span().start) last = cur;
      if (label_base(cur->label()).starts_with("NN") &&
          (!last_nominal || cur->span().start > last_nominal->span().start))
        last_nominal = cur;
      continue;
    }
    for (const auto& c : cur->children()) stack.push_back(&c);
  }
  return last_nominal ? last_nominal->label() : last->label();
}

inline std::pair<std::string, std::string> split_bio(std::string_view tag) {
  if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-')
    return {std::string(1, tag[0]), std::string(tag.substr(2))};
  return {std::string(tag), ""};
}

// True iff tokens [from, to) lie inside a single mention of the BIO tagging.
inline bool single_mention(const std::vector<std::string>& ner, std::size_t from, std::size_t to) {
  const auto [first_prefix, type] = split_bio(ner[from]);
  if (type.empty()) return false;
  for (std::size_t t = from + 1; t < to; ++t) {
    const auto [prefix, ty] = split_bio(ner[t]);
    if (prefix != "I" || ty != type) return false;
  }
  return true;
}

}  // namespace detail

// One instance per and/or/but/nor CC leaf with a non-punctuation sibling on
// each side; conjuncts are the nearest such siblings under the same parent.
inline CoordinationResult find_coordinations(const ParseNode& tree, const Sentence& sentence,
                                             const Lexicons& lex = {}) {
  if (yield_tokens(tree) != sentence.tokens)
    throw Error("tree yield does not match sentence tokens for '" + sentence.source_id + "'");
  validate(sentence);

  CoordinationResult result;
  std::vector<const ParseNode*> ancestors;

  auto visit = [&](auto&& self, const ParseNode& node) -> void {
    if (node.is_leaf()) return;
    ancestors.push_back(&node);
    const auto& kids = node.children();
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const ParseNode& cc = kids[i];
      if (!cc.is_leaf() || cc.base_label() != "CC") continue;
      const std::string word = to_lower(*cc.token());
      if (!is_conjunction_word(word)) continue;

      std::optional<std::size_t> left, right;
      for (std::size_t j = i; j-- > 0;)
        if (!detail::is_punctuation_label(kids[j].base_label())) {
          left = j;
          break;
        }
      for (std::size_t j = i + 1; j < kids.size(); ++j)
        if (!detail::is_punctuation_label(kids[j].base_label())) {
          right = j;
          break;
        }
      const std::size_t conj_index = cc.span().start;
      if (!left || !right) {
        result.warnings.push_back({sentence.source_id, conj_index, word,
                                   !left ? "no left conjunct sibling" : "no right conjunct sibling"});
        continue;
      }

      CoordinationInstance inst;
      inst.conj_word = word;
      inst.conj_index = conj_index;
      inst.left_conjunct = kids[*left].span();
      inst.right_conjunct = kids[*right].span();
      inst.left_label = kids[*left].label();
      inst.right_label = kids[*right].label();
      inst.parent_label = node.label();

      const ParseNode* clause = ancestors.front();
      for (auto it = ancestors.rbegin(); it != ancestors.rend(); ++it)
        if (detail::is_clause_label((*it)->base_label())) {
          clause = *it;
          break;
        }
      inst.negation_scope = clause->span();
      for (std::size_t t = clause->span().start; t < conj_index; ++t)
        if (lex.negations.count(to_lower(sentence.tokens[t]))) inst.negated = true;

      if (sentence.ner) {
        inst.in_named_entity =
            detail::single_mention(*sentence.ner, inst.left_conjunct.start, inst.right_conjunct.end);
        inst.entity_source = EntitySource::Ner;
      } else {
        bool capitalized = node.base_label() == "NP";
        for (const Span sp : {inst.left_conjunct, inst.right_conjunct})
          for (std::size_t t = sp.start; t < sp.end && capitalized; ++t)
            if (has_alpha(sentence.tokens[t]) && !is_title_case(sentence.tokens[t])) capitalized = false;
        capitalized = capitalized &&
                      label_base(detail::head_category(kids[*left])).starts_with("NNP") &&
                      label_base(detail::head_category(kids[*right])).starts_with("NNP");
        inst.in_named_entity = capitalized;
        inst.entity_source = EntitySource::Capitalization;
      }
      result.instances.push_back(std::move(inst));
    }
    for (const auto& c : kids) self(self, c);
    ancestors.pop_back();
  };
  visit(visit, tree);

  std::sort(result.instances.begin(), result.instances.end(),
            [](const auto& a, const auto& b) { return a.conj_index < b.conj_index; });
  return result;
}

inline std::string join_span(const std::vector<std::string>& tokens, Span sp) {
  return detokenize(std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(sp.start),
                                             tokens.begin() + static_cast<std::ptrdiff_t>(sp.end)));
}

// JSON-lines record for the extract command.
inline util::ordered_json to_json(const CoordinationInstance& c, const Sentence& s) {
  util::ordered_json j;
  j["source_id"] = s.source_id;
  j["sentence"] = s.text();
  j["conj_word"] = c.conj_word;
  j["conj_index"] = c.conj_index;
  j["left_conjunct"] = span_to_json(c.left_conjunct);
  j["right_conjunct"] = span_to_json(c.right_conjunct);
  j["left_text"] = join_span(s.tokens, c.left_conjunct);
  j["right_text"] = join_span(s.tokens, c.right_conjunct);
  j["left_label"] = c.left_label;
  j["right_label"] = c.right_label;
  j["parent_label"] = c.parent_label;
  j["negated"] = c.negated;
  j["negation_scope_rule"] = "smallest-clause-ancestor";
  j["in_named_entity"] = c.in_named_entity;
  j["named_entity_source"] = to_string(c.entity_source);
  return j;
}

}  // namespace conjnli
