#pragma once

// Candidate NLI pairs from conjunct edits: remove, add (the swapped removal),
// replace, and the either-or probe rewrite.

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "conjnli/conjunct.hpp"
#include "conjnli/error.hpp"
#include "conjnli/label.hpp"
#include "conjnli/text.hpp"
#include "conjnli/treebank.hpp"
#include "conjnli/util/jsonl.hpp"
#include "conjnli/util/random.hpp"

namespace conjnli {

enum class Operation { Remove, Add, Replace, EitherOrProbe };
enum class Side { Left, Right };
enum class ReplacementKind { Number, Name, Antonym, CoHyponym };
enum class LabelSource { None, Heuristic, Human };

inline std::string_view to_string(Operation op) {
  switch (op) {
    case Operation::Remove: return "remove";
    case Operation::Add: return "add";
    case Operation::Replace: return "replace";
    case Operation::EitherOrProbe: return "either_or_probe";
  }
  return "remove";
}

inline std::string_view to_string(Side s) { return s == Side::Left ? "left" : "right"; }

inline std::string_view to_string(ReplacementKind k) {
  switch (k) {
    case ReplacementKind::Number: return "number";
    case ReplacementKind::Name: return "name";
    case ReplacementKind::Antonym: return "antonym";
    case ReplacementKind::CoHyponym: return "co-hyponym";
  }
  return "number";
}

inline std::string_view to_string(LabelSource s) {
  switch (s) {
    case LabelSource::Heuristic: return "heuristic";
    case LabelSource::Human: return "human";
    case LabelSource::None: break;
  }
  return "none";
}

inline Operation parse_operation(std::string_view s) {
  if (s == "remove") return Operation::Remove;
  if (s == "add") return Operation::Add;
  if (s == "replace") return Operation::Replace;
  if (s == "either_or_probe") return Operation::EitherOrProbe;
  throw Error("unknown operation '" + std::string(s) + "'");
}

inline LabelSource parse_label_source(std::string_view s) {
  if (s == "heuristic") return LabelSource::Heuristic;
  if (s == "human") return LabelSource::Human;
  if (s == "none") return LabelSource::None;
  throw Error("unknown label source '" + std::string(s) + "'");
}

struct PairFlags {
  bool negated = false;
  bool in_named_entity = false;
  EntitySource entity_source = EntitySource::None;
  SentenceFeatures features;
};

// The full (conjoined) sentence and the coordination the edit applied to.
struct CoordinationRef {
  std::vector<std::string> tokens;
  std::size_t conj_index = 0;
  Span left;
  Span right;
};

struct NliPair {
  std::string id;
  std::string premise;
  std::string hypothesis;
  Operation operation = Operation::Remove;
  std::string conj_word;
  Side side = Side::Left;
  std::optional<ReplacementKind> replacement_kind;
  std::optional<Label> label;
  LabelSource label_source = LabelSource::None;
  std::string source_id;
  PairFlags flags;
  CoordinationRef coordination;
};

struct ReplacementLexicon {
  std::map<std::string, std::string> antonyms;
  std::map<std::string, std::vector<std::string>> co_hyponyms;
  std::vector<std::string> name_pool;

  void validate() const {
    for (const auto& [w, a] : antonyms)
      if (w == a) throw Error("antonym lexicon maps '" + w + "' to itself");
    for (const auto& [w, list] : co_hyponyms)
      for (const auto& c : list)
        if (c == w) throw Error("co-hyponym lexicon maps '" + w + "' to itself");
    for (const auto& n : name_pool)
      if (n.empty()) throw Error("name_pool contains an empty name");
  }

  static ReplacementLexicon from_json(const util::ordered_json& j) {
    ReplacementLexicon lex;
    if (j.contains("antonyms"))
      for (const auto& [k, v] : j.at("antonyms").items()) lex.antonyms[k] = v.get<std::string>();
    if (j.contains("co_hyponyms"))
      for (const auto& [k, v] : j.at("co_hyponyms").items())
        lex.co_hyponyms[k] = v.get<std::vector<std::string>>();
    if (j.contains("name_pool")) lex.name_pool = j.at("name_pool").get<std::vector<std::string>>();
    lex.validate();
    return lex;
  }
};

struct GenerationConfig {
  std::uint64_t seed = 42;
  Lexicons lexicons;
};

struct GenerationWarning {
  std::string source_id;
  std::size_t conj_index = 0;
  std::string reason;
};

struct GenerationResult {
  std::vector<NliPair> pairs;
  std::vector<GenerationWarning> warnings;
};

namespace detail {

inline bool is_comma_junction_punct(std::string_view tok) {
  return tok == "," || tok == "." || tok == ":" || tok == ";" || tok == "!" || tok == "?";
}

// Deletes [from, to) and drops commas left dangling at the junction: a comma
// at sentence start, before other punctuation, or at the end.
inline std::vector<std::string> delete_region(const std::vector<std::string>& tokens, std::size_t from,
                                              std::size_t to) {
  std::vector<std::string> out(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(from));
  out.insert(out.end(), tokens.begin() + static_cast<std::ptrdiff_t>(to), tokens.end());
  std::size_t junction = from;
  bool changed = true;
  while (changed) {
    changed = false;
    if (junction > 0 && out[junction - 1] == "," &&
        (junction == out.size() || is_comma_junction_punct(out[junction]))) {
      out.erase(out.begin() + static_cast<std::ptrdiff_t>(junction - 1));
      --junction;
      changed = true;
    } else if (junction < out.size() && out[junction] == "," &&
               (junction == 0 || is_comma_junction_punct(out[junction - 1]))) {
      out.erase(out.begin() + static_cast<std::ptrdiff_t>(junction));
      changed = true;
    }
  }
  return out;
}

inline bool is_number_token(std::string_view tok) {
  if (tok.empty() || !std::isdigit(static_cast<unsigned char>(tok.front()))) return false;
  if (tok.find(',') == std::string_view::npos)
    return std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); });
  // Comma-grouped: 1-3 leading digits, then groups of exactly three.
  std::size_t first = tok.find(',');
  if (first == 0 || first > 3) return false;
  for (std::size_t i = 0; i < tok.size(); ++i) {
    const bool comma_slot = i >= first && (i - first) % 4 == 0;
    if (comma_slot ? tok[i] != ',' : !std::isdigit(static_cast<unsigned char>(tok[i]))) return false;
  }
  return (tok.size() - first) % 4 == 0;
}

}  // namespace detail

// Adds one to a plain or comma-grouped decimal numeral, keeping its format.
inline std::string increment_number(std::string_view tok) {
  if (!detail::is_number_token(tok)) throw Error("not a number token: '" + std::string(tok) + "'");
  const bool grouped = tok.find(',') != std::string_view::npos;
  std::string digits;
  for (char c : tok)
    if (c != ',') digits.push_back(c);
  std::size_t i = digits.size();
  while (i > 0) {
    --i;
    if (digits[i] == '9') {
      digits[i] = '0';
      if (i == 0) digits.insert(digits.begin(), '1');
    } else {
      ++digits[i];
      break;
    }
  }
  if (!grouped) return digits;
  std::string out;
  const std::size_t lead = digits.size() % 3 == 0 ? 3 : digits.size() % 3;
  out = digits.substr(0, lead);
  for (std::size_t p = lead; p < digits.size(); p += 3) out += "," + digits.substr(p, 3);
  return out;
}

namespace detail {

inline PairFlags flags_for(const Sentence& s, const CoordinationInstance& c, const Lexicons& lex) {
  return PairFlags{c.negated, c.in_named_entity, c.entity_source, detect_features(s, lex)};
}

inline std::string pair_id(const std::string& source_id, std::size_t conj_index, std::string_view what) {
  return source_id + "#" + std::to_string(conj_index) + "/" + std::string(what);
}

inline bool has_content(const std::vector<std::string>& tokens) {
  return std::any_of(tokens.begin(), tokens.end(), [](const std::string& t) {
    return std::any_of(t.begin(), t.end(), [](unsigned char c) { return std::isalnum(c); });
  });
}

}  // namespace detail

// Hypothesis deletes the chosen conjunct and the conjunction token.
inline NliPair remove_conjunct(const Sentence& sentence, const CoordinationInstance& coord, Side side,
                               const Lexicons& lex = {}) {
  const auto& toks = sentence.tokens;
  if (coord.right_conjunct.end > toks.size() || coord.left_conjunct.end > coord.conj_index ||
      coord.conj_index >= coord.right_conjunct.start)
    throw PreconditionError("coordination does not fit sentence '" + sentence.source_id + "'");
  const auto [from, to] = side == Side::Left
                              ? std::pair{coord.left_conjunct.start, coord.conj_index + 1}
                              : std::pair{coord.conj_index, coord.right_conjunct.end};
  auto kept = detail::delete_region(toks, from, to);
  // A sentence-initial deletion promotes the next word to the front.
  if (from == 0 && !kept.empty() && std::isupper(static_cast<unsigned char>(toks[0][0])) &&
      std::islower(static_cast<unsigned char>(kept[0][0])))
    kept[0][0] = static_cast<char>(std::toupper(static_cast<unsigned char>(kept[0][0])));
  if (!detail::has_content(kept))
    throw PreconditionError("removing the " + std::string(to_string(side)) +
                            " conjunct would empty the sentence");

  NliPair p;
  p.id = detail::pair_id(sentence.source_id, coord.conj_index,
                         side == Side::Left ? "remove-left" : "remove-right");
  p.premise = detokenize(toks);
  p.hypothesis = detokenize(kept);
  p.operation = Operation::Remove;
  p.conj_word = coord.conj_word;
  p.side = side;
  p.source_id = sentence.source_id;
  p.flags = detail::flags_for(sentence, coord, lex);
  p.coordination = {toks, coord.conj_index, coord.left_conjunct, coord.right_conjunct};
  return p;
}

// Toggles a Remove pair into its Add mirror and back; the label is cleared.
inline NliPair swap_direction(const NliPair& pair) {
  if (pair.operation != Operation::Remove && pair.operation != Operation::Add)
    throw PreconditionError("only remove/add pairs can be swapped");
  NliPair out = pair;
  std::swap(out.premise, out.hypothesis);
  const bool to_add = pair.operation == Operation::Remove;
  out.operation = to_add ? Operation::Add : Operation::Remove;
  const auto slash = out.id.rfind('/');
  if (slash != std::string::npos) {
    std::string suffix = out.id.substr(slash + 1);
    if (to_add && suffix.starts_with("remove-")) suffix = "add-" + suffix.substr(7);
    if (!to_add && suffix.starts_with("add-")) suffix = "remove-" + suffix.substr(4);
    out.id = out.id.substr(0, slash + 1) + suffix;
  }
  out.label.reset();
  out.label_source = LabelSource::None;
  return out;
}

inline NliPair add_conjunct(const NliPair& pair) {
  if (pair.operation != Operation::Remove)
    throw PreconditionError("add_conjunct expects a remove pair, got '" +
                            std::string(to_string(pair.operation)) + "'");
  return swap_direction(pair);
}

namespace detail {

inline bool is_person_tag(std::string_view tag) {
  const auto [prefix, type] = split_bio(tag);
  return type == "PER" || type == "PERSON";
}

inline std::string match_case(const std::string& replacement, const std::string& original) {
  if (replacement.empty() || original.empty()) return replacement;
  std::string out = replacement;
  if (std::isupper(static_cast<unsigned char>(original.front())))
    out.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(out.front())));
  return out;
}

}  // namespace detail

// Replaces one token of either conjunct; candidates in priority order
// number > name > antonym > co-hyponym, scanning left conjunct then right.
inline NliPair replace_conjunct(const Sentence& sentence, const CoordinationInstance& coord,
                                const ReplacementLexicon& lex, std::uint64_t rng_seed,
                                const Lexicons& features_lex = {}) {
  const auto& toks = sentence.tokens;
  std::vector<std::pair<std::size_t, Side>> positions;
  for (std::size_t t = coord.left_conjunct.start; t < coord.left_conjunct.end; ++t)
    positions.emplace_back(t, Side::Left);
  for (std::size_t t = coord.right_conjunct.start; t < coord.right_conjunct.end; ++t)
    positions.emplace_back(t, Side::Right);

  util::Rng rng(rng_seed, sentence.source_id + "#" + std::to_string(coord.conj_index));
  auto pick_other = [&](const std::vector<std::string>& pool, const std::string& avoid) {
    std::vector<const std::string*> options;
    for (const auto& n : pool)
      if (n != avoid) options.push_back(&n);
    if (options.empty()) throw Error("name pool has no alternative to '" + avoid + "'");
    return *options[rng.below(options.size())];
  };
  auto lookup = [](const auto& map, const std::string& tok) {
    auto it = map.find(tok);
    if (it == map.end()) it = map.find(to_lower(tok));
    return it;
  };

  std::optional<std::size_t> target;
  std::string replacement;
  ReplacementKind kind = ReplacementKind::Number;
  Side side = Side::Left;

  for (const auto& [t, s] : positions)
    if (detail::is_number_token(toks[t])) {
      target = t, side = s, kind = ReplacementKind::Number;
      replacement = increment_number(toks[t]);
      break;
    }
  if (!target) {
    const std::set<std::string> pool(lex.name_pool.begin(), lex.name_pool.end());
    for (const auto& [t, s] : positions) {
      const bool tagged = sentence.ner && detail::is_person_tag((*sentence.ner)[t]);
      if (!tagged && !pool.count(toks[t])) continue;
      if (lex.name_pool.size() < 2 || (pool.size() == 1 && pool.count(toks[t])))
        throw PreconditionError("name replacement needs at least two names in name_pool");
      target = t, side = s, kind = ReplacementKind::Name;
      replacement = pick_other(lex.name_pool, toks[t]);
      break;
    }
  }
  if (!target)
    for (const auto& [t, s] : positions)
      if (auto it = lookup(lex.antonyms, toks[t]); it != lex.antonyms.end()) {
        target = t, side = s, kind = ReplacementKind::Antonym;
        replacement = detail::match_case(it->second, toks[t]);
        break;
      }
  if (!target)
    for (const auto& [t, s] : positions)
      if (auto it = lookup(lex.co_hyponyms, toks[t]); it != lex.co_hyponyms.end()) {
        std::vector<std::string> options;
        for (const auto& c : it->second)
          if (to_lower(c) != to_lower(toks[t])) options.push_back(c);
        if (options.empty()) continue;
        target = t, side = s, kind = ReplacementKind::CoHyponym;
        replacement = detail::match_case(options[rng.below(options.size())], toks[t]);
        break;
      }
  if (!target) throw PreconditionError("no-replacement");

  std::vector<std::string> edited = toks;
  edited[*target] = replacement;

  NliPair p;
  p.id = detail::pair_id(sentence.source_id, coord.conj_index, "replace");
  p.premise = detokenize(toks);
  p.hypothesis = detokenize(edited);
  p.operation = Operation::Replace;
  p.conj_word = coord.conj_word;
  p.side = side;
  p.replacement_kind = kind;
  p.source_id = sentence.source_id;
  p.flags = detail::flags_for(sentence, coord, features_lex);
  p.coordination = {toks, coord.conj_index, coord.left_conjunct, coord.right_conjunct};
  return p;
}

// "A and B" -> "either A or B" on the premise of an entailed "and" removal;
// the rewritten pair is neutral.
inline NliPair either_or_probe(const NliPair& pair) {
  if (pair.operation != Operation::Remove || pair.conj_word != "and" ||
      pair.label != Label::Entailment)
    throw PreconditionError("either-or probe needs an entailment-labeled 'and' removal pair");
  const auto& c = pair.coordination;
  if (c.tokens.empty() || c.conj_index >= c.tokens.size() || c.left.start > c.conj_index)
    throw PreconditionError("either-or probe needs the pair's coordination spans");

  std::vector<std::string> toks;
  toks.reserve(c.tokens.size() + 1);
  for (std::size_t t = 0; t < c.tokens.size(); ++t) {
    if (t == c.left.start) toks.push_back(t == 0 ? "Either" : "either");
    toks.push_back(t == c.conj_index ? "or" : c.tokens[t]);
  }

  NliPair out = pair;
  out.id = pair.id + "/either-or";
  out.premise = detokenize(toks);
  out.operation = Operation::EitherOrProbe;
  out.label = Label::Neutral;
  out.label_source = LabelSource::Heuristic;
  return out;
}

// Remove (both sides), Add (both sides) and Replace when possible, for every
// coordination in the sentence. Per-instance problems become warnings.
inline GenerationResult generate_pairs(const Sentence& sentence, const ParseNode& tree,
                                       const ReplacementLexicon& lex, const GenerationConfig& config) {
  GenerationResult out;
  const auto coords = find_coordinations(tree, sentence, config.lexicons);
  for (const auto& w : coords.warnings) out.warnings.push_back({w.source_id, w.conj_index, w.reason});

  auto keep = [&](NliPair p) {
    if (p.premise == p.hypothesis) {
      out.warnings.push_back({sentence.source_id, p.coordination.conj_index,
                              "hypothesis duplicates premise for " + p.id});
      return;
    }
    out.pairs.push_back(std::move(p));
  };

  for (const auto& c : coords.instances) {
    std::vector<NliPair> removals;
    for (Side side : {Side::Left, Side::Right}) {
      try {
        removals.push_back(remove_conjunct(sentence, c, side, config.lexicons));
      } catch (const PreconditionError& e) {
        out.warnings.push_back({sentence.source_id, c.conj_index, e.what()});
      }
    }
    for (const auto& r : removals) keep(r);
    for (const auto& r : removals) keep(add_conjunct(r));
    try {
      keep(replace_conjunct(sentence, c, lex, config.seed, config.lexicons));
    } catch (const PreconditionError& e) {
      out.warnings.push_back({sentence.source_id, c.conj_index, e.what()});
    }
  }
  return out;
}

inline util::ordered_json to_json(const NliPair& p) {
  util::ordered_json j;
  j["id"] = p.id;
  j["premise"] = p.premise;
  j["hypothesis"] = p.hypothesis;
  j["operation"] = to_string(p.operation);
  j["conj_word"] = p.conj_word;
  j["side"] = to_string(p.side);
  j["replacement_kind"] = p.replacement_kind ? util::ordered_json(to_string(*p.replacement_kind))
                                             : util::ordered_json(nullptr);
  j["label"] = p.label ? util::ordered_json(to_string(*p.label)) : util::ordered_json(nullptr);
  j["label_source"] = to_string(p.label_source);
  j["source_id"] = p.source_id;
  util::ordered_json flags;
  flags["negated"] = p.flags.negated;
  flags["in_named_entity"] = p.flags.in_named_entity;
  flags["named_entity_source"] = to_string(p.flags.entity_source);
  flags["conjunction_count"] = p.flags.features.conjunction_count;
  flags["has_quantifier"] = p.flags.features.has_quantifier;
  flags["has_negation"] = p.flags.features.has_negation;
  flags["conjunction_types"] = p.flags.features.conjunction_types;
  j["flags"] = std::move(flags);
  util::ordered_json coord;
  coord["tokens"] = p.coordination.tokens;
  coord["conj_index"] = p.coordination.conj_index;
  coord["left"] = span_to_json(p.coordination.left);
  coord["right"] = span_to_json(p.coordination.right);
  j["coordination"] = std::move(coord);
  return j;
}

inline NliPair pair_from_json(const util::ordered_json& j) {
  NliPair p;
  p.id = j.value("id", std::string{});
  p.premise = j.at("premise").get<std::string>();
  p.hypothesis = j.at("hypothesis").get<std::string>();
  p.operation = parse_operation(j.at("operation").get<std::string>());
  p.conj_word = j.value("conj_word", std::string{});
  p.side = j.value("side", std::string("left")) == "right" ? Side::Right : Side::Left;
  if (j.contains("replacement_kind") && j["replacement_kind"].is_string()) {
    const auto k = j["replacement_kind"].get<std::string>();
    if (k == "number") p.replacement_kind = ReplacementKind::Number;
    else if (k == "name") p.replacement_kind = ReplacementKind::Name;
    else if (k == "antonym") p.replacement_kind = ReplacementKind::Antonym;
    else if (k == "co-hyponym") p.replacement_kind = ReplacementKind::CoHyponym;
    else throw Error("unknown replacement kind '" + k + "'");
  }
  if (j.contains("label") && j["label"].is_string()) p.label = parse_label(j["label"].get<std::string>());
  p.label_source = parse_label_source(j.value("label_source", std::string("none")));
  if (p.label && p.label_source == LabelSource::None)
    throw Error("pair '" + p.id + "' has a label but label_source none");
  p.source_id = j.value("source_id", std::string{});
  if (j.contains("flags")) {
    const auto& f = j["flags"];
    p.flags.negated = f.value("negated", false);
    p.flags.in_named_entity = f.value("in_named_entity", false);
    const auto src = f.value("named_entity_source", std::string("none"));
    p.flags.entity_source = src == "ner"              ? EntitySource::Ner
                            : src == "capitalization" ? EntitySource::Capitalization
                                                      : EntitySource::None;
    p.flags.features.conjunction_count = f.value("conjunction_count", std::size_t{0});
    p.flags.features.has_quantifier = f.value("has_quantifier", false);
    p.flags.features.has_negation = f.value("has_negation", false);
    if (f.contains("conjunction_types"))
      for (const auto& t : f["conjunction_types"]) p.flags.features.conjunction_types.insert(t.get<std::string>());
  }
  if (j.contains("coordination")) {
    const auto& c = j["coordination"];
    p.coordination.tokens = c.value("tokens", std::vector<std::string>{});
    p.coordination.conj_index = c.value("conj_index", std::size_t{0});
    if (c.contains("left")) p.coordination.left = span_from_json(c["left"]);
    if (c.contains("right")) p.coordination.right = span_from_json(c["right"]);
  }
  return p;
}

}  // namespace conjnli
