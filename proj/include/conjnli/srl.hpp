#pragma once

// BIO tagging over word pieces: tag propagation from words to pieces,
// first-piece recovery, and Viterbi decoding restricted to well-formed BIO.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "conjnli/error.hpp"
#include "conjnli/treebank.hpp"
#include "conjnli/util/jsonl.hpp"

namespace conjnli::srl {

struct BioTag {
  char prefix = 'O';  // 'B', 'I' or 'O'
  std::string role;   // empty for O

  bool is_begin() const { return prefix == 'B'; }
  bool is_inside() const { return prefix == 'I'; }
  bool is_outside() const { return prefix == 'O'; }
  std::string str() const { return is_outside() ? "O" : std::string(1, prefix) + "-" + role; }
  friend bool operator==(const BioTag&, const BioTag&) = default;
};

inline BioTag parse_tag(std::string_view s) {
  if (s == "O") return {};
  if (s.size() > 2 && (s[0] == 'B' || s[0] == 'I') && s[1] == '-') return {s[0], std::string(s.substr(2))};
  throw Error("malformed BIO tag '" + std::string(s) + "'");
}

// An I-X may follow only B-X or I-X; nothing may start with I.
inline bool allowed_start(const BioTag& t) { return !t.is_inside(); }
inline bool allowed_transition(const BioTag& prev, const BioTag& cur) {
  return !cur.is_inside() || (!prev.is_outside() && prev.role == cur.role);
}

inline bool is_well_formed(const std::vector<std::string>& tags) {
  for (std::size_t t = 0; t < tags.size(); ++t) {
    const BioTag cur = parse_tag(tags[t]);
    if (t == 0 ? !allowed_start(cur) : !allowed_transition(parse_tag(tags[t - 1]), cur)) return false;
  }
  return true;
}

// Word i covers pieces [map[i].start, map[i].end). Ranges are non-empty,
// ascending and disjoint; uncovered pieces are boundary positions.
using WordpieceMap = std::vector<Span>;

inline void validate_map(const WordpieceMap& map, std::size_t num_pieces) {
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < map.size(); ++i) {
    const Span r = map[i];
    if (r.empty()) throw Error("word " + std::to_string(i) + " has no word pieces");
    if (r.start < prev_end) throw Error("word-piece ranges overlap or are out of order at word " + std::to_string(i));
    if (r.end > num_pieces) throw Error("word-piece range of word " + std::to_string(i) + " exceeds piece count");
    prev_end = r.end;
  }
}

inline std::size_t piece_count(const WordpieceMap& map) { return map.empty() ? 0 : map.back().end; }

// B-X spreads as B-X, I-X, I-X...; I-X and O copy to every piece;
// boundary pieces get O.
inline std::vector<std::string> propagate_tags(const std::vector<std::string>& word_tags, const WordpieceMap& map,
                                               std::optional<std::size_t> num_pieces = std::nullopt) {
  if (word_tags.size() != map.size())
    throw Error("tag count " + std::to_string(word_tags.size()) + " != word count " + std::to_string(map.size()));
  const std::size_t n = num_pieces.value_or(piece_count(map));
  validate_map(map, n);
  std::vector<std::string> out(n, "O");
  for (std::size_t w = 0; w < map.size(); ++w) {
    const BioTag tag = parse_tag(word_tags[w]);
    for (std::size_t p = map[w].start; p < map[w].end; ++p)
      out[p] = (tag.is_begin() && p > map[w].start) ? "I-" + tag.role : tag.str();
  }
  return out;
}

// Each word takes the tag of its first piece.
inline std::vector<std::string> recover_word_tags(const std::vector<std::string>& piece_tags, const WordpieceMap& map) {
  validate_map(map, piece_tags.size());
  std::vector<std::string> out;
  out.reserve(map.size());
  for (const auto& r : map) out.push_back(parse_tag(piece_tags[r.start]).str());
  return out;
}

struct TagLattice {
  std::vector<std::string> pieces;
  std::vector<std::string> tagset;
  std::vector<double> scores;  // row-major |pieces| x |tagset|
  WordpieceMap wordpiece_map;

  double score(std::size_t piece, std::size_t tag) const { return scores[piece * tagset.size() + tag]; }

  void validate() const {
    if (scores.size() != pieces.size() * tagset.size())
      throw Error("score matrix has " + std::to_string(scores.size()) + " entries, expected " +
                  std::to_string(pieces.size() * tagset.size()));
    for (double s : scores)
      if (!std::isfinite(s)) throw Error("lattice scores must be finite");
    std::set<std::string> begins;
    bool has_o = false;
    for (const auto& t : tagset) {
      const BioTag tag = parse_tag(t);
      has_o |= tag.is_outside();
      if (tag.is_begin()) begins.insert(tag.role);
    }
    if (!has_o) throw Error("tagset must contain O");
    for (const auto& t : tagset) {
      const BioTag tag = parse_tag(t);
      if (tag.is_inside() && !begins.count(tag.role)) throw Error("tag " + t + " has no matching B-" + tag.role);
    }
    validate_map(wordpiece_map, pieces.size());
  }
};

struct Decoded {
  std::vector<std::size_t> tag_indices;
  std::vector<std::string> tags;
  double score = 0.0;
};

// Highest-scoring well-formed sequence. Among equal scores the sequence with
// the lowest tag index at the latest differing position wins.
inline Decoded constrained_viterbi(const TagLattice& lattice) {
  lattice.validate();
  const std::size_t n = lattice.pieces.size();
  const std::size_t k = lattice.tagset.size();
  Decoded out;
  if (n == 0) return out;

  std::vector<BioTag> tags;
  tags.reserve(k);
  for (const auto& t : lattice.tagset) tags.push_back(parse_tag(t));

  constexpr double kNeg = -std::numeric_limits<double>::infinity();
  std::vector<double> best(k, kNeg), next(k);
  std::vector<std::size_t> back(n * k, 0);
  for (std::size_t j = 0; j < k; ++j)
    if (allowed_start(tags[j])) best[j] = lattice.score(0, j);

  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      double m = kNeg;
      std::size_t arg = 0;
      for (std::size_t i = 0; i < k; ++i) {
        if (best[i] == kNeg || !allowed_transition(tags[i], tags[j])) continue;
        if (best[i] > m) {
          m = best[i];
          arg = i;
        }
      }
      next[j] = m == kNeg ? kNeg : m + lattice.score(t, j);
      back[t * k + j] = arg;
    }
    best.swap(next);
  }

  std::size_t last = 0;
  for (std::size_t j = 1; j < k; ++j)
    if (best[j] > best[last]) last = j;
  if (best[last] == kNeg) throw Error("no well-formed tag sequence exists");

  out.score = best[last];
  out.tag_indices.assign(n, 0);
  out.tag_indices[n - 1] = last;
  for (std::size_t t = n - 1; t > 0; --t) out.tag_indices[t - 1] = back[t * k + out.tag_indices[t]];
  for (auto j : out.tag_indices) out.tags.push_back(lattice.tagset[j]);
  return out;
}

inline TagLattice lattice_from_json(const util::ordered_json& j) {
  TagLattice l;
  l.pieces = j.at("pieces").get<std::vector<std::string>>();
  l.tagset = j.at("tagset").get<std::vector<std::string>>();
  l.scores = j.at("scores").get<std::vector<double>>();
  for (const auto& r : j.at("wordpiece_map")) l.wordpiece_map.push_back(span_from_json(r));
  l.validate();
  return l;
}

inline util::ordered_json to_json(const TagLattice& l) {
  util::ordered_json j;
  j["pieces"] = l.pieces;
  j["tagset"] = l.tagset;
  j["scores"] = l.scores;
  j["wordpiece_map"] = util::ordered_json::array();
  for (const auto& r : l.wordpiece_map) j["wordpiece_map"].push_back(span_to_json(r));
  return j;
}

}  // namespace conjnli::srl
