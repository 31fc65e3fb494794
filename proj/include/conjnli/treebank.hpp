#pragma once

// Penn-Treebank-style bracketed constituency trees.

#include <cctype>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "conjnli/error.hpp"
#include "conjnli/text.hpp"
#include "conjnli/util/jsonl.hpp"

namespace conjnli {

// Half-open token interval [start, end).
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool empty() const { return end <= start; }
  bool contains(std::size_t i) const { return i >= start && i < end; }
  friend bool operator==(const Span&, const Span&) = default;
};

inline util::ordered_json span_to_json(Span sp) { return util::ordered_json::array({sp.start, sp.end}); }

inline Span span_from_json(const util::ordered_json& j) {
  return {j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>()};
}

// Category with any functional tag stripped: "NP-SBJ" -> "NP". Labels that
// begin with '-' ("-LRB-", "-NONE-") are returned unchanged.
inline std::string_view label_base(std::string_view label) {
  if (label.empty() || label.front() == '-') return label;
  const auto cut = label.find_first_of("-=");
  return cut == std::string_view::npos ? label : label.substr(0, cut);
}

class ParseNode {
 public:
  static ParseNode leaf(std::string label, std::string token, std::size_t index) {
    if (label.empty()) throw Error("parse node label must be non-empty");
    ParseNode n;
    n.label_ = std::move(label);
    n.token_ = std::move(token);
    n.span_ = {index, index + 1};
    return n;
  }

  static ParseNode internal(std::string label, std::vector<ParseNode> children) {
    if (label.empty()) throw Error("parse node label must be non-empty");
    if (children.empty()) throw Error("internal node '" + label + "' has no children");
    for (std::size_t i = 1; i < children.size(); ++i)
      if (children[i].span_.start != children[i - 1].span_.end)
        throw Error("children of '" + label + "' are not contiguous");
    ParseNode n;
    n.label_ = std::move(label);
    n.span_ = {children.front().span_.start, children.back().span_.end};
    n.children_ = std::move(children);
    return n;
  }

  const std::string& label() const { return label_; }
  std::string_view base_label() const { return label_base(label_); }
  const std::vector<ParseNode>& children() const { return children_; }
  const std::optional<std::string>& token() const { return token_; }
  Span span() const { return span_; }
  // Leaves carry their part-of-speech label: "(NN dog)" is a single leaf.
  bool is_leaf() const { return token_.has_value(); }

  friend bool operator==(const ParseNode&, const ParseNode&) = default;

 private:
  ParseNode() = default;

  std::string label_;
  std::vector<ParseNode> children_;
  std::optional<std::string> token_;
  Span span_;
};

struct Sentence {
  std::vector<std::string> tokens;
  std::optional<std::vector<std::string>> ner;
  std::string source_id;

  std::string text() const { return detokenize(tokens); }
};

inline void validate(const Sentence& s) {
  if (s.tokens.empty()) throw Error("sentence '" + s.source_id + "' has no tokens");
  if (s.ner && s.ner->size() != s.tokens.size())
    throw Error("sentence '" + s.source_id + "': NER tag count " + std::to_string(s.ner->size()) +
                " != token count " + std::to_string(s.tokens.size()));
}

namespace detail {

inline std::string unescape_token(std::string tok) {
  if (tok == "-LRB-" || tok == "-LCB-" || tok == "-LSB-") return tok == "-LRB-" ? "(" : tok == "-LCB-" ? "{" : "[";
  if (tok == "-RRB-" || tok == "-RCB-" || tok == "-RSB-") return tok == "-RRB-" ? ")" : tok == "-RCB-" ? "}" : "]";
  return tok;
}

inline std::string escape_token(const std::string& tok) {
  if (tok == "(") return "-LRB-";
  if (tok == ")") return "-RRB-";
  if (tok == "{") return "-LCB-";
  if (tok == "}") return "-RCB-";
  if (tok == "[") return "-LSB-";
  if (tok == "]") return "-RSB-";
  return tok;
}

inline bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

inline void serialize_into(const ParseNode& n, std::string& out) {
  out.push_back('(');
  out += n.label();
  if (n.is_leaf()) {
    out.push_back(' ');
    out += escape_token(*n.token());
  } else {
    for (const auto& c : n.children()) {
      out.push_back(' ');
      serialize_into(c, out);
    }
  }
  out.push_back(')');
}

}  // namespace detail

// Parses one bracketed tree. Iterative, so nesting depth is bounded only by memory.
inline ParseNode parse_bracketed(std::string_view text) {
  struct Frame {
    std::string label;
    std::size_t open_offset;
    std::vector<ParseNode> children;
    std::optional<std::string> token;
  };

  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && detail::is_space(text[pos])) ++pos;
  };
  auto read_atom = [&] {
    const std::size_t begin = pos;
    while (pos < text.size() && !detail::is_space(text[pos]) && text[pos] != '(' && text[pos] != ')')
      ++pos;
    return std::string(text.substr(begin, pos - begin));
  };

  skip_ws();
  if (pos == text.size()) throw ParseError("empty input", pos);

  std::vector<Frame> stack;
  std::optional<ParseNode> root;
  std::size_t next_index = 0;

  while (true) {
    skip_ws();
    if (pos == text.size()) {
      if (!stack.empty()) throw ParseError("unbalanced parentheses: missing ')'", pos);
      break;
    }
    const char c = text[pos];
    if (c == '(') {
      if (root) throw ParseError("trailing characters after tree", pos);
      if (!stack.empty() && stack.back().token)
        throw ParseError("leaf with both token and children", pos);
      const std::size_t open = pos++;
      const std::string label = read_atom();
      if (label.empty()) throw ParseError("empty label", open + 1);
      stack.push_back(Frame{label, open, {}, std::nullopt});
    } else if (c == ')') {
      if (stack.empty()) throw ParseError("unbalanced parentheses: unexpected ')'", pos);
      Frame f = std::move(stack.back());
      stack.pop_back();
      ParseNode node = [&] {
        if (f.token) return ParseNode::leaf(std::move(f.label), std::move(*f.token), next_index++);
        if (f.children.empty()) throw ParseError("constituent without token or children", f.open_offset);
        return ParseNode::internal(std::move(f.label), std::move(f.children));
      }();
      ++pos;
      if (stack.empty())
        root = std::move(node);
      else
        stack.back().children.push_back(std::move(node));
    } else {
      if (stack.empty()) throw ParseError(root ? "trailing characters after tree" : "expected '('", pos);
      Frame& f = stack.back();
      if (!f.children.empty()) throw ParseError("leaf with both token and children", pos);
      if (f.token) throw ParseError("leaf with more than one token", pos);
      f.token = detail::unescape_token(read_atom());
    }
  }
  return std::move(*root);
}

inline std::string serialize(const ParseNode& n) {
  std::string out;
  detail::serialize_into(n, out);
  return out;
}

inline std::vector<std::string> yield_tokens(const ParseNode& node) {
  std::vector<std::string> out;
  out.reserve(node.span().size());
  std::vector<const ParseNode*> stack{&node};
  while (!stack.empty()) {
    const ParseNode* n = stack.back();
    stack.pop_back();
    if (n->is_leaf()) {
      out.push_back(*n->token());
      continue;
    }
    for (auto it = n->children().rbegin(); it != n->children().rend(); ++it) stack.push_back(&*it);
  }
  return out;
}

// Part-of-speech label of every leaf, in token order.
inline std::vector<std::string> leaf_labels(const ParseNode& root) {
  std::vector<std::string> out(root.span().end);
  std::vector<const ParseNode*> stack{&root};
  while (!stack.empty()) {
    const ParseNode* n = stack.back();
    stack.pop_back();
    if (n->is_leaf())
      out[n->span().start] = n->label();
    else
      for (const auto& c : n->children()) stack.push_back(&c);
  }
  return out;
}

struct CorpusEntry {
  ParseNode tree;
  Sentence sentence;
};

// Reads a ".trees" file (one bracketed parse per line) and an optional
// line-aligned ".ner" file. Blank lines are skipped but still count toward
// line numbers and alignment.
inline std::vector<CorpusEntry> read_corpus(const std::filesystem::path& trees,
                                            const std::optional<std::filesystem::path>& ner = {}) {
  const auto tree_lines = util::read_lines(trees);
  std::vector<std::string> ner_lines;
  if (ner) ner_lines = util::read_lines(*ner);

  std::vector<CorpusEntry> out;
  const std::string stem = trees.stem().string();
  for (std::size_t i = 0; i < tree_lines.size(); ++i) {
    if (tree_lines[i].find_first_not_of(" \t") == std::string::npos) continue;
    std::optional<ParseNode> tree;
    try {
      tree = parse_bracketed(tree_lines[i]);
    } catch (const ParseError& e) {
      throw FormatError(e.what(), i + 1);
    }
    Sentence s{yield_tokens(*tree), std::nullopt, stem + ":" + std::to_string(i + 1)};
    if (ner) {
      if (i >= ner_lines.size()) throw FormatError("missing NER line", i + 1);
      auto tags = split_whitespace(ner_lines[i]);
      if (tags.size() != s.tokens.size())
        throw FormatError("NER tag count " + std::to_string(tags.size()) + " != token count " +
                              std::to_string(s.tokens.size()),
                          i + 1);
      s.ner = std::move(tags);
    }
    out.push_back(CorpusEntry{std::move(*tree), std::move(s)});
  }
  return out;
}

}  // namespace conjnli
