#include <gtest/gtest.h>

#include "test_support.hpp"

namespace conjnli {
namespace {

ReplacementLexicon fixture_lexicon() {
  return ReplacementLexicon::from_json(util::read_json(testing::data_file("lexicon.json")));
}

std::vector<NliPair> corpus_pairs(const std::string& trees) {
  std::vector<NliPair> out;
  const auto lex = fixture_lexicon();
  for (const auto& e : read_corpus(testing::data_file(trees)))
    for (auto& p : generate_pairs(e.sentence, e.tree, lex, {}).pairs) out.push_back(std::move(p));
  return out;
}

const NliPair* find(const std::vector<NliPair>& pairs, const std::string& id) {
  for (const auto& p : pairs)
    if (p.id == id) return &p;
  return nullptr;
}

// Length of the shared prefix and suffix; the first token compares
// case-insensitively because deletions re-capitalize it.
std::pair<std::size_t, std::size_t> shared_ends(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::size_t m = std::min(a.size(), b.size());
  std::size_t pre = 0;
  while (pre < m && (pre == 0 ? to_lower(a[0]) == to_lower(b[0]) : a[pre] == b[pre])) ++pre;
  std::size_t suf = 0;
  while (suf < m - pre && a[a.size() - 1 - suf] == b[b.size() - 1 - suf]) ++suf;
  return {pre, suf};
}

TEST(Pairgen, WorkedExamples) {
  const auto pairs = corpus_pairs("worked.trees");
  const auto* p = find(pairs, "worked:3#7/remove-right");
  ASSERT_NE(p, nullptr);
  EXPECT_EQ(p->hypothesis.find("PhD"), std::string::npos);
  const auto* r = find(pairs, "worked:4#2/replace");
  ASSERT_NE(r, nullptr);
  EXPECT_EQ(r->replacement_kind, ReplacementKind::Number);
}

TEST(Pairgen, AddIsTheMirrorOfRemove) {
  for (const auto& p : corpus_pairs("golden.trees")) {
    if (p.operation != Operation::Remove) continue;
    const auto a = add_conjunct(p);
    EXPECT_EQ(a.operation, Operation::Add);
    EXPECT_EQ(a.premise, p.hypothesis);
    EXPECT_EQ(a.hypothesis, p.premise);
    EXPECT_EQ(swap_direction(a).premise, p.premise);
    EXPECT_EQ(swap_direction(a).id, p.id);
    EXPECT_THROW(add_conjunct(a), PreconditionError);
  }
}

TEST(Pairgen, EditsTouchOneRegion) {
  for (const auto& p : testing::synthetic_labeled_pairs(300, 5)) {
    const auto a = tokenize(p.premise), b = tokenize(p.hypothesis);
    EXPECT_NE(a, b);
    const auto [pre, suf] = shared_ends(a, b);
    const std::string ctx = p.premise + " / " + p.hypothesis;
    switch (p.operation) {
      case Operation::Remove: EXPECT_EQ(pre + suf, b.size()) << ctx; break;
      case Operation::Add: EXPECT_EQ(pre + suf, a.size()) << ctx; break;
      default: EXPECT_LE(std::max(a.size(), b.size()) - pre - suf, 3u) << ctx;
    }
  }
}

TEST(Pairgen, DanglingCommasAreDropped) {
  const std::vector<std::string> toks{"In", "total", ",", "x", "and", "y", ",", "died", "."};
  EXPECT_EQ(detail::delete_region(toks, 0, 2), (std::vector<std::string>{"x", "and", "y", ",", "died", "."}));
  const std::vector<std::string> tail{"a", ",", "b", "and", "c", "."};
  EXPECT_EQ(detail::delete_region(tail, 2, 5), (std::vector<std::string>{"a", "."}));
  // A comma that still separates two words stays.
  const std::vector<std::string> keep{"793880", "acre", "and", "x", ",", "was"};
  EXPECT_EQ(detail::delete_region(keep, 2, 4), (std::vector<std::string>{"793880", "acre", ",", "was"}));
}

TEST(Pairgen, SentenceInitialDeletionRecapitalizes) {
  const auto t = parse_bracketed("(S (NP (NP (PRP You)) (CC and) (NP (PRP$ your) (NNS friends))) (VP (VBD left)) (. .))");
  const Sentence s{yield_tokens(t), std::nullopt, "s:1"};
  const auto coords = find_coordinations(t, s);
  ASSERT_EQ(coords.instances.size(), 1u);
  EXPECT_EQ(remove_conjunct(s, coords.instances[0], Side::Left).hypothesis, "Your friends left.");
}

TEST(Pairgen, NumberIncrementKeepsFormat) {
  EXPECT_EQ(increment_number("870"), "871");
  EXPECT_EQ(increment_number("999"), "1000");
  EXPECT_EQ(increment_number("3,185"), "3,186");
  EXPECT_EQ(increment_number("999,999"), "1,000,000");
  EXPECT_THROW(increment_number("12a"), Error);
  EXPECT_FALSE(detail::is_number_token("1,23"));
}

TEST(Pairgen, ReplacementPriorityAndDeterminism) {
  const auto lex = fixture_lexicon();
  const auto entries = read_corpus(testing::data_file("golden.trees"));
  const auto a = generate_pairs(entries[2].sentence, entries[2].tree, lex, {7, {}});
  const auto b = generate_pairs(entries[2].sentence, entries[2].tree, lex, {7, {}});
  ASSERT_EQ(a.pairs.size(), b.pairs.size());
  for (std::size_t i = 0; i < a.pairs.size(); ++i) EXPECT_EQ(to_json(a.pairs[i]), to_json(b.pairs[i]));
  const auto* r = find(a.pairs, "golden:3#5/replace");
  ASSERT_NE(r, nullptr);
  EXPECT_EQ(r->replacement_kind, ReplacementKind::Antonym);
}

TEST(Pairgen, EitherOrProbe) {
  const auto pairs = corpus_pairs("golden.trees");
  auto p = *find(pairs, "golden:1#5/remove-left");
  EXPECT_THROW(either_or_probe(p), PreconditionError);
  p.label = Label::Entailment;
  const auto probe = either_or_probe(p);
  EXPECT_EQ(probe.premise, "He is either a Worcester resident or a member of the Democratic Party.");
  EXPECT_EQ(probe.hypothesis, p.hypothesis);
  EXPECT_EQ(probe.label, Label::Neutral);
  EXPECT_EQ(probe.operation, Operation::EitherOrProbe);
}

TEST(Pairgen, JsonRoundTrip) {
  for (const auto& p : corpus_pairs("worked.trees")) {
    const auto j = to_json(p);
    EXPECT_EQ(to_json(pair_from_json(j)), j);
  }
}

TEST(Pairgen, LexiconValidation) {
  EXPECT_THROW(ReplacementLexicon::from_json({{"antonyms", {{"up", "up"}}}}), Error);
  EXPECT_THROW(ReplacementLexicon::from_json({{"name_pool", {""}}}), Error);
}

}  // namespace
}  // namespace conjnli
