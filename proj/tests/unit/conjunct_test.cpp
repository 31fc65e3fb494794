#include <gtest/gtest.h>

#include "test_support.hpp"

namespace conjnli {
namespace {

CoordinationResult coordinations_of(const std::string& tree, std::optional<std::vector<std::string>> ner = {}) {
  const auto t = parse_bracketed(tree);
  const Sentence s{yield_tokens(t), std::move(ner), "t:1"};
  return find_coordinations(t, s);
}

TEST(Conjunct, NearestNonPunctuationSiblings) {
  const auto r = coordinations_of("(S (NP (NP (DT a) (NN b)) (, ,) (NP (NN c)) (, ,) (CC and) (NP (NN d))) (. .))");
  ASSERT_EQ(r.instances.size(), 1u);
  const auto& c = r.instances[0];
  EXPECT_EQ(c.conj_word, "and");
  EXPECT_EQ(c.conj_index, 5u);
  EXPECT_EQ(c.left_conjunct, (Span{3, 4}));
  EXPECT_EQ(c.right_conjunct, (Span{6, 7}));
  EXPECT_EQ(c.parent_label, "NP");
}

TEST(Conjunct, TableOneSentenceExtraction) {
  const auto entries = read_corpus(testing::data_file("golden.trees"));
  const auto r = find_coordinations(entries[0].tree, entries[0].sentence);
  ASSERT_EQ(r.instances.size(), 1u);
  const auto& c = r.instances[0];
  EXPECT_EQ(join_span(entries[0].sentence.tokens, c.left_conjunct), "a Worcester resident");
  EXPECT_EQ(join_span(entries[0].sentence.tokens, c.right_conjunct), "a member of the Democratic Party");
  EXPECT_FALSE(c.negated);
  EXPECT_FALSE(c.in_named_entity);
}

TEST(Conjunct, NegationScopeIsTheSmallestClause) {
  const auto r = coordinations_of(
      "(S (NP (PRP They)) (VP (VBD did) (RB not) (VP (VB see) (NP (NN a) (CC or) (NN b)))) (. .))");
  ASSERT_EQ(r.instances.size(), 1u);
  EXPECT_TRUE(r.instances[0].negated);
  const auto unneg = coordinations_of(
      "(S (S (NP (PRP They)) (VP (VBD saw) (NP (NN a) (CC or) (NN b)))) (CC but) (S (NP (PRP we)) (VP (VBD did) (RB not))))");
  for (const auto& c : unneg.instances) {
    if (c.conj_word == "or") {
      EXPECT_FALSE(c.negated);
    }
  }
}

TEST(Conjunct, NamedEntityFromNerSingleMention) {
  const std::string tree = "(S (NP (NNP Franklin) (CC and) (NNP Marshall) (NNP College)) (VP (VBD won)) (. .))";
  const auto with_ner = coordinations_of(tree, std::vector<std::string>{"B-ORG", "I-ORG", "I-ORG", "I-ORG", "O", "O"});
  ASSERT_EQ(with_ner.instances.size(), 1u);
  EXPECT_TRUE(with_ner.instances[0].in_named_entity);
  EXPECT_EQ(with_ner.instances[0].entity_source, EntitySource::Ner);

  const auto split = coordinations_of(tree, std::vector<std::string>{"B-ORG", "O", "B-ORG", "I-ORG", "O", "O"});
  EXPECT_FALSE(split.instances[0].in_named_entity);

  const auto fallback = coordinations_of(tree);
  EXPECT_TRUE(fallback.instances[0].in_named_entity);
  EXPECT_EQ(fallback.instances[0].entity_source, EntitySource::Capitalization);
}

TEST(Conjunct, LowercaseConjunctsAreNotEntities) {
  const auto r = coordinations_of("(S (NP (NN flooding) (CC and) (NNS landslides)) (VP (VBD killed)) (. .))");
  ASSERT_EQ(r.instances.size(), 1u);
  EXPECT_FALSE(r.instances[0].in_named_entity);
}

TEST(Conjunct, CcWithoutTwoSiblingsIsAWarning) {
  const auto r = coordinations_of("(S (CC But) (NP (PRP he)) (VP (VBD left)) (. .))");
  EXPECT_TRUE(r.instances.empty() || r.instances[0].left_conjunct.size() > 0);
  const auto lone = coordinations_of("(S (NP (CC and)) (VP (VBD left)))");
  EXPECT_TRUE(lone.instances.empty());
  EXPECT_FALSE(lone.warnings.empty());
}

TEST(Conjunct, FeaturesCountConjunctionsQuantifiersNegation) {
  const auto f = detect_features(tokenize("Not all cats and dogs or birds sing."));
  EXPECT_EQ(f.conjunction_count, 2u);
  EXPECT_TRUE(f.multiple());
  EXPECT_TRUE(f.has_quantifier);
  EXPECT_TRUE(f.has_negation);
  EXPECT_EQ(conjunction_bucket("nor"), "or");
}

}  // namespace
}  // namespace conjnli
