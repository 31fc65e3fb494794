#include <gtest/gtest.h>

#include "test_support.hpp"

namespace conjnli {
namespace {

std::vector<char> chars(const std::string& s) { return {s.begin(), s.end()}; }

TEST(Evalkit, KappaFixtures) {
  EXPECT_DOUBLE_EQ(cohen_kappa(chars("ENCE"), chars("ENCE")), 1.0);
  EXPECT_NEAR(cohen_kappa(chars("EENN"), chars("ENEN")), 0.0, 1e-15);
  EXPECT_NEAR(cohen_kappa(chars("EENCNNECCENNEENCNECN"), chars("ENNCNEECNENCEENCCECE")), 73.0 / 133.0, 1e-12);
  EXPECT_DOUBLE_EQ(cohen_kappa(chars("EEE"), chars("EEE")), 1.0);
  EXPECT_THROW(cohen_kappa(chars("E"), chars("EN")), PreconditionError);
  EXPECT_THROW(cohen_kappa(chars(""), chars("")), PreconditionError);
}

TEST(Evalkit, KappaIsSymmetric) {
  util::Rng rng(1, "kappa");
  for (int i = 0; i < 100; ++i) {
    std::vector<Label> a, b;
    for (int j = 0; j < 30; ++j) a.push_back(static_cast<Label>(rng.below(3))), b.push_back(static_cast<Label>(rng.below(3)));
    EXPECT_NEAR(cohen_kappa(a, b), cohen_kappa(b, a), 1e-12);
  }
}

TEST(Evalkit, LoadsTsvAndJsonl) {
  testing::TempDir tmp;
  {
    std::ofstream out(tmp / "d.tsv");
    out << "premise\thypothesis\tlabel\nA and B.\tA.\tentailment\nC or D.\tC.\tneutral\n";
  }
  const auto tsv = load_dataset(tmp / "d.tsv");
  ASSERT_EQ(tsv.records.size(), 2u);
  EXPECT_EQ(tsv.records[1].label, Label::Neutral);
  save_dataset(tmp / "d.jsonl", tsv);
  const auto back = load_dataset(tmp / "d.jsonl");
  ASSERT_EQ(back.records.size(), 2u);
  EXPECT_EQ(back.records[0].premise, "A and B.");
  EXPECT_EQ(to_json(back.records[0]), to_json(tsv.records[0]));
}

TEST(Evalkit, MalformedDatasetsNameTheLine) {
  testing::TempDir tmp;
  {
    std::ofstream out(tmp / "bad.jsonl");
    out << R"({"id": "a", "premise": "p", "hypothesis": "h", "label": "entailment"})" << "\n"
        << R"({"id": "b", "premise": "p", "hypothesis": "h", "label": "maybe"})" << "\n";
  }
  try {
    load_dataset(tmp / "bad.jsonl");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find('2'), std::string::npos) << e.what();
  }
}

TEST(Evalkit, DevFixtureCounts) {
  const auto dev = load_dataset(testing::data_file("conj_dev.jsonl"), "dev");
  EXPECT_EQ(dev.records.size(), 623u);
  const auto c = dev.label_counts();
  EXPECT_EQ(c, (std::array<std::size_t, 3>{204, 281, 138}));
  std::unordered_map<std::string, Label> preds;
  for (const auto& r : dev.records) preds[r.id] = r.label;
  const auto rep = evaluate(preds, dev);
  EXPECT_EQ(rep.buckets.at("and").size, 320u);
  EXPECT_EQ(rep.buckets.at("or").size, 293u);
  EXPECT_EQ(rep.buckets.at("but").size, 99u);
  EXPECT_EQ(rep.buckets.at("multiple").size, 152u);
  EXPECT_EQ(rep.buckets.at("quantifier").size, 131u);
  EXPECT_EQ(rep.buckets.at("negation").size, 70u);
  EXPECT_EQ(rep.buckets.at("non-boolean").size, 211u);
  EXPECT_DOUBLE_EQ(rep.accuracy(), 1.0);
}

TEST(Evalkit, ConfusionIsGoldByPrediction) {
  LabeledDataset ds;
  ds.records.push_back({"1", "A and B.", "A.", Label::Entailment});
  ds.records.push_back({"2", "C or D.", "C.", Label::Neutral});
  const auto rep = evaluate({{"1", Label::Contradiction}, {"2", Label::Neutral}}, ds);
  EXPECT_EQ(rep.confusion[0][2], 1u);
  EXPECT_EQ(rep.confusion[1][1], 1u);
  EXPECT_DOUBLE_EQ(*rep.buckets.at("and").accuracy(), 0.0);
  EXPECT_DOUBLE_EQ(*rep.buckets.at("or").accuracy(), 1.0);
  EXPECT_FALSE(rep.buckets.at("but").accuracy().has_value());
  EXPECT_TRUE(rep.to_json()["buckets"]["but"]["accuracy"].is_null());
  EXPECT_NE(rep.to_markdown("toy").find("| toy | 50.00 |"), std::string::npos);
  EXPECT_THROW(evaluate({{"1", Label::Neutral}}, ds), PreconditionError);
  EXPECT_THROW(evaluate({{"1", Label::Neutral}, {"2", Label::Neutral}, {"3", Label::Neutral}}, ds), PreconditionError);
}

TEST(Evalkit, InstabilityDecomposition) {
  // Two seeds, perfectly correlated examples: all variance is covariance.
  const std::vector<std::vector<int>> m{{1, 1, 0, 0}, {0, 0, 1, 1}, {1, 1, 1, 1}};
  const auto st = instability_stats(m);
  EXPECT_NEAR(st.total_var, st.independent_var + st.covariance_term, 1e-15);
  EXPECT_NEAR(st.mean_acc, 2.0 / 3.0, 1e-15);
  EXPECT_THROW(instability_stats({{1, 0}}), PreconditionError);
  EXPECT_THROW(instability_stats({{1, 0}, {1}}), PreconditionError);
}

}  // namespace
}  // namespace conjnli
