#include <gtest/gtest.h>

#include "test_support.hpp"

namespace conjnli {
namespace {

TEST(ToyClassifier, LearnsASeparableTask) {
  const auto task = testing::make_conflict_task(1, 600, 60, 200);
  ToyClassifier m;
  m.fit_batch(task.base_train);
  EXPECT_GT(accuracy(m, task.base_eval), 0.95);
}

TEST(ToyClassifier, SnapshotRestoresPredictions) {
  const auto task = testing::make_conflict_task(2, 300, 60, 100);
  ToyClassifier m;
  m.fit_batch(task.base_train);
  const auto snap = m.snapshot();
  std::vector<Label> before;
  for (const auto& ex : task.adv_eval) before.push_back(m.predict(ex));
  m.fit_batch(task.adv_train);
  EXPECT_NE(m.snapshot(), snap);
  m.restore(snap);
  EXPECT_EQ(m.snapshot(), snap);
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(m.predict(task.adv_eval[i]), before[i]);
  ToyClassifier small(ToyConfig{.hash_bits = 4});
  EXPECT_THROW(small.restore(snap), Error);
}

TEST(ToyClassifier, OverlapBuckets) {
  EXPECT_DOUBLE_EQ(overlap_ratio({"a", "b"}, {}), 1.0);
  EXPECT_DOUBLE_EQ(overlap_ratio({"A", "b"}, {"a", "c"}), 0.5);
  EXPECT_EQ(overlap_bucket(0.0), 0u);
  EXPECT_EQ(overlap_bucket(1.0), kOverlapBuckets - 1);
}

TEST(Iaft, ConjunctionFilterLooksAtBothSentences) {
  EXPECT_TRUE(has_conjunction({"a b", "c and d", Label::Neutral}));
  EXPECT_TRUE(has_conjunction({"a or b", "c", Label::Neutral}));
  EXPECT_FALSE(has_conjunction({"android", "oregano", Label::Neutral}));
}

TEST(Iaft, EpochPoolsAreAdvertisedSamples) {
  auto task = testing::make_conflict_task(4, 400, 50, 50);
  task.base_train.push_back({"no coordination here", "none", Label::Neutral});
  ToyClassifier m;
  m.fit_batch(task.base_train);
  std::vector<std::vector<std::size_t>> seen;
  const auto log = iaft_train(m, task.base_train, task.adv_train, {4, 9, true}, {}, [&](const EpochPool& ep) {
    EXPECT_EQ(ep.pool.size(), 100u);
    EXPECT_EQ(ep.base_indices.size(), 50u);
    EXPECT_EQ(std::find(ep.base_indices.begin(), ep.base_indices.end(), task.base_train.size() - 1),
              ep.base_indices.end());
    seen.push_back(ep.base_indices);
  });
  ASSERT_EQ(log.epochs.size(), 4u);
  EXPECT_EQ(log.k, 50u);
  EXPECT_EQ(log.filtered_base_size, task.base_train.size() - 1);
  for (std::size_t e = 0; e < 4; ++e) {
    EXPECT_EQ(log.epochs[e].base_indices, seen[e]);
    EXPECT_EQ(log.epochs[e].adv_fingerprint, fingerprint(task.adv_train));
  }
}

TEST(Iaft, SeededRunsAreReproducible) {
  const auto task = testing::make_conflict_task(5, 400, 50, 50);
  auto run = [&](std::uint64_t seed) {
    ToyClassifier m;
    m.fit_batch(task.base_train);
    const auto log = iaft_train(m, task.base_train, task.adv_train, {2, seed, true});
    return std::pair{m.snapshot(), log.to_json()};
  };
  EXPECT_EQ(run(3), run(3));
  EXPECT_NE(run(3).first, run(4).first);
}

TEST(Iaft, SampleLargerThanEligibleBaseIsAnError) {
  const auto task = testing::make_conflict_task(6, 20, 50, 10);
  ToyClassifier m;
  EXPECT_THROW(iaft_train(m, task.base_train, task.adv_train, {1, 1, true}), PreconditionError);
  EXPECT_THROW(iaft_train(m, task.base_train, std::vector<Example>{}, {1, 1, true}), PreconditionError);
}

TEST(Iaft, AftForgetsTheBaseMapping) {
  const auto task = testing::make_conflict_task(7, 1500, 300, 300);
  ToyClassifier iaft_m, aft_m;
  iaft_m.fit_batch(task.base_train);
  aft_m.fit_batch(task.base_train);
  iaft_train(iaft_m, task.base_train, task.adv_train, {3, 1, true});
  aft_train(aft_m, task.adv_train, 3, 1);
  EXPECT_GT(accuracy(iaft_m, task.base_eval), accuracy(aft_m, task.base_eval) + 0.1);
}

TEST(Iaft, HypothesisOnlyIgnoresPremises) {
  const std::vector<Example> data{{"x y z", "cat", Label::Entailment}, {"x y z", "dog", Label::Contradiction}};
  ToyClassifier m;
  hypothesis_only_train(m, data);
  EXPECT_EQ(m.predict({"anything at all", "cat", Label::Neutral}), m.predict({"", "cat", Label::Neutral}));
  for (const auto& ex : blank_premises(data)) EXPECT_TRUE(ex.premise.empty());
}

TEST(Iaft, ExamplesLoadFromJsonl) {
  testing::TempDir tmp;
  const std::vector<Example> data{{"a and b", "a", Label::Entailment}};
  std::vector<util::ordered_json> rows;
  for (const auto& ex : data) rows.push_back(to_json(ex));
  util::write_jsonl(tmp / "x.jsonl", rows);
  EXPECT_EQ(load_examples(tmp / "x.jsonl"), data);
}

}  // namespace
}  // namespace conjnli
