#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>

#include "test_support.hpp"

namespace conjnli {
namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(CONJNLI_CLI) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class Cli : public ::testing::Test {
 protected:
  testing::TempDir tmp;
  std::string data(const std::string& name) const { return testing::data_file(name).string(); }
  std::string at(const std::string& name) const { return (tmp / name).string(); }
};

TEST_F(Cli, PipelineFromTreesToReport) {
  ASSERT_EQ(run("extract --trees " + data("golden.trees") + " --out " + at("c.jsonl")), 0);
  EXPECT_FALSE(util::read_jsonl(at("c.jsonl")).empty());
  ASSERT_EQ(run("generate --trees " + data("golden.trees") + " --lexicon " + data("lexicon.json") +
                " --seed 1 --out " + at("p.jsonl")),
            0);
  ASSERT_EQ(run("label --pairs " + at("p.jsonl") + " --config " + data("heuristics.json") + " --either-or --out " +
                at("l.jsonl")),
            0);
  bool probe = false;
  for (const auto& j : util::read_jsonl(at("l.jsonl"))) {
    const auto p = pair_from_json(j);
    EXPECT_TRUE(p.label.has_value());
    EXPECT_EQ(p.label_source, LabelSource::Heuristic);
    probe |= p.operation == Operation::EitherOrProbe;
  }
  EXPECT_TRUE(probe);

  // The gold labels scored against themselves.
  std::vector<util::ordered_json> preds;
  for (const auto& j : util::read_jsonl(data("conj_dev.jsonl"))) preds.push_back({{"id", j["id"]}, {"label", j["label"]}});
  util::write_jsonl(at("pred.jsonl"), preds);
  ASSERT_EQ(run("eval --gold " + data("conj_dev.jsonl") + " --pred " + at("pred.jsonl") + " --report " +
                at("r.json") + " --report-md " + at("r.md") + " --model-name gold"),
            0);
  const auto report = util::read_json(at("r.json"));
  EXPECT_EQ(report["total"], 623);
  EXPECT_EQ(report["accuracy"], 1.0);
  EXPECT_EQ(report["buckets"]["or"]["size"], 293);
  EXPECT_NE(slurp(at("r.md")).find("| gold | 100.00 |"), std::string::npos);
}

TEST_F(Cli, TrainDecodeAndFusion) {
  const auto task = testing::make_conflict_task(8, 300, 60, 60);
  auto dump = [&](const std::string& name, const std::vector<Example>& xs) {
    std::vector<util::ordered_json> rows;
    for (const auto& x : xs) rows.push_back(to_json(x));
    util::write_jsonl(at(name), rows);
  };
  dump("base.jsonl", task.base_train);
  dump("adv.jsonl", task.adv_train);
  dump("eval.jsonl", task.adv_eval);
  ASSERT_EQ(run("train-iaft --base " + at("base.jsonl") + " --adv " + at("adv.jsonl") +
                " --epochs 2 --seed 3 --eval adv=" + at("eval.jsonl") + " --log " + at("log.json")),
            0);
  const auto log = util::read_json(at("log.json"));
  EXPECT_EQ(log["epochs"].size(), 2u);
  EXPECT_TRUE(log["epochs"][1]["metrics"].contains("adv"));
  EXPECT_NE(run("train-iaft --adv " + at("adv.jsonl") + " --mode iaft"), 0);

  srl::TagLattice l;
  l.tagset = {"O", "B-A", "I-A"};
  l.pieces = {"[CLS]", "run", "##s", "[SEP]"};
  l.scores = {5, 0, 0, 0, 3, 0, 0, 0, 2, 5, 0, 0};
  l.wordpiece_map = {{1, 3}};
  util::write_jsonl(at("lat.jsonl"), std::vector{srl::to_json(l)});
  ASSERT_EQ(run("srl-decode --lattices " + at("lat.jsonl") + " --out " + at("dec.jsonl")), 0);
  const auto dec = util::read_jsonl(at("dec.jsonl"));
  ASSERT_EQ(dec.size(), 1u);
  EXPECT_EQ(dec[0]["piece_tags"], util::ordered_json({"O", "B-A", "I-A", "O"}));
  EXPECT_EQ(dec[0]["word_tags"], util::ordered_json({"B-A"}));

  std::vector<util::ordered_json> triples;
  for (const auto& x : testing::make_fusion_task(100, 2)) {
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    triples.push_back({{"id", x.id}, {"c_nli", vec(x.c_nli)}, {"c_p", vec(x.c_p)}, {"c_h", vec(x.c_h)},
                       {"label", to_string(x.label)}});
  }
  util::write_jsonl(at("emb.jsonl"), triples);
  ASSERT_EQ(run("fusion-train --data " + at("emb.jsonl") + " --steps 50 --out " + at("head.json")), 0);
  ASSERT_EQ(run("fusion-eval --head " + at("head.json") + " --data " + at("emb.jsonl") + " --out " + at("fp.jsonl")), 0);
  EXPECT_EQ(util::read_jsonl(at("fp.jsonl")).size(), 100u);
}

TEST_F(Cli, ErrorsExitNonZero) {
  EXPECT_NE(run("generate --trees /nonexistent.trees"), 0);
  {
    std::ofstream out(at("bad.trees"));
    out << "(S (NN a)\n";
  }
  EXPECT_NE(run("extract --trees " + at("bad.trees")), 0);
  EXPECT_NE(run("build-adv --pairs " + data("conj_dev.jsonl") + " --size 10 --out " + at("x.jsonl")), 0);
  EXPECT_NE(run("no-such-command"), 0);
}

}  // namespace
}  // namespace conjnli
