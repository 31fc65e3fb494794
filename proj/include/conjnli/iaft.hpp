#pragma once

// Iterative adversarial fine-tuning: each epoch mixes the constant
// adversarial set with a fresh, equally sized sample of conjunctive base
// examples. Plain adversarial fine-tuning and the hypothesis-only baseline
// run over the same classifier contract.

#include <concepts>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "conjnli/conjunct.hpp"
#include "conjnli/error.hpp"
#include "conjnli/label.hpp"
#include "conjnli/text.hpp"
#include "conjnli/toy_classifier.hpp"
#include "conjnli/util/jsonl.hpp"
#include "conjnli/util/random.hpp"

namespace conjnli {

template <typename M>
concept NliClassifier = requires(M m, const M cm, std::span<const Example> batch, const Example& ex,
                                 const typename M::Snapshot& snap) {
  m.fit_batch(batch);
  { cm.predict(ex) } -> std::same_as<Label>;
  { cm.snapshot() } -> std::same_as<typename M::Snapshot>;
  m.restore(snap);
};

static_assert(NliClassifier<ToyClassifier>);

struct TrainSchedule {
  std::size_t num_epochs = 3;
  std::uint64_t seed = 42;
  bool conjunction_filter = true;
};

using EvalSets = std::vector<std::pair<std::string, std::vector<Example>>>;

struct EpochRecord {
  std::size_t epoch = 0;
  std::vector<std::size_t> base_indices;  // positions in the base training set
  std::uint64_t sample_fingerprint = 0;
  std::uint64_t adv_fingerprint = 0;
  std::size_t pool_size = 0;
  std::vector<std::pair<std::string, double>> metrics;
};

struct TrainLog {
  std::string mode;
  std::uint64_t seed = 0;
  std::size_t k = 0;
  std::size_t base_size = 0;
  std::size_t filtered_base_size = 0;
  std::vector<EpochRecord> epochs;

  util::ordered_json to_json() const {
    util::ordered_json j;
    j["mode"] = mode;
    j["seed"] = seed;
    j["k"] = k;
    j["base_size"] = base_size;
    j["filtered_base_size"] = filtered_base_size;
    j["sampling"] = "uniform without replacement within an epoch, independent across epochs";
    j["conjunction_filter"] = "premise or hypothesis token in {and, or, but, nor}";
    j["epochs"] = util::ordered_json::array();
    for (const auto& e : epochs) {
      util::ordered_json r;
      r["epoch"] = e.epoch;
      r["pool_size"] = e.pool_size;
      r["sample_fingerprint"] = e.sample_fingerprint;
      r["adv_fingerprint"] = e.adv_fingerprint;
      util::ordered_json m = util::ordered_json::object();
      for (const auto& [name, acc] : e.metrics) m[name] = acc;
      r["metrics"] = std::move(m);
      j["epochs"].push_back(std::move(r));
    }
    return j;
  }
};

// Called once per epoch with the shuffled pool before it is fitted.
struct EpochPool {
  std::size_t epoch;
  const std::vector<Example>& pool;
  const std::vector<std::size_t>& base_indices;
};
using EpochObserver = std::function<void(const EpochPool&)>;

inline std::uint64_t fingerprint(std::span<const Example> examples) {
  std::uint64_t h = util::fnv1a("");
  for (const auto& ex : examples) {
    h = util::fnv1a(ex.premise, h);
    h = util::fnv1a("\x1f", h);
    h = util::fnv1a(ex.hypothesis, h);
    h = util::fnv1a("\x1f", h);
    h = util::fnv1a(to_string(ex.label), h);
    h = util::fnv1a("\x1e", h);
  }
  return h;
}

inline bool has_conjunction(const Example& ex) {
  for (const auto* text : {&ex.premise, &ex.hypothesis})
    for (const auto& t : tokenize(*text))
      if (is_conjunction_word(t)) return true;
  return false;
}

template <NliClassifier M>
double accuracy(const M& model, std::span<const Example> data) {
  if (data.empty()) throw PreconditionError("accuracy over an empty dataset");
  std::size_t hit = 0;
  for (const auto& ex : data) hit += model.predict(ex) == ex.label;
  return static_cast<double>(hit) / static_cast<double>(data.size());
}

inline std::vector<Example> blank_premises(std::span<const Example> data) {
  std::vector<Example> out(data.begin(), data.end());
  for (auto& ex : out) ex.premise.clear();
  return out;
}

namespace detail {

template <NliClassifier M>
std::vector<std::pair<std::string, double>> evaluate_sets(const M& model, const EvalSets& sets) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [name, data] : sets) out.emplace_back(name, accuracy(model, data));
  return out;
}

}  // namespace detail

// The model must already be fitted on base_train.
template <NliClassifier M>
TrainLog iaft_train(M& model, std::span<const Example> base_train, std::span<const Example> adv_train,
                    const TrainSchedule& schedule, const EvalSets& eval_sets = {},
                    const EpochObserver& observer = {}) {
  if (adv_train.empty()) throw PreconditionError("adversarial training set is empty");
  const std::size_t k = adv_train.size();

  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < base_train.size(); ++i)
    if (!schedule.conjunction_filter || has_conjunction(base_train[i])) eligible.push_back(i);
  if (k > eligible.size())
    throw PreconditionError("k = " + std::to_string(k) + " exceeds the " + std::to_string(eligible.size()) +
                            " eligible base examples");

  TrainLog log;
  log.mode = "iaft";
  log.seed = schedule.seed;
  log.k = k;
  log.base_size = base_train.size();
  log.filtered_base_size = eligible.size();
  const std::uint64_t adv_fp = fingerprint(adv_train);

  for (std::size_t e = 1; e <= schedule.num_epochs; ++e) {
    util::Rng rng(schedule.seed, e);
    std::vector<std::size_t> picked;
    picked.reserve(k);
    for (auto j : rng.sample_indices(eligible.size(), k)) picked.push_back(eligible[j]);

    std::vector<Example> sample;
    sample.reserve(k);
    for (auto i : picked) sample.push_back(base_train[i]);

    std::vector<Example> pool = sample;
    pool.insert(pool.end(), adv_train.begin(), adv_train.end());
    rng.shuffle(pool);
    if (observer) observer(EpochPool{e, pool, picked});
    model.fit_batch(pool);

    EpochRecord rec;
    rec.epoch = e;
    rec.sample_fingerprint = fingerprint(sample);
    rec.adv_fingerprint = adv_fp;
    rec.pool_size = pool.size();
    rec.base_indices = std::move(picked);
    rec.metrics = detail::evaluate_sets(model, eval_sets);
    log.epochs.push_back(std::move(rec));
  }
  return log;
}

// Sequential fine-tuning on the adversarial set alone.
template <NliClassifier M>
TrainLog aft_train(M& model, std::span<const Example> adv_train, std::size_t epochs, std::uint64_t seed = 42,
                   const EvalSets& eval_sets = {}) {
  if (adv_train.empty()) throw PreconditionError("adversarial training set is empty");
  TrainLog log;
  log.mode = "aft";
  log.seed = seed;
  log.k = adv_train.size();
  const std::uint64_t adv_fp = fingerprint(adv_train);
  for (std::size_t e = 1; e <= epochs; ++e) {
    std::vector<Example> pool(adv_train.begin(), adv_train.end());
    util::Rng(seed, e).shuffle(pool);
    model.fit_batch(pool);
    EpochRecord rec;
    rec.epoch = e;
    rec.adv_fingerprint = adv_fp;
    rec.pool_size = pool.size();
    rec.metrics = detail::evaluate_sets(model, eval_sets);
    log.epochs.push_back(std::move(rec));
  }
  return log;
}

// Same training with every premise blanked; evaluate with blank_premises too.
template <NliClassifier M>
void hypothesis_only_train(M& model, std::span<const Example> train) {
  if (train.empty()) throw PreconditionError("training set is empty");
  const auto blanked = blank_premises(train);
  model.fit_batch(blanked);
}

inline util::ordered_json to_json(const Example& ex) {
  util::ordered_json j;
  j["premise"] = ex.premise;
  j["hypothesis"] = ex.hypothesis;
  j["label"] = to_string(ex.label);
  return j;
}

inline std::vector<Example> load_examples(const std::filesystem::path& path) {
  std::vector<Example> out;
  std::size_t line = 0;
  for (const auto& j : util::read_jsonl(path)) {
    ++line;
    try {
      out.push_back({j.at("premise").get<std::string>(), j.at("hypothesis").get<std::string>(),
                     parse_label(j.at("label").get<std::string>())});
    } catch (const std::exception& e) {
      throw FormatError(std::string("bad example: ") + e.what(), line);
    }
  }
  return out;
}

}  // namespace conjnli
