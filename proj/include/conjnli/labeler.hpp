#pragma once

// Heuristic labels for generated pairs and the balanced adversarial set.

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "conjnli/conjunct.hpp"
#include "conjnli/error.hpp"
#include "conjnli/label.hpp"
#include "conjnli/pairgen.hpp"
#include "conjnli/text.hpp"
#include "conjnli/util/jsonl.hpp"
#include "conjnli/util/random.hpp"

namespace conjnli {

struct HeuristicConfig {
  std::set<std::string> trigger_words{"total",   "group",       "combined", "sum",
                                      "overall", "altogether", "jointly",  "collectively"};
  bool enable_named_entity_rule = true;
  bool enable_trigger_rule = true;
  bool enable_demorgan_rule = false;
  Label or_replace_label = Label::Neutral;

  void validate() const {
    if (enable_trigger_rule && trigger_words.empty())
      throw Error("trigger_words must be non-empty when the trigger rule is enabled");
    if (or_replace_label == Label::Entailment)
      throw Error("or_replace_label must be neutral or contradiction");
  }

  static HeuristicConfig from_json(const util::ordered_json& j) {
    HeuristicConfig c;
    for (const auto& [key, _] : j.items())
      if (key != "trigger_words" && key != "enable_named_entity_rule" && key != "enable_trigger_rule" &&
          key != "enable_demorgan_rule" && key != "or_replace_label")
        throw Error("unknown heuristic config key '" + key + "'");
    if (j.contains("trigger_words")) {
      c.trigger_words.clear();
      for (const auto& w : j["trigger_words"]) c.trigger_words.insert(to_lower(w.get<std::string>()));
    }
    c.enable_named_entity_rule = j.value("enable_named_entity_rule", c.enable_named_entity_rule);
    c.enable_trigger_rule = j.value("enable_trigger_rule", c.enable_trigger_rule);
    c.enable_demorgan_rule = j.value("enable_demorgan_rule", c.enable_demorgan_rule);
    if (j.contains("or_replace_label")) c.or_replace_label = parse_label(j["or_replace_label"].get<std::string>());
    c.validate();
    return c;
  }
};

// Which rule produced a label; recorded for auditing the precedence order.
enum class LabelRule { EitherOrProbe, NamedEntity, Trigger, DeMorgan, BooleanAnd, BooleanOr };

struct LabelDecision {
  Label label;
  LabelRule rule;
};

inline bool has_trigger_word(std::string_view premise, const HeuristicConfig& config) {
  for (const auto& tok : tokenize(premise))
    if (config.trigger_words.count(to_lower(tok))) return true;
  return false;
}

// First matching rule wins: probe, named entity, trigger word, De Morgan,
// then the boolean maps for and/but and or/nor.
inline LabelDecision decide_label(const NliPair& pair, const HeuristicConfig& config) {
  if (pair.operation == Operation::EitherOrProbe) return {Label::Neutral, LabelRule::EitherOrProbe};

  const std::string& w = pair.conj_word;
  const bool and_like = w == "and" || w == "but";
  const bool or_like = w == "or" || w == "nor";
  if (!and_like && !or_like) throw Error("pair '" + pair.id + "' has unknown conjunction '" + w + "'");

  if (config.enable_named_entity_rule && pair.flags.in_named_entity) return {Label::Neutral, LabelRule::NamedEntity};
  if (w == "and" && config.enable_trigger_rule && pair.operation == Operation::Remove &&
      has_trigger_word(pair.premise, config))
    return {Label::Contradiction, LabelRule::Trigger};
  if (config.enable_demorgan_rule && pair.flags.negated && or_like && pair.operation == Operation::Remove)
    return {Label::Entailment, LabelRule::DeMorgan};

  const LabelRule rule = and_like ? LabelRule::BooleanAnd : LabelRule::BooleanOr;
  switch (pair.operation) {
    case Operation::Remove: return {Label::Entailment, rule};
    case Operation::Add: return {Label::Neutral, rule};
    case Operation::Replace: return {and_like ? Label::Contradiction : config.or_replace_label, rule};
    case Operation::EitherOrProbe: break;
  }
  throw Error("pair '" + pair.id + "' has an unknown operation");
}

inline Label label_pair(const NliPair& pair, const HeuristicConfig& config) {
  return decide_label(pair, config).label;
}

inline NliPair with_heuristic_label(NliPair pair, const HeuristicConfig& config) {
  pair.label = label_pair(pair, config);
  pair.label_source = LabelSource::Heuristic;
  return pair;
}

inline constexpr std::array<std::string_view, 3> kAdversarialBuckets = {"and", "or", "but"};

struct StratificationReport {
  // bucket -> label -> count
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  std::map<std::string, std::size_t> available;

  util::ordered_json to_json() const {
    util::ordered_json j;
    for (const auto& [bucket, labels] : counts) {
      util::ordered_json row;
      for (const auto& [label, n] : labels) row[label] = n;
      j["selected"][bucket] = row;
    }
    for (const auto& [bucket, n] : available) j["available"][bucket] = n;
    return j;
  }
};

struct AdversarialSet {
  std::vector<NliPair> pairs;
  StratificationReport report;
};

// target_size / 3 labeled pairs from each of the and/or/but buckets. Each
// bucket is permuted once under the seed and its prefix taken, so sets built
// with the same seed and pool are nested across sizes.
inline AdversarialSet build_adversarial_set(const std::vector<NliPair>& pairs, std::size_t target_size,
                                            std::uint64_t seed) {
  if (target_size % kAdversarialBuckets.size() != 0)
    throw PreconditionError("target size " + std::to_string(target_size) + " is not divisible by 3");
  const std::size_t per_bucket = target_size / kAdversarialBuckets.size();

  std::map<std::string, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!pairs[i].label) continue;
    buckets[std::string(conjunction_bucket(pairs[i].conj_word))].push_back(i);
  }

  AdversarialSet out;
  std::string shortfall;
  for (auto name : kAdversarialBuckets) {
    const std::string bucket(name);
    const std::size_t have = buckets[bucket].size();
    out.report.available[bucket] = have;
    if (have < per_bucket)
      shortfall += (shortfall.empty() ? "" : "; ") + bucket + " needs " + std::to_string(per_bucket) +
                   ", has " + std::to_string(have) + " (short " + std::to_string(per_bucket - have) + ")";
  }
  if (!shortfall.empty()) throw PreconditionError("insufficient labeled pairs: " + shortfall);

  out.pairs.reserve(target_size);
  for (auto name : kAdversarialBuckets) {
    const std::string bucket(name);
    auto& idx = buckets[bucket];
    util::Rng rng(seed, bucket);
    rng.shuffle(idx);
    auto& counts = out.report.counts[bucket];
    for (auto l : kAllLabels) counts[std::string(to_string(l))] = 0;
    for (std::size_t i = 0; i < per_bucket; ++i) {
      const NliPair& p = pairs[idx[i]];
      ++counts[std::string(to_string(*p.label))];
      out.pairs.push_back(p);
    }
  }
  return out;
}

}  // namespace conjnli
