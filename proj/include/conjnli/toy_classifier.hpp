#pragma once

// Desk-scale NLI classifier: multinomial logistic regression over hashed
// sparse features, trained by online cross-entropy SGD.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "conjnli/conjunct.hpp"
#include "conjnli/error.hpp"
#include "conjnli/label.hpp"
#include "conjnli/text.hpp"
#include "conjnli/util/jsonl.hpp"
#include "conjnli/util/random.hpp"

namespace conjnli {

struct Example {
  std::string premise;
  std::string hypothesis;
  Label label = Label::Neutral;

  friend bool operator==(const Example&, const Example&) = default;
};

struct ToyConfig {
  std::size_t hash_bits = 18;
  double learning_rate = 0.1;
  std::size_t epochs = 3;
  std::uint64_t seed = 42;
  bool bigrams = true;
};

// Weights as an immutable value; restoring one reproduces predictions exactly.
struct ToySnapshot {
  std::vector<double> weights;
  friend bool operator==(const ToySnapshot&, const ToySnapshot&) = default;
};

inline constexpr std::size_t kOverlapBuckets = 5;

// Fraction of hypothesis tokens present in the premise, in [0, 1]; 1 for an
// empty hypothesis.
inline double overlap_ratio(const std::vector<std::string>& premise, const std::vector<std::string>& hypothesis) {
  if (hypothesis.empty()) return 1.0;
  std::set<std::string> p;
  for (const auto& t : premise) p.insert(to_lower(t));
  std::size_t hit = 0;
  for (const auto& t : hypothesis) hit += p.count(to_lower(t));
  return static_cast<double>(hit) / static_cast<double>(hypothesis.size());
}

inline std::size_t overlap_bucket(double ratio) {
  return std::min(kOverlapBuckets - 1, static_cast<std::size_t>(ratio * static_cast<double>(kOverlapBuckets)));
}

class ToyClassifier {
 public:
  using Snapshot = ToySnapshot;
  static constexpr std::size_t kClasses = 3;

  explicit ToyClassifier(ToyConfig config = {})
      : config_(config), dim_(std::size_t{1} << config.hash_bits), weights_(kClasses * dim_, 0.0) {}

  const ToyConfig& config() const { return config_; }

  // Hashed feature indices (with multiplicity) for one example.
  std::vector<std::size_t> features(const Example& ex) const {
    const auto p = tokenize(ex.premise);
    const auto h = tokenize(ex.hypothesis);
    std::vector<std::size_t> out;
    out.reserve(2 * (p.size() + h.size()) + 8);
    auto add = [&](std::string_view key) { out.push_back(util::fnv1a(key) & (dim_ - 1)); };
    auto add_text = [&](const char* prefix, const std::vector<std::string>& toks) {
      std::vector<std::string> lower;
      lower.reserve(toks.size());
      for (const auto& t : toks) lower.push_back(to_lower(t));
      for (const auto& t : lower) add(std::string(prefix) + "u:" + t);
      if (config_.bigrams)
        for (std::size_t i = 0; i + 1 < lower.size(); ++i)
          add(std::string(prefix) + "b:" + lower[i] + " " + lower[i + 1]);
      for (const auto& t : lower)
        if (is_conjunction_word(t)) add(std::string(prefix) + "conj:" + t);
    };
    add("bias");
    add_text("p:", p);
    add_text("h:", h);
    add("overlap:" + std::to_string(overlap_bucket(overlap_ratio(p, h))));
    const auto diff = static_cast<long>(h.size()) - static_cast<long>(p.size());
    add(diff < 0 ? "lendiff:-" : diff > 0 ? "lendiff:+" : "lendiff:0");
    return out;
  }

  std::array<double, kClasses> scores(const Example& ex) const { return scores_for(features(ex)); }

  Label predict(const Example& ex) const {
    const auto s = scores(ex);
    std::size_t best = 0;
    for (std::size_t c = 1; c < kClasses; ++c)
      if (s[c] > s[best]) best = c;
    return static_cast<Label>(best);
  }

  // One fine-tuning call: config.epochs passes over the batch in order.
  void fit_batch(std::span<const Example> batch) {
    std::vector<std::vector<std::size_t>> feats;
    feats.reserve(batch.size());
    for (const auto& ex : batch) feats.push_back(features(ex));
    for (std::size_t epoch = 0; epoch < config_.epochs; ++epoch)
      for (std::size_t i = 0; i < batch.size(); ++i) step(feats[i], batch[i].label);
  }

  Snapshot snapshot() const { return Snapshot{weights_}; }

  void restore(const Snapshot& s) {
    if (s.weights.size() != weights_.size()) throw Error("snapshot size does not match classifier");
    weights_ = s.weights;
  }

 private:
  std::array<double, kClasses> scores_for(const std::vector<std::size_t>& f) const {
    std::array<double, kClasses> s{};
    for (std::size_t c = 0; c < kClasses; ++c)
      for (auto i : f) s[c] += weights_[c * dim_ + i];
    return s;
  }

  void step(const std::vector<std::size_t>& f, Label gold) {
    auto s = scores_for(f);
    const double mx = *std::max_element(s.begin(), s.end());
    double z = 0.0;
    for (auto& v : s) z += (v = std::exp(v - mx));
    for (std::size_t c = 0; c < kClasses; ++c) {
      const double grad = s[c] / z - (c == label_index(gold) ? 1.0 : 0.0);
      const double delta = config_.learning_rate * grad;
      for (auto i : f) weights_[c * dim_ + i] -= delta;
    }
  }

  ToyConfig config_;
  std::size_t dim_;
  std::vector<double> weights_;
};

}  // namespace conjnli
