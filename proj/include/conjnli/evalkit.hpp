#pragma once

// Dataset I/O, accuracy breakdowns by conjunction/quantifier/negation and
// boolean-ness, Cohen's kappa, and seed-instability decomposition.

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "conjnli/conjunct.hpp"
#include "conjnli/error.hpp"
#include "conjnli/label.hpp"
#include "conjnli/pairgen.hpp"
#include "conjnli/text.hpp"
#include "conjnli/util/jsonl.hpp"

namespace conjnli {

struct DatasetRecord {
  std::string id;
  std::string premise;
  std::string hypothesis;
  Label label = Label::Neutral;
  LabelSource label_source = LabelSource::Human;
  std::optional<bool> boolean;  // human boolean/non-boolean annotation
  util::ordered_json extra = util::ordered_json::object();
};

struct LabeledDataset {
  std::string split;
  std::vector<DatasetRecord> records;

  std::array<std::size_t, 3> label_counts() const {
    std::array<std::size_t, 3> c{};
    for (const auto& r : records) ++c[label_index(r.label)];
    return c;
  }
};

inline util::ordered_json to_json(const DatasetRecord& r) {
  util::ordered_json j;
  j["id"] = r.id;
  j["premise"] = r.premise;
  j["hypothesis"] = r.hypothesis;
  j["label"] = to_string(r.label);
  j["label_source"] = to_string(r.label_source);
  if (r.boolean) j["boolean"] = *r.boolean;
  for (const auto& [k, v] : r.extra.items()) j[k] = v;
  return j;
}

namespace detail {

inline const std::set<std::string>& core_fields() {
  static const std::set<std::string> kCore{"id", "premise", "hypothesis", "label", "label_source", "boolean"};
  return kCore;
}

inline DatasetRecord record_from_json(const util::ordered_json& j, std::size_t line) {
  DatasetRecord r;
  try {
    if (!j.contains("id")) throw Error("missing id");
    r.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
    r.premise = j.at("premise").get<std::string>();
    r.hypothesis = j.at("hypothesis").get<std::string>();
    if (!j.contains("label") || !j["label"].is_string()) throw Error("missing label");
    r.label = parse_label(j["label"].get<std::string>());
    r.label_source = parse_label_source(j.value("label_source", std::string("human")));
    if (r.label_source == LabelSource::None) throw Error("labeled record with label_source none");
    if (j.contains("boolean") && !j["boolean"].is_null()) r.boolean = j["boolean"].get<bool>();
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(e.what(), line);
  }
  for (const auto& [k, v] : j.items())
    if (!core_fields().count(k)) r.extra[k] = v;
  return r;
}

inline bool looks_like_tsv(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  if (path.extension() == ".tsv") return true;
  for (const auto& l : lines) {
    const auto first = l.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    return l[first] != '{';
  }
  return false;
}

}  // namespace detail

// JSON-lines records, or tab-separated "premise TAB hypothesis TAB label"
// rows (an optional header row is skipped). Errors name the 1-based line.
inline LabeledDataset load_dataset(const std::filesystem::path& path, std::string split = {}) {
  const auto lines = util::read_lines(path);
  LabeledDataset ds;
  ds.split = std::move(split);
  std::set<std::string> seen;
  const bool tsv = detail::looks_like_tsv(path, lines);
  const std::string stem = path.stem().string();

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& l = lines[i];
    if (l.find_first_not_of(" \t") == std::string::npos) continue;
    DatasetRecord r;
    if (tsv) {
      std::vector<std::string> cols;
      std::stringstream ss(l);
      std::string col;
      while (std::getline(ss, col, '\t')) cols.push_back(col);
      if (cols.size() < 3) throw FormatError("expected premise, hypothesis and label columns", i + 1);
      const auto label = try_parse_label(cols[2]);
      if (!label) {
        if (ds.records.empty() && seen.empty()) continue;  // header row
        throw FormatError("unknown label '" + cols[2] + "'", i + 1);
      }
      r.id = stem + "-" + std::to_string(i + 1);
      r.premise = cols[0];
      r.hypothesis = cols[1];
      r.label = *label;
    } else {
      util::ordered_json j;
      try {
        j = util::ordered_json::parse(l);
      } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("invalid JSON: ") + e.what(), i + 1);
      }
      if (!j.is_object()) throw FormatError("expected a JSON object", i + 1);
      r = detail::record_from_json(j, i + 1);
    }
    if (!seen.insert(r.id).second) throw FormatError("duplicate id '" + r.id + "'", i + 1);
    ds.records.push_back(std::move(r));
  }
  return ds;
}

inline void save_dataset(const std::filesystem::path& path, const LabeledDataset& ds) {
  std::vector<util::ordered_json> rows;
  rows.reserve(ds.records.size());
  for (const auto& r : ds.records) rows.push_back(to_json(r));
  util::write_jsonl(path, rows);
}

inline DatasetRecord record_from_pair(const NliPair& p) {
  if (!p.label) throw PreconditionError("pair '" + p.id + "' has no label");
  DatasetRecord r;
  r.id = p.id;
  r.premise = p.premise;
  r.hypothesis = p.hypothesis;
  r.label = *p.label;
  r.label_source = p.label_source;
  r.extra["operation"] = to_string(p.operation);
  r.extra["conj_word"] = p.conj_word;
  return r;
}

// Predictions as JSON-lines {id, label}.
inline std::unordered_map<std::string, Label> load_predictions(const std::filesystem::path& path) {
  std::unordered_map<std::string, Label> out;
  std::size_t line = 0;
  for (const auto& j : util::read_jsonl(path)) {
    ++line;
    try {
      const std::string id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
      const auto key = j.contains("label") ? "label" : "prediction";
      if (!out.emplace(id, parse_label(j.at(key).get<std::string>())).second)
        throw Error("duplicate prediction for '" + id + "'");
    } catch (const std::exception& e) {
      throw FormatError(e.what(), line);
    }
  }
  return out;
}

inline constexpr std::array<std::string_view, 8> kBuckets = {
    "and", "or", "but", "multiple", "quantifier", "negation", "boolean", "non-boolean"};

struct BucketStats {
  std::size_t size = 0;
  std::size_t correct = 0;
  // Absent for empty buckets.
  std::optional<double> accuracy() const {
    if (size == 0) return std::nullopt;
    return static_cast<double>(correct) / static_cast<double>(size);
  }
};

struct EvalReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  std::map<std::string, BucketStats> buckets;
  std::array<std::array<std::size_t, 3>, 3> confusion{};  // [gold][predicted]

  double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }

  util::ordered_json to_json() const {
    util::ordered_json j;
    j["total"] = total;
    j["accuracy"] = accuracy();
    for (auto name : kBuckets) {
      const auto& b = buckets.at(std::string(name));
      util::ordered_json row;
      row["size"] = b.size;
      const auto acc = b.accuracy();
      row["accuracy"] = acc ? util::ordered_json(*acc) : util::ordered_json(nullptr);
      j["buckets"][std::string(name)] = row;
    }
    util::ordered_json cm = util::ordered_json::object();
    for (auto g : kAllLabels) {
      util::ordered_json row;
      for (auto p : kAllLabels) row[std::string(to_string(p))] = confusion[label_index(g)][label_index(p)];
      cm[std::string(to_string(g))] = row;
    }
    j["confusion"] = cm;
    return j;
  }

  // One-row table in the layout of the per-conjunction comparison tables.
  std::string to_markdown(const std::string& model_name = "model") const {
    auto pct = [](std::optional<double> a) {
      if (!a) return std::string("-");
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", 100.0 * *a);
      return std::string(buf);
    };
    std::string out = "| Model | Overall |";
    std::string rule = "|---|---:|";
    std::string sizes = "| (n) | " + std::to_string(total) + " |";
    std::string row = "| " + model_name + " | " + pct(total ? std::optional(accuracy()) : std::nullopt) + " |";
    for (auto name : kBuckets) {
      const auto& b = buckets.at(std::string(name));
      out += " " + std::string(name) + " |";
      rule += "---:|";
      sizes += " " + std::to_string(b.size) + " |";
      row += " " + pct(b.accuracy()) + " |";
    }
    out += "\n" + rule + "\n" + row + "\n" + sizes + "\n\n| gold \\ predicted | entailment | neutral | contradiction |\n|---|---:|---:|---:|\n";
    for (auto g : kAllLabels) {
      out += "| " + std::string(to_string(g)) + " |";
      for (auto p : kAllLabels) out += " " + std::to_string(confusion[label_index(g)][label_index(p)]) + " |";
      out += "\n";
    }
    return out;
  }
};

// Bucket names a record belongs to. Buckets overlap.
inline std::vector<std::string> bucket_membership(const DatasetRecord& r, const Lexicons& lex = {}) {
  std::vector<std::string> out;
  const auto f = detect_features(tokenize(r.premise), lex);
  std::set<std::string> conj;
  for (const auto& t : f.conjunction_types) conj.insert(std::string(conjunction_bucket(t)));
  for (const auto* name : {"and", "or", "but"})
    if (conj.count(name)) out.emplace_back(name);
  if (f.multiple()) out.emplace_back("multiple");
  if (f.has_quantifier) out.emplace_back("quantifier");
  if (f.has_negation) out.emplace_back("negation");
  if (r.boolean) out.emplace_back(*r.boolean ? "boolean" : "non-boolean");
  return out;
}

inline EvalReport evaluate(const std::unordered_map<std::string, Label>& predictions, const LabeledDataset& gold,
                           const Lexicons& lex = {}) {
  std::set<std::string> gold_ids;
  for (const auto& r : gold.records) gold_ids.insert(r.id);
  std::vector<std::string> unknown;
  for (const auto& [id, l] : predictions)
    if (!gold_ids.count(id)) unknown.push_back(id);
  if (!unknown.empty()) throw PreconditionError("predictions for unknown id '" + unknown.front() + "' (" +
                                                std::to_string(unknown.size()) + " unknown)");

  EvalReport rep;
  for (auto name : kBuckets) rep.buckets[std::string(name)];
  for (const auto& r : gold.records) {
    auto it = predictions.find(r.id);
    if (it == predictions.end()) throw PreconditionError("missing prediction for id '" + r.id + "'");
    const bool ok = it->second == r.label;
    ++rep.total;
    rep.correct += ok;
    ++rep.confusion[label_index(r.label)][label_index(it->second)];
    for (const auto& b : bucket_membership(r, lex)) {
      ++rep.buckets[b].size;
      rep.buckets[b].correct += ok;
    }
  }
  return rep;
}

// Chance-corrected agreement (p_o - p_e) / (1 - p_e); 1 when both are 1.
template <typename T>
double cohen_kappa(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size())
    throw PreconditionError("annotation lists differ in length (" + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")");
  if (a.empty()) throw PreconditionError("cohen_kappa needs at least one item");
  const double n = static_cast<double>(a.size());
  std::map<T, double> ma, mb;
  double agree = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma[a[i]] += 1.0 / n;
    mb[b[i]] += 1.0 / n;
    agree += a[i] == b[i];
  }
  const double p_o = agree / n;
  double p_e = 0.0;
  for (const auto& [c, pa] : ma)
    if (auto it = mb.find(c); it != mb.end()) p_e += pa * it->second;
  if (std::abs(1.0 - p_e) < 1e-15) return p_o >= 1.0 - 1e-15 ? 1.0 : 0.0;
  return (p_o - p_e) / (1.0 - p_e);
}

struct InstabilityStats {
  double mean_acc = 0.0;
  double total_var = 0.0;
  double independent_var = 0.0;
  double covariance_term = 0.0;  // total_var - independent_var, signed

  double total_std() const { return std::sqrt(total_var); }
  double independent_std() const { return std::sqrt(independent_var); }
};

// correctness[s][e] in {0, 1}: seed s got example e right. Variances over
// seeds use the unbiased (n - 1) normalizer.
inline InstabilityStats instability_stats(const std::vector<std::vector<int>>& correctness) {
  const std::size_t seeds = correctness.size();
  if (seeds < 2) throw PreconditionError("instability_stats needs at least 2 seeds");
  const std::size_t examples = correctness.front().size();
  if (examples < 2) throw PreconditionError("instability_stats needs at least 2 examples");
  for (const auto& row : correctness)
    if (row.size() != examples) throw PreconditionError("correctness matrix rows differ in length");

  const double S = static_cast<double>(seeds);
  const double E = static_cast<double>(examples);
  std::vector<double> acc(seeds, 0.0);
  for (std::size_t s = 0; s < seeds; ++s) {
    for (int c : correctness[s]) acc[s] += c;
    acc[s] /= E;
  }
  InstabilityStats st;
  for (double a : acc) st.mean_acc += a / S;
  for (double a : acc) st.total_var += (a - st.mean_acc) * (a - st.mean_acc) / (S - 1);

  double sum_var = 0.0;
  for (std::size_t e = 0; e < examples; ++e) {
    double mean = 0.0;
    for (std::size_t s = 0; s < seeds; ++s) mean += correctness[s][e] / S;
    double var = 0.0;
    for (std::size_t s = 0; s < seeds; ++s) var += (correctness[s][e] - mean) * (correctness[s][e] - mean) / (S - 1);
    sum_var += var;
  }
  st.independent_var = sum_var / (E * E);
  st.covariance_term = st.total_var - st.independent_var;
  return st;
}

}  // namespace conjnli
