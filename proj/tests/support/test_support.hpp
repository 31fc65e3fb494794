#pragma once

// Shared fixtures and synthetic-data generators for the unit and acceptance
// suites.

#include <atomic>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "conjnli/conjnli.hpp"
#include "conjnli/annotate_server.hpp"

namespace conjnli::testing {

inline std::filesystem::path data_file(const std::string& name) { return std::filesystem::path(CONJNLI_DATA_DIR) / name; }

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("conjnli-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

template <typename T>
const T& pick(util::Rng& rng, const std::vector<T>& items) {
  return items[rng.below(items.size())];
}

// Arbitrary well-formed tree: random labels, arity and tokens, including
// bracket tokens that need escaping.
inline std::string random_bracketed(util::Rng& rng, std::size_t max_depth = 5) {
  static const std::vector<std::string> labels{"S", "NP", "VP", "PP", "NP-SBJ", "SBAR", "ADJP", "X"};
  static const std::vector<std::string> leaf_labels{"NN", "VB", "DT", "CC", "-LRB-", "-NONE-", "PRP$", ","};
  static const std::vector<std::string> tokens{"dog", "ran", "the", "and", "(", ")", "{", "]", "x1", "n't", "'s", ","};
  std::string out;
  auto build = [&](auto&& self, std::size_t depth) -> void {
    if (depth == 0 || rng.below(3) == 0) {
      out += "(" + pick(rng, leaf_labels) + " " + detail::escape_token(pick(rng, tokens)) + ")";
      return;
    }
    out += "(" + pick(rng, labels);
    const std::size_t kids = 1 + rng.below(4);
    for (std::size_t i = 0; i < kids; ++i) {
      out += " ";
      self(self, depth - 1);
    }
    out += ")";
  };
  build(build, max_depth);
  return out;
}

struct SyntheticSentenceOptions {
  bool allow_named_entities = true;
  bool allow_triggers = true;
  bool allow_negation = true;
  bool allow_lists = true;
};

// Parses of template sentences with one or two coordinations. Conjunction
// words are drawn from and/or/but/nor so every bucket is populated.
inline std::string random_coordination_tree(util::Rng& rng, const SyntheticSentenceOptions& opt = {}) {
  static const std::vector<std::string> nouns{"river", "bridge", "garden", "tower", "market", "harbor",
                                              "school", "castle", "valley", "library", "museum", "station"};
  static const std::vector<std::string> verbs{"visited", "painted", "built", "described", "sold", "opened"};
  static const std::vector<std::string> names{"Franklin", "Marshall", "Worcester", "Columbia", "Reggi", "Phelps"};
  static const std::vector<std::string> conj{"and", "or", "but", "nor"};

  auto np = [&]() { return "(NP (DT the) (NN " + pick(rng, nouns) + "))"; };
  auto coord = [&](const std::string& c) {
    if (opt.allow_named_entities && rng.below(6) == 0)
      return "(NP (NNP " + pick(rng, names) + ") (CC " + c + ") (NNP " + pick(rng, names) + ") (NNP College))";
    if (opt.allow_lists && rng.below(5) == 0)
      return "(NP " + np() + " (, ,) " + np() + " (, ,) (CC " + c + ") " + np() + ")";
    return "(NP " + np() + " (CC " + c + ") " + np() + ")";
  };

  std::string vp;
  const std::string c1 = pick(rng, conj);
  const bool negated = opt.allow_negation && rng.below(4) == 0;
  if (negated)
    vp = "(VP (VBD did) (RB not) (VP (VB " + std::string(pick(rng, verbs)) + ") " + coord(c1) + "))";
  else
    vp = "(VP (VBD " + pick(rng, verbs) + ") " + coord(c1) + ")";
  std::string subject = np();
  if (rng.below(4) == 0) subject = coord(pick(rng, conj));
  std::string prefix;
  if (opt.allow_triggers && rng.below(6) == 0) prefix = "(PP (IN In) (NP (NN total))) (, ,) ";
  return "(S " + prefix + subject + " " + vp + " (. .))";
}

// Labeled pairs from `n` synthetic sentences via the full pipeline.
inline std::vector<NliPair> synthetic_labeled_pairs(std::size_t n, std::uint64_t seed,
                                                    const HeuristicConfig& config = {}) {
  util::Rng rng(seed, "sentences");
  ReplacementLexicon lex;
  lex.antonyms = {{"river", "desert"}, {"bridge", "tunnel"}, {"built", "destroyed"}};
  lex.co_hyponyms = {{"garden", {"orchard", "park"}}, {"tower", {"spire", "mast"}}};
  lex.name_pool = {"Franklin", "Marshall", "Worcester", "Columbia"};
  std::vector<NliPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto tree = parse_bracketed(random_coordination_tree(rng));
    Sentence s{yield_tokens(tree), std::nullopt, "synthetic:" + std::to_string(i + 1)};
    for (auto& p : generate_pairs(s, tree, lex, {seed, {}}).pairs) out.push_back(with_heuristic_label(p, config));
  }
  return out;
}

// Two-feature conflict task. Base examples map a key word to a label; the
// adversarial examples put "and" before the key and permute the mapping, so
// only a model that keeps the base data around retains both.
struct ConflictTask {
  std::vector<Example> base_train, base_eval, adv_train, adv_eval;
};

inline ConflictTask make_conflict_task(std::uint64_t seed, std::size_t base_n = 3000, std::size_t adv_n = 600,
                                       std::size_t eval_n = 600) {
  static const std::vector<std::string> keys{"alpha", "bravo", "charlie", "delta", "echo", "foxtrot"};
  static const std::vector<std::string> filler{"we", "saw", "a", "big", "small", "red", "blue", "quiet", "road",
                                               "house", "field", "boat", "cloud", "stone", "tree", "lamp"};
  auto base_label = [](std::size_t k) { return static_cast<Label>(k % 3); };
  auto adv_label = [](std::size_t k) { return static_cast<Label>((k + 1) % 3); };
  util::Rng rng(seed, "conflict");
  auto words = [&](std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + pick(rng, filler);
    return s;
  };
  auto make = [&](bool adversarial) {
    const std::size_t k = rng.below(keys.size());
    const std::string key = keys[k];
    Example ex;
    if (adversarial)
      ex.premise = words(3) + " and " + key + " " + words(2) + ".";
    else
      ex.premise = words(3) + " " + key + " or " + words(2) + ".";
    ex.hypothesis = words(2) + " " + key + ".";
    ex.label = adversarial ? adv_label(k) : base_label(k);
    return ex;
  };
  ConflictTask t;
  for (std::size_t i = 0; i < base_n; ++i) t.base_train.push_back(make(false));
  for (std::size_t i = 0; i < eval_n; ++i) t.base_eval.push_back(make(false));
  for (std::size_t i = 0; i < adv_n; ++i) t.adv_train.push_back(make(true));
  for (std::size_t i = 0; i < eval_n; ++i) t.adv_eval.push_back(make(true));
  return t;
}

// Embedding triples whose label depends on c_p and c_h only; c_nli is noise.
inline std::vector<srl::EmbeddingTriple> make_fusion_task(std::size_t n, std::uint64_t seed, Eigen::Index d_nli = 8,
                                                          Eigen::Index d_p = 6, Eigen::Index d_h = 6) {
  util::Rng rng(seed, "fusion");
  Eigen::MatrixXd a(3, d_p), b(3, d_h);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.normal();
  std::vector<srl::EmbeddingTriple> out;
  for (std::size_t i = 0; i < n; ++i) {
    srl::EmbeddingTriple x;
    x.id = "f" + std::to_string(i);
    x.c_nli = Eigen::VectorXd(d_nli);
    x.c_p = Eigen::VectorXd(d_p);
    x.c_h = Eigen::VectorXd(d_h);
    for (Eigen::Index j = 0; j < d_nli; ++j) x.c_nli(j) = rng.normal();
    for (Eigen::Index j = 0; j < d_p; ++j) x.c_p(j) = rng.normal();
    for (Eigen::Index j = 0; j < d_h; ++j) x.c_h(j) = rng.normal();
    Eigen::Index best;
    (a * x.c_p + b * x.c_h).maxCoeff(&best);
    x.label = static_cast<Label>(best);
    out.push_back(std::move(x));
  }
  return out;
}

// Annotation service on an ephemeral local port.
class LocalService {
 public:
  explicit LocalService(const std::filesystem::path& dir, annotate::SessionStore::Clock clock = annotate::utc_now)
      : store_(dir, std::move(clock)) {
    annotate::install_routes(server_, store_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalService() {
    server_.stop();
    thread_.join();
  }
  LocalService(const LocalService&) = delete;
  LocalService& operator=(const LocalService&) = delete;

  httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }
  annotate::SessionStore& store() { return store_; }
  int port() const { return port_; }

 private:
  annotate::SessionStore store_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

inline util::ordered_json post_json(httplib::Client& c, const std::string& path, const util::ordered_json& body,
                                    int* status = nullptr) {
  auto res = c.Post(path, body.dump(), "application/json");
  if (!res) throw Error("request to " + path + " failed");
  if (status) *status = res->status;
  return util::ordered_json::parse(res->body);
}

inline util::ordered_json get_json(httplib::Client& c, const std::string& path, int* status = nullptr) {
  auto res = c.Get(path);
  if (!res) throw Error("request to " + path + " failed");
  if (status) *status = res->status;
  return util::ordered_json::parse(res->body);
}

}  // namespace conjnli::testing
