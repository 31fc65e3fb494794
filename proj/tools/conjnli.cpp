#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

// Eigen before httplib: <resolv.h> defines an _res macro.
#include "conjnli/conjnli.hpp"
#include "conjnli/annotate_server.hpp"

namespace {

using conjnli::util::ordered_json;

// "-" or empty means stdout.
void emit_jsonl(const std::string& path, const std::vector<ordered_json>& rows) {
  if (path.empty() || path == "-") {
    for (const auto& r : rows) std::cout << r.dump() << '\n';
    return;
  }
  conjnli::util::write_jsonl(path, rows);
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

conjnli::Lexicons load_lexicons(const std::string& path) {
  return path.empty() ? conjnli::Lexicons{} : conjnli::Lexicons::from_json(conjnli::util::read_json(path));
}

std::vector<conjnli::NliPair> load_pairs(const std::string& path) {
  std::vector<conjnli::NliPair> out;
  std::size_t line = 0;
  for (const auto& j : conjnli::util::read_jsonl(path)) {
    ++line;
    try {
      out.push_back(conjnli::pair_from_json(j));
    } catch (const std::exception& e) {
      throw conjnli::FormatError(e.what(), line);
    }
  }
  return out;
}

conjnli::EvalSets load_eval_sets(const std::vector<std::string>& specs) {
  conjnli::EvalSets sets;
  for (const auto& s : specs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw conjnli::Error("--eval expects name=path, got '" + s + "'");
    sets.emplace_back(s.substr(0, eq), conjnli::load_examples(s.substr(eq + 1)));
  }
  return sets;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conjunctive NLI pipeline: extraction, pair generation, labeling, training and evaluation"};
  app.require_subcommand(1);

  // extract
  std::string trees, ner, out, lexicon_path, features_path;
  auto* extract = app.add_subcommand("extract", "List coordinations found in bracketed parses");
  extract->add_option("--trees", trees, "One bracketed parse per line")->required()->check(CLI::ExistingFile);
  extract->add_option("--ner", ner, "Line-aligned BIO entity tags")->check(CLI::ExistingFile);
  extract->add_option("--features", features_path, "Quantifier/negation lexicon JSON")->check(CLI::ExistingFile);
  extract->add_option("--out", out, "Output JSON-lines (default stdout)");

  // generate
  std::uint64_t seed = 42;
  auto* generate = app.add_subcommand("generate", "Generate Remove/Add/Replace pairs from parses");
  generate->add_option("--trees", trees)->required()->check(CLI::ExistingFile);
  generate->add_option("--ner", ner)->check(CLI::ExistingFile);
  generate->add_option("--lexicon", lexicon_path, "antonyms, co_hyponyms, name_pool")->check(CLI::ExistingFile);
  generate->add_option("--features", features_path)->check(CLI::ExistingFile);
  generate->add_option("--seed", seed);
  generate->add_option("--out", out);

  // label
  std::string pairs_path, config_path;
  bool probes = false;
  auto* label = app.add_subcommand("label", "Apply the boolean/non-boolean heuristics");
  label->add_option("--pairs", pairs_path)->required()->check(CLI::ExistingFile);
  label->add_option("--config", config_path, "Heuristic switches and trigger words")->check(CLI::ExistingFile);
  label->add_flag("--either-or", probes, "Also emit either/or probes for entailed 'and' removals");
  label->add_option("--out", out);

  // build-adv
  std::size_t size = 15000;
  std::string report_path;
  auto* build_adv = app.add_subcommand("build-adv", "Sample a conjunction-balanced adversarial set");
  build_adv->add_option("--pairs", pairs_path, "Labeled pairs")->required()->check(CLI::ExistingFile);
  build_adv->add_option("--size", size, "Total size, divisible by 3");
  build_adv->add_option("--seed", seed);
  build_adv->add_option("--out", out);
  build_adv->add_option("--report", report_path, "Stratification report JSON");

  // train-iaft
  std::string base_path, adv_path, log_path, mode = "iaft";
  std::size_t epochs = 3;
  std::vector<std::string> eval_specs;
  bool no_filter = false;
  auto* train = app.add_subcommand("train-iaft", "Fine-tune the hashed linear classifier with IAFT or AFT");
  train->add_option("--base", base_path, "Base training set")->check(CLI::ExistingFile);
  train->add_option("--adv", adv_path, "Adversarial training set")->required()->check(CLI::ExistingFile);
  train->add_option("--epochs", epochs);
  train->add_option("--seed", seed);
  train->add_option("--mode", mode)->check(CLI::IsMember({"iaft", "aft", "hypothesis-only"}));
  train->add_option("--eval", eval_specs, "name=path evaluation set, repeatable");
  train->add_flag("--no-conjunction-filter", no_filter);
  train->add_option("--log", log_path, "Epoch log JSON (default stdout)");

  // srl-decode
  std::string lattices_path;
  auto* srl_decode = app.add_subcommand("srl-decode", "Constrained Viterbi over word-piece tag lattices");
  srl_decode->add_option("--lattices", lattices_path)->required()->check(CLI::ExistingFile);
  srl_decode->add_option("--out", out);

  // fusion-train / fusion-eval
  std::string data_path, head_path;
  std::size_t steps = 500;
  double lr = 0.05;
  auto* fusion_train = app.add_subcommand("fusion-train", "Fit the late-fusion head on embedding triples");
  fusion_train->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
  fusion_train->add_option("--steps", steps);
  fusion_train->add_option("--lr", lr);
  fusion_train->add_option("--seed", seed);
  fusion_train->add_option("--out", head_path, "Head parameters JSON")->required();

  auto* fusion_eval = app.add_subcommand("fusion-eval", "Accuracy of a fitted fusion head");
  fusion_eval->add_option("--head", head_path)->required()->check(CLI::ExistingFile);
  fusion_eval->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
  fusion_eval->add_option("--out", out, "Predictions JSON-lines");

  // eval
  std::string gold_path, pred_path, report_md, model_name = "model";
  auto* eval = app.add_subcommand("eval", "Accuracy with conjunction/quantifier/negation breakdowns");
  eval->add_option("--gold", gold_path, "JSON-lines or tab-separated dataset")->required()->check(CLI::ExistingFile);
  eval->add_option("--pred", pred_path, "JSON-lines {id, label}")->required()->check(CLI::ExistingFile);
  eval->add_option("--features", features_path)->check(CLI::ExistingFile);
  eval->add_option("--report", report_path, "Report JSON (default stdout)");
  eval->add_option("--report-md", report_md, "Markdown table");
  eval->add_option("--model-name", model_name);

  // serve
  std::string sessions_dir = "sessions", static_dir = "web", host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Run the two-round annotation service");
  serve->add_option("--dir", sessions_dir, "Journal directory");
  serve->add_option("--static", static_dir, "Browser client directory");
  serve->add_option("--host", host);
  serve->add_option("--port", port);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*extract) {
      const auto lex = load_lexicons(features_path);
      std::vector<ordered_json> rows;
      for (const auto& e : conjnli::read_corpus(trees, ner.empty() ? std::nullopt : std::optional(ner))) {
        const auto res = conjnli::find_coordinations(e.tree, e.sentence, lex);
        for (const auto& w : res.warnings) warn(w.source_id + " @" + std::to_string(w.conj_index) + ": " + w.reason);
        for (const auto& c : res.instances) rows.push_back(conjnli::to_json(c, e.sentence));
      }
      emit_jsonl(out, rows);
    } else if (*generate) {
      const auto repl = lexicon_path.empty() ? conjnli::ReplacementLexicon{}
                                             : conjnli::ReplacementLexicon::from_json(conjnli::util::read_json(lexicon_path));
      conjnli::GenerationConfig config{seed, load_lexicons(features_path)};
      std::vector<ordered_json> rows;
      for (const auto& e : conjnli::read_corpus(trees, ner.empty() ? std::nullopt : std::optional(ner))) {
        const auto res = conjnli::generate_pairs(e.sentence, e.tree, repl, config);
        for (const auto& w : res.warnings) warn(w.source_id + " @" + std::to_string(w.conj_index) + ": " + w.reason);
        for (const auto& p : res.pairs) rows.push_back(conjnli::to_json(p));
      }
      emit_jsonl(out, rows);
    } else if (*label) {
      const auto config = config_path.empty() ? conjnli::HeuristicConfig{}
                                              : conjnli::HeuristicConfig::from_json(conjnli::util::read_json(config_path));
      std::vector<ordered_json> rows;
      for (const auto& p : load_pairs(pairs_path)) {
        auto labeled = conjnli::with_heuristic_label(p, config);
        rows.push_back(conjnli::to_json(labeled));
        if (probes && labeled.operation == conjnli::Operation::Remove && labeled.conj_word == "and" &&
            labeled.label == conjnli::Label::Entailment)
          rows.push_back(conjnli::to_json(conjnli::either_or_probe(labeled)));
      }
      emit_jsonl(out, rows);
    } else if (*build_adv) {
      const auto set = conjnli::build_adversarial_set(load_pairs(pairs_path), size, seed);
      std::vector<ordered_json> rows;
      for (const auto& p : set.pairs) rows.push_back(conjnli::to_json(p));
      emit_jsonl(out, rows);
      if (!report_path.empty())
        conjnli::util::write_json(report_path, set.report.to_json());
      else
        std::cerr << set.report.to_json().dump(2) << '\n';
    } else if (*train) {
      const auto adv = conjnli::load_examples(adv_path);
      const auto evals = load_eval_sets(eval_specs);
      conjnli::ToyConfig tc;
      tc.seed = seed;
      conjnli::ToyClassifier model(tc);
      conjnli::TrainLog log;
      if (mode == "hypothesis-only") {
        for (std::size_t e = 0; e < epochs; ++e) conjnli::hypothesis_only_train(model, adv);
        log.mode = "hypothesis-only";
        log.seed = seed;
        conjnli::EpochRecord rec;
        rec.epoch = epochs;
        for (const auto& [name, data] : evals)
          rec.metrics.emplace_back(name, conjnli::accuracy(model, conjnli::blank_premises(data)));
        log.epochs.push_back(rec);
      } else {
        if (base_path.empty()) throw conjnli::Error("--base is required for " + mode);
        const auto base = conjnli::load_examples(base_path);
        model.fit_batch(base);
        if (mode == "iaft")
          log = conjnli::iaft_train(model, base, adv, {epochs, seed, !no_filter}, evals);
        else
          log = conjnli::aft_train(model, adv, epochs, seed, evals);
      }
      if (log_path.empty())
        std::cout << log.to_json().dump(2) << '\n';
      else
        conjnli::util::write_json(log_path, log.to_json());
    } else if (*srl_decode) {
      std::vector<ordered_json> rows;
      for (const auto& j : conjnli::util::read_jsonl(lattices_path)) {
        const auto lattice = conjnli::srl::lattice_from_json(j);
        const auto d = conjnli::srl::constrained_viterbi(lattice);
        ordered_json r;
        r["piece_tags"] = d.tags;
        r["word_tags"] = conjnli::srl::recover_word_tags(d.tags, lattice.wordpiece_map);
        r["score"] = d.score;
        rows.push_back(std::move(r));
      }
      emit_jsonl(out, rows);
    } else if (*fusion_train) {
      const auto data = conjnli::srl::load_embeddings(data_path);
      if (data.empty()) throw conjnli::Error("no embedding records in " + data_path);
      auto head = conjnli::srl::FusionHead::random(data[0].c_nli.size(), data[0].c_p.size(), data[0].c_h.size(), seed);
      const double loss = conjnli::srl::fit_fusion_head(head, data, {steps, lr, seed});
      conjnli::util::write_json(head_path, head.to_json());
      std::cout << ordered_json{{"loss", loss}, {"accuracy", conjnli::srl::fusion_accuracy(head, data)}}.dump() << '\n';
    } else if (*fusion_eval) {
      const auto head = conjnli::srl::FusionHead::from_json(conjnli::util::read_json(head_path));
      const auto data = conjnli::srl::load_embeddings(data_path);
      if (!out.empty()) {
        std::vector<ordered_json> rows;
        for (const auto& x : data) rows.push_back({{"id", x.id}, {"label", conjnli::to_string(head.predict(x))}});
        emit_jsonl(out, rows);
      }
      std::cout << ordered_json{{"accuracy", conjnli::srl::fusion_accuracy(head, data)}, {"n", data.size()}}.dump()
                << '\n';
    } else if (*eval) {
      const auto gold = conjnli::load_dataset(gold_path);
      const auto report = conjnli::evaluate(conjnli::load_predictions(pred_path), gold, load_lexicons(features_path));
      if (report_path.empty())
        std::cout << report.to_json().dump(2) << '\n';
      else
        conjnli::util::write_json(report_path, report.to_json());
      if (!report_md.empty()) {
        std::ofstream md(report_md);
        md << report.to_markdown(model_name);
        if (!md) throw conjnli::Error("cannot write " + report_md);
      }
    } else if (*serve) {
      conjnli::annotate::SessionStore store(sessions_dir);
      httplib::Server server;
      conjnli::annotate::install_routes(server, store, static_dir);
      std::cerr << "serving on http://" << host << ":" << port << '\n';
      if (!server.listen(host, port)) throw conjnli::Error("cannot listen on " + host + ":" + std::to_string(port));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
