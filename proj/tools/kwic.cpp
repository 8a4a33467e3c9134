// Command-line driver for the keyword-occurrence pipeline.
//
//   kwic synth    --spec spec.json --out corpus.jsonl
//   kwic extract  --config run.json [overrides]
//   kwic select   --config run.json [overrides]
//   kwic train    --config run.json --algorithm cnn [--use-selected]
//   kwic evaluate --config run.json --algorithm cnn --algorithm logistic
//   kwic report   --config run.json
//
// Flags override config-file fields. Exit code 0 on success; on failure a
// one-line JSON error record goes to stderr and the exit code is nonzero.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kwic/pipeline.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::string corpus;
  std::string output_dir;
  std::vector<std::string> keywords;
  int window_radius = -1;
  int folds = -1;
  int k = -1;
  double cutoff = -1.0;
  std::string approach;
  bool has_seed = false;
  std::uint64_t seed = 0;
};

void add_common_options(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--config", ov.config_path, "Run config file (JSON)")->required();
  cmd->add_option("--corpus", ov.corpus, "Override corpus path");
  cmd->add_option("--output-dir", ov.output_dir, "Override output directory");
  cmd->add_option("--keyword", ov.keywords, "Override keyword list (repeatable)");
  cmd->add_option("--window-radius", ov.window_radius, "Override window radius");
  cmd->add_option("--folds", ov.folds, "Override fold count");
  cmd->add_option("--k", ov.k, "Override selection neighbor count");
  cmd->add_option("--cutoff", ov.cutoff, "Override selection cutoff");
  cmd->add_option("--approach", ov.approach, "Override selection approach (one|two)");
  cmd->add_option("--seed", ov.seed, "Override global seed")
      ->each([&ov](const std::string&) { ov.has_seed = true; });
}

kwic::RunConfig resolve_config(const Overrides& ov) {
  kwic::RunConfig config = kwic::load_run_config(ov.config_path);
  if (!ov.corpus.empty()) config.corpus_path = ov.corpus;
  if (!ov.output_dir.empty()) config.output_dir = ov.output_dir;
  if (!ov.keywords.empty()) {
    config.keywords.clear();
    for (const auto& k : ov.keywords) config.keywords.push_back(kwic::KeywordPattern::parse(k));
  }
  if (ov.window_radius > 0) config.window_radius = ov.window_radius;
  if (ov.folds > 0) config.folds = ov.folds;
  if (ov.k > 0) config.selection.k = ov.k;
  if (ov.cutoff >= 0.0) config.selection.cutoff = ov.cutoff;
  if (!ov.approach.empty()) {
    if (ov.approach == "one" || ov.approach == "1")
      config.selection.approach = kwic::Approach::one;
    else if (ov.approach == "two" || ov.approach == "2")
      config.selection.approach = kwic::Approach::two;
    else
      throw kwic::ValidationError("unknown approach: " + ov.approach);
  }
  if (ov.has_seed) config.seed = ov.seed;
  return config;
}

int fail(const std::string& type, const std::string& message, int code) {
  nlohmann::json record{{"error", {{"type", type}, {"message", message}}}};
  std::cerr << record.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Keyword-occurrence classification pipeline for privilege review"};
  app.require_subcommand(1);

  std::string spec_path, synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled corpus");
  synth->add_option("--spec", spec_path, "Synthetic corpus spec (JSON)")->required();
  synth->add_option("--out", synth_out, "Output corpus path (JSONL)")->required();

  Overrides extract_ov, select_ov, train_ov, eval_ov, report_ov;
  auto* extract = app.add_subcommand("extract", "Extract labeled keyword occurrences");
  add_common_options(extract, extract_ov);

  auto* sel = app.add_subcommand("select", "Score and filter candidate positives");
  add_common_options(sel, select_ov);

  std::string train_algorithm = "cnn";
  bool use_selected = false;
  auto* train = app.add_subcommand("train", "Train per-keyword occurrence models");
  add_common_options(train, train_ov);
  train->add_option("--algorithm", train_algorithm, "cnn, logistic or svm");
  train->add_flag("--use-selected", use_selected, "Train on the select-filtered occurrences");

  std::vector<std::string> eval_algorithms;
  auto* evaluate = app.add_subcommand("evaluate", "Cross-validated metric reports");
  add_common_options(evaluate, eval_ov);
  evaluate->add_option("--algorithm", eval_algorithms, "Algorithms to evaluate (repeatable)");

  auto* report = app.add_subcommand("report", "Combined report from evaluation output");
  add_common_options(report, report_ov);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cout << app.help() << '\n';
    return fail("usage", e.what(), 2);
  }

  try {
    if (synth->parsed()) {
      kwic::cmd_synth(spec_path, synth_out);
    } else if (extract->parsed()) {
      kwic::cmd_extract(resolve_config(extract_ov));
    } else if (sel->parsed()) {
      kwic::cmd_select(resolve_config(select_ov));
    } else if (train->parsed()) {
      kwic::cmd_train(resolve_config(train_ov), kwic::algorithm_from_name(train_algorithm),
                      use_selected);
    } else if (evaluate->parsed()) {
      std::vector<kwic::Algorithm> algorithms;
      if (eval_algorithms.empty()) eval_algorithms = {"cnn", "logistic"};
      for (const auto& name : eval_algorithms)
        algorithms.push_back(kwic::algorithm_from_name(name));
      kwic::cmd_evaluate(resolve_config(eval_ov), algorithms);
    } else if (report->parsed()) {
      kwic::cmd_report(resolve_config(report_ov));
    }
  } catch (const kwic::ParseError& e) {
    return fail("parse", e.what(), 1);
  } catch (const kwic::ValidationError& e) {
    return fail("validation", e.what(), 1);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 3);
  }
  return 0;
}
