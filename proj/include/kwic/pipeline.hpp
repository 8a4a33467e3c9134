#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kwic/baselines.hpp"
#include "kwic/corpus.hpp"
#include "kwic/evaluate.hpp"
#include "kwic/keyword.hpp"
#include "kwic/neural.hpp"
#include "kwic/select.hpp"
#include "kwic/synth.hpp"

namespace kwic {

enum class Algorithm : std::uint8_t { cnn = 0, logistic = 1, svm = 2 };

Algorithm algorithm_from_name(const std::string& name);
std::string algorithm_name(Algorithm a);

std::vector<std::string> default_footer_markers();

// One run configuration drives every subcommand; every pipeline
// hyperparameter surfaces here with its default.
struct RunConfig {
  std::string corpus_path;
  std::vector<KeywordPattern> keywords;
  int window_radius = 20;
  std::size_t vocab_size = 20000;
  std::size_t bow_features = 2000;

  bool drop_footer_in_privileged = true;
  bool detect_footers = false;
  std::vector<std::string> footer_markers = default_footer_markers();
  double footer_trailing_fraction = 0.25;

  CnnConfig cnn;
  GridSpec grid;
  bool grid_enabled = false;
  LinearConfig linear;

  SelectionConfig selection;
  std::vector<double> selection_sweep = {0.6, 0.7, 0.8, 0.9, 1.0};

  int folds = 5;
  std::vector<double> recall_targets = {0.75, 0.85, 0.90};

  std::string output_dir = "out";
  std::uint64_t seed = 0;

  void validate() const;
};

RunConfig load_run_config(const std::string& path);

SynthSpec load_synth_spec(const std::string& path);

// Subcommand entry points. Each validates its inputs fully before creating
// any output file.
void cmd_synth(const std::string& spec_path, const std::string& out_path);
void cmd_extract(const RunConfig& config);
void cmd_select(const RunConfig& config);
void cmd_train(const RunConfig& config, Algorithm algorithm, bool use_selected = false);
void cmd_evaluate(const RunConfig& config, const std::vector<Algorithm>& algorithms);
void cmd_report(const RunConfig& config);

// File layout under config.output_dir, shared by the subcommands and tests.
std::string occurrences_path(const RunConfig& config, const KeywordPattern& kw);
std::string selected_path(const RunConfig& config, const KeywordPattern& kw);
std::string model_path(const RunConfig& config, const KeywordPattern& kw, Algorithm a);
std::string vocab_path(const RunConfig& config, const KeywordPattern& kw);
std::string bow_space_path(const RunConfig& config, const KeywordPattern& kw);

}  // namespace kwic
