// pipeline.hpp
// Batch commands behind the CLI: synth, extract, select, train, predict,
// evaluate, inspect and the full pipeline. Every command is idempotent given
// identical inputs and writes a run manifest with output checksums.

#ifndef DRC_PIPELINE_HPP
#define DRC_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "drc/corpus.hpp"
#include "drc/ensemble.hpp"
#include "drc/eval.hpp"
#include "drc/selection.hpp"
#include "drc/synth.hpp"

namespace drc {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunConfig {
  // Paths.
  std::string train_path;
  std::string dev_path;
  std::string test_path;
  std::string lexicon_path;
  std::string out_dir;
  std::string selection_path;    // defaults to <out>/selection.json
  std::string suite_path;        // defaults to <out>/suite.json
  std::string predictions_path;  // defaults to <out>/predictions.jsonl
  std::string model_path;        // inspect input

  std::string variant = "average";  // average | average+srl | allfeats
  std::uint64_t seed = 1;

  // Selection.
  int budget = 8;
  bool exhaustive = false;
  std::vector<double> c_grid = {0.01, 0.1, 1.0, 10.0};
  std::vector<std::uint64_t> min_count_grid = {1, 2, 5};

  // Training defaults (C is also the AllFeats shared C).
  double c = 1.0;
  double tolerance = 1e-6;
  int max_iter = 200;
  double positive_class_weight = 0.0;

  // Extraction.
  int brown_prefix = 8;
  bool head_first = false;
  bool first_last_pairs = false;
  bool detect_dates_numbers = false;

  // Synthesis.
  int n_train = 2000;
  int n_dev = 500;
  int n_test = 500;

  // Inspection.
  int top_k = 10;
  std::string sign = "both";
};

/// Key-value config file ("key = value", '#' comments). Unknown keys are
/// rejected. Returns the keys that were set, so flags can override the rest.
void apply_config_file(RunConfig& config, const std::string& path);

ExtractOptions extract_options(const RunConfig& config);
LoadOptions load_options(const RunConfig& config);
TrainConfig train_defaults(const RunConfig& config);
SelectionConfig selection_config(const RunConfig& config);

/// Candidate pool implied by the variant: "average" covers the surface,
/// syntax, coreference and Brown types; "average+srl" and "allfeats" add the
/// role-based types.
std::vector<Candidate> candidate_pool(const RunConfig& config);

void run_synth(const RunConfig& config);
void run_extract(const RunConfig& config);
SelectionResult run_select(const RunConfig& config);
void run_train(const RunConfig& config);
void run_predict(const RunConfig& config);
EvalReport run_evaluate(const RunConfig& config);
void run_inspect(const RunConfig& config);
void run_pipeline(const RunConfig& config);

/// Dispatches one command, mapping exceptions onto the documented exit codes
/// (0 ok, 1 usage, 2 data validation, 3 solver, 4 coverage). Messages go to
/// stderr.
int run_command(const std::string& command, const RunConfig& config);

}  // namespace drc

#endif  // DRC_PIPELINE_HPP
