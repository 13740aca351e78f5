// drc_main.cpp
// Command-line frontend: discourse relation classification over annotated
// segment pairs. One command per invocation; see README for the workflow.

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "drc/error.hpp"
#include "drc/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"drc: implicit discourse relation classification toolkit"};
  app.require_subcommand(1);

  drc::RunConfig config;
  std::string config_file;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_file, "key = value configuration file");
    cmd->add_option("--train", config.train_path, "training corpus (jsonl)");
    cmd->add_option("--dev", config.dev_path, "development corpus (jsonl)");
    cmd->add_option("--test", config.test_path, "test corpus (jsonl)");
    cmd->add_option("--lexicon", config.lexicon_path, "Brown cluster lexicon (tsv)");
    cmd->add_option("--variant", config.variant, "average | average+srl | allfeats");
    cmd->add_option("--seed", config.seed, "run seed; the only source of randomness");
    cmd->add_option("--out", config.out_dir, "output directory");
    cmd->add_flag("--detect-dates-numbers", config.detect_dates_numbers,
                  "derive missing date/number counts from tokens");
    cmd->add_flag("--head-first", config.head_first,
                  "span head is the first token instead of the last");
    cmd->add_flag("--first-last-pairs", config.first_last_pairs,
                  "expert: conjoin first/last words across segments");
    cmd->add_option("--brown-prefix", config.brown_prefix,
                    "cluster path prefix length for Brown feature types");
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus with planted signals");
  add_common(synth);
  synth->add_option("--n-train", config.n_train, "training instances");
  synth->add_option("--n-dev", config.n_dev, "development instances");
  synth->add_option("--n-test", config.n_test, "test instances");

  CLI::App* extract = app.add_subcommand("extract", "dump feature strings per instance and type");
  add_common(extract);

  CLI::App* select = app.add_subcommand("select", "greedy feature-type selection on dev F1");
  add_common(select);
  select->add_option("--budget", config.budget, "max feature types per relation");
  select->add_flag("--exhaustive", config.exhaustive, "brute-force subsets (pool <= 8)");

  CLI::App* train = app.add_subcommand("train", "train a classifier suite from a selection report");
  add_common(train);
  train->add_option("--selection", config.selection_path,
                    "selection report (default <out>/selection.json)");
  train->add_option("--c", config.c, "default / AllFeats shared C");

  CLI::App* predict = app.add_subcommand("predict", "score a corpus with a trained suite");
  add_common(predict);
  predict->add_option("--suite", config.suite_path, "suite manifest (default <out>/suite.json)");
  predict->add_option("--predictions", config.predictions_path,
                      "output path (default <out>/predictions.jsonl)");

  CLI::App* evaluate = app.add_subcommand("evaluate", "one-vs-all P/R/F1 against gold labels");
  add_common(evaluate);
  evaluate->add_option("--predictions", config.predictions_path,
                       "predictions file (default <out>/predictions.jsonl)");

  CLI::App* inspect = app.add_subcommand("inspect", "ranked feature-weight report for a model");
  add_common(inspect);
  inspect->add_option("--model", config.model_path, "model file")->required();
  inspect->add_option("-k,--top-k", config.top_k, "rows per sign");
  inspect->add_option("--sign", config.sign, "positive | negative | both");

  CLI::App* pipeline =
      app.add_subcommand("pipeline", "select, train, predict and evaluate in one run");
  add_common(pipeline);
  pipeline->add_option("--budget", config.budget, "max feature types per relation");
  pipeline->add_flag("--exhaustive", config.exhaustive, "brute-force subsets (pool <= 8)");
  pipeline->add_option("--c", config.c, "default / AllFeats shared C");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : drc::kExitUsage;
  }

  // Config file first, then flags override it.
  if (!config_file.empty()) {
    drc::RunConfig from_file;
    try {
      drc::apply_config_file(from_file, config_file);
    } catch (const drc::ConfigError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return drc::kExitUsage;
    }
    // Re-parse so command-line flags win over the file.
    std::swap(config, from_file);
    try {
      app.clear();
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      int code = app.exit(e);
      return code == 0 ? 0 : drc::kExitUsage;
    }
  }

  return drc::run_command(app.get_subcommands().front()->get_name(), config);
}
