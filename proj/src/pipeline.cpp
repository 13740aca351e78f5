#include "drc/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

#include "drc/error.hpp"
#include "drc/inspect.hpp"
#include "drc/util.hpp"

namespace drc {

namespace fs = std::filesystem;
using nlohmann::json;

ExtractOptions extract_options(const RunConfig& config) {
  ExtractOptions options;
  options.head_first = config.head_first;
  options.first_last_pairs = config.first_last_pairs;
  return options;
}

LoadOptions load_options(const RunConfig& config) {
  LoadOptions options;
  options.detect_dates_numbers = config.detect_dates_numbers;
  return options;
}

TrainConfig train_defaults(const RunConfig& config) {
  TrainConfig tc;
  tc.c = config.c;
  tc.tolerance = config.tolerance;
  tc.max_iter = config.max_iter;
  tc.positive_class_weight = config.positive_class_weight;
  tc.seed = config.seed;
  return tc;
}

SelectionConfig selection_config(const RunConfig& config) {
  SelectionConfig sc;
  sc.pool = candidate_pool(config);
  sc.budget = config.budget;
  sc.exhaustive = config.exhaustive;
  sc.train_defaults = train_defaults(config);
  return sc;
}

std::vector<Candidate> candidate_pool(const RunConfig& config) {
  GridSpec grid;
  grid.c_values = config.c_grid;
  grid.min_counts = config.min_count_grid;
  std::vector<Candidate> pool = {
      Candidate{FirstLastFeat{}, grid},
      Candidate{DatesNumbersFeat{}, grid},
      Candidate{ProductionRulesFeat{}, grid},
      Candidate{VerbFeat{}, grid},
      Candidate{CorefFeat{}, grid},
      Candidate{BrownFeat{config.brown_prefix}, grid},
      Candidate{PairwiseBrownFeat{config.brown_prefix}, grid},
  };
  if (config.variant == "average+srl" || config.variant == "allfeats") {
    pool.push_back(Candidate{FrameNetRolesFeat{false}, grid});
    pool.push_back(Candidate{FrameNetRolesFeat{true}, grid});
    pool.push_back(Candidate{PropBankRolesFeat{PropBankVariant::VerbNetClass, true}, grid});
    pool.push_back(Candidate{PropBankRolesFeat{PropBankVariant::LemmaCluster, true}, grid});
  } else if (config.variant != "average") {
    throw ConfigError("unknown variant '" + config.variant +
                      "' (expected average, average+srl or allfeats)");
  }
  return pool;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& value, const std::string& key, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse(item));
  }
  if (out.empty()) {
    throw ConfigError("config key '" + key + "': empty list");
  }
  return out;
}

void apply_kv(RunConfig& config, const std::string& key, const std::string& value) {
  if (key == "train") config.train_path = value;
  else if (key == "dev") config.dev_path = value;
  else if (key == "test") config.test_path = value;
  else if (key == "lexicon") config.lexicon_path = value;
  else if (key == "out") config.out_dir = value;
  else if (key == "selection") config.selection_path = value;
  else if (key == "suite") config.suite_path = value;
  else if (key == "predictions") config.predictions_path = value;
  else if (key == "model") config.model_path = value;
  else if (key == "variant") config.variant = value;
  else if (key == "seed") config.seed = parse_uint(value, "config key 'seed'");
  else if (key == "budget") config.budget = static_cast<int>(parse_uint(value, "config key 'budget'"));
  else if (key == "exhaustive") config.exhaustive = parse_bool(value, key);
  else if (key == "c_grid") {
    config.c_grid = parse_list<double>(value, key, [&](const std::string& item) {
      return parse_double(item, "config key 'c_grid'");
    });
  } else if (key == "min_count_grid") {
    config.min_count_grid = parse_list<std::uint64_t>(value, key, [&](const std::string& item) {
      return parse_uint(item, "config key 'min_count_grid'");
    });
  }
  else if (key == "c") config.c = parse_double(value, "config key 'c'");
  else if (key == "tolerance") config.tolerance = parse_double(value, "config key 'tolerance'");
  else if (key == "max_iter") config.max_iter = static_cast<int>(parse_uint(value, "config key 'max_iter'"));
  else if (key == "positive_class_weight") {
    config.positive_class_weight = parse_double(value, "config key 'positive_class_weight'");
  }
  else if (key == "brown_prefix") config.brown_prefix = static_cast<int>(parse_uint(value, "config key 'brown_prefix'"));
  else if (key == "head_first") config.head_first = parse_bool(value, key);
  else if (key == "first_last_pairs") config.first_last_pairs = parse_bool(value, key);
  else if (key == "detect_dates_numbers") config.detect_dates_numbers = parse_bool(value, key);
  else if (key == "n_train") config.n_train = static_cast<int>(parse_uint(value, "config key 'n_train'"));
  else if (key == "n_dev") config.n_dev = static_cast<int>(parse_uint(value, "config key 'n_dev'"));
  else if (key == "n_test") config.n_test = static_cast<int>(parse_uint(value, "config key 'n_test'"));
  else if (key == "top_k") config.top_k = static_cast<int>(parse_uint(value, "config key 'top_k'"));
  else if (key == "sign") config.sign = value;
  else throw ConfigError("unknown config key '" + key + "'");
}

json config_json(const RunConfig& config) {
  json obj;
  obj["train"] = config.train_path;
  obj["dev"] = config.dev_path;
  obj["test"] = config.test_path;
  obj["lexicon"] = config.lexicon_path;
  obj["out"] = config.out_dir;
  obj["variant"] = config.variant;
  obj["seed"] = config.seed;
  obj["budget"] = config.budget;
  obj["exhaustive"] = config.exhaustive;
  obj["c_grid"] = config.c_grid;
  obj["min_count_grid"] = config.min_count_grid;
  obj["c"] = config.c;
  obj["tolerance"] = config.tolerance;
  obj["max_iter"] = config.max_iter;
  obj["positive_class_weight"] = config.positive_class_weight;
  obj["brown_prefix"] = config.brown_prefix;
  obj["head_first"] = config.head_first;
  obj["first_last_pairs"] = config.first_last_pairs;
  obj["detect_dates_numbers"] = config.detect_dates_numbers;
  obj["n_train"] = config.n_train;
  obj["n_dev"] = config.n_dev;
  obj["n_test"] = config.n_test;
  return obj;
}

void require_out(const RunConfig& config) {
  if (config.out_dir.empty()) {
    throw ConfigError("--out is required for this command");
  }
  fs::create_directories(config.out_dir);
}

std::string out_path(const RunConfig& config, const std::string& name) {
  return (fs::path(config.out_dir) / name).string();
}

/// Collects every file under out_dir (relative paths) and writes the manifest.
/// Relative paths keep two runs into the same directory byte-identical.
void write_manifest(const RunConfig& config, const std::string& command,
                    const std::vector<std::string>& outputs) {
  json manifest;
  manifest["format"] = "drc-manifest";
  manifest["version"] = 1;
  manifest["command"] = command;
  manifest["config"] = config_json(config);
  manifest["config_fingerprint"] = to_hex(fnv1a(manifest["config"].dump()));
  manifest["seed"] = config.seed;
  manifest["versions"] = {{"tool", kToolVersion},
                          {"corpus_format", 1},
                          {"model_format", 1},
                          {"suite_format", 1},
                          {"selection_format", 1}};
  json checksums;
  for (const std::string& output : outputs) {
    checksums[output] = to_hex(file_checksum(out_path(config, output)));
  }
  manifest["outputs"] = std::move(checksums);
  std::ofstream out(out_path(config, "manifest.json"));
  if (!out) {
    throw FormatError("cannot open manifest for writing: " + out_path(config, "manifest.json"));
  }
  out << manifest.dump(2) << "\n";
}

Corpus load_required(const std::string& path, const char* flag, const RunConfig& config) {
  if (path.empty()) {
    throw ConfigError(std::string("--") + flag + " is required for this command");
  }
  return load_instances(path, load_options(config));
}

BrownLexicon load_required_lexicon(const RunConfig& config) {
  if (config.lexicon_path.empty()) {
    throw ConfigError("--lexicon is required for this command");
  }
  return load_brown_lexicon(config.lexicon_path);
}

std::string selection_file(const RunConfig& config) {
  return config.selection_path.empty() ? out_path(config, "selection.json")
                                       : config.selection_path;
}

std::string suite_file(const RunConfig& config) {
  return config.suite_path.empty() ? out_path(config, "suite.json") : config.suite_path;
}

std::string predictions_file(const RunConfig& config) {
  return config.predictions_path.empty() ? out_path(config, "predictions.jsonl")
                                         : config.predictions_path;
}

std::vector<std::string> suite_outputs(const RunConfig& config) {
  std::vector<std::string> outputs = {"suite.json"};
  for (const auto& entry : fs::directory_iterator(fs::path(config.out_dir) / "models")) {
    outputs.push_back("models/" + entry.path().filename().string());
  }
  std::sort(outputs.begin(), outputs.end());
  return outputs;
}

void write_predictions(const ClassifierSuite& suite, const Corpus& test,
                       const BrownLexicon& lexicon, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw FormatError("cannot open predictions file for writing: " + path);
  }
  for (const InstancePair& instance : test) {
    json record;
    record["id"] = instance.id;
    json scores;
    json predicted = json::array();
    for (Relation r : kAllRelations) {
      const double s = ensemble_score(suite.ensembles.at(r), instance, lexicon);
      scores[std::string(relation_name(r))] = s;
      if (s > 0.5) predicted.push_back(std::string(relation_name(r)));
    }
    record["scores"] = std::move(scores);
    record["predicted"] = std::move(predicted);
    out << record.dump() << "\n";
  }
}

PredictionMap read_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open predictions file: " + path);
  }
  PredictionMap predictions;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(where + ": invalid JSON: " + e.what());
    }
    if (!record.contains("id") || !record["id"].is_string()) {
      throw FormatError(where + ": field 'id': missing or not a string");
    }
    std::set<Relation> labels;
    if (record.contains("predicted")) {
      for (const json& name : record["predicted"]) {
        auto r = relation_from_name(name.get<std::string>());
        if (!r) {
          throw FormatError(where + ": field 'predicted': unknown relation '" +
                            name.get<std::string>() + "'");
        }
        labels.insert(*r);
      }
    }
    predictions[record["id"].get<std::string>()] = std::move(labels);
  }
  return predictions;
}

ClassifierSuite train_from_selection(const RunConfig& config, const Corpus& train_corpus,
                                     const SelectionResult& selection,
                                     const BrownLexicon& lexicon, TrainReport* report) {
  RelationSelections selections = to_selections(selection);
  // A relation for which greedy found nothing still needs one member; fall
  // back to the first pool candidate at default hyperparameters.
  for (Relation r : kAllRelations) {
    if (selections[r].empty()) {
      MemberConfig mc;
      mc.ftype = candidate_pool(config).front().ftype;
      mc.train = train_defaults(config);
      selections[r].push_back(mc);
    }
  }
  if (config.variant == "allfeats") {
    return train_allfeats(train_corpus, selections, train_defaults(config), lexicon,
                          extract_options(config), report);
  }
  auto variant = suite_variant_from_name(config.variant);
  if (!variant) {
    throw ConfigError("unknown variant '" + config.variant + "'");
  }
  return train_suite(train_corpus, selections, lexicon, *variant, extract_options(config),
                     report);
}

void print_warnings(const TrainReport& report) {
  for (const std::string& warning : report.warnings) {
    std::cerr << "warning: " << warning << "\n";
  }
}

}  // namespace

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path);
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    apply_kv(config, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
}

void run_synth(const RunConfig& config) {
  require_out(config);
  SynthConfig sc = default_synth_config();
  sc.n_train = config.n_train;
  sc.n_dev = config.n_dev;
  sc.n_test = config.n_test;
  sc.seed = config.seed;
  SynthOutput output = generate_corpus(sc);
  save_instances(output.train, out_path(config, "train.jsonl"));
  save_instances(output.dev, out_path(config, "dev.jsonl"));
  save_instances(output.test, out_path(config, "test.jsonl"));
  write_lexicon(output.lexicon, out_path(config, "clusters.tsv"));
  write_manifest(config, "synth", {"train.jsonl", "dev.jsonl", "test.jsonl", "clusters.tsv"});
}

void run_extract(const RunConfig& config) {
  require_out(config);
  const std::string& input = !config.test_path.empty()   ? config.test_path
                             : !config.train_path.empty() ? config.train_path
                                                          : config.dev_path;
  Corpus corpus = load_required(input, "test (or --train/--dev)", config);
  BrownLexicon lexicon = load_required_lexicon(config);
  const ExtractOptions options = extract_options(config);

  std::ofstream out(out_path(config, "features.jsonl"));
  if (!out) {
    throw FormatError("cannot open features dump for writing: " +
                      out_path(config, "features.jsonl"));
  }
  std::vector<Candidate> pool = candidate_pool(config);
  for (const InstancePair& instance : corpus) {
    json record;
    record["id"] = instance.id;
    json features;
    for (const Candidate& candidate : pool) {
      FeatureBag bag = extract(instance, candidate.ftype, lexicon, options);
      std::sort(bag.begin(), bag.end());
      features[feature_type_name(candidate.ftype)] = bag;
    }
    record["features"] = std::move(features);
    out << record.dump() << "\n";
  }
  out.close();
  write_manifest(config, "extract", {"features.jsonl"});
}

SelectionResult run_select(const RunConfig& config) {
  require_out(config);
  Corpus train_corpus = load_required(config.train_path, "train", config);
  Corpus dev_corpus = load_required(config.dev_path, "dev", config);
  BrownLexicon lexicon = load_required_lexicon(config);
  SelectionResult result = select_all(train_corpus, dev_corpus, selection_config(config), lexicon,
                                      extract_options(config));
  save_selection_report(result, out_path(config, "selection.json"));
  write_manifest(config, "select", {"selection.json"});
  return result;
}

void run_train(const RunConfig& config) {
  require_out(config);
  Corpus train_corpus = load_required(config.train_path, "train", config);
  BrownLexicon lexicon = load_required_lexicon(config);
  SelectionResult selection =
      load_selection_report(selection_file(config), train_defaults(config));
  TrainReport report;
  ClassifierSuite suite =
      train_from_selection(config, train_corpus, selection, lexicon, &report);
  print_warnings(report);
  save_suite(suite, config.out_dir, config.lexicon_path, extract_options(config));
  write_manifest(config, "train", suite_outputs(config));
}

void run_predict(const RunConfig& config) {
  require_out(config);
  Corpus test_corpus = load_required(config.test_path, "test", config);
  LoadedSuite loaded = load_suite(suite_file(config));
  const std::string lexicon_path =
      config.lexicon_path.empty() ? loaded.lexicon_path : config.lexicon_path;
  if (lexicon_path.empty()) {
    throw ConfigError("--lexicon is required (the suite manifest does not record one)");
  }
  BrownLexicon lexicon = load_brown_lexicon(lexicon_path);
  write_predictions(loaded.suite, test_corpus, lexicon, predictions_file(config));
  write_manifest(config, "predict", {"predictions.jsonl"});
}

EvalReport run_evaluate(const RunConfig& config) {
  require_out(config);
  Corpus gold = load_required(config.test_path, "test", config);
  PredictionMap predictions = read_predictions(predictions_file(config));
  EvalReport report = evaluate(predictions, gold);

  std::ofstream text(out_path(config, "eval.txt"));
  text << format_report(report, "variant: " + config.variant);
  text.close();
  std::ofstream machine(out_path(config, "eval.json"));
  machine << report_json(report);
  machine.close();
  write_manifest(config, "evaluate", {"eval.txt", "eval.json"});
  return report;
}

void run_inspect(const RunConfig& config) {
  if (config.model_path.empty()) {
    throw ConfigError("--model is required for inspect");
  }
  auto sign = weight_sign_from_name(config.sign);
  if (!sign) {
    throw ConfigError("unknown sign '" + config.sign + "' (expected positive/negative/both)");
  }
  LoadedModel loaded = load_model(config.model_path);
  WeightReport report = top_weights(loaded, config.top_k, *sign);
  std::cout << format_weight_report(report);
  if (!config.out_dir.empty()) {
    require_out(config);
    std::ofstream text(out_path(config, "weights.txt"));
    text << format_weight_report(report);
    text.close();
    std::ofstream machine(out_path(config, "weights.json"));
    machine << weight_report_json(report);
    machine.close();
    write_manifest(config, "inspect", {"weights.txt", "weights.json"});
  }
}

void run_pipeline(const RunConfig& config) {
  require_out(config);
  Corpus train_corpus = load_required(config.train_path, "train", config);
  Corpus dev_corpus = load_required(config.dev_path, "dev", config);
  Corpus test_corpus = load_required(config.test_path, "test", config);
  BrownLexicon lexicon = load_required_lexicon(config);

  SelectionResult selection = select_all(train_corpus, dev_corpus, selection_config(config),
                                         lexicon, extract_options(config));
  save_selection_report(selection, out_path(config, "selection.json"));

  TrainReport report;
  ClassifierSuite suite =
      train_from_selection(config, train_corpus, selection, lexicon, &report);
  print_warnings(report);
  save_suite(suite, config.out_dir, config.lexicon_path, extract_options(config));

  write_predictions(suite, test_corpus, lexicon, out_path(config, "predictions.jsonl"));
  EvalReport eval_report = evaluate(read_predictions(out_path(config, "predictions.jsonl")),
                                    test_corpus);
  std::ofstream text(out_path(config, "eval.txt"));
  text << format_report(eval_report, "variant: " + config.variant);
  text.close();
  std::ofstream machine(out_path(config, "eval.json"));
  machine << report_json(eval_report);
  machine.close();

  std::vector<std::string> outputs = suite_outputs(config);
  outputs.insert(outputs.end(), {"selection.json", "predictions.jsonl", "eval.txt", "eval.json"});
  std::sort(outputs.begin(), outputs.end());
  write_manifest(config, "pipeline", outputs);
  std::cout << format_report(eval_report, "variant: " + config.variant);
}

int run_command(const std::string& command, const RunConfig& config) {
  try {
    if (command == "synth") run_synth(config);
    else if (command == "extract") run_extract(config);
    else if (command == "select") run_select(config);
    else if (command == "train") run_train(config);
    else if (command == "predict") run_predict(config);
    else if (command == "evaluate") run_evaluate(config);
    else if (command == "inspect") run_inspect(config);
    else if (command == "pipeline") run_pipeline(config);
    else {
      std::cerr << "error: unknown command '" << command << "'\n";
      return kExitUsage;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CoverageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCoverage;
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace drc
