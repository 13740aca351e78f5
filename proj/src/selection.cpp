#include "drc/selection.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <limits>
#include <set>

#include "json.hpp"

#include "drc/error.hpp"
#include "drc/eval.hpp"

namespace drc {

using nlohmann::json;

namespace {

struct GridPointEval {
  double c = 1.0;
  std::uint64_t min_count = 1;
  int vocab_size = 0;
  std::vector<double> dev_scores;  // one per dev instance
};

struct CandidateEval {
  std::string name;
  FeatureType ftype;
  RoleGroup group = RoleGroup::None;
  std::vector<GridPointEval> grid;
};

/// Dev F1 of the ensemble whose members produced `score_vectors` (mean > 0.5).
double dev_f1(const std::vector<const std::vector<double>*>& score_vectors,
              const std::vector<bool>& dev_positive) {
  long tp = 0, fp = 0, fn = 0;
  const double n = static_cast<double>(score_vectors.size());
  for (std::size_t i = 0; i < dev_positive.size(); ++i) {
    double sum = 0.0;
    for (const std::vector<double>* scores : score_vectors) sum += (*scores)[i];
    const bool predicted = sum / n > 0.5;
    if (predicted && dev_positive[i]) ++tp;
    else if (predicted) ++fp;
    else if (dev_positive[i]) ++fn;
  }
  return f1_score(tp, fp, fn);
}

/// Trains every (candidate, grid point) once and caches its dev score vector;
/// greedy steps then combine cached vectors instead of retraining.
std::vector<CandidateEval> evaluate_candidates(const Corpus& train_corpus, const Corpus& dev,
                                               Relation relation, const SelectionConfig& config,
                                               const BrownLexicon& lexicon,
                                               const ExtractOptions& options) {
  std::vector<CandidateEval> evals;
  for (const Candidate& candidate : config.pool) {
    CandidateEval eval;
    eval.ftype = candidate.ftype;
    eval.name = feature_type_name(candidate.ftype);
    eval.group = role_group(candidate.ftype);

    std::vector<FeatureBag> train_bags;
    train_bags.reserve(train_corpus.size());
    for (const InstancePair& instance : train_corpus) {
      train_bags.push_back(extract(instance, candidate.ftype, lexicon, options));
    }
    std::vector<FeatureBag> dev_bags;
    dev_bags.reserve(dev.size());
    for (const InstancePair& instance : dev) {
      dev_bags.push_back(extract(instance, candidate.ftype, lexicon, options));
    }

    for (std::uint64_t min_count : candidate.grid.min_counts) {
      Vocabulary vocab = build_vocabulary(train_bags, min_count);
      Dataset data;
      data.reserve(train_corpus.size());
      for (std::size_t i = 0; i < train_corpus.size(); ++i) {
        data.push_back(Example{vectorize(train_bags[i], vocab),
                               train_corpus[i].gold_relations.count(relation) > 0, 1.0});
      }
      std::vector<FeatureVector> dev_vectors;
      dev_vectors.reserve(dev.size());
      for (const FeatureBag& bag : dev_bags) dev_vectors.push_back(vectorize(bag, vocab));

      for (double c : candidate.grid.c_values) {
        TrainConfig tc = config.train_defaults;
        tc.c = c;
        LinearModel model =
            train(data, vocab, tc, std::string(relation_name(relation)), eval.name);
        GridPointEval point;
        point.c = c;
        point.min_count = min_count;
        point.vocab_size = vocab.size();
        point.dev_scores.reserve(dev_vectors.size());
        for (const FeatureVector& fv : dev_vectors) point.dev_scores.push_back(score(model, fv));
        eval.grid.push_back(std::move(point));
      }
    }
    evals.push_back(std::move(eval));
  }
  return evals;
}

struct Pick {
  std::size_t candidate = 0;
  std::size_t grid = 0;
  double f1 = -1.0;
  long total_features = 0;
};

/// Higher F1 wins; then fewer total features; then lexicographic name.
bool better_pick(const Pick& a, const Pick& b, const std::vector<CandidateEval>& evals) {
  if (a.f1 != b.f1) return a.f1 > b.f1;
  if (a.total_features != b.total_features) return a.total_features < b.total_features;
  return evals[a.candidate].name < evals[b.candidate].name;
}

MemberConfig to_member_config(const CandidateEval& eval, const GridPointEval& point,
                              const TrainConfig& defaults) {
  MemberConfig mc;
  mc.ftype = eval.ftype;
  mc.train = defaults;
  mc.train.c = point.c;
  mc.min_count = point.min_count;
  return mc;
}

RelationSelection greedy_search(const std::vector<CandidateEval>& evals,
                                const std::vector<bool>& dev_positive,
                                const SelectionConfig& config) {
  RelationSelection result;
  std::vector<const std::vector<double>*> chosen_scores;
  long chosen_features = 0;
  std::set<std::size_t> used;
  std::set<RoleGroup> occupied;
  double current_f1 = 0.0;

  while (static_cast<int>(result.members.size()) < config.budget) {
    Pick best;
    for (std::size_t ci = 0; ci < evals.size(); ++ci) {
      if (used.count(ci)) continue;
      const CandidateEval& eval = evals[ci];
      if (eval.group != RoleGroup::None && occupied.count(eval.group)) continue;
      for (std::size_t gi = 0; gi < eval.grid.size(); ++gi) {
        const GridPointEval& point = eval.grid[gi];
        std::vector<const std::vector<double>*> tentative = chosen_scores;
        tentative.push_back(&point.dev_scores);
        Pick pick{ci, gi, dev_f1(tentative, dev_positive),
                  chosen_features + point.vocab_size};
        if (best.f1 < 0 || better_pick(pick, best, evals)) best = pick;
      }
    }
    if (best.f1 < 0) break;  // every candidate used or excluded

    const bool improves = best.f1 > current_f1;
    const bool forced_first =
        config.ensure_nonempty && result.members.empty() && best.f1 >= current_f1;
    if (!improves && !forced_first) break;

    const CandidateEval& eval = evals[best.candidate];
    const GridPointEval& point = eval.grid[best.grid];
    result.members.push_back(to_member_config(eval, point, config.train_defaults));
    result.trace.push_back(GreedyStep{static_cast<int>(result.members.size()), eval.name,
                                      point.c, point.min_count, best.f1});
    chosen_scores.push_back(&point.dev_scores);
    chosen_features += point.vocab_size;
    used.insert(best.candidate);
    if (eval.group != RoleGroup::None) occupied.insert(eval.group);
    current_f1 = best.f1;
  }
  return result;
}

RelationSelection exhaustive_search(const std::vector<CandidateEval>& evals,
                                    const std::vector<bool>& dev_positive,
                                    const SelectionConfig& config) {
  if (evals.size() > 8) {
    throw ConfigError("exhaustive selection supports pools of at most 8 candidates, got " +
                      std::to_string(evals.size()));
  }
  // Fix each candidate's grid point by its single-member dev F1.
  std::vector<std::size_t> best_grid(evals.size(), 0);
  for (std::size_t ci = 0; ci < evals.size(); ++ci) {
    Pick best;
    for (std::size_t gi = 0; gi < evals[ci].grid.size(); ++gi) {
      const GridPointEval& point = evals[ci].grid[gi];
      Pick pick{ci, gi, dev_f1({&point.dev_scores}, dev_positive), point.vocab_size};
      if (best.f1 < 0 || (pick.f1 > best.f1) ||
          (pick.f1 == best.f1 && pick.total_features < best.total_features)) {
        best = pick;
      }
    }
    best_grid[ci] = best.grid;
  }

  double best_f1 = -1.0;
  long best_features = 0;
  std::uint32_t best_mask = 0;
  for (std::uint32_t mask = 1; mask < (1u << evals.size()); ++mask) {
    if (config.budget < static_cast<int>(std::popcount(mask))) continue;
    std::set<RoleGroup> groups;
    bool valid = true;
    std::vector<const std::vector<double>*> scores;
    long features = 0;
    for (std::size_t ci = 0; ci < evals.size(); ++ci) {
      if (!(mask & (1u << ci))) continue;
      if (evals[ci].group != RoleGroup::None && !groups.insert(evals[ci].group).second) {
        valid = false;
        break;
      }
      scores.push_back(&evals[ci].grid[best_grid[ci]].dev_scores);
      features += evals[ci].grid[best_grid[ci]].vocab_size;
    }
    if (!valid) continue;
    double f1 = dev_f1(scores, dev_positive);
    if (f1 > best_f1 || (f1 == best_f1 && features < best_features)) {
      best_f1 = f1;
      best_features = features;
      best_mask = mask;
    }
  }

  RelationSelection result;
  int step = 0;
  for (std::size_t ci = 0; ci < evals.size(); ++ci) {
    if (!(best_mask & (1u << ci))) continue;
    const GridPointEval& point = evals[ci].grid[best_grid[ci]];
    result.members.push_back(to_member_config(evals[ci], point, config.train_defaults));
    // Constant trace: exhaustive search reports the final subset F1 per member.
    result.trace.push_back(
        GreedyStep{++step, evals[ci].name, point.c, point.min_count, best_f1});
  }
  return result;
}

}  // namespace

RelationSelection select_for_relation(const Corpus& train_corpus, const Corpus& dev, Relation relation,
                                      const SelectionConfig& config, const BrownLexicon& lexicon,
                                      const ExtractOptions& options) {
  if (config.pool.empty()) {
    throw ConfigError("selection pool is empty");
  }
  if (config.budget < 1) {
    throw ConfigError("selection budget must be >= 1");
  }
  std::set<std::string> names;
  for (const Candidate& candidate : config.pool) {
    if (candidate.grid.c_values.empty() || candidate.grid.min_counts.empty()) {
      throw ConfigError("candidate '" + feature_type_name(candidate.ftype) +
                        "' has an empty hyperparameter grid");
    }
    if (!names.insert(feature_type_name(candidate.ftype)).second) {
      throw ConfigError("duplicate candidate '" + feature_type_name(candidate.ftype) +
                        "' in selection pool");
    }
  }
  std::vector<bool> dev_positive;
  dev_positive.reserve(dev.size());
  bool any_positive = false;
  for (const InstancePair& instance : dev) {
    const bool positive = instance.gold_relations.count(relation) > 0;
    dev_positive.push_back(positive);
    any_positive = any_positive || positive;
  }
  if (!any_positive) {
    throw ValidationError("selection: dev corpus has no positive instance for relation '" +
                          std::string(relation_name(relation)) + "'");
  }

  std::vector<CandidateEval> evals =
      evaluate_candidates(train_corpus, dev, relation, config, lexicon, options);
  return config.exhaustive ? exhaustive_search(evals, dev_positive, config)
                           : greedy_search(evals, dev_positive, config);
}

SelectionResult select_all(const Corpus& train_corpus, const Corpus& dev, const SelectionConfig& config,
                           const BrownLexicon& lexicon, const ExtractOptions& options) {
  SelectionResult result;
  for (Relation r : kAllRelations) {
    result.emplace(r, select_for_relation(train_corpus, dev, r, config, lexicon, options));
  }
  return result;
}

void save_selection_report(const SelectionResult& result, const std::string& path) {
  json obj;
  obj["format"] = "drc-selection";
  obj["version"] = 1;
  for (const auto& [relation, selection] : result) {
    json rel;
    json members = json::array();
    for (const MemberConfig& mc : selection.members) {
      members.push_back({{"feature_type", feature_type_name(mc.ftype)},
                         {"c", mc.train.c},
                         {"min_count", mc.min_count}});
    }
    rel["members"] = std::move(members);
    json trace = json::array();
    for (const GreedyStep& step : selection.trace) {
      trace.push_back({{"step", step.step},
                       {"candidate", step.candidate},
                       {"c", step.c},
                       {"min_count", step.min_count},
                       {"dev_f1", step.dev_f1}});
    }
    rel["trace"] = std::move(trace);
    obj["relations"][std::string(relation_name(relation))] = std::move(rel);
  }
  std::ofstream out(path);
  if (!out) {
    throw FormatError("cannot open selection report for writing: " + path);
  }
  out << obj.dump(2) << "\n";
}

SelectionResult load_selection_report(const std::string& path,
                                      const TrainConfig& train_defaults) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open selection report: " + path);
  }
  json obj;
  try {
    obj = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": invalid JSON: " + e.what());
  }
  if (obj.value("format", "") != "drc-selection" || obj.value("version", 0) != 1) {
    throw FormatError(path + ": not a drc-selection version 1 report");
  }
  SelectionResult result;
  for (Relation r : kAllRelations) {
    const std::string rname(relation_name(r));
    if (!obj.contains("relations") || !obj["relations"].contains(rname)) {
      throw FormatError(path + ": report is missing relation '" + rname + "'");
    }
    RelationSelection selection;
    for (const json& entry : obj["relations"][rname]["members"]) {
      MemberConfig mc;
      const std::string name = entry.at("feature_type").get<std::string>();
      auto ftype = feature_type_from_name(name);
      if (!ftype) {
        throw FormatError(path + ": unknown feature type '" + name + "'");
      }
      mc.ftype = *ftype;
      mc.train = train_defaults;
      mc.train.c = entry.at("c").get<double>();
      mc.min_count = entry.at("min_count").get<std::uint64_t>();
      selection.members.push_back(std::move(mc));
    }
    if (obj["relations"][rname].contains("trace")) {
      for (const json& entry : obj["relations"][rname]["trace"]) {
        selection.trace.push_back(GreedyStep{entry.at("step").get<int>(),
                                             entry.at("candidate").get<std::string>(),
                                             entry.at("c").get<double>(),
                                             entry.at("min_count").get<std::uint64_t>(),
                                             entry.at("dev_f1").get<double>()});
      }
    }
    result.emplace(r, std::move(selection));
  }
  return result;
}

RelationSelections to_selections(const SelectionResult& result) {
  RelationSelections selections;
  for (const auto& [relation, selection] : result) {
    selections.emplace(relation, selection.members);
  }
  return selections;
}

}  // namespace drc
