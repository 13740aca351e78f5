#include "drc/ensemble.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "drc/error.hpp"
#include "drc/util.hpp"

namespace drc {

namespace fs = std::filesystem;
using nlohmann::json;

std::string member_name(const EnsembleMember& member) {
  if (member.ftypes.size() == 1) return feature_type_name(member.ftypes[0]);
  std::string name = "combined(";
  for (std::size_t i = 0; i < member.ftypes.size(); ++i) {
    if (i > 0) name += ",";
    name += feature_type_name(member.ftypes[i]);
  }
  name += ")";
  return name;
}

std::string_view suite_variant_name(SuiteVariant v) {
  switch (v) {
    case SuiteVariant::AverageFeats: return "average";
    case SuiteVariant::AverageFeatsSRL: return "average+srl";
    case SuiteVariant::AllFeats: return "allfeats";
  }
  return "?";
}

std::optional<SuiteVariant> suite_variant_from_name(std::string_view name) {
  for (SuiteVariant v :
       {SuiteVariant::AverageFeats, SuiteVariant::AverageFeatsSRL, SuiteVariant::AllFeats}) {
    if (suite_variant_name(v) == name) return v;
  }
  return std::nullopt;
}

FeatureBag member_extract(const EnsembleMember& member, const InstancePair& instance,
                          const BrownLexicon& lexicon) {
  if (member.ftypes.size() == 1) {
    return extract(instance, member.ftypes[0], lexicon, member.options);
  }
  FeatureBag combined;
  for (const FeatureType& ftype : member.ftypes) {
    const std::string ns = feature_type_name(ftype) + "|";
    for (std::string& feature : extract(instance, ftype, lexicon, member.options)) {
      combined.push_back(ns + feature);
    }
  }
  return combined;
}

double member_score(const EnsembleMember& member, const InstancePair& instance,
                    const BrownLexicon& lexicon) {
  try {
    return score(member.model, vectorize(member_extract(member, instance, lexicon), member.vocab));
  } catch (const BindingError& e) {
    throw BindingError("member '" + member_name(member) + "' for relation '" +
                       member.model.relation + "': " + e.what());
  }
}

double ensemble_score(const RelationEnsemble& ensemble, const InstancePair& instance,
                      const BrownLexicon& lexicon) {
  if (ensemble.members.empty()) {
    throw ConfigError("ensemble for relation '" + std::string(relation_name(ensemble.relation)) +
                      "' has no members");
  }
  double sum = 0.0;
  for (const EnsembleMember& member : ensemble.members) {
    sum += member_score(member, instance, lexicon);
  }
  return sum / static_cast<double>(ensemble.members.size());
}

bool predict(const RelationEnsemble& ensemble, const InstancePair& instance,
             const BrownLexicon& lexicon) {
  return ensemble_score(ensemble, instance, lexicon) > 0.5;
}

std::set<Relation> predict_all(const ClassifierSuite& suite, const InstancePair& instance,
                               const BrownLexicon& lexicon) {
  std::set<Relation> predicted;
  for (Relation r : kAllRelations) {
    auto it = suite.ensembles.find(r);
    if (it == suite.ensembles.end()) {
      throw ConfigError("suite is missing relation '" + std::string(relation_name(r)) + "'");
    }
    if (predict(it->second, instance, lexicon)) predicted.insert(r);
  }
  return predicted;
}

namespace {

void check_selections(const RelationSelections& selections) {
  for (Relation r : kAllRelations) {
    auto it = selections.find(r);
    if (it == selections.end() || it->second.empty()) {
      throw ConfigError("empty feature-type selection for relation '" +
                        std::string(relation_name(r)) + "'");
    }
    std::set<std::string> names;
    for (const MemberConfig& mc : it->second) {
      if (!names.insert(feature_type_name(mc.ftype)).second) {
        throw ConfigError("duplicate feature type '" + feature_type_name(mc.ftype) +
                          "' selected for relation '" + std::string(relation_name(r)) + "'");
      }
    }
  }
}

Dataset make_dataset(const std::vector<FeatureBag>& bags, const Vocabulary& vocab,
                     const Corpus& corpus, Relation relation) {
  Dataset data;
  data.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    data.push_back(Example{vectorize(bags[i], vocab),
                           corpus[i].gold_relations.count(relation) > 0, 1.0});
  }
  return data;
}

}  // namespace

ClassifierSuite train_suite(const Corpus& train_corpus, const RelationSelections& selections,
                            const BrownLexicon& lexicon, SuiteVariant variant,
                            const ExtractOptions& options, TrainReport* report) {
  check_selections(selections);
  ClassifierSuite suite;
  suite.variant = variant;
  for (Relation r : kAllRelations) {
    RelationEnsemble ensemble;
    ensemble.relation = r;
    for (const MemberConfig& mc : selections.at(r)) {
      const std::string type_name = feature_type_name(mc.ftype);
      try {
        EnsembleMember member;
        member.ftypes = {mc.ftype};
        member.options = options;
        std::vector<FeatureBag> bags;
        bags.reserve(train_corpus.size());
        for (const InstancePair& instance : train_corpus) {
          bags.push_back(extract(instance, mc.ftype, lexicon, options));
        }
        member.vocab = build_vocabulary(bags, mc.min_count);
        Dataset data = make_dataset(bags, member.vocab, train_corpus, r);
        TrainStats stats;
        member.model = train(data, member.vocab, mc.train, std::string(relation_name(r)),
                             type_name, &stats);
        if (report) {
          for (std::string& w : stats.warnings) report->warnings.push_back(std::move(w));
        }
        ensemble.members.push_back(std::move(member));
      } catch (const SolverError& e) {
        throw SolverError("training (" + std::string(relation_name(r)) + ", " + type_name +
                          "): " + e.what());
      }
    }
    suite.ensembles.emplace(r, std::move(ensemble));
  }
  return suite;
}

ClassifierSuite train_allfeats(const Corpus& train_corpus, const RelationSelections& selections,
                               const TrainConfig& shared, const BrownLexicon& lexicon,
                               const ExtractOptions& options, TrainReport* report) {
  check_selections(selections);
  ClassifierSuite suite;
  suite.variant = SuiteVariant::AllFeats;
  for (Relation r : kAllRelations) {
    RelationEnsemble ensemble;
    ensemble.relation = r;
    EnsembleMember member;
    member.options = options;

    // Disjoint union of the per-type vocabularies, namespaced by type name.
    std::vector<std::string> combined_features;
    std::vector<std::uint64_t> combined_freqs;
    std::uint64_t combined_min_count = 0;
    for (const MemberConfig& mc : selections.at(r)) {
      member.ftypes.push_back(mc.ftype);
      const std::string ns = feature_type_name(mc.ftype) + "|";
      std::vector<FeatureBag> bags;
      bags.reserve(train_corpus.size());
      for (const InstancePair& instance : train_corpus) {
        bags.push_back(extract(instance, mc.ftype, lexicon, options));
      }
      Vocabulary vocab = build_vocabulary(bags, mc.min_count);
      for (int i = 0; i < vocab.size(); ++i) {
        combined_features.push_back(ns + vocab.feature(i));
        combined_freqs.push_back(vocab.frequency(i));
      }
      combined_min_count =
          combined_min_count == 0 ? mc.min_count : std::min(combined_min_count, mc.min_count);
    }
    std::vector<std::size_t> order(combined_features.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return combined_features[a] < combined_features[b];
    });
    std::vector<std::string> sorted_features(order.size());
    std::vector<std::uint64_t> sorted_freqs(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      sorted_features[i] = std::move(combined_features[order[i]]);
      sorted_freqs[i] = combined_freqs[order[i]];
    }
    member.vocab = Vocabulary(std::move(sorted_features), std::move(sorted_freqs),
                              std::max<std::uint64_t>(combined_min_count, 1));

    std::vector<FeatureBag> bags;
    bags.reserve(train_corpus.size());
    for (const InstancePair& instance : train_corpus) {
      bags.push_back(member_extract(member, instance, lexicon));
    }
    Dataset data = make_dataset(bags, member.vocab, train_corpus, r);
    TrainStats stats;
    try {
      member.model = train(data, member.vocab, shared, std::string(relation_name(r)),
                           member_name(member), &stats);
    } catch (const SolverError& e) {
      throw SolverError("training (" + std::string(relation_name(r)) + ", allfeats): " +
                        e.what());
    }
    if (report) {
      for (std::string& w : stats.warnings) report->warnings.push_back(std::move(w));
    }
    ensemble.members.push_back(std::move(member));
    suite.ensembles.emplace(r, std::move(ensemble));
  }
  return suite;
}

namespace {

std::string sanitize_for_filename(std::string_view name) {
  std::string out(name);
  for (char& c : out) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '+')) {
      c = '_';
    }
  }
  return out;
}

}  // namespace

void save_suite(const ClassifierSuite& suite, const std::string& dir,
                const std::string& lexicon_path, const ExtractOptions& options) {
  fs::create_directories(fs::path(dir) / "models");
  json manifest;
  manifest["format"] = "drc-suite";
  manifest["version"] = 1;
  manifest["variant"] = std::string(suite_variant_name(suite.variant));
  manifest["lexicon"] = lexicon_path;
  manifest["options"]["head_first"] = options.head_first;
  manifest["options"]["first_last_pairs"] = options.first_last_pairs;

  for (const auto& [relation, ensemble] : suite.ensembles) {
    json members = json::array();
    for (const EnsembleMember& member : ensemble.members) {
      const std::string base = std::string(relation_name(relation)) + "__" +
                               sanitize_for_filename(member_name(member));
      const std::string model_rel = "models/" + base + ".model";
      const std::string vocab_rel = "models/" + base + ".vocab";
      save_model(member.model, member.vocab, (fs::path(dir) / model_rel).string());
      save_vocabulary(member.vocab, (fs::path(dir) / vocab_rel).string());
      json entry;
      json ftypes = json::array();
      for (const FeatureType& ftype : member.ftypes) {
        ftypes.push_back(feature_type_name(ftype));
      }
      entry["feature_types"] = std::move(ftypes);
      entry["model"] = model_rel;
      entry["vocab"] = vocab_rel;
      entry["model_checksum"] = to_hex(file_checksum((fs::path(dir) / model_rel).string()));
      entry["vocab_checksum"] = to_hex(file_checksum((fs::path(dir) / vocab_rel).string()));
      members.push_back(std::move(entry));
    }
    manifest["relations"][std::string(relation_name(relation))] = std::move(members);
  }

  std::ofstream out(fs::path(dir) / "suite.json");
  if (!out) {
    throw FormatError("cannot open suite manifest for writing: " + dir + "/suite.json");
  }
  out << manifest.dump(2) << "\n";
}

LoadedSuite load_suite(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) {
    throw FormatError("cannot open suite manifest: " + manifest_path);
  }
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(manifest_path + ": invalid JSON: " + e.what());
  }
  if (manifest.value("format", "") != "drc-suite" || manifest.value("version", 0) != 1) {
    throw FormatError(manifest_path + ": not a drc-suite version 1 manifest");
  }
  LoadedSuite loaded;
  auto variant = suite_variant_from_name(manifest.value("variant", ""));
  if (!variant) {
    throw FormatError(manifest_path + ": unknown variant '" + manifest.value("variant", "") +
                      "'");
  }
  loaded.suite.variant = *variant;
  loaded.lexicon_path = manifest.value("lexicon", "");
  if (manifest.contains("options")) {
    loaded.options.head_first = manifest["options"].value("head_first", false);
    loaded.options.first_last_pairs = manifest["options"].value("first_last_pairs", false);
  }

  const fs::path base = fs::path(manifest_path).parent_path();
  for (Relation r : kAllRelations) {
    const std::string rname(relation_name(r));
    if (!manifest.contains("relations") || !manifest["relations"].contains(rname)) {
      throw FormatError(manifest_path + ": manifest is missing relation '" + rname + "'");
    }
    RelationEnsemble ensemble;
    ensemble.relation = r;
    for (const json& entry : manifest["relations"][rname]) {
      EnsembleMember member;
      member.options = loaded.options;
      for (const json& name : entry.at("feature_types")) {
        auto ftype = feature_type_from_name(name.get<std::string>());
        if (!ftype) {
          throw FormatError(manifest_path + ": unknown feature type '" +
                            name.get<std::string>() + "'");
        }
        member.ftypes.push_back(*ftype);
      }
      const std::string model_path = (base / entry.at("model").get<std::string>()).string();
      const std::string vocab_path = (base / entry.at("vocab").get<std::string>()).string();
      if (to_hex(file_checksum(model_path)) != entry.at("model_checksum").get<std::string>()) {
        throw FormatError(manifest_path + ": checksum mismatch for " + model_path);
      }
      if (to_hex(file_checksum(vocab_path)) != entry.at("vocab_checksum").get<std::string>()) {
        throw FormatError(manifest_path + ": checksum mismatch for " + vocab_path);
      }
      member.vocab = load_vocabulary(vocab_path);
      member.model = load_model(model_path).model;
      if (member.model.vocab_fingerprint != member.vocab.fingerprint()) {
        throw BindingError(manifest_path + ": model " + model_path +
                           " does not match vocabulary " + vocab_path);
      }
      ensemble.members.push_back(std::move(member));
    }
    if (ensemble.members.empty()) {
      throw FormatError(manifest_path + ": relation '" + rname + "' has no members");
    }
    loaded.suite.ensembles.emplace(r, std::move(ensemble));
  }
  return loaded;
}

}  // namespace drc
