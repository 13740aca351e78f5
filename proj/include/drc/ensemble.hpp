// ensemble.hpp
// Per-relation classifier ensembles: arithmetic-mean score averaging with the
// strict >0.5 decision rule, one-vs-all training, and the AllFeats baseline
// that trains one classifier over namespaced unions of member vocabularies.

#ifndef DRC_ENSEMBLE_HPP
#define DRC_ENSEMBLE_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "drc/corpus.hpp"
#include "drc/features.hpp"
#include "drc/linmodel.hpp"

namespace drc {

/// Selected feature type plus the hyperparameters it is trained with.
struct MemberConfig {
  FeatureType ftype;
  TrainConfig train;
  std::uint64_t min_count = 1;
};

/// One classifier inside an ensemble. `ftypes` has one entry for ordinary
/// members; several entries mean the member extracts the union of those types
/// with feature strings namespaced "<type>|<feature>" (the AllFeats shape).
struct EnsembleMember {
  std::vector<FeatureType> ftypes;
  Vocabulary vocab;
  LinearModel model;
  ExtractOptions options;
};

std::string member_name(const EnsembleMember& member);

struct RelationEnsemble {
  Relation relation = Relation::Comparison;
  std::vector<EnsembleMember> members;  // >= 1
};

enum class SuiteVariant { AverageFeats, AverageFeatsSRL, AllFeats };

std::string_view suite_variant_name(SuiteVariant v);
std::optional<SuiteVariant> suite_variant_from_name(std::string_view name);

/// All four top-level relations, each with its ensemble.
struct ClassifierSuite {
  SuiteVariant variant = SuiteVariant::AverageFeats;
  std::map<Relation, RelationEnsemble> ensembles;
};

FeatureBag member_extract(const EnsembleMember& member, const InstancePair& instance,
                          const BrownLexicon& lexicon);

/// The member's score on its own extraction and vectorization of the instance.
double member_score(const EnsembleMember& member, const InstancePair& instance,
                    const BrownLexicon& lexicon);

/// Arithmetic mean of the member scores.
double ensemble_score(const RelationEnsemble& ensemble, const InstancePair& instance,
                      const BrownLexicon& lexicon);

/// True iff the mean score strictly exceeds 0.5; a score of exactly 0.5 is a
/// negative decision.
bool predict(const RelationEnsemble& ensemble, const InstancePair& instance,
             const BrownLexicon& lexicon);

std::set<Relation> predict_all(const ClassifierSuite& suite, const InstancePair& instance,
                               const BrownLexicon& lexicon);

using RelationSelections = std::map<Relation, std::vector<MemberConfig>>;

struct TrainReport {
  std::vector<std::string> warnings;
};

/// One member per selected feature type per relation, trained one-vs-all
/// (positive iff the relation is in the instance's gold set). Selections must
/// list all four relations, each non-empty, with distinct feature types.
ClassifierSuite train_suite(const Corpus& train, const RelationSelections& selections,
                            const BrownLexicon& lexicon, SuiteVariant variant,
                            const ExtractOptions& options = {}, TrainReport* report = nullptr);

/// AllFeats baseline: per relation, a single classifier over the disjoint
/// union of the selected vocabularies (each built with its own min_count,
/// feature strings namespaced by type), trained with one shared config.
ClassifierSuite train_allfeats(const Corpus& train, const RelationSelections& selections,
                               const TrainConfig& shared, const BrownLexicon& lexicon,
                               const ExtractOptions& options = {}, TrainReport* report = nullptr);

struct LoadedSuite {
  ClassifierSuite suite;
  std::string lexicon_path;
  ExtractOptions options;
};

/// Writes member model/vocab files under <dir>/models plus a suite.json
/// manifest with per-file checksums. Paths inside the manifest are relative
/// to the manifest's directory.
void save_suite(const ClassifierSuite& suite, const std::string& dir,
                const std::string& lexicon_path, const ExtractOptions& options);

/// Verifies checksums and model<->vocabulary fingerprints while loading.
LoadedSuite load_suite(const std::string& manifest_path);

}  // namespace drc

#endif  // DRC_ENSEMBLE_HPP
