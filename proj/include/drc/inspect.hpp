// inspect.hpp
// Ranked feature-weight reports and per-instance prediction explanations.
// Linear weights are the whole interpretability story: no attribution methods
// beyond reading them off.

#ifndef DRC_INSPECT_HPP
#define DRC_INSPECT_HPP

#include <optional>
#include <string>
#include <vector>

#include "drc/corpus.hpp"
#include "drc/ensemble.hpp"
#include "drc/features.hpp"
#include "drc/linmodel.hpp"

namespace drc {

enum class WeightSign { Positive, Negative, Both };

std::optional<WeightSign> weight_sign_from_name(std::string_view name);

struct WeightRow {
  std::string feature;
  int segment = 0;      // 0 when not segment-specific
  std::string label;    // decoded role/label part
  std::string cluster;  // decoded cluster part, may be empty
  double weight = 0.0;
};

struct WeightReport {
  std::string relation;
  std::string feature_type;
  std::vector<WeightRow> rows;  // sorted by weight descending, ties by feature
  /// Set when k exceeded the vocabulary size and all rows were returned.
  bool k_exceeded_vocab = false;
};

/// Top-k rows by signed weight: Positive takes the k largest, Negative the k
/// smallest, Both the union of the two. Throws BindingError on fingerprint
/// mismatch. `ftype` drives feature decoding; pass nullopt to skip decoding.
WeightReport top_weights(const LinearModel& model, const Vocabulary& vocab, int k,
                         WeightSign sign, std::optional<FeatureType> ftype = std::nullopt);

/// Same, reading the feature list straight out of a loaded model file.
WeightReport top_weights(const LoadedModel& loaded, int k, WeightSign sign);

/// Aligned-column text: role name, position, weight.
std::string format_weight_report(const WeightReport& report);
std::string weight_report_json(const WeightReport& report);

struct FeatureContribution {
  std::string feature;
  double weight = 0.0;
};

struct MemberExplanation {
  std::string member;
  double score = 0.0;
  double raw = 0.0;   // pre-sigmoid w.x + b
  double bias = 0.0;
  std::vector<FeatureContribution> active;  // sorted by |weight| descending
};

struct Explanation {
  std::string relation;
  std::vector<MemberExplanation> members;
  double mean_score = 0.0;
  bool decision = false;
};

Explanation explain(const RelationEnsemble& ensemble, const InstancePair& instance,
                    const BrownLexicon& lexicon);

std::string format_explanation(const Explanation& explanation, const std::string& instance_id);

}  // namespace drc

#endif  // DRC_INSPECT_HPP
