// features.hpp
// Feature-string extraction from instance pairs and sparse binary vectorization.
//
// Feature strings are the canonical currency between modules; integer ids are
// private to one (feature type, vocabulary) pair. All extractors are pure
// functions of (instance, lexicon, config).

#ifndef DRC_FEATURES_HPP
#define DRC_FEATURES_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "drc/corpus.hpp"

namespace drc {

/// Cross-segment coreference counts are capped here before becoming COREF:c
/// indicators.
inline constexpr int kCorefCap = 5;

struct FirstLastFeat {
  friend bool operator==(const FirstLastFeat&, const FirstLastFeat&) = default;
};
struct DatesNumbersFeat {
  friend bool operator==(const DatesNumbersFeat&, const DatesNumbersFeat&) = default;
};
struct ProductionRulesFeat {
  friend bool operator==(const ProductionRulesFeat&, const ProductionRulesFeat&) = default;
};
struct VerbFeat {
  friend bool operator==(const VerbFeat&, const VerbFeat&) = default;
};
struct CorefFeat {
  friend bool operator==(const CorefFeat&, const CorefFeat&) = default;
};
struct BrownFeat {
  int prefix_len = 8;  // >= 1; cluster paths are truncated to this many bits
  friend bool operator==(const BrownFeat&, const BrownFeat&) = default;
};
struct PairwiseBrownFeat {
  int prefix_len = 8;
  friend bool operator==(const PairwiseBrownFeat&, const PairwiseBrownFeat&) = default;
};
struct FrameNetRolesFeat {
  bool with_cluster = true;  // additionally emit k:Role:path for the span head
  friend bool operator==(const FrameNetRolesFeat&, const FrameNetRolesFeat&) = default;
};
enum class PropBankVariant { VerbNetClass, LemmaCluster };
struct PropBankRolesFeat {
  PropBankVariant variant = PropBankVariant::VerbNetClass;
  bool include_modifiers = false;  // also emit AM-* labels
  friend bool operator==(const PropBankRolesFeat&, const PropBankRolesFeat&) = default;
};

using FeatureType =
    std::variant<FirstLastFeat, DatesNumbersFeat, ProductionRulesFeat, VerbFeat, CorefFeat,
                 BrownFeat, PairwiseBrownFeat, FrameNetRolesFeat, PropBankRolesFeat>;

/// Canonical name, e.g. "brown:8", "framenet+cluster", "propbank:verbnet+mods".
/// Used in model files, manifests, selection reports and CLI configuration.
std::string feature_type_name(const FeatureType& ftype);
std::optional<FeatureType> feature_type_from_name(std::string_view name);

/// Role-set exclusivity groups: at most one representation per group may join
/// one relation's ensemble.
enum class RoleGroup { None, FrameNet, PropBank };
RoleGroup role_group(const FeatureType& ftype);

struct ExtractOptions {
  /// Head word of a multi-token filler span is its last token by default.
  bool head_first = false;
  /// Expert flag: additionally conjoin the first/last words across segments.
  bool first_last_pairs = false;

  friend bool operator==(const ExtractOptions&, const ExtractOptions&) = default;
};

/// Feature multiset; duplicates are meaningful until vectorization collapses
/// them into binary indicators.
using FeatureBag = std::vector<std::string>;

struct SurfaceFeatures {
  FeatureBag first_last;
  FeatureBag dates_numbers;
  FeatureBag verb;
};

SurfaceFeatures extract_surface(const InstancePair& instance, const ExtractOptions& options = {});
FeatureBag extract_production_rules(const InstancePair& instance);
FeatureBag extract_coref(const InstancePair& instance);
FeatureBag extract_brown(const InstancePair& instance, const BrownLexicon& lexicon,
                         int prefix_len, bool pairwise);
FeatureBag extract_framenet(const InstancePair& instance, const BrownLexicon& lexicon,
                            bool with_cluster, const ExtractOptions& options = {});
FeatureBag extract_propbank(const InstancePair& instance, const BrownLexicon& lexicon,
                            PropBankVariant variant, bool include_modifiers,
                            const ExtractOptions& options = {});

/// Dispatch on the feature type tag.
FeatureBag extract(const InstancePair& instance, const FeatureType& ftype,
                   const BrownLexicon& lexicon, const ExtractOptions& options = {});

/// Bidirectional feature-string <-> dense id map. Ids are contiguous from 0 in
/// lexicographic feature-string order; every stored feature reached min_count
/// occurrences at build time.
class Vocabulary {
 public:
  Vocabulary() = default;
  /// `features` must be strictly increasing lexicographically and aligned with
  /// `frequencies`; throws ValidationError otherwise.
  Vocabulary(std::vector<std::string> features, std::vector<std::uint64_t> frequencies,
             std::uint64_t min_count);

  std::optional<int> id_of(std::string_view feature) const;
  const std::string& feature(int id) const { return features_[static_cast<std::size_t>(id)]; }
  std::uint64_t frequency(int id) const { return frequencies_[static_cast<std::size_t>(id)]; }
  int size() const { return static_cast<int>(features_.size()); }
  std::uint64_t min_count() const { return min_count_; }
  const std::vector<std::string>& features() const { return features_; }

  /// Stable checksum over the id <-> string mapping; binds models to the
  /// vocabulary they were trained against.
  std::uint64_t fingerprint() const { return fingerprint_; }

 private:
  std::vector<std::string> features_;
  std::vector<std::uint64_t> frequencies_;
  std::unordered_map<std::string, int> index_;
  std::uint64_t min_count_ = 1;
  std::uint64_t fingerprint_ = 0;
};

/// Checksum over an ordered feature-string list; Vocabulary::fingerprint() is
/// exactly this over its features.
std::uint64_t features_fingerprint(const std::vector<std::string>& features);

/// Counts feature occurrences over pre-extracted bags (multiset sum) and keeps
/// features with total count >= min_count. A resulting empty vocabulary is
/// legal: the classifier degenerates to bias-only.
Vocabulary build_vocabulary(const std::vector<FeatureBag>& bags, std::uint64_t min_count);

Vocabulary build_vocabulary(const Corpus& corpus, const FeatureType& ftype,
                            const BrownLexicon& lexicon, std::uint64_t min_count,
                            const ExtractOptions& options = {});

/// Sorted set of feature ids stamped with the vocabulary fingerprint.
struct FeatureVector {
  std::vector<int> ids;
  std::uint64_t vocab_fingerprint = 0;
};

/// Duplicates collapse to one indicator; unknown strings are dropped.
FeatureVector vectorize(const FeatureBag& bag, const Vocabulary& vocab);

void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);

/// Decoded view of one feature string for weight reports. segment is 0 when
/// the feature is not segment-specific; cluster is empty when absent.
struct DecodedFeature {
  int segment = 0;
  std::string label;
  std::string cluster;
};

/// Decoding grammar, versioned with the extractors. Labels pass through
/// verbatim; unknown shapes decode to {0, feature, ""}.
DecodedFeature decode_feature(const FeatureType& ftype, std::string_view feature);

}  // namespace drc

#endif  // DRC_FEATURES_HPP
