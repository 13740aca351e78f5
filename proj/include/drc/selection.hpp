// selection.hpp
// Greedy forward feature-type selection by development-set F1, with per
// candidate (C, min_count) grids and at most one representation per role set.

#ifndef DRC_SELECTION_HPP
#define DRC_SELECTION_HPP

#include <map>
#include <string>
#include <vector>

#include "drc/corpus.hpp"
#include "drc/ensemble.hpp"

namespace drc {

struct GridSpec {
  std::vector<double> c_values = {0.01, 0.1, 1.0, 10.0};
  std::vector<std::uint64_t> min_counts = {1, 2, 5};
};

struct Candidate {
  FeatureType ftype;
  GridSpec grid;
};

struct SelectionConfig {
  std::vector<Candidate> pool;
  /// Maximum number of members retained per relation.
  int budget = 8;
  /// Brute-force subset search instead of greedy (pools of at most 8; each
  /// candidate keeps its best single-member grid point).
  bool exhaustive = false;
  /// When no candidate improves on the empty ensemble's F1 of 0, still accept
  /// the best first candidate so downstream training has a member to work
  /// with. The trace stays non-decreasing.
  bool ensure_nonempty = true;
  /// Tolerance / max_iter defaults for every grid point; C comes from the grid.
  TrainConfig train_defaults;
};

struct GreedyStep {
  int step = 0;
  std::string candidate;
  double c = 1.0;
  std::uint64_t min_count = 1;
  double dev_f1 = 0.0;
};

struct RelationSelection {
  std::vector<MemberConfig> members;
  std::vector<GreedyStep> trace;
};

using SelectionResult = std::map<Relation, RelationSelection>;

/// Greedy forward selection for one relation. Ties are broken by higher F1,
/// then fewer total features, then lexicographic candidate name. Throws
/// ValidationError when the dev corpus has no positive instance for the
/// relation.
RelationSelection select_for_relation(const Corpus& train, const Corpus& dev, Relation relation,
                                      const SelectionConfig& config, const BrownLexicon& lexicon,
                                      const ExtractOptions& options = {});

SelectionResult select_all(const Corpus& train, const Corpus& dev, const SelectionConfig& config,
                           const BrownLexicon& lexicon, const ExtractOptions& options = {});

void save_selection_report(const SelectionResult& result, const std::string& path);

/// Reads a selection report back into per-relation member configs;
/// train_defaults supplies tolerance/max_iter for the recorded (C, min_count).
SelectionResult load_selection_report(const std::string& path,
                                      const TrainConfig& train_defaults);

RelationSelections to_selections(const SelectionResult& result);

}  // namespace drc

#endif  // DRC_SELECTION_HPP
