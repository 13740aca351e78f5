// synth.hpp
// Deterministic synthetic corpora with signals planted at the annotation level
// (roles, first words), so the full extraction pipeline is exercised end to
// end without licensed data.

#ifndef DRC_SYNTH_HPP
#define DRC_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "drc/corpus.hpp"

namespace drc {

enum class PatternKind {
  /// role1 appears in segment 1 and not in segment 2.
  RoleSeg1Only,
  /// role1 appears in both segments.
  RoleBothSegments,
  /// role1 appears in segment 1 and role2 in segment 2.
  RolePairOrdered,
  /// Segment 2 starts with the given word.
  FirstWordSeg2,
};

struct SignalSpec {
  Relation relation = Relation::Contingency;
  PatternKind kind = PatternKind::RoleSeg1Only;
  std::string role1;  // role name, or the word for FirstWordSeg2
  std::string role2;  // only for RolePairOrdered
  /// Among gold-positives the pattern holds with probability p; among
  /// gold-negatives with probability 1-p. Must lie in [0.5, 1].
  double p = 0.9;
};

struct SynthConfig {
  int n_train = 2000;
  int n_dev = 500;
  int n_test = 500;
  std::uint64_t seed = 1;
  std::vector<SignalSpec> signals;
  int surface_vocab_size = 200;
  int role_vocab_size = 20;  // noise roles, disjoint from signal roles
  int verb_vocab_size = 20;
  /// Probability that an instance is gold-positive for each relation,
  /// independently.
  double relation_rate = 0.25;
  /// Expected number of noise roles added per segment.
  double noise_role_rate = 1.0;
};

/// True when the planted pattern holds on the instance's annotations.
bool pattern_holds(const SignalSpec& spec, const InstancePair& instance);

struct LexiconEntry {
  std::string path;
  std::string word;
  std::uint64_t count = 0;
};

struct SynthOutput {
  Corpus train;
  Corpus dev;
  Corpus test;
  std::vector<LexiconEntry> lexicon;  // cluster paths for every surface word
};

/// Agent asymmetry => Contingency, Purpose in both segments => Comparison,
/// Activity_start / Process_end ordering => Temporal, plus a surface first-word
/// signal for Expansion.
SynthConfig default_synth_config();

/// Deterministic given the seed: repeated calls produce identical corpora,
/// byte for byte once written. Splits are disjoint by instance id. Throws
/// ConfigError on infeasible configurations.
SynthOutput generate_corpus(const SynthConfig& config);

void write_lexicon(const std::vector<LexiconEntry>& entries, const std::string& path);

}  // namespace drc

#endif  // DRC_SYNTH_HPP
