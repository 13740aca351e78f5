#include "drc/synth.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "drc/error.hpp"

namespace drc {

namespace {

/// mt19937_64 with hand-rolled draws: the engine's output sequence is fully
/// specified by the standard, unlike std distributions, so generated corpora
/// are byte-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Inclusive range; modulo bias is irrelevant at synthetic-corpus scale.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[static_cast<std::size_t>(uniform_int(0, static_cast<int>(items.size()) - 1))];
  }

 private:
  std::mt19937_64 engine_;
};

std::string padded(const char* prefix, int i, int width) {
  std::string n = std::to_string(i);
  std::string out(prefix);
  out.append(static_cast<std::size_t>(std::max(0, width - static_cast<int>(n.size()))), '0');
  out += n;
  return out;
}

bool segment_has_role(const SegmentAnnotation& seg, const std::string& role) {
  for (const FrameNetRole& r : seg.framenet_roles) {
    if (r.role_name == role) return true;
  }
  return false;
}

struct Pools {
  std::vector<std::string> words;       // never contains signal words
  std::vector<std::string> noise_roles; // never contains signal roles
  std::vector<std::string> verbs;
  std::vector<std::string> pos_tags = {"DT", "NN", "VB", "JJ", "IN", "PRP"};
  std::vector<std::string> arg_labels = {"A0", "A1", "A2", "AM-TMP", "AM-LOC"};
  std::vector<std::string> verbnet_classes = {"13.5", "29.2", "37.7", "45.4", "73.2"};
  std::vector<std::string> modals = {"can", "may", "must", "will"};
};

Span random_span(Rng& rng, int n_tokens) {
  int start = rng.uniform_int(0, n_tokens - 1);
  return Span{start, start + 1};
}

void add_role(Rng& rng, SegmentAnnotation& seg, const std::string& role) {
  seg.framenet_roles.push_back(
      FrameNetRole{role, random_span(rng, static_cast<int>(seg.tokens.size()))});
}

std::string flat_tree(Rng& rng, const Pools& pools, const std::vector<Token>& tokens) {
  // (S (NP preterms...) (VP preterms...)) with a random split point.
  const int n = static_cast<int>(tokens.size());
  const int split = n >= 2 ? rng.uniform_int(1, n - 1) : n;
  std::ostringstream out;
  out << "(S (NP";
  for (int i = 0; i < split; ++i) {
    out << " (" << pools.pos_tags[static_cast<std::size_t>(rng.uniform_int(
               0, static_cast<int>(pools.pos_tags.size()) - 1))]
        << " " << tokens[static_cast<std::size_t>(i)].surface << ")";
  }
  out << ")";
  if (split < n) {
    out << " (VP";
    for (int i = split; i < n; ++i) {
      out << " (" << pools.pos_tags[static_cast<std::size_t>(rng.uniform_int(
                 0, static_cast<int>(pools.pos_tags.size()) - 1))]
          << " " << tokens[static_cast<std::size_t>(i)].surface << ")";
    }
    out << ")";
  }
  out << ")";
  return out.str();
}

SegmentAnnotation random_segment(Rng& rng, const Pools& pools, const SynthConfig& config) {
  SegmentAnnotation seg;
  const int n_tokens = rng.uniform_int(5, 10);
  for (int i = 0; i < n_tokens; ++i) {
    seg.tokens.push_back(Token{rng.pick(pools.words), i});
  }

  MainVerb verb;
  verb.lemma = rng.pick(pools.verbs);
  verb.tense = static_cast<Tense>(rng.uniform_int(0, 3));
  if (rng.bernoulli(0.2)) verb.modal = rng.pick(pools.modals);
  seg.main_verbs.push_back(std::move(verb));

  const int n_vps = rng.uniform_int(1, 2);
  for (int i = 0; i < n_vps; ++i) seg.vp_lengths.push_back(rng.uniform_int(1, 6));
  seg.date_count = rng.bernoulli(0.3) ? rng.uniform_int(1, 2) : 0;
  seg.number_count = rng.bernoulli(0.3) ? rng.uniform_int(1, 2) : 0;

  // Noise FrameNet roles from the disjoint pool.
  int n_noise = 0;
  double expected = config.noise_role_rate;
  while (expected >= 1.0) {
    ++n_noise;
    expected -= 1.0;
  }
  if (rng.bernoulli(expected)) ++n_noise;
  n_noise = rng.uniform_int(0, n_noise * 2);
  for (int i = 0; i < n_noise; ++i) add_role(rng, seg, rng.pick(pools.noise_roles));

  // PropBank frames: random predicates and argument labels.
  const int n_frames = rng.uniform_int(1, 2);
  for (int i = 0; i < n_frames; ++i) {
    PropBankFrame frame;
    frame.predicate_lemma = rng.pick(pools.verbs);
    if (rng.bernoulli(0.8)) frame.verbnet_class = rng.pick(pools.verbnet_classes);
    const int n_args = rng.uniform_int(1, 3);
    for (int a = 0; a < n_args; ++a) {
      frame.arguments.push_back(
          PropBankArgument{rng.pick(pools.arg_labels), random_span(rng, n_tokens)});
    }
    seg.propbank_frames.push_back(std::move(frame));
  }
  return seg;
}

void plant_pattern(Rng& rng, const SignalSpec& spec, bool present, InstancePair& instance) {
  switch (spec.kind) {
    case PatternKind::RoleSeg1Only:
      if (present) {
        add_role(rng, instance.seg1, spec.role1);
      } else {
        switch (rng.uniform_int(0, 2)) {
          case 0: break;  // role nowhere
          case 1: add_role(rng, instance.seg2, spec.role1); break;
          default:
            add_role(rng, instance.seg1, spec.role1);
            add_role(rng, instance.seg2, spec.role1);
        }
      }
      break;
    case PatternKind::RoleBothSegments:
      if (present) {
        add_role(rng, instance.seg1, spec.role1);
        add_role(rng, instance.seg2, spec.role1);
      } else {
        switch (rng.uniform_int(0, 2)) {
          case 0: break;
          case 1: add_role(rng, instance.seg1, spec.role1); break;
          default: add_role(rng, instance.seg2, spec.role1);
        }
      }
      break;
    case PatternKind::RolePairOrdered:
      if (present) {
        add_role(rng, instance.seg1, spec.role1);
        add_role(rng, instance.seg2, spec.role2);
      } else {
        switch (rng.uniform_int(0, 3)) {
          case 0: break;
          case 1:  // swapped order
            add_role(rng, instance.seg1, spec.role2);
            add_role(rng, instance.seg2, spec.role1);
            break;
          case 2: add_role(rng, instance.seg1, spec.role1); break;
          default: add_role(rng, instance.seg2, spec.role2);
        }
      }
      break;
    case PatternKind::FirstWordSeg2:
      if (present) {
        instance.seg2.tokens[0].surface = spec.role1;
      }
      // Absent: ordinary words, which never collide with the signal word.
      break;
  }
}

}  // namespace

bool pattern_holds(const SignalSpec& spec, const InstancePair& instance) {
  switch (spec.kind) {
    case PatternKind::RoleSeg1Only:
      return segment_has_role(instance.seg1, spec.role1) &&
             !segment_has_role(instance.seg2, spec.role1);
    case PatternKind::RoleBothSegments:
      return segment_has_role(instance.seg1, spec.role1) &&
             segment_has_role(instance.seg2, spec.role1);
    case PatternKind::RolePairOrdered:
      return segment_has_role(instance.seg1, spec.role1) &&
             segment_has_role(instance.seg2, spec.role2);
    case PatternKind::FirstWordSeg2:
      return !instance.seg2.tokens.empty() && instance.seg2.tokens[0].surface == spec.role1;
  }
  return false;
}

SynthConfig default_synth_config() {
  SynthConfig config;
  config.signals = {
      SignalSpec{Relation::Contingency, PatternKind::RoleSeg1Only, "Agent", "", 0.9},
      SignalSpec{Relation::Comparison, PatternKind::RoleBothSegments, "Purpose", "", 0.9},
      SignalSpec{Relation::Temporal, PatternKind::RolePairOrdered, "Activity_start",
                 "Process_end", 0.9},
      SignalSpec{Relation::Expansion, PatternKind::FirstWordSeg2, "also", "", 0.9},
  };
  return config;
}

SynthOutput generate_corpus(const SynthConfig& config) {
  if (config.n_train < 1 || config.n_dev < 0 || config.n_test < 0) {
    throw ConfigError("synth: corpus sizes must be positive");
  }
  if (config.relation_rate <= 0.0 || config.relation_rate >= 1.0) {
    throw ConfigError("synth: relation_rate must lie in (0, 1)");
  }
  if (config.surface_vocab_size < 10 || config.role_vocab_size < 1 ||
      config.verb_vocab_size < 1) {
    throw ConfigError("synth: vocabulary sizes too small");
  }
  std::set<Relation> seen;
  for (const SignalSpec& spec : config.signals) {
    if (spec.p < 0.5 || spec.p > 1.0) {
      throw ConfigError("synth: signal strength p must lie in [0.5, 1]");
    }
    if (spec.role1.empty() || (spec.kind == PatternKind::RolePairOrdered && spec.role2.empty())) {
      throw ConfigError("synth: signal pattern is missing a role name");
    }
    if (!seen.insert(spec.relation).second) {
      throw ConfigError("synth: at most one signal per relation");
    }
  }

  Rng rng(config.seed);
  Pools pools;
  for (int i = 0; i < config.surface_vocab_size; ++i) {
    pools.words.push_back(padded("w", i, 3));
  }
  for (int i = 0; i < config.role_vocab_size; ++i) {
    pools.noise_roles.push_back(padded("Role", i, 2));
  }
  for (int i = 0; i < config.verb_vocab_size; ++i) {
    pools.verbs.push_back(padded("v", i, 2));
  }
  for (const SignalSpec& spec : config.signals) {
    auto collides = [&](const std::vector<std::string>& pool, const std::string& name) {
      return std::find(pool.begin(), pool.end(), name) != pool.end();
    };
    if (spec.kind == PatternKind::FirstWordSeg2) {
      if (collides(pools.words, spec.role1)) {
        throw ConfigError("synth: signal word '" + spec.role1 +
                          "' collides with the surface vocabulary");
      }
    } else if (collides(pools.noise_roles, spec.role1) ||
               (!spec.role2.empty() && collides(pools.noise_roles, spec.role2))) {
      throw ConfigError("synth: signal role collides with the noise role pool");
    }
  }

  SynthOutput out;
  // Cluster paths for every surface word plus planted signal words, drawn
  // before the instances so instance draws do not disturb the lexicon.
  std::vector<std::string> lexicon_words = pools.words;
  for (const SignalSpec& spec : config.signals) {
    if (spec.kind == PatternKind::FirstWordSeg2) lexicon_words.push_back(spec.role1);
  }
  for (const std::string& word : lexicon_words) {
    const int bits = rng.uniform_int(8, 12);
    std::string path;
    for (int b = 0; b < bits; ++b) path += rng.bernoulli(0.5) ? '1' : '0';
    out.lexicon.push_back(
        LexiconEntry{path, word, static_cast<std::uint64_t>(rng.uniform_int(1, 1000))});
  }

  auto make_split = [&](const char* split_name, int count) {
    Corpus corpus;
    corpus.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      InstancePair instance;
      instance.id = std::string(split_name) + "-" + padded("", i, 5);
      for (Relation r : kAllRelations) {
        if (rng.bernoulli(config.relation_rate)) instance.gold_relations.insert(r);
      }
      instance.seg1 = random_segment(rng, pools, config);
      instance.seg2 = random_segment(rng, pools, config);
      for (const SignalSpec& spec : config.signals) {
        const bool positive = instance.gold_relations.count(spec.relation) > 0;
        const bool present = rng.bernoulli(positive ? spec.p : 1.0 - spec.p);
        plant_pattern(rng, spec, present, instance);
      }
      // Trees come after planting: the Expansion signal rewrites a token.
      instance.seg1.parse_tree = flat_tree(rng, pools, instance.seg1.tokens);
      instance.seg2.parse_tree = flat_tree(rng, pools, instance.seg2.tokens);
      const int n_links = rng.uniform_int(0, 2);
      for (int l = 0; l < n_links; ++l) {
        instance.coref_links.push_back(
            CorefLink{random_span(rng, static_cast<int>(instance.seg1.tokens.size())),
                      random_span(rng, static_cast<int>(instance.seg2.tokens.size()))});
      }
      validate_instance(instance);
      corpus.push_back(std::move(instance));
    }
    return corpus;
  };

  out.train = make_split("train", config.n_train);
  out.dev = make_split("dev", config.n_dev);
  out.test = make_split("test", config.n_test);
  return out;
}

void write_lexicon(const std::vector<LexiconEntry>& entries, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw FormatError("cannot open lexicon file for writing: " + path);
  }
  for (const LexiconEntry& entry : entries) {
    out << entry.path << "\t" << entry.word << "\t" << entry.count << "\n";
  }
  if (!out) {
    throw FormatError("failed writing lexicon file: " + path);
  }
}

}  // namespace drc
