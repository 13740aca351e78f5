// corpus.hpp
// Annotated-instance data model, corpus file I/O and Brown cluster lexicons.
//
// A corpus file is UTF-8 with one JSON record per line. The first line is a
// header record {"format":"drc-corpus","version":1}; every following line is
// one instance. Spans are [start, end) token indices. Loaded corpora and
// lexicons are immutable after construction and safe to share across threads.

#ifndef DRC_CORPUS_HPP
#define DRC_CORPUS_HPP

#include <array>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace drc {

enum class Relation { Comparison, Contingency, Expansion, Temporal };

inline constexpr std::array<Relation, 4> kAllRelations = {
    Relation::Comparison, Relation::Contingency, Relation::Expansion, Relation::Temporal};

std::string_view relation_name(Relation r);
std::optional<Relation> relation_from_name(std::string_view name);

enum class Tense { Past, Present, Future, None };

std::string_view tense_name(Tense t);
std::optional<Tense> tense_from_name(std::string_view name);

struct Token {
  std::string surface;
  int index = 0;  // 0-based position within its segment
};

/// Half-open token index range [begin, end).
struct Span {
  int begin = 0;
  int end = 0;

  friend bool operator==(const Span&, const Span&) = default;
};

struct MainVerb {
  std::string lemma;
  Tense tense = Tense::None;
  std::optional<std::string> modal;
};

struct FrameNetRole {
  std::string role_name;
  Span filler_span;
};

struct PropBankArgument {
  std::string label;  // A0..A5 or a modifier label such as AM-TMP
  Span filler_span;
};

struct PropBankFrame {
  std::string predicate_lemma;
  std::optional<std::string> verbnet_class;
  std::vector<PropBankArgument> arguments;
};

struct SegmentAnnotation {
  std::vector<Token> tokens;
  std::optional<std::string> parse_tree;
  std::vector<MainVerb> main_verbs;
  std::vector<int> vp_lengths;
  int date_count = 0;
  int number_count = 0;
  std::vector<FrameNetRole> framenet_roles;
  std::vector<PropBankFrame> propbank_frames;
};

struct CorefLink {
  Span mention1_span;  // within seg1
  Span mention2_span;  // within seg2
};

struct InstancePair {
  std::string id;
  SegmentAnnotation seg1;
  SegmentAnnotation seg2;
  std::vector<CorefLink> coref_links;
  std::set<Relation> gold_relations;  // may be empty or hold several labels
};

using Corpus = std::vector<InstancePair>;

struct LoadOptions {
  /// When a record omits date_count/number_count, derive them from the tokens
  /// (digit-only token = number; month name or 4-digit year = date) instead of
  /// defaulting to zero.
  bool detect_dates_numbers = false;
};

/// Throws ValidationError naming the instance id on any invariant violation.
void validate_instance(const InstancePair& instance);

int detect_date_count(const std::vector<Token>& tokens);
int detect_number_count(const std::vector<Token>& tokens);

Corpus load_instances(const std::string& path, const LoadOptions& options = {});
Corpus parse_instances(std::istream& in, std::string_view source_name,
                       const LoadOptions& options = {});
void save_instances(const Corpus& corpus, const std::string& path);
void write_instances(const Corpus& corpus, std::ostream& out);

/// Word -> hierarchical cluster path over the alphabet {0,1}.
class BrownLexicon {
 public:
  BrownLexicon() = default;
  explicit BrownLexicon(bool lowercase_fallback) : lowercase_fallback_(lowercase_fallback) {}

  /// Stored path truncated to prefix_len when prefix_len >= 1 (shorter paths
  /// are returned whole); nullopt for out-of-vocabulary words. Exact-case
  /// lookup first, then a lowercase attempt when the fallback is enabled.
  std::optional<std::string> cluster_of(std::string_view word, int prefix_len = 0) const;

  /// First entry wins; returns false (and bumps the duplicate counter) when
  /// the word was already present.
  bool add(std::string word, std::string path);

  std::size_t size() const { return paths_.size(); }
  int duplicate_count() const { return duplicates_; }
  bool lowercase_fallback() const { return lowercase_fallback_; }

 private:
  std::unordered_map<std::string, std::string> paths_;
  int duplicates_ = 0;
  bool lowercase_fallback_ = true;
};

inline std::optional<std::string> cluster_of(const BrownLexicon& lexicon, std::string_view word,
                                             int prefix_len = 0) {
  return lexicon.cluster_of(word, prefix_len);
}

/// TSV with columns path / word / optional count, one entry per line.
BrownLexicon load_brown_lexicon(const std::string& path, bool lowercase_fallback = true);
BrownLexicon parse_brown_lexicon(std::istream& in, std::string_view source_name,
                                 bool lowercase_fallback = true);

}  // namespace drc

#endif  // DRC_CORPUS_HPP
