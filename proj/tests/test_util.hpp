// Shared helpers for the unit suites.

#ifndef DRC_TESTS_TEST_UTIL_HPP
#define DRC_TESTS_TEST_UTIL_HPP

#include <sstream>
#include <string>
#include <vector>

#include "drc/corpus.hpp"

namespace drc::testing {

inline std::string data_path(const std::string& name) {
  return std::string(DRC_TEST_DATA_DIR) + "/" + name;
}

inline SegmentAnnotation make_segment(std::vector<std::string> tokens) {
  SegmentAnnotation seg;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    seg.tokens.push_back(Token{std::move(tokens[i]), static_cast<int>(i)});
  }
  return seg;
}

inline InstancePair make_instance(std::string id, std::vector<std::string> tokens1,
                                  std::vector<std::string> tokens2,
                                  std::set<Relation> gold = {}) {
  InstancePair instance;
  instance.id = std::move(id);
  instance.seg1 = make_segment(std::move(tokens1));
  instance.seg2 = make_segment(std::move(tokens2));
  instance.gold_relations = std::move(gold);
  return instance;
}

inline BrownLexicon lexicon_from_string(const std::string& tsv, bool lowercase_fallback = true) {
  std::istringstream in(tsv);
  return parse_brown_lexicon(in, "<test>", lowercase_fallback);
}

inline Corpus corpus_from_string(const std::string& text, const LoadOptions& options = {}) {
  std::istringstream in(text);
  return parse_instances(in, "<test>", options);
}

/// Swaps the two segments and the sides of every coref link.
inline InstancePair swapped(const InstancePair& instance) {
  InstancePair out = instance;
  std::swap(out.seg1, out.seg2);
  for (CorefLink& link : out.coref_links) {
    std::swap(link.mention1_span, link.mention2_span);
  }
  return out;
}

}  // namespace drc::testing

#endif  // DRC_TESTS_TEST_UTIL_HPP
