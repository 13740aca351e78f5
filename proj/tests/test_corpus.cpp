#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "drc/corpus.hpp"
#include "drc/error.hpp"
#include "test_util.hpp"

using namespace drc;
using namespace drc::testing;

TEST_CASE("load_instances reads the worked example with its role annotations") {
  Corpus corpus = load_instances(data_path("example1.jsonl"));
  REQUIRE(corpus.size() == 1);
  const InstancePair& ins = corpus[0];
  CHECK(ins.id == "wsj_2413-ex1");
  REQUIRE(ins.seg2.tokens.size() == 10);
  CHECK(ins.seg2.tokens[0].surface == "He");
  CHECK(ins.seg2.tokens[3].surface == "work");
  REQUIRE(ins.seg2.framenet_roles.size() == 2);
  CHECK(ins.seg2.framenet_roles[0].role_name == "Agent");
  CHECK(ins.seg2.framenet_roles[0].filler_span == Span{0, 1});
  CHECK(ins.seg2.framenet_roles[1].role_name == "Ongoing_activity");
  CHECK(ins.seg2.framenet_roles[1].filler_span == Span{3, 4});
  REQUIRE(ins.seg2.propbank_frames.size() == 1);
  CHECK(ins.seg2.propbank_frames[0].predicate_lemma == "work");
  CHECK(ins.seg2.propbank_frames[0].verbnet_class == "73.2");
  CHECK(ins.gold_relations == std::set<Relation>{Relation::Temporal});
}

TEST_CASE("empty corpus file yields an empty corpus") {
  CHECK(corpus_from_string("").empty());
}

TEST_CASE("corpus file must start with the header record") {
  CHECK_THROWS_AS(corpus_from_string("{\"id\":\"a\"}\n"), FormatError);
  CHECK_THROWS_AS(corpus_from_string("{\"format\":\"drc-corpus\",\"version\":2}\n"), FormatError);
}

namespace {

std::string wrap(const std::string& instance_json) {
  return "{\"format\":\"drc-corpus\",\"version\":1}\n" + instance_json + "\n";
}

const char* kMinimal =
    R"({"id":"a","seg1":{"tokens":["x"]},"seg2":{"tokens":["y"]}})";

}  // namespace

TEST_CASE("minimal instance loads with defaults") {
  Corpus corpus = corpus_from_string(wrap(kMinimal));
  REQUIRE(corpus.size() == 1);
  CHECK(corpus[0].seg1.date_count == 0);
  CHECK(corpus[0].gold_relations.empty());
  CHECK(!corpus[0].seg1.parse_tree.has_value());
}

TEST_CASE("span out of range names the instance id") {
  const char* bad =
      R"({"id":"bad-span","seg1":{"tokens":["a","b","c","d","e"],"framenet_roles":[{"role_name":"Agent","filler_span":[9,10]}]},"seg2":{"tokens":["y"]}})";
  try {
    corpus_from_string(wrap(bad));
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("bad-span") != std::string::npos);
    CHECK(std::string(e.what()).find("[9,10)") != std::string::npos);
  }
}

TEST_CASE("duplicate ids are rejected") {
  std::string two = wrap(kMinimal) + std::string(kMinimal) + "\n";
  CHECK_THROWS_AS(corpus_from_string(two), ValidationError);
}

TEST_CASE("malformed line carries the line number and field") {
  try {
    corpus_from_string(wrap(R"({"id":"a","seg1":{"tokens":["x"]}})"));
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    std::string what = e.what();
    CHECK(what.find(":2") != std::string::npos);
    CHECK(what.find("seg2") != std::string::npos);
  }
  CHECK_THROWS_AS(corpus_from_string(wrap("{not json")), FormatError);
}

TEST_CASE("validation rejects invariant violations") {
  InstancePair ok = make_instance("i", {"a"}, {"b"});
  CHECK_NOTHROW(validate_instance(ok));

  InstancePair ws = ok;
  ws.seg1.tokens[0].surface = "two words";
  CHECK_THROWS_AS(validate_instance(ws), ValidationError);

  InstancePair vp = ok;
  vp.seg2.vp_lengths = {0};
  CHECK_THROWS_AS(validate_instance(vp), ValidationError);

  InstancePair tree = ok;
  tree.seg1.parse_tree = "(S (NN a) (NN b))";  // two leaves, one token
  CHECK_THROWS_AS(validate_instance(tree), ValidationError);

  InstancePair unbalanced = ok;
  unbalanced.seg1.parse_tree = "(S (NN a)";
  CHECK_THROWS_AS(validate_instance(unbalanced), ValidationError);

  InstancePair coref = ok;
  coref.coref_links.push_back(CorefLink{Span{0, 1}, Span{3, 4}});
  CHECK_THROWS_AS(validate_instance(coref), ValidationError);
}

TEST_CASE("load -> serialize -> load round-trips structurally") {
  Corpus corpus = load_instances(data_path("example1.jsonl"));
  std::ostringstream first;
  write_instances(corpus, first);
  Corpus reloaded = corpus_from_string(first.str());
  std::ostringstream second;
  write_instances(reloaded, second);
  CHECK(first.str() == second.str());
  REQUIRE(reloaded.size() == corpus.size());
  CHECK(reloaded[0].seg2.framenet_roles.size() == corpus[0].seg2.framenet_roles.size());
}

TEST_CASE("brown lexicon parses the documented line") {
  BrownLexicon lex = lexicon_from_string("11100110\the\t421\n");
  CHECK(lex.cluster_of("he") == "11100110");
  CHECK(lex.size() == 1);
}

TEST_CASE("empty lexicon answers UNK") {
  BrownLexicon lex = lexicon_from_string("");
  CHECK(!lex.cluster_of("anything").has_value());
}

TEST_CASE("duplicate lexicon entries keep the first path") {
  BrownLexicon lex = lexicon_from_string("1010\tbank\t5\n0101\tbank\t3\n");
  CHECK(lex.cluster_of("bank") == "1010");
  CHECK(lex.duplicate_count() == 1);
}

TEST_CASE("lexicon rejects non-binary paths and short lines") {
  CHECK_THROWS_AS(lexicon_from_string("11a0\tword\n"), FormatError);
  CHECK_THROWS_AS(lexicon_from_string("justoneword\n"), FormatError);
  CHECK_THROWS_AS(lexicon_from_string("1010\tword\tnot-a-count\n"), FormatError);
}

TEST_CASE("cluster_of truncates to the prefix and handles OOV") {
  BrownLexicon lex = lexicon_from_string("11100110\the\t421\n");
  CHECK(lex.cluster_of("he", 4) == "1110");
  CHECK(lex.cluster_of("he", 100) == "11100110");
  CHECK(!lex.cluster_of("zxqv", 4).has_value());

  // Prefix property: length is min(p, stored length).
  for (int p = 1; p <= 12; ++p) {
    CHECK(lex.cluster_of("he", p)->size() == std::min<std::size_t>(p, 8));
  }
}

TEST_CASE("lowercase fallback is on by default and can be disabled") {
  BrownLexicon with = lexicon_from_string("11100110\the\t421\n", true);
  CHECK(with.cluster_of("He") == "11100110");
  BrownLexicon without = lexicon_from_string("11100110\the\t421\n", false);
  CHECK(!without.cluster_of("He").has_value());
  // Exact match wins over the fallback.
  BrownLexicon both = lexicon_from_string("1111\tHe\n0000\the\n", true);
  CHECK(both.cluster_of("He") == "1111");
}

TEST_CASE("date and number detector") {
  SegmentAnnotation seg = make_segment({"sold", "1989", "May", "15", "units", "monday"});
  CHECK(detect_date_count(seg.tokens) == 2);   // 1989, May
  CHECK(detect_number_count(seg.tokens) == 1); // 15
  Corpus corpus = corpus_from_string(
      wrap(R"({"id":"d","seg1":{"tokens":["May","1989","7"]},"seg2":{"tokens":["x"]}})"),
      LoadOptions{.detect_dates_numbers = true});
  CHECK(corpus[0].seg1.date_count == 2);
  CHECK(corpus[0].seg1.number_count == 1);
  // Explicit counts are never overridden by the detector.
  Corpus explicit_counts = corpus_from_string(
      wrap(R"({"id":"d","seg1":{"tokens":["May"],"date_count":0},"seg2":{"tokens":["x"]}})"),
      LoadOptions{.detect_dates_numbers = true});
  CHECK(explicit_counts[0].seg1.date_count == 0);
}
