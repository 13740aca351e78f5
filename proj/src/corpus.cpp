#include "drc/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

#include "drc/error.hpp"
#include "drc/tree.hpp"
#include "drc/util.hpp"

namespace drc {

using nlohmann::json;

std::string_view relation_name(Relation r) {
  switch (r) {
    case Relation::Comparison: return "Comparison";
    case Relation::Contingency: return "Contingency";
    case Relation::Expansion: return "Expansion";
    case Relation::Temporal: return "Temporal";
  }
  return "?";
}

std::optional<Relation> relation_from_name(std::string_view name) {
  for (Relation r : kAllRelations) {
    if (relation_name(r) == name) return r;
  }
  return std::nullopt;
}

std::string_view tense_name(Tense t) {
  switch (t) {
    case Tense::Past: return "past";
    case Tense::Present: return "present";
    case Tense::Future: return "future";
    case Tense::None: return "none";
  }
  return "?";
}

std::optional<Tense> tense_from_name(std::string_view name) {
  for (Tense t : {Tense::Past, Tense::Present, Tense::Future, Tense::None}) {
    if (tense_name(t) == name) return t;
  }
  return std::nullopt;
}

namespace {

// Printable and whitespace-free; annotation strings end up inside
// tab-separated model files and feature dumps.
bool clean_string(std::string_view s) {
  if (s.empty()) return false;
  for (unsigned char c : s) {
    if (c <= 0x20 || c == 0x7f) return false;
  }
  return true;
}

[[noreturn]] void bad_instance(const std::string& id, const std::string& what) {
  throw ValidationError("instance '" + id + "': " + what);
}

void check_clean(const std::string& id, std::string_view what, std::string_view value) {
  if (!clean_string(value)) {
    bad_instance(id, std::string(what) + " must be non-empty without whitespace, got '" +
                         std::string(value) + "'");
  }
}

void check_span(const std::string& id, std::string_view what, const Span& span, int n_tokens) {
  if (span.begin < 0 || span.begin >= span.end || span.end > n_tokens) {
    std::ostringstream msg;
    msg << what << " [" << span.begin << "," << span.end << ") out of range for segment of "
        << n_tokens << " tokens";
    bad_instance(id, msg.str());
  }
}

void validate_segment(const std::string& id, std::string_view seg_name,
                      const SegmentAnnotation& seg) {
  const int n = static_cast<int>(seg.tokens.size());
  for (int i = 0; i < n; ++i) {
    check_clean(id, std::string(seg_name) + ".tokens[" + std::to_string(i) + "]",
                seg.tokens[i].surface);
    if (seg.tokens[i].index != i) {
      bad_instance(id, std::string(seg_name) + " token indices must be consecutive from 0");
    }
  }
  if (seg.date_count < 0 || seg.number_count < 0) {
    bad_instance(id, std::string(seg_name) + " date/number counts must be non-negative");
  }
  for (std::size_t i = 0; i < seg.vp_lengths.size(); ++i) {
    if (seg.vp_lengths[i] < 1) {
      bad_instance(id, std::string(seg_name) + ".vp_lengths[" + std::to_string(i) +
                           "] must be positive");
    }
  }
  for (std::size_t i = 0; i < seg.main_verbs.size(); ++i) {
    const MainVerb& v = seg.main_verbs[i];
    check_clean(id, std::string(seg_name) + ".main_verbs[" + std::to_string(i) + "].lemma",
                v.lemma);
    if (v.modal) {
      check_clean(id, std::string(seg_name) + ".main_verbs[" + std::to_string(i) + "].modal",
                  *v.modal);
    }
  }
  for (std::size_t i = 0; i < seg.framenet_roles.size(); ++i) {
    const FrameNetRole& role = seg.framenet_roles[i];
    check_clean(id, std::string(seg_name) + ".framenet_roles[" + std::to_string(i) + "].role_name",
                role.role_name);
    check_span(id, std::string(seg_name) + ".framenet_roles[" + std::to_string(i) +
                       "].filler_span", role.filler_span, n);
  }
  for (std::size_t i = 0; i < seg.propbank_frames.size(); ++i) {
    const PropBankFrame& frame = seg.propbank_frames[i];
    const std::string where = std::string(seg_name) + ".propbank_frames[" + std::to_string(i) + "]";
    check_clean(id, where + ".predicate_lemma", frame.predicate_lemma);
    if (frame.verbnet_class) check_clean(id, where + ".verbnet_class", *frame.verbnet_class);
    for (std::size_t a = 0; a < frame.arguments.size(); ++a) {
      check_clean(id, where + ".arguments[" + std::to_string(a) + "].label",
                  frame.arguments[a].label);
      check_span(id, where + ".arguments[" + std::to_string(a) + "].filler_span",
                 frame.arguments[a].filler_span, n);
    }
  }
  if (seg.parse_tree) {
    TreeNode root;
    try {
      root = parse_bracketed_tree(*seg.parse_tree, id);
    } catch (const FormatError& e) {
      bad_instance(id, std::string(seg_name) + ": " + e.what());
    }
    if (leaf_count(root) != n) {
      bad_instance(id, std::string(seg_name) + " parse tree has " +
                           std::to_string(leaf_count(root)) + " leaves but the segment has " +
                           std::to_string(n) + " tokens");
    }
  }
}

}  // namespace

void validate_instance(const InstancePair& instance) {
  if (instance.id.empty()) {
    throw ValidationError("instance with empty id");
  }
  validate_segment(instance.id, "seg1", instance.seg1);
  validate_segment(instance.id, "seg2", instance.seg2);
  for (std::size_t i = 0; i < instance.coref_links.size(); ++i) {
    check_span(instance.id, "coref_links[" + std::to_string(i) + "].mention1_span",
               instance.coref_links[i].mention1_span,
               static_cast<int>(instance.seg1.tokens.size()));
    check_span(instance.id, "coref_links[" + std::to_string(i) + "].mention2_span",
               instance.coref_links[i].mention2_span,
               static_cast<int>(instance.seg2.tokens.size()));
  }
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

bool is_year_token(std::string_view s) {
  return s.size() == 4 && all_digits(s) && (s[0] == '1' || s[0] == '2');
}

bool is_month_token(const std::string& s) {
  static const std::unordered_set<std::string> months = {
      "january", "february", "march",     "april",   "may",      "june",
      "july",    "august",   "september", "october", "november", "december"};
  return months.count(lowercase_ascii(s)) > 0;
}

}  // namespace

int detect_date_count(const std::vector<Token>& tokens) {
  int n = 0;
  for (const Token& t : tokens) {
    if (is_year_token(t.surface) || is_month_token(t.surface)) ++n;
  }
  return n;
}

int detect_number_count(const std::vector<Token>& tokens) {
  int n = 0;
  for (const Token& t : tokens) {
    if (all_digits(t.surface) && !is_year_token(t.surface)) ++n;
  }
  return n;
}

namespace {

[[noreturn]] void bad_record(std::string_view where, const std::string& field,
                             const std::string& what) {
  throw FormatError(std::string(where) + ": field '" + field + "': " + what);
}

const json& require_field(const json& obj, const char* name, std::string_view where,
                          const std::string& path) {
  auto it = obj.find(name);
  if (it == obj.end()) bad_record(where, path + name, "missing");
  return *it;
}

std::string get_string(const json& value, std::string_view where, const std::string& field) {
  if (!value.is_string()) bad_record(where, field, "expected a string");
  return value.get<std::string>();
}

int get_int(const json& value, std::string_view where, const std::string& field) {
  if (!value.is_number_integer()) bad_record(where, field, "expected an integer");
  return value.get<int>();
}

Span get_span(const json& value, std::string_view where, const std::string& field) {
  if (!value.is_array() || value.size() != 2 || !value[0].is_number_integer() ||
      !value[1].is_number_integer()) {
    bad_record(where, field, "expected a [start, end) pair of token indices");
  }
  return Span{value[0].get<int>(), value[1].get<int>()};
}

SegmentAnnotation parse_segment(const json& obj, std::string_view where, const std::string& prefix,
                                const LoadOptions& options) {
  if (!obj.is_object()) bad_record(where, prefix, "expected an object");
  SegmentAnnotation seg;

  const json& tokens = require_field(obj, "tokens", where, prefix + ".");
  if (!tokens.is_array()) bad_record(where, prefix + ".tokens", "expected an array of strings");
  int index = 0;
  for (const json& t : tokens) {
    seg.tokens.push_back(
        Token{get_string(t, where, prefix + ".tokens[" + std::to_string(index) + "]"), index});
    ++index;
  }

  if (auto it = obj.find("parse_tree"); it != obj.end() && !it->is_null()) {
    seg.parse_tree = get_string(*it, where, prefix + ".parse_tree");
  }

  if (auto it = obj.find("main_verbs"); it != obj.end()) {
    if (!it->is_array()) bad_record(where, prefix + ".main_verbs", "expected an array");
    int i = 0;
    for (const json& v : *it) {
      const std::string field = prefix + ".main_verbs[" + std::to_string(i++) + "]";
      if (!v.is_object()) bad_record(where, field, "expected an object");
      MainVerb verb;
      verb.lemma = get_string(require_field(v, "lemma", where, field + "."), where,
                              field + ".lemma");
      std::string tense = get_string(require_field(v, "tense", where, field + "."), where,
                                     field + ".tense");
      auto parsed = tense_from_name(tense);
      if (!parsed) bad_record(where, field + ".tense", "unknown tense '" + tense + "'");
      verb.tense = *parsed;
      if (auto m = v.find("modal"); m != v.end() && !m->is_null()) {
        verb.modal = get_string(*m, where, field + ".modal");
      }
      seg.main_verbs.push_back(std::move(verb));
    }
  }

  if (auto it = obj.find("vp_lengths"); it != obj.end()) {
    if (!it->is_array()) bad_record(where, prefix + ".vp_lengths", "expected an array");
    int i = 0;
    for (const json& v : *it) {
      seg.vp_lengths.push_back(
          get_int(v, where, prefix + ".vp_lengths[" + std::to_string(i++) + "]"));
    }
  }

  bool have_dates = false;
  if (auto it = obj.find("date_count"); it != obj.end()) {
    seg.date_count = get_int(*it, where, prefix + ".date_count");
    have_dates = true;
  }
  bool have_numbers = false;
  if (auto it = obj.find("number_count"); it != obj.end()) {
    seg.number_count = get_int(*it, where, prefix + ".number_count");
    have_numbers = true;
  }
  if (options.detect_dates_numbers) {
    if (!have_dates) seg.date_count = detect_date_count(seg.tokens);
    if (!have_numbers) seg.number_count = detect_number_count(seg.tokens);
  }

  if (auto it = obj.find("framenet_roles"); it != obj.end()) {
    if (!it->is_array()) bad_record(where, prefix + ".framenet_roles", "expected an array");
    int i = 0;
    for (const json& r : *it) {
      const std::string field = prefix + ".framenet_roles[" + std::to_string(i++) + "]";
      if (!r.is_object()) bad_record(where, field, "expected an object");
      FrameNetRole role;
      role.role_name = get_string(require_field(r, "role_name", where, field + "."), where,
                                  field + ".role_name");
      role.filler_span = get_span(require_field(r, "filler_span", where, field + "."), where,
                                  field + ".filler_span");
      seg.framenet_roles.push_back(std::move(role));
    }
  }

  if (auto it = obj.find("propbank_frames"); it != obj.end()) {
    if (!it->is_array()) bad_record(where, prefix + ".propbank_frames", "expected an array");
    int i = 0;
    for (const json& f : *it) {
      const std::string field = prefix + ".propbank_frames[" + std::to_string(i++) + "]";
      if (!f.is_object()) bad_record(where, field, "expected an object");
      PropBankFrame frame;
      frame.predicate_lemma = get_string(require_field(f, "predicate_lemma", where, field + "."),
                                         where, field + ".predicate_lemma");
      if (auto c = f.find("verbnet_class"); c != f.end() && !c->is_null()) {
        frame.verbnet_class = get_string(*c, where, field + ".verbnet_class");
      }
      if (auto args = f.find("arguments"); args != f.end()) {
        if (!args->is_array()) bad_record(where, field + ".arguments", "expected an array");
        int a = 0;
        for (const json& arg : *args) {
          const std::string afield = field + ".arguments[" + std::to_string(a++) + "]";
          if (!arg.is_object()) bad_record(where, afield, "expected an object");
          PropBankArgument parsed;
          parsed.label = get_string(require_field(arg, "label", where, afield + "."), where,
                                    afield + ".label");
          parsed.filler_span = get_span(require_field(arg, "filler_span", where, afield + "."),
                                        where, afield + ".filler_span");
          frame.arguments.push_back(std::move(parsed));
        }
      }
      seg.propbank_frames.push_back(std::move(frame));
    }
  }

  return seg;
}

InstancePair parse_instance(const json& obj, std::string_view where, const LoadOptions& options) {
  if (!obj.is_object()) {
    throw FormatError(std::string(where) + ": expected a JSON object per instance line");
  }
  InstancePair instance;
  instance.id = get_string(require_field(obj, "id", where, ""), where, "id");
  instance.seg1 = parse_segment(require_field(obj, "seg1", where, ""), where, "seg1", options);
  instance.seg2 = parse_segment(require_field(obj, "seg2", where, ""), where, "seg2", options);

  if (auto it = obj.find("coref_links"); it != obj.end()) {
    if (!it->is_array()) bad_record(where, "coref_links", "expected an array");
    int i = 0;
    for (const json& link : *it) {
      const std::string field = "coref_links[" + std::to_string(i++) + "]";
      if (!link.is_object()) bad_record(where, field, "expected an object");
      CorefLink parsed;
      parsed.mention1_span = get_span(require_field(link, "mention1_span", where, field + "."),
                                      where, field + ".mention1_span");
      parsed.mention2_span = get_span(require_field(link, "mention2_span", where, field + "."),
                                      where, field + ".mention2_span");
      instance.coref_links.push_back(parsed);
    }
  }

  if (auto it = obj.find("gold_relations"); it != obj.end()) {
    if (!it->is_array()) bad_record(where, "gold_relations", "expected an array");
    int i = 0;
    for (const json& r : *it) {
      const std::string field = "gold_relations[" + std::to_string(i++) + "]";
      std::string name = get_string(r, where, field);
      auto rel = relation_from_name(name);
      if (!rel) bad_record(where, field, "unknown relation '" + name + "'");
      instance.gold_relations.insert(*rel);
    }
  }

  return instance;
}

json segment_to_json(const SegmentAnnotation& seg) {
  json obj;
  json tokens = json::array();
  for (const Token& t : seg.tokens) tokens.push_back(t.surface);
  obj["tokens"] = std::move(tokens);
  if (seg.parse_tree) obj["parse_tree"] = *seg.parse_tree;
  json verbs = json::array();
  for (const MainVerb& v : seg.main_verbs) {
    json verb;
    verb["lemma"] = v.lemma;
    verb["tense"] = std::string(tense_name(v.tense));
    if (v.modal) verb["modal"] = *v.modal;
    verbs.push_back(std::move(verb));
  }
  obj["main_verbs"] = std::move(verbs);
  obj["vp_lengths"] = seg.vp_lengths;
  obj["date_count"] = seg.date_count;
  obj["number_count"] = seg.number_count;
  json roles = json::array();
  for (const FrameNetRole& r : seg.framenet_roles) {
    roles.push_back({{"role_name", r.role_name},
                     {"filler_span", {r.filler_span.begin, r.filler_span.end}}});
  }
  obj["framenet_roles"] = std::move(roles);
  json frames = json::array();
  for (const PropBankFrame& f : seg.propbank_frames) {
    json frame;
    frame["predicate_lemma"] = f.predicate_lemma;
    if (f.verbnet_class) frame["verbnet_class"] = *f.verbnet_class;
    json args = json::array();
    for (const PropBankArgument& a : f.arguments) {
      args.push_back(
          {{"label", a.label}, {"filler_span", {a.filler_span.begin, a.filler_span.end}}});
    }
    frame["arguments"] = std::move(args);
    frames.push_back(std::move(frame));
  }
  obj["propbank_frames"] = std::move(frames);
  return obj;
}

}  // namespace

Corpus parse_instances(std::istream& in, std::string_view source_name,
                       const LoadOptions& options) {
  Corpus corpus;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;

  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = std::string(source_name) + ":" + std::to_string(lineno);
    if (line.empty()) {
      throw FormatError(where + ": blank line in corpus file");
    }
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(where + ": invalid JSON: " + e.what());
    }
    if (!header_seen) {
      if (!obj.is_object() || obj.value("format", "") != "drc-corpus") {
        throw FormatError(where + ": field 'format': expected header record "
                          "{\"format\":\"drc-corpus\",\"version\":1}");
      }
      if (obj.value("version", 0) != 1) {
        throw FormatError(where + ": field 'version': unsupported corpus format version");
      }
      header_seen = true;
      continue;
    }
    InstancePair instance = parse_instance(obj, where, options);
    try {
      validate_instance(instance);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (!seen_ids.insert(instance.id).second) {
      throw ValidationError(where + ": instance '" + instance.id + "': duplicate id");
    }
    corpus.push_back(std::move(instance));
  }
  return corpus;
}

Corpus load_instances(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open corpus file: " + path);
  }
  return parse_instances(in, path, options);
}

void write_instances(const Corpus& corpus, std::ostream& out) {
  out << "{\"format\":\"drc-corpus\",\"version\":1}\n";
  for (const InstancePair& instance : corpus) {
    json obj;
    obj["id"] = instance.id;
    obj["seg1"] = segment_to_json(instance.seg1);
    obj["seg2"] = segment_to_json(instance.seg2);
    json links = json::array();
    for (const CorefLink& link : instance.coref_links) {
      links.push_back(
          {{"mention1_span", {link.mention1_span.begin, link.mention1_span.end}},
           {"mention2_span", {link.mention2_span.begin, link.mention2_span.end}}});
    }
    obj["coref_links"] = std::move(links);
    json gold = json::array();
    for (Relation r : instance.gold_relations) gold.push_back(std::string(relation_name(r)));
    obj["gold_relations"] = std::move(gold);
    out << obj.dump() << "\n";
  }
}

void save_instances(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw FormatError("cannot open corpus file for writing: " + path);
  }
  write_instances(corpus, out);
  if (!out) {
    throw FormatError("failed writing corpus file: " + path);
  }
}

std::optional<std::string> BrownLexicon::cluster_of(std::string_view word, int prefix_len) const {
  auto it = paths_.find(std::string(word));
  if (it == paths_.end() && lowercase_fallback_) {
    std::string lower = lowercase_ascii(word);
    if (lower != word) it = paths_.find(lower);
  }
  if (it == paths_.end()) return std::nullopt;
  const std::string& path = it->second;
  if (prefix_len >= 1 && static_cast<std::size_t>(prefix_len) < path.size()) {
    return path.substr(0, static_cast<std::size_t>(prefix_len));
  }
  return path;
}

bool BrownLexicon::add(std::string word, std::string path) {
  auto [it, inserted] = paths_.emplace(std::move(word), std::move(path));
  if (!inserted) ++duplicates_;
  return inserted;
}

BrownLexicon parse_brown_lexicon(std::istream& in, std::string_view source_name,
                                 bool lowercase_fallback) {
  BrownLexicon lexicon(lowercase_fallback);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = std::string(source_name) + ":" + std::to_string(lineno);
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() < 2 || fields.size() > 3) {
      throw FormatError(where + ": expected 'path<TAB>word[<TAB>count]'");
    }
    const std::string& path = fields[0];
    if (path.empty() ||
        !std::all_of(path.begin(), path.end(), [](char c) { return c == '0' || c == '1'; })) {
      throw FormatError(where + ": cluster path must be a non-empty string over {0,1}, got '" +
                        path + "'");
    }
    if (fields[1].empty()) {
      throw FormatError(where + ": empty word");
    }
    if (fields.size() == 3) {
      parse_uint(fields[2], where + ": count");
    }
    lexicon.add(fields[1], path);
  }
  return lexicon;
}

BrownLexicon load_brown_lexicon(const std::string& path, bool lowercase_fallback) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open Brown lexicon file: " + path);
  }
  return parse_brown_lexicon(in, path, lowercase_fallback);
}

}  // namespace drc
