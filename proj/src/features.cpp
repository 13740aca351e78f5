#include "drc/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "drc/error.hpp"
#include "drc/tree.hpp"
#include "drc/util.hpp"

namespace drc {

namespace {

struct NameVisitor {
  std::string operator()(const FirstLastFeat&) const { return "first_last"; }
  std::string operator()(const DatesNumbersFeat&) const { return "dates_numbers"; }
  std::string operator()(const ProductionRulesFeat&) const { return "production_rules"; }
  std::string operator()(const VerbFeat&) const { return "verb"; }
  std::string operator()(const CorefFeat&) const { return "coreference"; }
  std::string operator()(const BrownFeat& f) const {
    return "brown:" + std::to_string(f.prefix_len);
  }
  std::string operator()(const PairwiseBrownFeat& f) const {
    return "pairwise_brown:" + std::to_string(f.prefix_len);
  }
  std::string operator()(const FrameNetRolesFeat& f) const {
    return f.with_cluster ? "framenet+cluster" : "framenet";
  }
  std::string operator()(const PropBankRolesFeat& f) const {
    std::string name = f.variant == PropBankVariant::VerbNetClass ? "propbank:verbnet"
                                                                  : "propbank:lemma_cluster";
    if (f.include_modifiers) name += "+mods";
    return name;
  }
};

std::optional<int> parse_prefix_len(std::string_view text) {
  if (text.empty()) return std::nullopt;
  int value = 0;
  for (char c : text) {
    if (c < '0' || c > '9') return std::nullopt;
    value = value * 10 + (c - '0');
    if (value > 1 << 20) return std::nullopt;
  }
  return value >= 1 ? std::optional<int>(value) : std::nullopt;
}

}  // namespace

std::string feature_type_name(const FeatureType& ftype) {
  return std::visit(NameVisitor{}, ftype);
}

std::optional<FeatureType> feature_type_from_name(std::string_view name) {
  if (name == "first_last") return FeatureType{FirstLastFeat{}};
  if (name == "dates_numbers") return FeatureType{DatesNumbersFeat{}};
  if (name == "production_rules") return FeatureType{ProductionRulesFeat{}};
  if (name == "verb") return FeatureType{VerbFeat{}};
  if (name == "coreference") return FeatureType{CorefFeat{}};
  if (name.starts_with("brown:")) {
    auto p = parse_prefix_len(name.substr(6));
    if (!p) return std::nullopt;
    return FeatureType{BrownFeat{*p}};
  }
  if (name.starts_with("pairwise_brown:")) {
    auto p = parse_prefix_len(name.substr(15));
    if (!p) return std::nullopt;
    return FeatureType{PairwiseBrownFeat{*p}};
  }
  if (name == "framenet") return FeatureType{FrameNetRolesFeat{false}};
  if (name == "framenet+cluster") return FeatureType{FrameNetRolesFeat{true}};
  if (name == "propbank:verbnet") {
    return FeatureType{PropBankRolesFeat{PropBankVariant::VerbNetClass, false}};
  }
  if (name == "propbank:verbnet+mods") {
    return FeatureType{PropBankRolesFeat{PropBankVariant::VerbNetClass, true}};
  }
  if (name == "propbank:lemma_cluster") {
    return FeatureType{PropBankRolesFeat{PropBankVariant::LemmaCluster, false}};
  }
  if (name == "propbank:lemma_cluster+mods") {
    return FeatureType{PropBankRolesFeat{PropBankVariant::LemmaCluster, true}};
  }
  return std::nullopt;
}

RoleGroup role_group(const FeatureType& ftype) {
  if (std::holds_alternative<FrameNetRolesFeat>(ftype)) return RoleGroup::FrameNet;
  if (std::holds_alternative<PropBankRolesFeat>(ftype)) return RoleGroup::PropBank;
  return RoleGroup::None;
}

namespace {

const SegmentAnnotation& segment(const InstancePair& instance, int k) {
  return k == 1 ? instance.seg1 : instance.seg2;
}

std::string seg_prefix(int k) { return std::to_string(k) + ":"; }

/// Head word of a filler span: last token unless options.head_first.
const std::string& span_head(const SegmentAnnotation& seg, const Span& span,
                             const ExtractOptions& options) {
  int idx = options.head_first ? span.begin : span.end - 1;
  return seg.tokens[static_cast<std::size_t>(idx)].surface;
}

bool is_modifier_label(std::string_view label) { return label.starts_with("AM"); }

void collect_rules(const TreeNode& node, const std::string& prefix, FeatureBag& out) {
  if (node.is_leaf()) return;
  std::string rule = prefix + node.label;
  for (const TreeNode& child : node.children) {
    rule += "_";
    rule += child.label;
  }
  out.push_back(std::move(rule));
  for (const TreeNode& child : node.children) collect_rules(child, prefix, out);
}

}  // namespace

SurfaceFeatures extract_surface(const InstancePair& instance, const ExtractOptions& options) {
  SurfaceFeatures out;
  for (int k : {1, 2}) {
    const SegmentAnnotation& seg = segment(instance, k);
    const std::string prefix = seg_prefix(k);
    if (!seg.tokens.empty()) {
      out.first_last.push_back(prefix + "FIRST:" + seg.tokens.front().surface);
      out.first_last.push_back(prefix + "LAST:" + seg.tokens.back().surface);
    }
    out.dates_numbers.push_back(prefix + "DATE:" + std::to_string(seg.date_count));
    out.dates_numbers.push_back(prefix + "NUM:" + std::to_string(seg.number_count));
    for (const MainVerb& verb : seg.main_verbs) {
      out.verb.push_back(prefix + "VERB:" + verb.lemma);
      if (verb.tense != Tense::None) {
        out.verb.push_back(prefix + "TENSE:" + std::string(tense_name(verb.tense)));
      }
      if (verb.modal) {
        out.verb.push_back(prefix + "MODAL:" + *verb.modal);
      }
    }
    if (!seg.vp_lengths.empty()) {
      double sum = 0;
      for (int len : seg.vp_lengths) sum += len;
      long long bucket = std::llround(sum / static_cast<double>(seg.vp_lengths.size()));
      out.verb.push_back(prefix + "AVP:" + std::to_string(bucket));
    }
  }
  if (options.first_last_pairs && !instance.seg1.tokens.empty() &&
      !instance.seg2.tokens.empty()) {
    out.first_last.push_back("FIRSTPAIR:" + instance.seg1.tokens.front().surface + "x" +
                             instance.seg2.tokens.front().surface);
    out.first_last.push_back("LASTPAIR:" + instance.seg1.tokens.back().surface + "x" +
                             instance.seg2.tokens.back().surface);
  }
  return out;
}

FeatureBag extract_production_rules(const InstancePair& instance) {
  FeatureBag out;
  for (int k : {1, 2}) {
    const SegmentAnnotation& seg = segment(instance, k);
    if (!seg.parse_tree) continue;
    TreeNode root;
    try {
      root = parse_bracketed_tree(*seg.parse_tree, instance.id);
    } catch (const FormatError& e) {
      throw ValidationError("instance '" + instance.id + "': " + e.what());
    }
    collect_rules(root, seg_prefix(k), out);
  }
  return out;
}

FeatureBag extract_coref(const InstancePair& instance) {
  FeatureBag out;
  int c = std::min(static_cast<int>(instance.coref_links.size()), kCorefCap);
  out.push_back("COREF:" + std::to_string(c));
  if (c > 0) out.push_back("COREF:HAS");
  return out;
}

FeatureBag extract_brown(const InstancePair& instance, const BrownLexicon& lexicon,
                         int prefix_len, bool pairwise) {
  FeatureBag out;
  if (!pairwise) {
    for (int k : {1, 2}) {
      const std::string prefix = seg_prefix(k);
      for (const Token& token : segment(instance, k).tokens) {
        if (auto path = lexicon.cluster_of(token.surface, prefix_len)) {
          out.push_back(prefix + *path);
        }
      }
    }
    return out;
  }
  std::vector<std::string> left;
  for (const Token& token : instance.seg1.tokens) {
    if (auto path = lexicon.cluster_of(token.surface, prefix_len)) {
      left.push_back(std::move(*path));
    }
  }
  for (const Token& token : instance.seg2.tokens) {
    auto right = lexicon.cluster_of(token.surface, prefix_len);
    if (!right) continue;
    for (const std::string& p1 : left) {
      out.push_back(p1 + "x" + *right);
    }
  }
  return out;
}

FeatureBag extract_framenet(const InstancePair& instance, const BrownLexicon& lexicon,
                            bool with_cluster, const ExtractOptions& options) {
  FeatureBag out;
  for (int k : {1, 2}) {
    const SegmentAnnotation& seg = segment(instance, k);
    const std::string prefix = seg_prefix(k);
    for (const FrameNetRole& role : seg.framenet_roles) {
      out.push_back(prefix + role.role_name);
      if (!with_cluster) continue;
      if (auto path = lexicon.cluster_of(span_head(seg, role.filler_span, options))) {
        out.push_back(prefix + role.role_name + ":" + *path);
      }
    }
  }
  return out;
}

FeatureBag extract_propbank(const InstancePair& instance, const BrownLexicon& lexicon,
                            PropBankVariant variant, bool include_modifiers,
                            const ExtractOptions& options) {
  FeatureBag out;
  for (int k : {1, 2}) {
    const SegmentAnnotation& seg = segment(instance, k);
    const std::string prefix = seg_prefix(k);
    for (const PropBankFrame& frame : seg.propbank_frames) {
      if (variant == PropBankVariant::VerbNetClass && !frame.verbnet_class) continue;
      for (const PropBankArgument& arg : frame.arguments) {
        if (!include_modifiers && is_modifier_label(arg.label)) continue;
        if (variant == PropBankVariant::VerbNetClass) {
          out.push_back(prefix + frame.predicate_lemma + "-" + *frame.verbnet_class + "_" +
                        arg.label);
        } else {
          if (auto path = lexicon.cluster_of(span_head(seg, arg.filler_span, options))) {
            out.push_back(prefix + frame.predicate_lemma + "_" + arg.label + ":" + *path);
          }
        }
      }
    }
  }
  return out;
}

namespace {

struct ExtractVisitor {
  const InstancePair& instance;
  const BrownLexicon& lexicon;
  const ExtractOptions& options;

  FeatureBag operator()(const FirstLastFeat&) const {
    return extract_surface(instance, options).first_last;
  }
  FeatureBag operator()(const DatesNumbersFeat&) const {
    return extract_surface(instance, options).dates_numbers;
  }
  FeatureBag operator()(const ProductionRulesFeat&) const {
    return extract_production_rules(instance);
  }
  FeatureBag operator()(const VerbFeat&) const { return extract_surface(instance, options).verb; }
  FeatureBag operator()(const CorefFeat&) const { return extract_coref(instance); }
  FeatureBag operator()(const BrownFeat& f) const {
    return extract_brown(instance, lexicon, f.prefix_len, false);
  }
  FeatureBag operator()(const PairwiseBrownFeat& f) const {
    return extract_brown(instance, lexicon, f.prefix_len, true);
  }
  FeatureBag operator()(const FrameNetRolesFeat& f) const {
    return extract_framenet(instance, lexicon, f.with_cluster, options);
  }
  FeatureBag operator()(const PropBankRolesFeat& f) const {
    return extract_propbank(instance, lexicon, f.variant, f.include_modifiers, options);
  }
};

}  // namespace

FeatureBag extract(const InstancePair& instance, const FeatureType& ftype,
                   const BrownLexicon& lexicon, const ExtractOptions& options) {
  return std::visit(ExtractVisitor{instance, lexicon, options}, ftype);
}

std::uint64_t features_fingerprint(const std::vector<std::string>& features) {
  std::uint64_t state = kFnvOffset;
  for (std::size_t i = 0; i < features.size(); ++i) {
    state = fnv1a(features[i], state);
    state = fnv1a("\x1f", state);
    state = fnv1a(std::to_string(i), state);
    state = fnv1a("\x1e", state);
  }
  return state;
}

Vocabulary::Vocabulary(std::vector<std::string> features, std::vector<std::uint64_t> frequencies,
                       std::uint64_t min_count)
    : features_(std::move(features)), frequencies_(std::move(frequencies)),
      min_count_(min_count) {
  if (min_count_ < 1) {
    throw ValidationError("vocabulary min_count must be >= 1");
  }
  if (features_.size() != frequencies_.size()) {
    throw ValidationError("vocabulary features and frequencies must align");
  }
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (i > 0 && !(features_[i - 1] < features_[i])) {
      throw ValidationError("vocabulary features must be strictly increasing, got '" +
                            features_[i - 1] + "' before '" + features_[i] + "'");
    }
    if (frequencies_[i] < min_count_) {
      throw ValidationError("vocabulary feature '" + features_[i] +
                            "' has frequency below min_count");
    }
    index_.emplace(features_[i], static_cast<int>(i));
  }
  fingerprint_ = features_fingerprint(features_);
}

std::optional<int> Vocabulary::id_of(std::string_view feature) const {
  auto it = index_.find(std::string(feature));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary build_vocabulary(const std::vector<FeatureBag>& bags, std::uint64_t min_count) {
  if (min_count < 1) {
    throw ConfigError("build_vocabulary: min_count must be >= 1");
  }
  std::map<std::string, std::uint64_t> counts;  // ordered: ids come out lexicographic
  for (const FeatureBag& bag : bags) {
    for (const std::string& feature : bag) ++counts[feature];
  }
  std::vector<std::string> features;
  std::vector<std::uint64_t> frequencies;
  for (auto& [feature, count] : counts) {
    if (count >= min_count) {
      features.push_back(feature);
      frequencies.push_back(count);
    }
  }
  return Vocabulary(std::move(features), std::move(frequencies), min_count);
}

Vocabulary build_vocabulary(const Corpus& corpus, const FeatureType& ftype,
                            const BrownLexicon& lexicon, std::uint64_t min_count,
                            const ExtractOptions& options) {
  std::vector<FeatureBag> bags;
  bags.reserve(corpus.size());
  for (const InstancePair& instance : corpus) {
    bags.push_back(extract(instance, ftype, lexicon, options));
  }
  return build_vocabulary(bags, min_count);
}

FeatureVector vectorize(const FeatureBag& bag, const Vocabulary& vocab) {
  FeatureVector fv;
  fv.vocab_fingerprint = vocab.fingerprint();
  fv.ids.reserve(bag.size());
  for (const std::string& feature : bag) {
    if (auto id = vocab.id_of(feature)) fv.ids.push_back(*id);
  }
  std::sort(fv.ids.begin(), fv.ids.end());
  fv.ids.erase(std::unique(fv.ids.begin(), fv.ids.end()), fv.ids.end());
  return fv;
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw FormatError("cannot open vocabulary file for writing: " + path);
  }
  out << "drc-vocab 1\n";
  out << "min_count " << vocab.min_count() << "\n";
  out << "features " << vocab.size() << "\n";
  for (int i = 0; i < vocab.size(); ++i) {
    out << vocab.feature(i) << "\t" << vocab.frequency(i) << "\n";
  }
  if (!out) {
    throw FormatError("failed writing vocabulary file: " + path);
  }
}

Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open vocabulary file: " + path);
  }
  std::string line;
  if (!std::getline(in, line) || line != "drc-vocab 1") {
    throw FormatError(path + ": expected 'drc-vocab 1' header");
  }
  if (!std::getline(in, line) || !line.starts_with("min_count ")) {
    throw FormatError(path + ": expected 'min_count <n>'");
  }
  std::uint64_t min_count = parse_uint(line.substr(10), path + ": min_count");
  if (!std::getline(in, line) || !line.starts_with("features ")) {
    throw FormatError(path + ": expected 'features <n>'");
  }
  std::uint64_t n = parse_uint(line.substr(9), path + ": features");
  std::vector<std::string> features;
  std::vector<std::uint64_t> frequencies;
  features.reserve(n);
  frequencies.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) {
      throw FormatError(path + ": truncated vocabulary file (expected " + std::to_string(n) +
                        " features, got " + std::to_string(i) + ")");
    }
    std::size_t tab = line.rfind('\t');
    if (tab == std::string::npos || tab == 0) {
      throw FormatError(path + ": expected '<feature>\\t<frequency>' at entry " +
                        std::to_string(i));
    }
    features.push_back(line.substr(0, tab));
    frequencies.push_back(parse_uint(line.substr(tab + 1), path + ": frequency"));
  }
  if (std::getline(in, line) && !line.empty()) {
    throw FormatError(path + ": trailing content after vocabulary entries");
  }
  try {
    return Vocabulary(std::move(features), std::move(frequencies), min_count);
  } catch (const ValidationError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

namespace {

bool all_binary(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return c == '0' || c == '1'; });
}

/// Splits a leading "1:"/"2:" segment marker; returns 0 when absent.
int split_segment(std::string_view& rest) {
  if (rest.size() >= 2 && (rest[0] == '1' || rest[0] == '2') && rest[1] == ':') {
    int seg = rest[0] - '0';
    rest.remove_prefix(2);
    return seg;
  }
  return 0;
}

struct DecodeVisitor {
  std::string_view feature;

  DecodedFeature plain_segmented() const {
    std::string_view rest = feature;
    DecodedFeature out;
    out.segment = split_segment(rest);
    out.label = std::string(rest);
    return out;
  }

  DecodedFeature operator()(const FirstLastFeat&) const { return plain_segmented(); }
  DecodedFeature operator()(const DatesNumbersFeat&) const { return plain_segmented(); }
  DecodedFeature operator()(const ProductionRulesFeat&) const { return plain_segmented(); }
  DecodedFeature operator()(const VerbFeat&) const { return plain_segmented(); }
  DecodedFeature operator()(const CorefFeat&) const {
    return DecodedFeature{0, std::string(feature), ""};
  }
  DecodedFeature operator()(const BrownFeat&) const {
    std::string_view rest = feature;
    DecodedFeature out;
    out.segment = split_segment(rest);
    out.cluster = std::string(rest);
    return out;
  }
  DecodedFeature operator()(const PairwiseBrownFeat&) const {
    return DecodedFeature{0, std::string(feature), ""};
  }
  DecodedFeature operator()(const FrameNetRolesFeat& f) const {
    std::string_view rest = feature;
    DecodedFeature out;
    out.segment = split_segment(rest);
    if (f.with_cluster) {
      std::size_t colon = rest.rfind(':');
      if (colon != std::string_view::npos && all_binary(rest.substr(colon + 1))) {
        out.cluster = std::string(rest.substr(colon + 1));
        rest = rest.substr(0, colon);
      }
    }
    out.label = std::string(rest);
    return out;
  }
  DecodedFeature operator()(const PropBankRolesFeat& f) const {
    std::string_view rest = feature;
    DecodedFeature out;
    out.segment = split_segment(rest);
    if (f.variant == PropBankVariant::LemmaCluster) {
      std::size_t colon = rest.rfind(':');
      if (colon != std::string_view::npos && all_binary(rest.substr(colon + 1))) {
        out.cluster = std::string(rest.substr(colon + 1));
        rest = rest.substr(0, colon);
      }
    }
    out.label = std::string(rest);
    return out;
  }
};

}  // namespace

DecodedFeature decode_feature(const FeatureType& ftype, std::string_view feature) {
  return std::visit(DecodeVisitor{feature}, ftype);
}

}  // namespace drc
