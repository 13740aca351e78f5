#include "drc/inspect.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "drc/error.hpp"
#include "drc/util.hpp"

namespace drc {

std::optional<WeightSign> weight_sign_from_name(std::string_view name) {
  if (name == "positive") return WeightSign::Positive;
  if (name == "negative") return WeightSign::Negative;
  if (name == "both") return WeightSign::Both;
  return std::nullopt;
}

namespace {

WeightReport build_report(const LinearModel& model, const std::vector<std::string>& features,
                          int k, WeightSign sign, const std::optional<FeatureType>& ftype) {
  if (k < 0) {
    throw ConfigError("top_weights: k must be >= 0");
  }
  WeightReport report;
  report.relation = model.relation;
  report.feature_type = model.feature_type;
  const int n = static_cast<int>(features.size());
  if (k > n) {
    report.k_exceeded_vocab = true;
    k = n;
  }

  std::vector<int> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  auto desc = [&](int a, int b) {
    if (model.weights[a] != model.weights[b]) return model.weights[a] > model.weights[b];
    return features[a] < features[b];
  };
  std::sort(order.begin(), order.end(), desc);

  std::vector<int> picked;
  if (sign == WeightSign::Positive || sign == WeightSign::Both) {
    picked.insert(picked.end(), order.begin(), order.begin() + k);
  }
  if (sign == WeightSign::Negative || sign == WeightSign::Both) {
    picked.insert(picked.end(), order.end() - k, order.end());
  }
  std::sort(picked.begin(), picked.end(), desc);
  picked.erase(std::unique(picked.begin(), picked.end()), picked.end());

  for (int id : picked) {
    WeightRow row;
    row.feature = features[static_cast<std::size_t>(id)];
    row.weight = model.weights[static_cast<std::size_t>(id)];
    if (ftype) {
      DecodedFeature decoded = decode_feature(*ftype, row.feature);
      row.segment = decoded.segment;
      row.label = decoded.label;
      row.cluster = decoded.cluster;
    } else {
      row.label = row.feature;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace

WeightReport top_weights(const LinearModel& model, const Vocabulary& vocab, int k,
                         WeightSign sign, std::optional<FeatureType> ftype) {
  if (vocab.fingerprint() != model.vocab_fingerprint) {
    throw BindingError("top_weights: vocabulary fingerprint mismatch");
  }
  return build_report(model, vocab.features(), k, sign, ftype);
}

WeightReport top_weights(const LoadedModel& loaded, int k, WeightSign sign) {
  std::optional<FeatureType> ftype = feature_type_from_name(loaded.model.feature_type);
  return build_report(loaded.model, loaded.features, k, sign, ftype);
}

std::string format_weight_report(const WeightReport& report) {
  std::ostringstream out;
  out << "relation: " << report.relation << "   feature type: " << report.feature_type << "\n";
  std::size_t label_width = 10;
  for (const WeightRow& row : report.rows) {
    label_width = std::max(label_width, row.label.size() + (row.cluster.empty() ? 0 : row.cluster.size() + 1));
  }
  out << std::left << std::setw(static_cast<int>(label_width) + 2) << "role name"
      << std::setw(11) << "position" << "weight\n";
  for (const WeightRow& row : report.rows) {
    std::string label = row.label;
    if (!row.cluster.empty()) label += ":" + row.cluster;
    std::string position = row.segment == 0 ? "-" : "segment " + std::to_string(row.segment);
    out << std::left << std::setw(static_cast<int>(label_width) + 2) << label << std::setw(11)
        << position;
    out << (row.weight >= 0 ? "+" : "") << format_double(row.weight) << "\n";
  }
  if (report.k_exceeded_vocab) {
    out << "note: k exceeded the vocabulary size; all features listed\n";
  }
  return out.str();
}

std::string weight_report_json(const WeightReport& report) {
  nlohmann::json obj;
  obj["format"] = "drc-weights";
  obj["version"] = 1;
  obj["relation"] = report.relation;
  obj["feature_type"] = report.feature_type;
  obj["k_exceeded_vocab"] = report.k_exceeded_vocab;
  nlohmann::json rows = nlohmann::json::array();
  for (const WeightRow& row : report.rows) {
    nlohmann::json r;
    r["feature"] = row.feature;
    r["segment"] = row.segment;
    r["label"] = row.label;
    if (!row.cluster.empty()) r["cluster"] = row.cluster;
    r["weight"] = row.weight;
    rows.push_back(std::move(r));
  }
  obj["rows"] = std::move(rows);
  return obj.dump(2) + "\n";
}

Explanation explain(const RelationEnsemble& ensemble, const InstancePair& instance,
                    const BrownLexicon& lexicon) {
  Explanation out;
  out.relation = std::string(relation_name(ensemble.relation));
  double sum = 0.0;
  for (const EnsembleMember& member : ensemble.members) {
    MemberExplanation me;
    me.member = member_name(member);
    FeatureVector fv = vectorize(member_extract(member, instance, lexicon), member.vocab);
    me.raw = raw_score(member.model, fv);
    me.score = score(member.model, fv);
    me.bias = member.model.bias;
    for (int id : fv.ids) {
      me.active.push_back(FeatureContribution{member.vocab.feature(id),
                                              member.model.weights[static_cast<std::size_t>(id)]});
    }
    std::sort(me.active.begin(), me.active.end(),
              [](const FeatureContribution& a, const FeatureContribution& b) {
                if (std::fabs(a.weight) != std::fabs(b.weight)) {
                  return std::fabs(a.weight) > std::fabs(b.weight);
                }
                return a.feature < b.feature;
              });
    sum += me.score;
    out.members.push_back(std::move(me));
  }
  out.mean_score = sum / static_cast<double>(ensemble.members.size());
  out.decision = out.mean_score > 0.5;
  return out;
}

std::string format_explanation(const Explanation& explanation, const std::string& instance_id) {
  std::ostringstream out;
  out << "instance: " << instance_id << "   relation: " << explanation.relation << "\n";
  for (const MemberExplanation& me : explanation.members) {
    out << "  member " << me.member << ": score " << format_double(me.score) << " (raw "
        << format_double(me.raw) << ", bias " << format_double(me.bias) << ")\n";
    for (const FeatureContribution& fc : me.active) {
      out << "    " << fc.feature << "  " << (fc.weight >= 0 ? "+" : "")
          << format_double(fc.weight) << "\n";
    }
    if (me.active.empty()) {
      out << "    (no active features; bias only)\n";
    }
  }
  out << "  mean score: " << format_double(explanation.mean_score) << "  ->  "
      << (explanation.decision ? "predicted" : "not predicted") << "\n";
  return out.str();
}

}  // namespace drc
