#include "drc/eval.hpp"

#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "drc/error.hpp"

namespace drc {

double f1_score(long tp, long fp, long fn) {
  const double p = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  const double r = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  return (p + r) > 0 ? 2.0 * p * r / (p + r) : 0.0;
}

RelationMetrics compute_metrics(long tp, long fp, long fn, long tn) {
  RelationMetrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.tn = tn;
  if (tp + fp > 0) {
    m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  } else {
    m.degenerate = true;
  }
  if (tp + fn > 0) {
    m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  } else {
    m.degenerate = true;
  }
  m.f1 = (m.precision + m.recall) > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                      : 0.0;
  return m;
}

EvalReport evaluate(const PredictionMap& predictions, const Corpus& gold) {
  std::vector<std::string> missing;
  for (const InstancePair& instance : gold) {
    if (predictions.find(instance.id) == predictions.end()) {
      missing.push_back(instance.id);
    }
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "predictions missing for " << missing.size() << " gold instance id(s):";
    for (const std::string& id : missing) msg << " " << id;
    throw CoverageError(msg.str(), std::move(missing));
  }

  EvalReport report;
  report.corpus_size = static_cast<long>(gold.size());
  for (Relation r : kAllRelations) {
    long tp = 0, fp = 0, fn = 0, tn = 0;
    for (const InstancePair& instance : gold) {
      const bool predicted = predictions.at(instance.id).count(r) > 0;
      const bool actual = instance.gold_relations.count(r) > 0;
      if (predicted && actual) ++tp;
      else if (predicted && !actual) ++fp;
      else if (!predicted && actual) ++fn;
      else ++tn;
    }
    report.per_relation[r] = compute_metrics(tp, fp, fn, tn);
  }
  return report;
}

std::string format_report(const EvalReport& report, const std::string& title) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1);
  if (!title.empty()) out << title << "\n";
  out << std::setw(11) << "" << std::setw(7) << "comp" << std::setw(7) << "cont" << std::setw(7)
      << "exp" << std::setw(7) << "temp" << "\n";
  auto row = [&](const char* name, auto getter) {
    out << std::setw(11) << std::left << name << std::right;
    for (Relation r : kAllRelations) {
      out << std::setw(7) << getter(report.per_relation.at(r)) * 100.0;
    }
    out << "\n";
  };
  row("precision", [](const RelationMetrics& m) { return m.precision; });
  row("recall", [](const RelationMetrics& m) { return m.recall; });
  row("f1", [](const RelationMetrics& m) { return m.f1; });
  bool any_degenerate = false;
  for (Relation r : kAllRelations) {
    if (report.per_relation.at(r).degenerate) {
      any_degenerate = true;
      out << "note: " << relation_name(r) << " is degenerate (zero denominator), reported as 0\n";
    }
  }
  (void)any_degenerate;
  out << "instances: " << report.corpus_size << "\n";
  return out.str();
}

std::string report_json(const EvalReport& report) {
  nlohmann::json obj;
  obj["format"] = "drc-eval";
  obj["version"] = 1;
  obj["corpus_size"] = report.corpus_size;
  for (Relation r : kAllRelations) {
    const RelationMetrics& m = report.per_relation.at(r);
    nlohmann::json rel;
    rel["tp"] = m.tp;
    rel["fp"] = m.fp;
    rel["fn"] = m.fn;
    rel["tn"] = m.tn;
    rel["precision"] = m.precision;
    rel["recall"] = m.recall;
    rel["f1"] = m.f1;
    rel["degenerate"] = m.degenerate;
    obj["relations"][std::string(relation_name(r))] = std::move(rel);
  }
  return obj.dump(2) + "\n";
}

}  // namespace drc
