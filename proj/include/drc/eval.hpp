// eval.hpp
// One-vs-all precision/recall/F1 per relation over predicted label sets.

#ifndef DRC_EVAL_HPP
#define DRC_EVAL_HPP

#include <map>
#include <set>
#include <string>

#include "drc/corpus.hpp"

namespace drc {

struct RelationMetrics {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// Set when precision or recall had a zero denominator and was reported as 0.
  bool degenerate = false;
};

struct EvalReport {
  std::map<Relation, RelationMetrics> per_relation;
  long corpus_size = 0;
};

using PredictionMap = std::map<std::string, std::set<Relation>>;

double f1_score(long tp, long fp, long fn);

/// Predictions must cover every gold instance id; extra prediction ids are
/// ignored. Throws CoverageError listing the missing ids otherwise.
EvalReport evaluate(const PredictionMap& predictions, const Corpus& gold);

/// Counts-only entry point shared with selection's inner loop.
RelationMetrics compute_metrics(long tp, long fp, long fn, long tn);

/// Human-readable table in comp/cont/exp/temp column order, percentages with
/// one decimal.
std::string format_report(const EvalReport& report, const std::string& title);

/// Machine-readable counterpart: raw counts plus full-precision metrics.
std::string report_json(const EvalReport& report);

}  // namespace drc

#endif  // DRC_EVAL_HPP
