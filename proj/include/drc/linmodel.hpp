// linmodel.hpp
// One binary L2-regularized logistic regression classifier over sparse binary
// feature vectors: exact loss/gradient, a batch L-BFGS solver, scoring and
// human-diffable model files.

#ifndef DRC_LINMODEL_HPP
#define DRC_LINMODEL_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "drc/features.hpp"

namespace drc {

struct TrainConfig {
  /// Inverse regularization strength: loss = sum of weighted log-losses plus
  /// (1/(2C)) * ||w||^2. The bias is unregularized.
  double c = 1.0;
  /// Stop when the L2 norm of the full gradient (weights and bias) drops to
  /// this value.
  double tolerance = 1e-6;
  int max_iter = 200;
  /// Multiplier applied to positive instances; 0 selects auto-balancing so
  /// both classes carry equal total weight.
  double positive_class_weight = 0.0;
  /// Only consulted when shuffle is set; training is otherwise deterministic
  /// in dataset order.
  std::uint64_t seed = 0;
  bool shuffle = false;
};

/// One training example. `weight` is an optional per-instance multiplier on
/// top of the class weighting from TrainConfig.
struct Example {
  FeatureVector fv;
  bool positive = false;
  double weight = 1.0;
};

using Dataset = std::vector<Example>;

struct LinearModel {
  std::vector<double> weights;  // sized to the vocabulary at training time
  double bias = 0.0;
  std::string relation;
  std::string feature_type;  // canonical feature type name
  std::uint64_t vocab_fingerprint = 0;
  double c = 1.0;
  double tolerance = 1e-6;
};

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad_weights;
  double grad_bias = 0.0;
};

/// Exact objective and gradient. Example weights here are final: class
/// balancing has already been folded in by the caller.
LossGrad loss_and_gradient(std::span<const double> weights, double bias, const Dataset& data,
                           double c);

struct TrainStats {
  int iterations = 0;
  double final_loss = 0.0;
  double grad_norm = 0.0;
  bool converged = false;
  bool degenerate = false;  // single-class data, bias-only fit
  std::vector<std::string> warnings;
};

/// Trains from zero initialization. Deterministic given (dataset order,
/// config). Throws SolverError when the objective turns non-finite and
/// BindingError when an example does not match the vocabulary fingerprint.
LinearModel train(const Dataset& data, const Vocabulary& vocab, const TrainConfig& config,
                  std::string relation, std::string feature_type, TrainStats* stats = nullptr);

/// sigma(w.x + b), clamped into the open interval (0,1) by one ulp so finite
/// parameters never report a hard 0 or 1.
double score(const LinearModel& model, const FeatureVector& fv);

/// Pre-sigmoid w.x + b.
double raw_score(const LinearModel& model, const FeatureVector& fv);

double sigmoid(double z);

void save_model(const LinearModel& model, const Vocabulary& vocab, const std::string& path);

struct LoadedModel {
  LinearModel model;
  std::vector<std::string> features;  // feature strings in weight order
};

/// Strict parse; verifies the stored fingerprint against the feature list and
/// rejects truncated files without returning a partial model.
LoadedModel load_model(const std::string& path);

}  // namespace drc

#endif  // DRC_LINMODEL_HPP
