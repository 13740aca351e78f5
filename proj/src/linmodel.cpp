#include "drc/linmodel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <random>

#include "drc/error.hpp"
#include "drc/util.hpp"

namespace drc {

double sigmoid(double z) {
  if (z >= 0) {
    double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

// log(1 + exp(t)) without overflow.
double log1pexp(double t) {
  if (t > 0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

double dot_sparse(std::span<const double> weights, const FeatureVector& fv) {
  double z = 0.0;
  for (int id : fv.ids) z += weights[static_cast<std::size_t>(id)];
  return z;
}

}  // namespace

LossGrad loss_and_gradient(std::span<const double> weights, double bias, const Dataset& data,
                           double c) {
  LossGrad out;
  out.grad_weights.assign(weights.size(), 0.0);
  for (const Example& ex : data) {
    const double y = ex.positive ? 1.0 : -1.0;
    const double margin = y * (dot_sparse(weights, ex.fv) + bias);
    out.loss += ex.weight * log1pexp(-margin);
    const double g = ex.weight * -y * sigmoid(-margin);
    for (int id : ex.fv.ids) out.grad_weights[static_cast<std::size_t>(id)] += g;
    out.grad_bias += g;
  }
  const double inv_c = 1.0 / c;
  double sq = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    sq += weights[i] * weights[i];
    out.grad_weights[i] += inv_c * weights[i];
  }
  out.loss += 0.5 * inv_c * sq;
  return out;
}

namespace {

// Objective over the stacked parameter vector [w..., b]; the last component is
// the unregularized bias.
class Objective {
 public:
  Objective(const Dataset& data, double c, std::size_t dim) : data_(data), c_(c), dim_(dim) {}

  double eval(const std::vector<double>& theta, std::vector<double>& grad) const {
    std::span<const double> w(theta.data(), dim_);
    LossGrad lg = loss_and_gradient(w, theta[dim_], data_, c_);
    grad.assign(dim_ + 1, 0.0);
    std::copy(lg.grad_weights.begin(), lg.grad_weights.end(), grad.begin());
    grad[dim_] = lg.grad_bias;
    return lg.loss;
  }

 private:
  const Dataset& data_;
  double c_;
  std::size_t dim_;
};

double norm2(const std::vector<double>& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  return std::sqrt(sq);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct LbfgsPair {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

/// Batch L-BFGS with Armijo backtracking. Zero initialization, history 10.
/// Stops at grad norm <= tolerance or max_iter; reports through TrainStats.
void minimize(const Objective& objective, std::vector<double>& theta, double tolerance,
              int max_iter, TrainStats& stats) {
  constexpr std::size_t kHistory = 10;
  constexpr double kArmijo = 1e-4;

  std::vector<double> grad;
  double loss = objective.eval(theta, grad);
  if (!std::isfinite(loss)) {
    throw SolverError("non-finite loss at iteration 0");
  }
  std::deque<LbfgsPair> history;
  std::vector<double> direction(theta.size());
  std::vector<double> candidate(theta.size());
  std::vector<double> grad_next;

  int iter = 0;
  int stalls = 0;
  double gnorm = norm2(grad);
  while (gnorm > tolerance && iter < max_iter) {
    // Two-loop recursion to apply the inverse-Hessian estimate.
    for (std::size_t i = 0; i < theta.size(); ++i) direction[i] = -grad[i];
    std::vector<double> alphas(history.size());
    for (std::size_t h = history.size(); h-- > 0;) {
      const LbfgsPair& pair = history[h];
      alphas[h] = pair.rho * dot(pair.s, direction);
      for (std::size_t i = 0; i < direction.size(); ++i) {
        direction[i] -= alphas[h] * pair.y[i];
      }
    }
    if (!history.empty()) {
      const LbfgsPair& last = history.back();
      double scale = dot(last.s, last.y) / dot(last.y, last.y);
      for (double& d : direction) d *= scale;
    }
    for (std::size_t h = 0; h < history.size(); ++h) {
      const LbfgsPair& pair = history[h];
      double beta = pair.rho * dot(pair.y, direction);
      for (std::size_t i = 0; i < direction.size(); ++i) {
        direction[i] += (alphas[h] - beta) * pair.s[i];
      }
    }
    double descent = dot(grad, direction);
    if (descent >= 0) {
      // Fall back to steepest descent if curvature info went stale.
      for (std::size_t i = 0; i < theta.size(); ++i) direction[i] = -grad[i];
      descent = -gnorm * gnorm;
    }

    double step = 1.0;
    double loss_next = 0.0;
    bool accepted = false;
    while (step > 1e-12) {
      for (std::size_t i = 0; i < theta.size(); ++i) {
        candidate[i] = theta[i] + step * direction[i];
      }
      loss_next = objective.eval(candidate, grad_next);
      if (!std::isfinite(loss_next)) {
        throw SolverError("non-finite loss at iteration " + std::to_string(iter + 1));
      }
      if (loss_next <= loss + kArmijo * step * descent) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no acceptable step; report non-converged below

    // Once per-step decrease sinks below the rounding noise of the loss sum,
    // further iterations cannot make verifiable progress.
    if (loss - loss_next <= 1e-14 * (1.0 + std::fabs(loss))) {
      if (++stalls >= 2) {
        theta.swap(candidate);
        grad.swap(grad_next);
        loss = loss_next;
        gnorm = norm2(grad);
        ++iter;
        break;
      }
    } else {
      stalls = 0;
    }

    LbfgsPair pair;
    pair.s.resize(theta.size());
    pair.y.resize(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
      pair.s[i] = candidate[i] - theta[i];
      pair.y[i] = grad_next[i] - grad[i];
    }
    double sy = dot(pair.s, pair.y);
    if (sy > 1e-14) {
      pair.rho = 1.0 / sy;
      history.push_back(std::move(pair));
      if (history.size() > kHistory) history.pop_front();
    }
    theta.swap(candidate);
    grad.swap(grad_next);
    loss = loss_next;
    gnorm = norm2(grad);
    ++iter;
  }

  stats.iterations = iter;
  stats.final_loss = loss;
  stats.grad_norm = gnorm;
  stats.converged = gnorm <= tolerance;
}

}  // namespace

LinearModel train(const Dataset& data, const Vocabulary& vocab, const TrainConfig& config,
                  std::string relation, std::string feature_type, TrainStats* stats_out) {
  if (config.c <= 0 || config.tolerance <= 0 || config.max_iter < 1 ||
      config.positive_class_weight < 0) {
    throw ConfigError("train: require C > 0, tolerance > 0, max_iter >= 1, "
                      "positive_class_weight >= 0");
  }
  const std::size_t dim = static_cast<std::size_t>(vocab.size());
  double pos_input = 0.0, neg_input = 0.0;
  for (const Example& ex : data) {
    if (ex.fv.vocab_fingerprint != vocab.fingerprint()) {
      throw BindingError("train: example vector does not match the vocabulary fingerprint");
    }
    for (int id : ex.fv.ids) {
      if (id < 0 || static_cast<std::size_t>(id) >= dim) {
        throw BindingError("train: feature id " + std::to_string(id) +
                           " out of range for vocabulary of size " + std::to_string(vocab.size()));
      }
    }
    (ex.positive ? pos_input : neg_input) += ex.weight;
  }

  TrainStats stats;
  double pos_mult = 1.0, neg_mult = 1.0;
  if (pos_input == 0.0 || neg_input == 0.0) {
    stats.degenerate = true;
    stats.warnings.push_back("single-class training data for relation '" + relation +
                             "' (" + feature_type + "): fitting bias only");
  } else if (config.positive_class_weight == 0.0) {
    const double total = pos_input + neg_input;
    pos_mult = total / (2.0 * pos_input);
    neg_mult = total / (2.0 * neg_input);
  } else {
    pos_mult = config.positive_class_weight;
  }

  Dataset weighted;
  weighted.reserve(data.size());
  for (const Example& ex : data) {
    Example copy = ex;
    copy.weight = ex.weight * (ex.positive ? pos_mult : neg_mult);
    if (stats.degenerate) copy.fv.ids.clear();  // bias-only fit
    weighted.push_back(std::move(copy));
  }
  if (config.shuffle) {
    std::mt19937_64 rng(config.seed);
    std::shuffle(weighted.begin(), weighted.end(), rng);
  }

  const std::size_t fit_dim = stats.degenerate ? 0 : dim;
  Objective objective(weighted, config.c, fit_dim);
  std::vector<double> theta(fit_dim + 1, 0.0);
  if (!weighted.empty()) {
    minimize(objective, theta, config.tolerance, config.max_iter, stats);
  } else {
    stats.converged = true;
    stats.warnings.push_back("empty training data: zero model");
  }

  LinearModel model;
  model.weights.assign(dim, 0.0);
  for (std::size_t i = 0; i < fit_dim; ++i) model.weights[i] = theta[i];
  model.bias = theta[fit_dim];
  model.relation = std::move(relation);
  model.feature_type = std::move(feature_type);
  model.vocab_fingerprint = vocab.fingerprint();
  model.c = config.c;
  model.tolerance = config.tolerance;
  if (vocab.size() == 0 && !stats.degenerate) {
    stats.warnings.push_back("empty vocabulary for '" + model.feature_type +
                             "': classifier degenerates to bias-only");
  }
  if (stats_out) *stats_out = stats;
  return model;
}

double raw_score(const LinearModel& model, const FeatureVector& fv) {
  if (fv.vocab_fingerprint != model.vocab_fingerprint) {
    throw BindingError("score: feature vector fingerprint " + to_hex(fv.vocab_fingerprint) +
                       " does not match model fingerprint " + to_hex(model.vocab_fingerprint));
  }
  double z = model.bias;
  for (int id : fv.ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= model.weights.size()) {
      throw BindingError("score: feature id " + std::to_string(id) +
                         " out of range for model of size " +
                         std::to_string(model.weights.size()));
    }
    z += model.weights[static_cast<std::size_t>(id)];
  }
  return z;
}

double score(const LinearModel& model, const FeatureVector& fv) {
  double s = sigmoid(raw_score(model, fv));
  if (s >= 1.0) return std::nextafter(1.0, 0.0);
  if (s <= 0.0) return std::nextafter(0.0, 1.0);
  return s;
}

void save_model(const LinearModel& model, const Vocabulary& vocab, const std::string& path) {
  if (vocab.fingerprint() != model.vocab_fingerprint) {
    throw BindingError("save_model: vocabulary fingerprint mismatch");
  }
  if (static_cast<std::size_t>(vocab.size()) != model.weights.size()) {
    throw BindingError("save_model: vocabulary size does not match weight vector");
  }
  std::ofstream out(path);
  if (!out) {
    throw FormatError("cannot open model file for writing: " + path);
  }
  out << "drc-model 1\n";
  out << "relation " << model.relation << "\n";
  out << "feature_type " << model.feature_type << "\n";
  out << "c " << format_double(model.c) << "\n";
  out << "tolerance " << format_double(model.tolerance) << "\n";
  out << "vocab_fingerprint " << to_hex(model.vocab_fingerprint) << "\n";
  out << "bias " << format_double(model.bias) << "\n";
  out << "features " << vocab.size() << "\n";
  // Vocabulary ids are assigned in lexicographic feature order, so id order
  // doubles as the sorted-by-feature-string order the file format requires.
  for (int i = 0; i < vocab.size(); ++i) {
    out << vocab.feature(i) << "\t" << format_double(model.weights[static_cast<std::size_t>(i)])
        << "\n";
  }
  if (!out) {
    throw FormatError("failed writing model file: " + path);
  }
}

namespace {

std::string expect_line(std::ifstream& in, const std::string& path, const std::string& key) {
  std::string line;
  if (!std::getline(in, line) || !line.starts_with(key + " ")) {
    throw FormatError(path + ": expected '" + key + " <value>'");
  }
  return line.substr(key.size() + 1);
}

}  // namespace

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open model file: " + path);
  }
  std::string line;
  if (!std::getline(in, line) || line != "drc-model 1") {
    throw FormatError(path + ": expected 'drc-model 1' header");
  }
  LoadedModel loaded;
  loaded.model.relation = expect_line(in, path, "relation");
  loaded.model.feature_type = expect_line(in, path, "feature_type");
  loaded.model.c = parse_double(expect_line(in, path, "c"), path + ": c");
  loaded.model.tolerance = parse_double(expect_line(in, path, "tolerance"), path + ": tolerance");
  loaded.model.vocab_fingerprint =
      from_hex(expect_line(in, path, "vocab_fingerprint"));
  loaded.model.bias = parse_double(expect_line(in, path, "bias"), path + ": bias");
  std::uint64_t n = parse_uint(expect_line(in, path, "features"), path + ": features");

  loaded.features.reserve(n);
  loaded.model.weights.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) {
      throw FormatError(path + ": truncated model file (expected " + std::to_string(n) +
                        " features, got " + std::to_string(i) + ")");
    }
    std::size_t tab = line.rfind('\t');
    if (tab == std::string::npos || tab == 0) {
      throw FormatError(path + ": expected '<feature>\\t<weight>' at entry " + std::to_string(i));
    }
    std::string feature = line.substr(0, tab);
    if (i > 0 && !(loaded.features.back() < feature)) {
      throw FormatError(path + ": features must be sorted strictly ascending");
    }
    loaded.model.weights.push_back(parse_double(line.substr(tab + 1), path + ": weight"));
    loaded.features.push_back(std::move(feature));
  }
  if (std::getline(in, line) && !line.empty()) {
    throw FormatError(path + ": trailing content after weight entries");
  }
  if (features_fingerprint(loaded.features) != loaded.model.vocab_fingerprint) {
    throw FormatError(path + ": vocabulary fingerprint does not match the feature list "
                      "(corrupt model file)");
  }
  return loaded;
}

}  // namespace drc
