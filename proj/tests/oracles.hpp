// Test-only oracles, kept independent of the library's solver path: a dense
// re-implementation of the objective, central finite differences, and a slow
// backtracking gradient-descent optimizer.

#ifndef DRC_TESTS_ORACLES_HPP
#define DRC_TESTS_ORACLES_HPP

#include <cmath>
#include <random>
#include <vector>

#include "drc/linmodel.hpp"

namespace drc::testing {

/// Dense, straightforward evaluation of the weighted logistic objective with
/// L2 on the weights and a free bias. theta = [w..., b].
inline double oracle_loss(const std::vector<double>& theta, const Dataset& data, double c) {
  const std::size_t dim = theta.size() - 1;
  double loss = 0.0;
  for (const Example& ex : data) {
    double z = theta[dim];
    for (int id : ex.fv.ids) z += theta[static_cast<std::size_t>(id)];
    const double y = ex.positive ? 1.0 : -1.0;
    const double t = -y * z;
    loss += ex.weight * (t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)));
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < dim; ++i) sq += theta[i] * theta[i];
  return loss + 0.5 / c * sq;
}

inline std::vector<double> oracle_gradient(const std::vector<double>& theta, const Dataset& data,
                                           double c) {
  const std::size_t dim = theta.size() - 1;
  std::vector<double> grad(theta.size(), 0.0);
  for (const Example& ex : data) {
    double z = theta[dim];
    for (int id : ex.fv.ids) z += theta[static_cast<std::size_t>(id)];
    const double y = ex.positive ? 1.0 : -1.0;
    const double sig = 1.0 / (1.0 + std::exp(y * z));  // sigma(-y z)
    const double g = ex.weight * -y * sig;
    for (int id : ex.fv.ids) grad[static_cast<std::size_t>(id)] += g;
    grad[dim] += g;
  }
  for (std::size_t i = 0; i < dim; ++i) grad[i] += theta[i] / c;
  return grad;
}

/// Central finite differences of a loss functional.
template <typename Loss>
std::vector<double> finite_difference_gradient(Loss&& loss, std::vector<double> theta,
                                               double h = 1e-5) {
  std::vector<double> grad(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + h;
    const double up = loss(theta);
    theta[i] = saved - h;
    const double down = loss(theta);
    theta[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

struct SlowResult {
  std::vector<double> theta;
  double loss = 0.0;
  double grad_inf = 0.0;  // final gradient inf-norm
  bool converged = false;
};

/// Fine-step gradient descent with Armijo backtracking, run until the
/// gradient inf-norm falls to `tol` or loss decrements sink below rounding
/// noise. Slow and simple on purpose. The caller should check grad_inf: the
/// optimality gap is bounded by ||g||^2 / (2 * min curvature).
inline SlowResult slow_minimize(const Dataset& data, std::size_t dim, double c,
                                double tol = 1e-10, long max_iter = 2000000) {
  SlowResult result;
  std::vector<double> theta(dim + 1, 0.0);
  double loss = oracle_loss(theta, data, c);
  for (long iter = 0; iter < max_iter; ++iter) {
    std::vector<double> grad = oracle_gradient(theta, data, c);
    double inf = 0.0;
    double sq = 0.0;
    for (double g : grad) {
      inf = std::max(inf, std::fabs(g));
      sq += g * g;
    }
    result.grad_inf = inf;
    if (inf <= tol) {
      result.converged = true;
      break;
    }
    double step = 1.0;
    while (step > 1e-18) {
      std::vector<double> next(theta.size());
      for (std::size_t i = 0; i < theta.size(); ++i) next[i] = theta[i] - step * grad[i];
      const double next_loss = oracle_loss(next, data, c);
      if (next_loss <= loss - 1e-4 * step * sq) {
        theta.swap(next);
        loss = next_loss;
        break;
      }
      step *= 0.5;
    }
    if (step <= 1e-18) break;  // decrements below double rounding noise
  }
  result.theta = std::move(theta);
  result.loss = loss;
  return result;
}

/// Random sparse binary problem on a fixed vocabulary-sized feature space.
inline Dataset random_problem(std::mt19937_64& rng, const Vocabulary& vocab, int n_instances,
                              double density = 0.2) {
  Dataset data;
  const int dim = vocab.size();
  for (int i = 0; i < n_instances; ++i) {
    FeatureVector fv;
    fv.vocab_fingerprint = vocab.fingerprint();
    for (int f = 0; f < dim; ++f) {
      if (static_cast<double>(rng() >> 11) * 0x1.0p-53 < density) fv.ids.push_back(f);
    }
    const bool positive = (rng() & 1) != 0;
    const double weight = 0.5 + static_cast<double>(rng() >> 11) * 0x1.0p-53;
    data.push_back(Example{std::move(fv), positive, weight});
  }
  return data;
}

/// Vocabulary of `dim` synthetic feature strings f000..., for solver tests.
inline Vocabulary synthetic_vocabulary(int dim) {
  std::vector<std::string> features;
  std::vector<std::uint64_t> freqs(static_cast<std::size_t>(dim), 1);
  for (int i = 0; i < dim; ++i) {
    std::string n = std::to_string(i);
    features.push_back("f" + std::string(3 - std::min<std::size_t>(3, n.size()), '0') + n);
  }
  return Vocabulary(std::move(features), std::move(freqs), 1);
}

}  // namespace drc::testing

#endif  // DRC_TESTS_ORACLES_HPP
