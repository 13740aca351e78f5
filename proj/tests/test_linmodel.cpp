#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "drc/error.hpp"
#include "drc/linmodel.hpp"
#include "oracles.hpp"

using namespace drc;
using namespace drc::testing;

namespace {

FeatureVector fv_of(const Vocabulary& vocab, std::vector<int> ids) {
  return FeatureVector{std::move(ids), vocab.fingerprint()};
}

}  // namespace

TEST_CASE("loss and gradient at zero parameters") {
  Vocabulary vocab = synthetic_vocabulary(3);
  Dataset one = {Example{fv_of(vocab, {0, 2}), true, 1.0}};
  std::vector<double> w(3, 0.0);
  LossGrad lg = loss_and_gradient(w, 0.0, one, 1e12);
  CHECK(lg.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(lg.grad_weights[0] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(lg.grad_weights[1] == 0.0);
  CHECK(lg.grad_weights[2] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(lg.grad_bias == doctest::Approx(-0.5).epsilon(1e-12));

  // Balanced pair on the same feature: the data gradient cancels.
  Dataset pair = {Example{fv_of(vocab, {0}), true, 1.0},
                  Example{fv_of(vocab, {0}), false, 1.0}};
  LossGrad balanced = loss_and_gradient(w, 0.0, pair, 1e12);
  CHECK(balanced.grad_weights[0] == 0.0);
}

TEST_CASE("analytic gradient matches central finite differences") {
  std::mt19937_64 rng(42);
  Vocabulary vocab = synthetic_vocabulary(50);
  for (int rep = 0; rep < 20; ++rep) {
    Dataset data = random_problem(rng, vocab, 30);
    std::vector<double> theta(51);
    for (double& t : theta) t = (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * 2.0;
    const double c = 1.0;

    std::span<const double> w(theta.data(), 50);
    LossGrad lg = loss_and_gradient(w, theta[50], data, c);
    std::vector<double> fd = finite_difference_gradient(
        [&](const std::vector<double>& point) {
          std::span<const double> pw(point.data(), 50);
          return loss_and_gradient(pw, point[50], data, c).loss;
        },
        theta);
    for (std::size_t i = 0; i < 50; ++i) {
      const double analytic = lg.grad_weights[i];
      const double denom = std::max(1.0, std::fabs(fd[i]));
      CHECK(std::fabs(analytic - fd[i]) / denom < 1e-5);
    }
    CHECK(std::fabs(lg.grad_bias - fd[50]) / std::max(1.0, std::fabs(fd[50])) < 1e-5);
  }
}

TEST_CASE("library objective agrees with the independent dense oracle") {
  std::mt19937_64 rng(7);
  Vocabulary vocab = synthetic_vocabulary(20);
  for (int rep = 0; rep < 10; ++rep) {
    Dataset data = random_problem(rng, vocab, 15);
    std::vector<double> theta(21);
    for (double& t : theta) t = (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * 4.0;
    std::span<const double> w(theta.data(), 20);
    const double lib = loss_and_gradient(w, theta[20], data, 2.0).loss;
    const double oracle = oracle_loss(theta, data, 2.0);
    CHECK(lib == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("objective is convex along random segments") {
  std::mt19937_64 rng(11);
  Vocabulary vocab = synthetic_vocabulary(10);
  for (int rep = 0; rep < 25; ++rep) {
    Dataset data = random_problem(rng, vocab, 8);
    std::vector<double> a(11), b(11), mid(11);
    for (std::size_t i = 0; i < 11; ++i) {
      a[i] = (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * 6.0;
      b[i] = (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * 6.0;
      mid[i] = 0.5 * (a[i] + b[i]);
    }
    const double c = 0.7;
    CHECK(oracle_loss(mid, data, c) <=
          0.5 * (oracle_loss(a, data, c) + oracle_loss(b, data, c)) + 1e-12);
  }
}

TEST_CASE("training separable one-feature data finds a positive weight") {
  Vocabulary vocab = synthetic_vocabulary(1);
  Dataset data = {Example{fv_of(vocab, {0}), true, 1.0}, Example{fv_of(vocab, {}), false, 1.0}};
  TrainConfig config;
  config.c = 1.0;
  config.tolerance = 1e-10;
  config.max_iter = 5000;
  TrainStats stats;
  LinearModel model = train(data, vocab, config, "Contingency", "first_last", &stats);
  CHECK(model.weights[0] > 0.0);
  CHECK(std::isfinite(model.weights[0]));

  SlowResult oracle = slow_minimize(data, 1, 1.0, 1e-12);
  CHECK(stats.final_loss == doctest::Approx(oracle.loss).epsilon(1e-9));
  CHECK(model.weights[0] == doctest::Approx(oracle.theta[0]).epsilon(1e-5));
}

TEST_CASE("flipping labels negates weights and bias under auto-balancing") {
  std::mt19937_64 rng(3);
  Vocabulary vocab = synthetic_vocabulary(8);
  Dataset data = random_problem(rng, vocab, 12);
  Dataset flipped = data;
  for (Example& ex : flipped) ex.positive = !ex.positive;
  TrainConfig config;
  config.tolerance = 1e-10;
  config.max_iter = 5000;
  LinearModel a = train(data, vocab, config, "r", "t");
  LinearModel b = train(flipped, vocab, config, "r", "t");
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(a.weights[i] == doctest::Approx(-b.weights[i]).epsilon(1e-6).scale(1.0));
  }
  CHECK(a.bias == doctest::Approx(-b.bias).epsilon(1e-6).scale(1.0));
}

TEST_CASE("solver reaches the slow-oracle optimum on random problems") {
  std::mt19937_64 rng(1234);
  Vocabulary vocab = synthetic_vocabulary(10);
  for (int rep = 0; rep < 3; ++rep) {
    Dataset raw = random_problem(rng, vocab, 10);
    bool has_pos = false, has_neg = false;
    for (const Example& ex : raw) (ex.positive ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) continue;
    TrainConfig config;
    config.c = 1.0;
    config.tolerance = 1e-10;
    config.max_iter = 20000;
    config.positive_class_weight = 1.0;  // plain weights so the oracle sees the same data
    TrainStats stats;
    train(raw, vocab, config, "r", "t", &stats);
    SlowResult oracle = slow_minimize(raw, 10, 1.0, 1e-10);
    REQUIRE(oracle.grad_inf <= 1e-7);  // gap to the true optimum ~ 1e-14
    CHECK(stats.final_loss <= oracle.loss + 1e-6);
    CHECK(stats.final_loss >= oracle.loss - 1e-6);
  }
}

TEST_CASE("monotone improvement and tolerance tightening") {
  std::mt19937_64 rng(99);
  Vocabulary vocab = synthetic_vocabulary(12);
  Dataset data = random_problem(rng, vocab, 20);
  std::vector<double> zero(12, 0.0);
  const double loss_at_zero = loss_and_gradient(zero, 0.0, data, 1.0).loss;

  TrainConfig loose;
  loose.positive_class_weight = 1.0;
  loose.tolerance = 1e-2;
  TrainStats loose_stats;
  train(data, vocab, loose, "r", "t", &loose_stats);
  CHECK(loose_stats.final_loss <= loss_at_zero);

  TrainConfig tight = loose;
  tight.tolerance = 1e-9;
  tight.max_iter = 10000;
  TrainStats tight_stats;
  train(data, vocab, tight, "r", "t", &tight_stats);
  CHECK(tight_stats.final_loss <= loose_stats.final_loss + 1e-12);
}

TEST_CASE("score evaluates the logistic link") {
  Vocabulary vocab = synthetic_vocabulary(2);
  LinearModel model;
  model.weights = {2.0, 0.0};
  model.bias = 0.0;
  model.vocab_fingerprint = vocab.fingerprint();
  CHECK(score(model, fv_of(vocab, {})) == 0.5);
  CHECK(score(model, fv_of(vocab, {0})) == doctest::Approx(0.880797).epsilon(1e-6));
  model.bias = -1.0;
  model.weights = {0.0, 0.0};
  CHECK(score(model, fv_of(vocab, {})) == doctest::Approx(0.268941).epsilon(1e-6));
}

TEST_CASE("score stays strictly inside (0,1) even for extreme raw scores") {
  Vocabulary vocab = synthetic_vocabulary(1);
  LinearModel model;
  model.weights = {0.0};
  model.bias = 1000.0;
  model.vocab_fingerprint = vocab.fingerprint();
  CHECK(score(model, fv_of(vocab, {})) < 1.0);
  model.bias = -1000.0;
  CHECK(score(model, fv_of(vocab, {})) > 0.0);
}

TEST_CASE("fingerprint mismatch is a binding error") {
  Vocabulary a = synthetic_vocabulary(2);
  Vocabulary b({"x", "y"}, {1, 1}, 1);
  LinearModel model;
  model.weights = {0.0, 0.0};
  model.vocab_fingerprint = a.fingerprint();
  CHECK_THROWS_AS(score(model, fv_of(b, {0})), BindingError);
  Dataset mixed = {Example{fv_of(b, {0}), true, 1.0}};
  CHECK_THROWS_AS(train(mixed, a, TrainConfig{}, "r", "t"), BindingError);
}

TEST_CASE("single-class data degenerates to a bias-only fit with a warning") {
  Vocabulary vocab = synthetic_vocabulary(2);
  Dataset all_positive = {Example{fv_of(vocab, {0}), true, 1.0},
                          Example{fv_of(vocab, {1}), true, 1.0}};
  TrainStats stats;
  LinearModel model = train(all_positive, vocab, TrainConfig{}, "r", "t", &stats);
  CHECK(stats.degenerate);
  REQUIRE(!stats.warnings.empty());
  CHECK(model.weights[0] == 0.0);
  CHECK(model.weights[1] == 0.0);
  CHECK(model.bias > 0.0);
  CHECK(score(model, fv_of(vocab, {})) > 0.5);
}

TEST_CASE("empty vocabulary trains a bias-only classifier") {
  Vocabulary vocab = build_vocabulary(std::vector<FeatureBag>{}, 1);
  Dataset data = {Example{FeatureVector{{}, vocab.fingerprint()}, true, 1.0},
                  Example{FeatureVector{{}, vocab.fingerprint()}, false, 1.0}};
  LinearModel model = train(data, vocab, TrainConfig{}, "r", "t");
  CHECK(model.weights.empty());
  CHECK(score(model, FeatureVector{{}, vocab.fingerprint()}) == 0.5);
}

TEST_CASE("invalid training configuration is rejected") {
  Vocabulary vocab = synthetic_vocabulary(1);
  Dataset data = {Example{fv_of(vocab, {0}), true, 1.0}, Example{fv_of(vocab, {}), false, 1.0}};
  TrainConfig bad;
  bad.c = 0.0;
  CHECK_THROWS_AS(train(data, vocab, bad, "r", "t"), ConfigError);
  bad = TrainConfig{};
  bad.max_iter = 0;
  CHECK_THROWS_AS(train(data, vocab, bad, "r", "t"), ConfigError);
}

TEST_CASE("model files round-trip bit-exactly and reject corruption") {
  Vocabulary vocab({"1:FIRST:Mr.", "2:Agent", "2:Agent:11100110"}, {4, 2, 2}, 1);
  Dataset data = {Example{fv_of(vocab, {0, 2}), true, 1.0},
                  Example{fv_of(vocab, {1}), false, 1.0}};
  TrainConfig config;
  config.tolerance = 1e-9;
  config.max_iter = 2000;
  LinearModel model = train(data, vocab, config, "Contingency", "framenet+cluster");

  const std::string path = "/tmp/drc_test_model.txt";
  save_model(model, vocab, path);
  LoadedModel loaded = load_model(path);
  CHECK(loaded.model.weights == model.weights);
  CHECK(loaded.model.bias == model.bias);
  CHECK(loaded.model.vocab_fingerprint == model.vocab_fingerprint);
  CHECK(loaded.model.relation == "Contingency");
  CHECK(loaded.model.feature_type == "framenet+cluster");
  CHECK(loaded.features == vocab.features());
  FeatureVector probe = fv_of(vocab, {0, 1});
  CHECK(score(loaded.model, probe) == score(model, probe));

  // Truncation: drop the last line.
  {
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)), {});
    std::string truncated = content.substr(0, content.rfind("2:Agent:"));
    std::ofstream out("/tmp/drc_test_model_trunc.txt");
    out << truncated;
  }
  CHECK_THROWS_AS(load_model("/tmp/drc_test_model_trunc.txt"), FormatError);

  // Fingerprint corruption: rename a feature.
  {
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)), {});
    auto pos = content.find("2:Agent\t");
    content.replace(pos, 7, "2:Bgent");
    std::ofstream out("/tmp/drc_test_model_corrupt.txt");
    out << content;
  }
  CHECK_THROWS_AS(load_model("/tmp/drc_test_model_corrupt.txt"), FormatError);

  // Version mismatch.
  {
    std::ofstream out("/tmp/drc_test_model_version.txt");
    out << "drc-model 9\n";
  }
  CHECK_THROWS_AS(load_model("/tmp/drc_test_model_version.txt"), FormatError);

  // A model bound to vocabulary A must not score vectors from vocabulary B.
  Vocabulary other({"a", "b", "c"}, {1, 1, 1}, 1);
  CHECK_THROWS_AS(score(loaded.model, fv_of(other, {0})), BindingError);
}
