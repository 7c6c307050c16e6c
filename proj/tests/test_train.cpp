#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "dsheaf/train.hpp"
#include "dsheaf/verify.hpp"

using namespace dsheaf;

namespace {

Dataset separable_toy(std::uint64_t seed, std::size_t n = 40) {
  Rng rng(seed);
  Dataset d;
  d.graph = random_graph(rng, n, 0.1, GraphShape::Mixed);
  d.features = RealMatrix(n, 2);
  d.labels.resize(n);
  for (std::size_t u = 0; u < n; ++u) {
    d.labels[u] = static_cast<int>(u % 2);
    d.features(u, 0) = (d.labels[u] == 0 ? -1.0 : 1.0) + 0.2 * rng.normal();
    d.features(u, 1) = 0.2 * rng.normal();
  }
  d.masks = make_splits(d.labels, {0.6, 0.2, 0.2}, true, seed);
  return d;
}

ModelConfig toy_config() {
  ModelConfig c;
  c.num_layers = 1;
  c.d = 2;
  c.hidden = 4;
  c.q = 0.25;
  c.input_dim = 2;
  c.num_classes = 2;
  c.phi_hidden = 4;
  return c;
}

}  // namespace

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  std::vector<double> w{1.0, -2.0}, g{0.0, 0.0}, m(2), v(2);
  adam_update(w, g, m, v, 1, 0.1);
  EXPECT_EQ(w, (std::vector<double>{1.0, -2.0}));
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::vector<double> w{0.0}, g{1.0}, m(1), v(1);
  adam_update(w, g, m, v, 1, 0.01);
  // m̂ = 1, v̂ = 1 after bias correction.
  EXPECT_NEAR(w[0], -0.01 / (1.0 + 1e-8), 1e-17);
  EXPECT_THROW(adam_update(w, g, m, v, 0, 0.01), std::invalid_argument);
}

TEST(Adam, ConvergesOnQuadraticBowl) {
  std::vector<double> w{1.0}, g(1), m(1), v(1);
  for (std::size_t step = 1; step <= 500; ++step) {
    g[0] = 2.0 * w[0];
    adam_update(w, g, m, v, step, 1e-2);
  }
  EXPECT_LT(std::abs(w[0]), 1e-3);
}

TEST(Adam, StepChecksShapes) {
  const ModelConfig c = toy_config();
  ModelParams p = init_params(c, 1);
  OptimState s = OptimState::zeros_for(p);
  ModelParams g = zeros_like(p);
  g.w_out = RealMatrix(1, 1);
  EXPECT_THROW(adam_step(p, g, s, 0.01), std::invalid_argument);
  const ModelParams before = p;
  adam_step(p, zeros_like(p), s, 0.01);
  EXPECT_EQ(p.w_in, before.w_in);
  EXPECT_EQ(s.step, 1u);
}

TEST(Accuracy, OneHotConstantAndPartition) {
  RealMatrix onehot(10, 5);
  std::vector<int> labels(10);
  for (std::size_t u = 0; u < 10; ++u) {
    labels[u] = static_cast<int>(u % 5);
    onehot(u, u % 5) = 1.0;
  }
  const std::vector<bool> all(10, true);
  EXPECT_EQ(accuracy(onehot, labels, all), 1.0);
  // Ties resolve to class 0, which is a fifth of balanced labels.
  EXPECT_EQ(accuracy(RealMatrix(10, 5), labels, all), 0.2);

  Rng rng(3);
  RealMatrix logits(10, 5);
  for (auto& v : logits.data()) v = rng.normal();
  std::vector<bool> part(10), rest(10);
  for (std::size_t u = 0; u < 10; ++u) {
    part[u] = u < 4;
    rest[u] = !part[u];
  }
  const double combined = (4 * accuracy(logits, labels, part) + 6 * accuracy(logits, labels, rest)) / 10.0;
  EXPECT_NEAR(combined, accuracy(logits, labels, all), 1e-15);
  EXPECT_THROW(accuracy(logits, labels, std::vector<bool>(10, false)), std::invalid_argument);
}

TEST(Train, RejectsZeroPatience) {
  TrainOptions o;
  o.patience = 0;
  EXPECT_THROW(train(toy_config(), separable_toy(1), o), std::invalid_argument);
}

TEST(Train, SeparableToyReachesPerfectTrainAccuracy) {
  const Dataset d = separable_toy(2);
  TrainOptions o;
  o.max_epochs = 200;
  o.patience = 200;
  o.seed = 4;
  const TrainResult r = train(toy_config(), d, o);
  double best_train = 0.0;
  for (const auto& e : r.history.epochs) best_train = std::max(best_train, e.train_acc);
  EXPECT_EQ(best_train, 1.0);
}

TEST(Train, FirstLossIsLogKWithZeroOutputLayer) {
  ModelConfig c = toy_config();
  c.zero_output_init = true;
  TrainOptions o;
  o.max_epochs = 1;
  const TrainResult r = train(c, separable_toy(3), o);
  EXPECT_NEAR(r.history.epochs.front().train_loss, std::log(2.0), 1e-6);
}

TEST(Train, ReturnsBestEpochParametersAndStopsOnPatience) {
  const Dataset d = separable_toy(5);
  TrainOptions o;
  o.max_epochs = 300;
  o.patience = 15;
  o.seed = 1;
  const ModelConfig c = toy_config();
  const TrainResult r = train(c, d, o);
  const auto& h = r.history;
  ASSERT_GE(h.best_epoch, 1u);
  ASSERT_LE(h.best_epoch, h.epochs.size());
  EXPECT_EQ(evaluate(r.params, c, d, d.masks.val), h.best().val_acc);
  for (const auto& e : h.epochs) {
    EXPECT_TRUE(e.val_acc < h.best().val_acc ||
                (e.val_acc == h.best().val_acc &&
                 (e.val_loss > h.best().val_loss || (e.val_loss == h.best().val_loss && e.epoch >= h.best_epoch))));
  }
  if (h.stop == StopReason::Patience) EXPECT_EQ(h.epochs.size(), h.best_epoch + o.patience);
}

TEST(Train, IdenticalSeedsGiveIdenticalHistory) {
  const Dataset d = separable_toy(6);
  ModelConfig c = toy_config();
  c.dropout = 0.2;
  TrainOptions o;
  o.max_epochs = 30;
  o.seed = 9;
  std::ostringstream a, b;
  train(c, d, o).history.write_csv(a);
  train(c, d, o).history.write_csv(b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "epoch,train_loss,train_acc,val_acc,test_acc");
}

TEST(Experiment, SummaryStatistics) {
  ExperimentConfig ec;
  ec.dsbm = DsbmParams::uniform(40, 2, 0.3, 0.1, 0.1, 0);
  ec.split = {0.6, 0.2, 0.2};
  ec.model = toy_config();
  ec.train.max_epochs = 15;
  ec.train.patience = 5;

  const auto one = run_experiment(ec, {3});
  EXPECT_EQ(one.std, 0.0);
  EXPECT_EQ(one.mean, one.runs[0].test_acc);

  const auto dup = run_experiment(ec, {3, 3, 8});
  EXPECT_EQ(dup.runs[0].test_acc, dup.runs[1].test_acc);
  EXPECT_EQ(dup.runs[0].history.epochs.size(), dup.runs[1].history.epochs.size());
  double mean = 0.0;
  for (const auto& r : dup.runs) mean += r.test_acc / 3.0;
  double var = 0.0;
  for (const auto& r : dup.runs) var += (r.test_acc - mean) * (r.test_acc - mean) / 3.0;
  EXPECT_NEAR(dup.mean, mean, 1e-12);
  EXPECT_NEAR(dup.std, std::sqrt(var), 1e-12);
  EXPECT_THROW(run_experiment(ec, {}), std::invalid_argument);
}

TEST(Experiment, DatasetStreamsAreIndependentPerSeed) {
  ExperimentConfig ec;
  ec.dsbm = DsbmParams::uniform(60, 3, 0.2, 0.1, 0.2, 0);
  const Dataset a = experiment_dataset(ec, 1);
  const Dataset b = experiment_dataset(ec, 1);
  const Dataset c = experiment_dataset(ec, 2);
  EXPECT_EQ(a.graph, b.graph);
  EXPECT_EQ(a.masks.train, b.masks.train);
  EXPECT_NE(a.graph, c.graph);
  EXPECT_EQ(a.features, degree_features(a.graph));
}
