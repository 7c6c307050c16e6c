#include "dsheaf/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

namespace dsheaf {

void adam_update(std::span<double> w, std::span<const double> g, std::span<double> m, std::span<double> v,
                 std::size_t step, double lr) {
  if (g.size() != w.size() || m.size() != w.size() || v.size() != w.size()) {
    throw std::invalid_argument("adam_update: size mismatch");
  }
  if (step == 0) throw std::invalid_argument("adam_update: step counts from 1");
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
  for (std::size_t i = 0; i < w.size(); ++i) {
    m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g[i];
    v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
    w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + kAdamEps);
  }
}

OptimState OptimState::zeros_for(const ModelParams& params) {
  return {zeros_like(params), zeros_like(params), 0};
}

void adam_step(ModelParams& params, const ModelParams& grads, OptimState& state, double lr) {
  std::vector<RealMatrix*> w;
  std::vector<const RealMatrix*> g;
  std::vector<RealMatrix*> m;
  std::vector<RealMatrix*> v;
  for_each_param(params, [&](const std::string&, RealMatrix& x) { w.push_back(&x); });
  for_each_param(grads, [&](const std::string&, const RealMatrix& x) { g.push_back(&x); });
  for_each_param(state.m, [&](const std::string&, RealMatrix& x) { m.push_back(&x); });
  for_each_param(state.v, [&](const std::string&, RealMatrix& x) { v.push_back(&x); });
  if (g.size() != w.size() || m.size() != w.size() || v.size() != w.size()) {
    throw std::invalid_argument("adam_step: parameter lists differ in length");
  }
  for (std::size_t k = 0; k < w.size(); ++k) {
    for (const RealMatrix* o : {g[k], static_cast<const RealMatrix*>(m[k]), static_cast<const RealMatrix*>(v[k])}) {
      if (o->rows() != w[k]->rows() || o->cols() != w[k]->cols()) {
        throw std::invalid_argument("adam_step: shape mismatch");
      }
    }
  }
  ++state.step;
  for (std::size_t k = 0; k < w.size(); ++k) {
    adam_update(w[k]->data(), g[k]->data(), m[k]->data(), v[k]->data(), state.step, lr);
  }
}

// ---------------------------------------------------------------------------

void TrainHistory::write_csv(std::ostream& out) const {
  out << "epoch,train_loss,train_acc,val_acc,test_acc\n";
  char buf[160];
  for (const auto& r : epochs) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", r.epoch, r.train_loss, r.train_acc, r.val_acc,
                  r.test_acc);
    out << buf;
  }
}

double accuracy(const RealMatrix& logits, const std::vector<int>& labels, const std::vector<bool>& mask) {
  if (labels.size() != logits.rows() || mask.size() != logits.rows()) {
    throw std::invalid_argument("accuracy: labels/mask length differs from logits rows");
  }
  std::size_t total = 0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    if (!mask[r]) continue;
    const auto row = logits.row(r);
    const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    ++total;
    if (best == labels[r]) ++hits;
  }
  if (total == 0) throw std::invalid_argument("accuracy: empty mask");
  return static_cast<double>(hits) / static_cast<double>(total);
}

double evaluate(const ModelParams& params, const ModelConfig& config, const Dataset& data,
                const std::vector<bool>& mask) {
  return accuracy(forward(params, config, data.graph, data.features).logits, data.labels, mask);
}

namespace {

bool any(const std::vector<bool>& m) { return std::find(m.begin(), m.end(), true) != m.end(); }

}  // namespace

TrainResult train(const ModelConfig& config, const Dataset& data, const TrainOptions& options) {
  return train(config, data, options, init_params(config, options.seed));
}

TrainResult train(const ModelConfig& config, const Dataset& data, const TrainOptions& options, ModelParams init) {
  if (options.patience == 0) throw std::invalid_argument("train: patience must be at least 1");
  if (options.max_epochs == 0) throw std::invalid_argument("train: max_epochs must be at least 1");
  if (!(options.lr > 0.0)) throw std::invalid_argument("train: learning rate must be positive");
  data.validate();
  if (!any(data.masks.val)) throw std::invalid_argument("train: validation mask is empty");
  check_params(init, config);

  TrainResult result;
  result.params = init;
  ModelParams params = std::move(init);
  OptimState state = OptimState::zeros_for(params);
  const bool has_test = any(data.masks.test);
  double best_val = -1.0;
  double best_val_loss = 0.0;

  for (std::size_t epoch = 1; epoch <= options.max_epochs; ++epoch) {
    ForwardOptions fo;
    fo.training = true;
    fo.dropout_seed = derive_seed(options.seed, "dropout", epoch);
    const ForwardCache cache = forward(params, config, data.graph, data.features, fo);
    const LossResult loss = softmax_cross_entropy(cache.logits, data.labels, data.masks.train);
    if (!std::isfinite(loss.loss)) {
      throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch));
    }
    const ModelParams grads = backward(params, config, data.graph, data.features, cache, loss.grad);
    adam_step(params, grads, state, options.lr);

    const RealMatrix logits = forward(params, config, data.graph, data.features).logits;
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss.loss;
    rec.train_acc = accuracy(logits, data.labels, data.masks.train);
    rec.val_acc = accuracy(logits, data.labels, data.masks.val);
    rec.test_acc = has_test ? accuracy(logits, data.labels, data.masks.test) : 0.0;
    rec.val_loss = softmax_cross_entropy(logits, data.labels, data.masks.val).loss;
    if (!std::isfinite(rec.val_loss)) {
      throw std::runtime_error("train: non-finite validation loss at epoch " + std::to_string(epoch));
    }
    result.history.epochs.push_back(rec);

    if (rec.val_acc > best_val || (rec.val_acc == best_val && rec.val_loss < best_val_loss)) {
      best_val = rec.val_acc;
      best_val_loss = rec.val_loss;
      result.history.best_epoch = epoch;
      result.params = params;
    }
    if (epoch - result.history.best_epoch >= options.patience) {
      result.history.stop = StopReason::Patience;
      break;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

Dataset experiment_dataset(const ExperimentConfig& config, std::uint64_t seed) {
  Dataset data;
  if (config.dsbm) {
    DsbmParams p = *config.dsbm;
    p.seed = derive_seed(seed, "graph");
    data.graph = dsbm_generate(p);
    data.features = degree_features(data.graph);
    data.labels = dsbm_labels(p);
  } else {
    data = config.dataset;
  }
  data.masks = make_splits(data.labels, config.split, config.per_class, derive_seed(seed, "split"));
  data.validate();
  return data;
}

ExperimentSummary run_experiment(const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw std::invalid_argument("run_experiment: need at least one seed");
  ExperimentSummary summary;
  for (const std::uint64_t seed : seeds) {
    const Dataset data = experiment_dataset(config, seed);
    ModelConfig model = config.model;
    model.input_dim = data.features.cols();
    model.num_classes = std::max<std::size_t>(2, data.num_classes());
    TrainOptions opts = config.train;
    opts.seed = seed;
    TrainResult tr = train(model, data, opts);
    SeedResult r;
    r.seed = seed;
    r.best_epoch = tr.history.best_epoch;
    r.val_acc = tr.history.best().val_acc;
    r.test_acc = evaluate(tr.params, model, data, data.masks.test);
    r.history = std::move(tr.history);
    summary.runs.push_back(std::move(r));
  }
  double sum = 0.0;
  for (const auto& r : summary.runs) sum += r.test_acc;
  summary.mean = sum / static_cast<double>(summary.runs.size());
  double var = 0.0;
  for (const auto& r : summary.runs) var += (r.test_acc - summary.mean) * (r.test_acc - summary.mean);
  summary.std = std::sqrt(var / static_cast<double>(summary.runs.size()));
  return summary;
}

}  // namespace dsheaf
