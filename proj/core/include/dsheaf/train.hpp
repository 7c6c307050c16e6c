#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "dsheaf/graph.hpp"
#include "dsheaf/nn.hpp"

namespace dsheaf {

// ---------------------------------------------------------------------------
// Adam

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

/// One bias-corrected Adam update of w in place. `step` counts from 1.
void adam_update(std::span<double> w, std::span<const double> g, std::span<double> m, std::span<double> v,
                 std::size_t step, double lr);

struct OptimState {
  ModelParams m;
  ModelParams v;
  std::size_t step = 0;

  static OptimState zeros_for(const ModelParams& params);
};

/// Throws std::invalid_argument if grads or state do not mirror params.
void adam_step(ModelParams& params, const ModelParams& grads, OptimState& state, double lr);

// ---------------------------------------------------------------------------
// Training

struct TrainOptions {
  double lr = 0.01;
  std::size_t max_epochs = 1000;
  std::size_t patience = 200;
  std::uint64_t seed = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;  // training-mode loss before this epoch's update
  double train_acc = 0.0;
  double val_acc = 0.0;
  double test_acc = 0.0;
  double val_loss = 0.0;
};

enum class StopReason { Patience, MaxEpochs };

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 1-based
  StopReason stop = StopReason::MaxEpochs;

  [[nodiscard]] const EpochRecord& best() const { return epochs.at(best_epoch - 1); }
  /// Header `epoch,train_loss,train_acc,val_acc,test_acc`, values in %.17g.
  void write_csv(std::ostream& out) const;
};

struct TrainResult {
  ModelParams params;  // from the best epoch
  TrainHistory history;
};

/// Fraction of masked rows whose argmax (lowest index on ties) equals the
/// label. Throws std::invalid_argument on an empty mask.
double accuracy(const RealMatrix& logits, const std::vector<int>& labels, const std::vector<bool>& mask);

/// Evaluation-mode accuracy of params on the masked nodes.
double evaluate(const ModelParams& params, const ModelConfig& config, const Dataset& data,
                const std::vector<bool>& mask);

/// Full-graph training with Adam and early stopping on validation accuracy
/// (ties: lower validation loss, then earlier epoch). Parameters are
/// initialized from options.seed. Throws std::runtime_error on a non-finite
/// loss and std::invalid_argument on patience 0 or invalid data.
TrainResult train(const ModelConfig& config, const Dataset& data, const TrainOptions& options);
TrainResult train(const ModelConfig& config, const Dataset& data, const TrainOptions& options, ModelParams init);

// ---------------------------------------------------------------------------
// Multi-seed experiments

struct ExperimentConfig {
  /// Synthetic data regenerated per seed when set; otherwise `dataset` is used.
  std::optional<DsbmParams> dsbm;
  Dataset dataset;
  SplitFractions split;
  bool per_class = true;
  ModelConfig model;  // input_dim and num_classes are filled from the data
  TrainOptions train;  // seed is replaced per run
};

struct SeedResult {
  std::uint64_t seed = 0;
  double test_acc = 0.0;
  double val_acc = 0.0;
  std::size_t best_epoch = 0;
  TrainHistory history;
};

struct ExperimentSummary {
  double mean = 0.0;
  double std = 0.0;  // population
  std::vector<SeedResult> runs;
};

/// Dataset for one seed: DSBM graph with degree features from the "graph"
/// stream, splits from the "split" stream.
Dataset experiment_dataset(const ExperimentConfig& config, std::uint64_t seed);

/// Trains once per seed. Throws std::invalid_argument on an empty seed list.
ExperimentSummary run_experiment(const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds);

}  // namespace dsheaf
