#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gnnanatomy/graph.hpp"
#include "gnnanatomy/model.hpp"

namespace gnnanatomy {

struct TrainConfig {
  int max_epochs = 10000;
  int patience = 25;
  double learning_rate = 0.001;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int n_runs = 100;
  std::uint64_t seed_base = 0;
  /// Worker threads for the run harness; 0 means hardware concurrency.
  unsigned threads = 0;
};

/// Throws std::invalid_argument when a field is out of range.
void check(const TrainConfig& config);

/// Adam with bias correction, matching the PyTorch update rule.
class Adam {
 public:
  Adam(const Parameters& like, const TrainConfig& config);
  void step(Parameters& params, const Parameters& grads);
  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  Parameters m_;
  Parameters v_;
};

/// A task flattened into what the training loop reads each epoch.
struct PreparedTask {
  TaskKind kind = TaskKind::node;
  int num_classes = 0;
  std::size_t feature_dim = 0;
  ModelInput input;
  std::vector<std::size_t> train_rows;
  std::vector<ClassId> train_labels;
  std::vector<std::size_t> val_rows;
  std::vector<ClassId> val_labels;
  PredictionUniverse universe;
  std::vector<ClassId> test_labels;  // aligned with universe.ids
};

PreparedTask prepare(const Task& task);

struct RunResult {
  Parameters best_params;
  double val_accuracy = 0.0;
  std::vector<std::uint8_t> test_correct;  // aligned with the prediction universe
  int best_epoch = 0;
  int epochs_run = 0;
  bool aborted = false;
  std::string diagnostic;
};

/// Full-batch Adam with early stopping on validation accuracy. The returned
/// parameters are those of the best validation epoch (earliest on ties), and
/// test correctness is evaluated with them.
RunResult train_once(const ModelSpec& spec, const PreparedTask& task, const TrainConfig& config, std::uint64_t seed);
RunResult train_once(const ModelSpec& spec, const Task& task, const TrainConfig& config, std::uint64_t seed);

/// n_runs x n_predictions correctness matrix for one (model, task) pair.
class RunMatrix {
 public:
  std::string model_name;
  std::string dataset_name;
  int num_classes = 0;
  std::vector<std::size_t> prediction_ids;
  std::vector<double> val_accuracy;  // one per run
  std::vector<std::size_t> aborted_runs;

  RunMatrix() = default;
  RunMatrix(std::size_t n_runs, std::size_t n_predictions)
      : n_runs_(n_runs), n_predictions_(n_predictions), correct_(n_runs * n_predictions, 0) {}

  std::size_t n_runs() const { return n_runs_; }
  std::size_t n_predictions() const { return n_predictions_; }
  bool correct(std::size_t run, std::size_t prediction) const { return correct_[run * n_predictions_ + prediction]; }
  void set_correct(std::size_t run, std::size_t prediction, bool value) {
    correct_[run * n_predictions_ + prediction] = value ? 1 : 0;
  }
  /// Number of runs that got prediction i right.
  std::size_t column_count(std::size_t prediction) const;
  double mean_val_accuracy() const;

  friend bool operator==(const RunMatrix&, const RunMatrix&) = default;

 private:
  std::size_t n_runs_ = 0;
  std::size_t n_predictions_ = 0;
  std::vector<std::uint8_t> correct_;
};

/// "features", "gcn", ..., or "edges:<propagation>" for edge-only models.
std::string model_name(const ModelSpec& spec);

/// Row r is train_once with seed seed_base + r. Runs execute on
/// config.threads workers; the result does not depend on the thread count.
RunMatrix run_harness(const ModelSpec& spec, const PreparedTask& task, const TrainConfig& config,
                      const std::string& dataset_name);

struct EdgeSelection {
  ModelKind best_kind = ModelKind::gcn;
  RunMatrix runs;
  std::vector<std::pair<ModelKind, double>> mean_val_accuracy;  // per candidate, in tie-break order
};

/// Trains the edge-only model with every propagation kind and keeps the one
/// with the highest mean validation accuracy. `base` supplies layers, width,
/// and edge input.
EdgeSelection select_edge_propagation(const PreparedTask& task, const TrainConfig& config,
                                      const std::string& dataset_name, ModelSpec base = {});

}  // namespace gnnanatomy
