#include "gnnanatomy/training.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "gnnanatomy/layers.hpp"

namespace gnnanatomy {

void check(const TrainConfig& config) {
  if (config.max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
  if (config.patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (!(config.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (!(config.adam_beta1 >= 0.0 && config.adam_beta1 < 1.0)) throw std::invalid_argument("adam_beta1 must be in [0, 1)");
  if (!(config.adam_beta2 >= 0.0 && config.adam_beta2 < 1.0)) throw std::invalid_argument("adam_beta2 must be in [0, 1)");
  if (!(config.adam_eps > 0.0)) throw std::invalid_argument("adam_eps must be > 0");
  if (config.n_runs < 1) throw std::invalid_argument("n_runs must be >= 1");
}

Adam::Adam(const Parameters& like, const TrainConfig& config)
    : lr_(config.learning_rate), beta1_(config.adam_beta1), beta2_(config.adam_beta2), eps_(config.adam_eps) {
  for (const auto& t : like.tensors) {
    m_.tensors.emplace_back(t.rows(), t.cols());
    v_.tensors.emplace_back(t.rows(), t.cols());
  }
}

void Adam::step(Parameters& params, const Parameters& grads) {
  if (params.tensors.size() != m_.tensors.size() || grads.tensors.size() != m_.tensors.size()) {
    throw std::invalid_argument("Adam: parameter layout changed");
  }
  ++t_;
  const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const double step_size = lr_ / correction1;
  const double sqrt_c2 = std::sqrt(correction2);
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    auto& p = params.tensors[i].data();
    const auto& g = grads.tensors[i].data();
    auto& m = m_.tensors[i].data();
    auto& v = v_.tensors[i].data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
      const double denom = std::sqrt(v[j]) / sqrt_c2 + eps_;
      p[j] -= step_size * m[j] / denom;
    }
  }
}

PreparedTask prepare(const Task& task) {
  if (auto violations = validate(task); !violations.empty()) {
    throw std::invalid_argument("invalid task: " + violations.front());
  }
  PreparedTask out;
  out.num_classes = num_classes(task);
  out.feature_dim = feature_dim(task);
  out.input = make_model_input(task);
  out.universe = prediction_universe(task);

  std::vector<ClassId> labels;
  Split split;
  if (const auto* node = std::get_if<NodeTask>(&task)) {
    out.kind = TaskKind::node;
    labels = *node->graph.node_labels;
    split = node->split;
  } else {
    const auto& graph = std::get<GraphTask>(task);
    out.kind = TaskKind::graph;
    labels = graph.graph_labels;
    split = graph.split;
  }
  if (split.train.empty()) throw std::invalid_argument("invalid task: train split is empty");
  if (split.val.empty()) throw std::invalid_argument("invalid task: validation split is empty");
  out.train_rows = split.train;
  out.val_rows = split.val;
  for (auto id : out.train_rows) out.train_labels.push_back(labels[id]);
  for (auto id : out.val_rows) out.val_labels.push_back(labels[id]);
  for (auto id : out.universe.ids) out.test_labels.push_back(labels[id]);
  return out;
}

namespace {

std::size_t count_correct(const DenseMatrix& logits, std::span<const std::size_t> rows,
                          std::span<const ClassId> labels) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<ClassId>(argmax_row(logits.row(rows[i]))) == labels[i]) ++hits;
  }
  return hits;
}

}  // namespace

RunResult train_once(const ModelSpec& spec, const PreparedTask& task, const TrainConfig& config, std::uint64_t seed) {
  check(config);
  ModelSpec effective = spec;
  effective.task_kind = task.kind;
  const Model model(effective, task.feature_dim, static_cast<std::size_t>(task.num_classes));
  Rng rng(seed);
  Parameters params = model.init(rng);
  Adam adam(params, config);

  RunResult result;
  result.best_params = params;
  double best_acc = -1.0;
  int since_improvement = 0;
  Model::Cache cache;
  const double val_count = static_cast<double>(task.val_rows.size());

  for (int epoch = 0;; ++epoch) {
    const DenseMatrix logits = model.forward(params, task.input, &cache);
    if (epoch >= 1) {
      const double acc = static_cast<double>(count_correct(logits, task.val_rows, task.val_labels)) / val_count;
      result.epochs_run = epoch;
      if (acc > best_acc) {
        best_acc = acc;
        result.best_params = params;
        result.best_epoch = epoch;
        since_improvement = 0;
      } else {
        ++since_improvement;
      }
      if (since_improvement >= config.patience || epoch >= config.max_epochs) break;
    }

    LossResult loss = softmax_cross_entropy(gather_rows(logits, task.train_rows), task.train_labels);
    if (!std::isfinite(loss.loss)) {
      result.aborted = true;
      result.diagnostic = "non-finite loss at epoch " + std::to_string(epoch + 1) + " (seed " + std::to_string(seed) + ")";
      result.val_accuracy = 0.0;
      result.test_correct.assign(task.universe.size(), 0);
      return result;
    }
    DenseMatrix grad_logits(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < task.train_rows.size(); ++i) {
      std::copy_n(loss.grad.row(i).begin(), loss.grad.cols(), grad_logits.row(task.train_rows[i]).begin());
    }
    adam.step(params, model.backward(params, task.input, cache, grad_logits));
  }

  result.val_accuracy = best_acc;
  const DenseMatrix logits = model.forward(result.best_params, task.input);
  result.test_correct.resize(task.universe.size());
  for (std::size_t i = 0; i < task.universe.size(); ++i) {
    const auto predicted = static_cast<ClassId>(argmax_row(logits.row(task.universe.ids[i])));
    result.test_correct[i] = predicted == task.test_labels[i] ? 1 : 0;
  }
  return result;
}

RunResult train_once(const ModelSpec& spec, const Task& task, const TrainConfig& config, std::uint64_t seed) {
  return train_once(spec, prepare(task), config, seed);
}

std::size_t RunMatrix::column_count(std::size_t prediction) const {
  std::size_t count = 0;
  for (std::size_t r = 0; r < n_runs_; ++r) count += correct_[r * n_predictions_ + prediction];
  return count;
}

double RunMatrix::mean_val_accuracy() const {
  if (val_accuracy.empty()) return 0.0;
  return std::accumulate(val_accuracy.begin(), val_accuracy.end(), 0.0) / static_cast<double>(val_accuracy.size());
}

std::string model_name(const ModelSpec& spec) {
  if (spec.kind == ModelKind::edges) return "edges:" + std::string(to_string(spec.propagation));
  return std::string(to_string(spec.kind));
}

RunMatrix run_harness(const ModelSpec& spec, const PreparedTask& task, const TrainConfig& config,
                      const std::string& dataset_name) {
  check(config);
  const auto n_runs = static_cast<std::size_t>(config.n_runs);
  RunMatrix matrix(n_runs, task.universe.size());
  matrix.model_name = model_name(spec);
  matrix.dataset_name = dataset_name;
  matrix.num_classes = task.num_classes;
  matrix.prediction_ids = task.universe.ids;
  matrix.val_accuracy.assign(n_runs, 0.0);
  std::vector<std::uint8_t> aborted(n_runs, 0);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= n_runs) return;
      try {
        RunResult run = train_once(spec, task, config, config.seed_base + r);
        // Each run owns its own row; no two workers touch the same cells.
        for (std::size_t i = 0; i < run.test_correct.size(); ++i) matrix.set_correct(r, i, run.test_correct[i]);
        matrix.val_accuracy[r] = run.val_accuracy;
        aborted[r] = run.aborted ? 1 : 0;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_runs);
        return;
      }
    }
  };

  unsigned threads = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_runs));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  for (std::size_t r = 0; r < n_runs; ++r) {
    if (aborted[r]) matrix.aborted_runs.push_back(r);
  }
  return matrix;
}

EdgeSelection select_edge_propagation(const PreparedTask& task, const TrainConfig& config,
                                      const std::string& dataset_name, ModelSpec base) {
  EdgeSelection selection;
  bool have_best = false;
  double best_mean = 0.0;
  for (ModelKind kind : kPropagationKinds) {
    ModelSpec spec = base;
    spec.kind = ModelKind::edges;
    spec.propagation = kind;
    RunMatrix runs = run_harness(spec, task, config, dataset_name);
    const double mean = runs.mean_val_accuracy();
    selection.mean_val_accuracy.emplace_back(kind, mean);
    if (!have_best || mean > best_mean) {
      have_best = true;
      best_mean = mean;
      selection.best_kind = kind;
      selection.runs = std::move(runs);
    }
  }
  return selection;
}

}  // namespace gnnanatomy
