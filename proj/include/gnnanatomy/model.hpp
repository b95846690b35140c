#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gnnanatomy/dense.hpp"
#include "gnnanatomy/graph.hpp"
#include "gnnanatomy/layers.hpp"
#include "gnnanatomy/rng.hpp"

namespace gnnanatomy {

enum class ModelKind { features, edges, gcn, gin_sum, gin_mean, gin_max, sage_mean };

/// Propagation rules the edge-only model may use, in tie-break order.
inline constexpr std::array<ModelKind, 5> kPropagationKinds = {
    ModelKind::gcn, ModelKind::gin_sum, ModelKind::gin_mean, ModelKind::gin_max, ModelKind::sage_mean};

enum class TaskKind { node, graph };

/// What the edge-only model receives in place of the node features.
enum class EdgeInput { ones_column, ones_matrix };

std::string_view to_string(ModelKind kind);
std::string_view to_string(EdgeInput input);
/// Accepts "features", "edges", "gcn", "gin-sum", "gin-mean", "gin-max", "sage-mean".
ModelKind parse_model_kind(std::string_view name);
EdgeInput parse_edge_input(std::string_view name);
bool is_propagation(ModelKind kind);

struct ModelSpec {
  ModelKind kind = ModelKind::gcn;
  /// Only read when kind == edges.
  ModelKind propagation = ModelKind::gcn;
  int num_layers = 3;
  std::optional<std::size_t> hidden_width;
  TaskKind task_kind = TaskKind::node;
  EdgeInput edge_input = EdgeInput::ones_column;
};

/// min(128, 2 * max(in_dim, out_dim)).
std::size_t default_hidden_width(std::size_t in_dim, std::size_t out_dim);

/// Flat list of weight and bias tensors; the layout is fixed by the Model
/// that created it.
struct Parameters {
  std::vector<DenseMatrix> tensors;

  std::size_t scalar_count() const;
  friend bool operator==(const Parameters&, const Parameters&) = default;
};

/// Everything a forward pass reads from a task, precomputed once. Graph
/// collections are laid out as one block-diagonal graph.
struct ModelInput {
  Csr adjacency;
  WeightedCsr normalized;
  DenseMatrix features;
  /// Empty for node tasks; otherwise size num_graphs + 1.
  std::vector<std::size_t> graph_offsets;

  std::size_t num_nodes() const { return adjacency.num_rows(); }
  bool graph_level() const { return !graph_offsets.empty(); }
};

ModelInput make_model_input(const Graph& graph);
ModelInput make_model_input(const NodeTask& task);
/// Concatenates every graph of the task, in index order.
ModelInput make_model_input(const GraphTask& task);
ModelInput make_model_input(const Task& task);

class Model {
 public:
  enum class LayerType { dense, gcn, gin, sage };

  struct Layer {
    LayerType type;
    Aggregator aggregator = Aggregator::sum;
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    std::size_t first_param = 0;
    bool relu_after = true;
  };

  struct LayerCache {
    DenseMatrix input;
    DenseMatrix propagated;  // gcn: A h; gin: h + aggr(h); sage: mean(h)
    DenseMatrix inner_pre;   // gin MLP hidden pre-activation
    DenseMatrix inner_post;  // gin MLP hidden after ReLU
    DenseMatrix pre_activation;
    std::vector<NodeId> argmax;
  };

  struct Cache {
    std::vector<LayerCache> layers;
  };

  /// in_dim is the task's feature width; the edge-only input width is derived.
  Model(ModelSpec spec, std::size_t in_dim, std::size_t out_dim);

  const ModelSpec& spec() const { return spec_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden_width() const { return hidden_; }
  std::size_t output_dim() const { return output_dim_; }

  /// Glorot-uniform weights, zero biases, drawn in layer order.
  Parameters init(Rng& rng) const;
  Parameters zeros() const;

  /// Logits per node (node tasks) or per graph (graph tasks).
  DenseMatrix forward(const Parameters& params, const ModelInput& input, Cache* cache = nullptr) const;

  /// Gradients of sum(grad_logits * logits) with respect to every parameter.
  Parameters backward(const Parameters& params, const ModelInput& input, const Cache& cache,
                      const DenseMatrix& grad_logits) const;

  /// The matrix fed to the first layer: features, or ones for edge-only.
  DenseMatrix first_layer_input(const ModelInput& input) const;

 private:
  ModelSpec spec_;
  std::size_t input_dim_ = 0;
  std::size_t hidden_ = 0;
  std::size_t output_dim_ = 0;
  std::vector<Layer> layers_;
  std::vector<std::pair<std::size_t, std::size_t>> shapes_;
  std::vector<bool> bias_;

  void add_weight(std::size_t rows, std::size_t cols) {
    shapes_.emplace_back(rows, cols);
    bias_.push_back(false);
  }
  void add_bias(std::size_t cols) {
    shapes_.emplace_back(1, cols);
    bias_.push_back(true);
  }
};

/// Feedforward network over rows of `features`; never sees an adjacency.
DenseMatrix feature_only_forward(const Model& model, const DenseMatrix& features, const Parameters& params);

/// The chosen propagation over an all-ones input; the graph's features are
/// never read.
DenseMatrix edge_only_forward(const Model& model, const Graph& graph, const Parameters& params);

}  // namespace gnnanatomy
