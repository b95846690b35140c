#include "gnnanatomy/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gnnanatomy {

namespace {

constexpr std::array<std::pair<ModelKind, std::string_view>, 7> kKindNames = {{
    {ModelKind::features, "features"},
    {ModelKind::edges, "edges"},
    {ModelKind::gcn, "gcn"},
    {ModelKind::gin_sum, "gin-sum"},
    {ModelKind::gin_mean, "gin-mean"},
    {ModelKind::gin_max, "gin-max"},
    {ModelKind::sage_mean, "sage-mean"},
}};

Model::LayerType layer_type_for(ModelKind kind) {
  switch (kind) {
    case ModelKind::features:
      return Model::LayerType::dense;
    case ModelKind::gcn:
      return Model::LayerType::gcn;
    case ModelKind::gin_sum:
    case ModelKind::gin_mean:
    case ModelKind::gin_max:
      return Model::LayerType::gin;
    case ModelKind::sage_mean:
      return Model::LayerType::sage;
    case ModelKind::edges:
      break;
  }
  throw std::invalid_argument("no layer type for model kind " + std::string(to_string(kind)));
}

Aggregator aggregator_for(ModelKind kind) {
  switch (kind) {
    case ModelKind::gin_mean:
    case ModelKind::sage_mean:
      return Aggregator::mean;
    case ModelKind::gin_max:
      return Aggregator::max;
    default:
      return Aggregator::sum;
  }
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  for (auto [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::string_view to_string(EdgeInput input) {
  return input == EdgeInput::ones_column ? "ones-column" : "ones-matrix";
}

ModelKind parse_model_kind(std::string_view name) {
  for (auto [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw std::invalid_argument("unknown model kind '" + std::string(name) + "'");
}

EdgeInput parse_edge_input(std::string_view name) {
  if (name == "ones-column") return EdgeInput::ones_column;
  if (name == "ones-matrix") return EdgeInput::ones_matrix;
  throw std::invalid_argument("unknown edge input '" + std::string(name) + "'");
}

bool is_propagation(ModelKind kind) {
  return std::find(kPropagationKinds.begin(), kPropagationKinds.end(), kind) != kPropagationKinds.end();
}

std::size_t default_hidden_width(std::size_t in_dim, std::size_t out_dim) {
  return std::min<std::size_t>(128, 2 * std::max(in_dim, out_dim));
}

std::size_t Parameters::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.data().size();
  return n;
}

ModelInput make_model_input(const Graph& graph) {
  ModelInput input;
  input.adjacency = graph.adjacency;
  input.normalized = normalized_adjacency(graph.adjacency);
  input.features = graph.features;
  return input;
}

ModelInput make_model_input(const NodeTask& task) { return make_model_input(task.graph); }

ModelInput make_model_input(const GraphTask& task) {
  ModelInput input;
  std::size_t total_nodes = 0;
  std::size_t total_entries = 0;
  for (const auto& g : task.graphs) {
    total_nodes += g.num_nodes;
    total_entries += g.adjacency.col_indices.size();
  }
  const std::size_t dim = task.graphs.empty() ? 0 : task.graphs.front().features.cols();
  input.features = DenseMatrix(total_nodes, dim);
  input.adjacency.row_offsets.reserve(total_nodes + 1);
  input.adjacency.col_indices.reserve(total_entries);
  input.graph_offsets.push_back(0);
  std::size_t base = 0;
  for (const auto& g : task.graphs) {
    for (std::size_t v = 0; v < g.num_nodes; ++v) {
      for (NodeId u : g.adjacency.neighbors(v)) input.adjacency.col_indices.push_back(static_cast<NodeId>(base + u));
      input.adjacency.row_offsets.push_back(input.adjacency.col_indices.size());
      std::copy_n(g.features.row(v).begin(), dim, input.features.row(base + v).begin());
    }
    base += g.num_nodes;
    input.graph_offsets.push_back(base);
  }
  input.normalized = normalized_adjacency(input.adjacency);
  return input;
}

ModelInput make_model_input(const Task& task) {
  return std::visit([](const auto& t) { return make_model_input(t); }, task);
}

Model::Model(ModelSpec spec, std::size_t in_dim, std::size_t out_dim) : spec_(spec), output_dim_(out_dim) {
  if (spec_.num_layers < 1) throw std::invalid_argument("num_layers must be >= 1");
  if (out_dim == 0) throw std::invalid_argument("output width must be positive");
  ModelKind layer_kind = spec_.kind;
  input_dim_ = in_dim;
  if (spec_.kind == ModelKind::edges) {
    if (!is_propagation(spec_.propagation)) {
      throw std::invalid_argument("invalid edge-only propagation '" + std::string(to_string(spec_.propagation)) + "'");
    }
    layer_kind = spec_.propagation;
    if (spec_.edge_input == EdgeInput::ones_column) input_dim_ = 1;
  }
  if (input_dim_ == 0) throw std::invalid_argument("input width must be positive");
  hidden_ = spec_.hidden_width.value_or(default_hidden_width(input_dim_, out_dim));
  if (hidden_ == 0) throw std::invalid_argument("hidden width must be positive");

  const LayerType type = layer_type_for(layer_kind);
  const Aggregator aggregator = aggregator_for(layer_kind);
  for (int i = 0; i < spec_.num_layers; ++i) {
    Layer layer;
    layer.type = type;
    layer.aggregator = aggregator;
    layer.in_dim = i == 0 ? input_dim_ : hidden_;
    layer.out_dim = i + 1 == spec_.num_layers ? out_dim : hidden_;
    layer.relu_after = i + 1 < spec_.num_layers;
    layer.first_param = shapes_.size();
    switch (type) {
      case LayerType::dense:
      case LayerType::gcn:
        add_weight(layer.in_dim, layer.out_dim);
        add_bias(layer.out_dim);
        break;
      case LayerType::gin:
        add_weight(layer.in_dim, layer.out_dim);
        add_bias(layer.out_dim);
        add_weight(layer.out_dim, layer.out_dim);
        add_bias(layer.out_dim);
        break;
      case LayerType::sage:
        add_weight(layer.in_dim, layer.out_dim);
        add_weight(layer.in_dim, layer.out_dim);
        add_bias(layer.out_dim);
        break;
    }
    layers_.push_back(layer);
  }
}

Parameters Model::zeros() const {
  Parameters p;
  for (auto [r, c] : shapes_) p.tensors.emplace_back(r, c);
  return p;
}

Parameters Model::init(Rng& rng) const {
  Parameters p = zeros();
  for (std::size_t i = 0; i < p.tensors.size(); ++i) {
    if (bias_[i]) continue;
    auto& t = p.tensors[i];
    const double limit = std::sqrt(6.0 / static_cast<double>(t.rows() + t.cols()));
    for (double& x : t.data()) x = rng.uniform(-limit, limit);
  }
  return p;
}

DenseMatrix Model::first_layer_input(const ModelInput& input) const {
  if (spec_.kind != ModelKind::edges) {
    if (input.features.cols() != input_dim_ || input.features.rows() != input.num_nodes()) {
      throw std::invalid_argument("feature matrix is " + std::to_string(input.features.rows()) + "x" +
                                  std::to_string(input.features.cols()) + ", model expects width " +
                                  std::to_string(input_dim_));
    }
    return input.features;
  }
  return DenseMatrix(input.num_nodes(), input_dim_, 1.0);
}

DenseMatrix Model::forward(const Parameters& params, const ModelInput& input, Cache* cache) const {
  if (params.tensors.size() != shapes_.size()) throw std::invalid_argument("parameter layout does not match model");
  DenseMatrix x = first_layer_input(input);
  if (cache) cache->layers.assign(layers_.size(), {});

  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const Layer& layer = layers_[li];
    const auto* w = &params.tensors[layer.first_param];
    DenseMatrix pre;
    LayerCache scratch;
    LayerCache& lc = cache ? cache->layers[li] : scratch;
    switch (layer.type) {
      case LayerType::dense:
        pre = matmul(x, w[0]);
        add_row_bias(pre, w[1]);
        break;
      case LayerType::gcn:
        lc.propagated = spmm(input.normalized, x);
        pre = matmul(lc.propagated, w[0]);
        add_row_bias(pre, w[1]);
        break;
      case LayerType::gin:
        lc.propagated = aggregate(input.adjacency, x, layer.aggregator, cache ? &lc.argmax : nullptr);
        add_inplace(lc.propagated, x);
        lc.inner_pre = matmul(lc.propagated, w[0]);
        add_row_bias(lc.inner_pre, w[1]);
        lc.inner_post = lc.inner_pre;
        relu_inplace(lc.inner_post);
        pre = matmul(lc.inner_post, w[2]);
        add_row_bias(pre, w[3]);
        break;
      case LayerType::sage:
        lc.propagated = aggregate(input.adjacency, x, Aggregator::mean);
        pre = matmul(x, w[0]);
        add_inplace(pre, matmul(lc.propagated, w[1]));
        add_row_bias(pre, w[2]);
        break;
    }
    if (cache) {
      lc.input = std::move(x);
      lc.pre_activation = pre;
    }
    x = std::move(pre);
    if (layer.relu_after) relu_inplace(x);
  }
  if (input.graph_level()) return graph_readout(x, input.graph_offsets);
  return x;
}

Parameters Model::backward(const Parameters& params, const ModelInput& input, const Cache& cache,
                           const DenseMatrix& grad_logits) const {
  if (cache.layers.size() != layers_.size()) throw std::invalid_argument("backward: cache is not from this model");
  Parameters grads = zeros();

  DenseMatrix grad;
  if (input.graph_level()) {
    const auto& offsets = input.graph_offsets;
    grad = DenseMatrix(input.num_nodes(), grad_logits.cols());
    for (std::size_t g = 0; g + 1 < offsets.size(); ++g) {
      for (std::size_t v = offsets[g]; v < offsets[g + 1]; ++v) {
        std::copy_n(grad_logits.row(g).begin(), grad_logits.cols(), grad.row(v).begin());
      }
    }
  } else {
    grad = grad_logits;
  }

  for (std::size_t li = layers_.size(); li-- > 0;) {
    const Layer& layer = layers_[li];
    const LayerCache& lc = cache.layers[li];
    const auto* w = &params.tensors[layer.first_param];
    auto* gw = &grads.tensors[layer.first_param];
    const bool need_input_grad = li > 0;
    if (layer.relu_after) relu_backward_inplace(grad, lc.pre_activation);

    DenseMatrix grad_input;
    switch (layer.type) {
      case LayerType::dense:
        gw[0] = matmul_tn(lc.input, grad);
        gw[1] = column_sums(grad);
        if (need_input_grad) grad_input = matmul_nt(grad, w[0]);
        break;
      case LayerType::gcn:
        gw[0] = matmul_tn(lc.propagated, grad);
        gw[1] = column_sums(grad);
        // The normalized operator is symmetric, so it is its own transpose.
        if (need_input_grad) grad_input = spmm(input.normalized, matmul_nt(grad, w[0]));
        break;
      case LayerType::gin: {
        gw[2] = matmul_tn(lc.inner_post, grad);
        gw[3] = column_sums(grad);
        DenseMatrix grad_inner = matmul_nt(grad, w[2]);
        relu_backward_inplace(grad_inner, lc.inner_pre);
        gw[0] = matmul_tn(lc.propagated, grad_inner);
        gw[1] = column_sums(grad_inner);
        if (need_input_grad) {
          DenseMatrix grad_z = matmul_nt(grad_inner, w[0]);
          grad_input = aggregate_backward(input.adjacency, grad_z, layer.aggregator, lc.argmax);
          add_inplace(grad_input, grad_z);
        }
        break;
      }
      case LayerType::sage:
        gw[0] = matmul_tn(lc.input, grad);
        gw[1] = matmul_tn(lc.propagated, grad);
        gw[2] = column_sums(grad);
        if (need_input_grad) {
          grad_input = matmul_nt(grad, w[0]);
          add_inplace(grad_input, aggregate_backward(input.adjacency, matmul_nt(grad, w[1]), Aggregator::mean, {}));
        }
        break;
    }
    grad = std::move(grad_input);
  }
  return grads;
}

DenseMatrix feature_only_forward(const Model& model, const DenseMatrix& features, const Parameters& params) {
  if (model.spec().kind != ModelKind::features) throw std::invalid_argument("feature_only_forward needs a features model");
  // An edgeless input: the dense layers never read the adjacency.
  ModelInput input;
  input.adjacency.row_offsets.assign(features.rows() + 1, 0);
  input.features = features;
  return model.forward(params, input);
}

DenseMatrix edge_only_forward(const Model& model, const Graph& graph, const Parameters& params) {
  if (model.spec().kind != ModelKind::edges) throw std::invalid_argument("edge_only_forward needs an edges model");
  ModelInput input;
  input.adjacency = graph.adjacency;
  input.normalized = normalized_adjacency(graph.adjacency);
  // Features are not copied; only the row count reaches the model.
  input.features = DenseMatrix(graph.num_nodes, 0);
  return model.forward(params, input);
}

}  // namespace gnnanatomy
