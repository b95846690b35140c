#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "gnnanatomy/dense.hpp"
#include "gnnanatomy/graph.hpp"

namespace gnnanatomy {

enum class Aggregator { sum, mean, max };

/// Marks "no neighbor selected" in max-aggregation routing tables.
inline constexpr NodeId kNoNeighbor = static_cast<NodeId>(-1);

/// Sparse-dense product adj * h.
DenseMatrix spmm(const WeightedCsr& adj, const DenseMatrix& h);

/// Neighborhood aggregation over an unweighted adjacency (self excluded).
/// Mean and max over an empty neighborhood give a zero row. For max, when
/// `argmax` is non-null it receives rows*cols source node ids (ties resolve to
/// the lowest node id, empty neighborhoods to kNoNeighbor).
DenseMatrix aggregate(const Csr& adj, const DenseMatrix& h, Aggregator aggregator,
                      std::vector<NodeId>* argmax = nullptr);

/// Gradient of `aggregate` with respect to its input.
DenseMatrix aggregate_backward(const Csr& adj, const DenseMatrix& grad_out, Aggregator aggregator,
                               std::span<const NodeId> argmax);

DenseMatrix gcn_layer_forward(const WeightedCsr& adj, const DenseMatrix& h, const DenseMatrix& w,
                              const DenseMatrix& bias, bool apply_nonlinearity);

/// Two-layer perceptron applied inside every GIN layer.
struct GinMlp {
  DenseMatrix w1, b1, w2, b2;
};

/// MLP(h_v + aggr_{u in N(v)} h_u), with eps fixed to 0.
DenseMatrix gin_layer_forward(const Csr& adj, const DenseMatrix& h, const GinMlp& mlp, Aggregator aggregator,
                              bool apply_nonlinearity);

/// h_v W_self + mean_{u in N(v)} h_u W_neigh + bias, then ReLU when requested.
DenseMatrix sage_mean_layer_forward(const Csr& adj, const DenseMatrix& h, const DenseMatrix& w_self,
                                    const DenseMatrix& w_neigh, const DenseMatrix& bias,
                                    bool apply_nonlinearity = true);

/// Column-wise sum over all rows. Throws on an empty matrix.
DenseMatrix graph_readout(const DenseMatrix& node_embeddings);

/// Per-segment sums: row g of the result sums rows [offsets[g], offsets[g+1]).
DenseMatrix graph_readout(const DenseMatrix& node_embeddings, std::span<const std::size_t> offsets);

struct LossResult {
  double loss = 0.0;
  DenseMatrix grad;  // d loss / d logits
};

/// Mean softmax cross-entropy over rows, with a max-shifted log-sum-exp.
LossResult softmax_cross_entropy(const DenseMatrix& logits, std::span<const ClassId> labels);

/// Index of the largest entry in the row; ties go to the lowest index.
std::size_t argmax_row(std::span<const double> row);

}  // namespace gnnanatomy
