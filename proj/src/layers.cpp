#include "gnnanatomy/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gnnanatomy {

DenseMatrix spmm(const WeightedCsr& adj, const DenseMatrix& h) {
  if (adj.num_cols != h.rows()) {
    throw std::invalid_argument("spmm: adjacency has " + std::to_string(adj.num_cols) + " columns but h has " +
                                std::to_string(h.rows()) + " rows");
  }
  const std::size_t k = h.cols();
  DenseMatrix out(adj.num_rows, k);
  for (std::size_t r = 0; r < adj.num_rows; ++r) {
    double* o = out.data().data() + r * k;
    for (std::size_t e = adj.row_offsets[r]; e < adj.row_offsets[r + 1]; ++e) {
      const double val = adj.values[e];
      const double* src = h.data().data() + static_cast<std::size_t>(adj.col_indices[e]) * k;
      for (std::size_t t = 0; t < k; ++t) o[t] += val * src[t];
    }
  }
  return out;
}

DenseMatrix aggregate(const Csr& adj, const DenseMatrix& h, Aggregator aggregator, std::vector<NodeId>* argmax) {
  if (adj.num_rows() != h.rows()) throw std::invalid_argument("aggregate: adjacency/embedding row mismatch");
  const std::size_t n = h.rows();
  const std::size_t k = h.cols();
  DenseMatrix out(n, k);
  if (aggregator == Aggregator::max && argmax) argmax->assign(n * k, kNoNeighbor);

  for (std::size_t v = 0; v < n; ++v) {
    auto nbrs = adj.neighbors(v);
    if (nbrs.empty()) continue;
    auto o = out.row(v);
    switch (aggregator) {
      case Aggregator::sum:
      case Aggregator::mean: {
        for (NodeId u : nbrs) {
          auto src = h.row(u);
          for (std::size_t t = 0; t < k; ++t) o[t] += src[t];
        }
        if (aggregator == Aggregator::mean) {
          const double inv = 1.0 / static_cast<double>(nbrs.size());
          for (std::size_t t = 0; t < k; ++t) o[t] *= inv;
        }
        break;
      }
      case Aggregator::max: {
        for (std::size_t t = 0; t < k; ++t) {
          NodeId best = kNoNeighbor;
          double best_val = 0.0;
          for (NodeId u : nbrs) {
            const double x = h(u, t);
            if (best == kNoNeighbor || x > best_val || (x == best_val && u < best)) {
              best = u;
              best_val = x;
            }
          }
          o[t] = best_val;
          if (argmax) (*argmax)[v * k + t] = best;
        }
        break;
      }
    }
  }
  return out;
}

DenseMatrix aggregate_backward(const Csr& adj, const DenseMatrix& grad_out, Aggregator aggregator,
                               std::span<const NodeId> argmax) {
  const std::size_t n = grad_out.rows();
  const std::size_t k = grad_out.cols();
  DenseMatrix grad_in(n, k);
  if (aggregator == Aggregator::max) {
    if (argmax.size() != n * k) throw std::invalid_argument("aggregate_backward: argmax table has wrong size");
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t t = 0; t < k; ++t) {
        const NodeId src = argmax[v * k + t];
        if (src != kNoNeighbor) grad_in(src, t) += grad_out(v, t);
      }
    }
    return grad_in;
  }
  for (std::size_t v = 0; v < n; ++v) {
    auto nbrs = adj.neighbors(v);
    if (nbrs.empty()) continue;
    const double scale = aggregator == Aggregator::mean ? 1.0 / static_cast<double>(nbrs.size()) : 1.0;
    auto g = grad_out.row(v);
    for (NodeId u : nbrs) {
      auto dst = grad_in.row(u);
      for (std::size_t t = 0; t < k; ++t) dst[t] += scale * g[t];
    }
  }
  return grad_in;
}

DenseMatrix gcn_layer_forward(const WeightedCsr& adj, const DenseMatrix& h, const DenseMatrix& w,
                              const DenseMatrix& bias, bool apply_nonlinearity) {
  DenseMatrix out = matmul(spmm(adj, h), w);
  add_row_bias(out, bias);
  if (apply_nonlinearity) relu_inplace(out);
  return out;
}

DenseMatrix gin_layer_forward(const Csr& adj, const DenseMatrix& h, const GinMlp& mlp, Aggregator aggregator,
                              bool apply_nonlinearity) {
  DenseMatrix z = aggregate(adj, h, aggregator);
  add_inplace(z, h);
  DenseMatrix hidden = matmul(z, mlp.w1);
  add_row_bias(hidden, mlp.b1);
  relu_inplace(hidden);
  DenseMatrix out = matmul(hidden, mlp.w2);
  add_row_bias(out, mlp.b2);
  if (apply_nonlinearity) relu_inplace(out);
  return out;
}

DenseMatrix sage_mean_layer_forward(const Csr& adj, const DenseMatrix& h, const DenseMatrix& w_self,
                                    const DenseMatrix& w_neigh, const DenseMatrix& bias, bool apply_nonlinearity) {
  DenseMatrix out = matmul(h, w_self);
  add_inplace(out, matmul(aggregate(adj, h, Aggregator::mean), w_neigh));
  add_row_bias(out, bias);
  if (apply_nonlinearity) relu_inplace(out);
  return out;
}

DenseMatrix graph_readout(const DenseMatrix& node_embeddings) {
  if (node_embeddings.rows() == 0) throw std::invalid_argument("graph_readout: empty graph");
  return column_sums(node_embeddings);
}

DenseMatrix graph_readout(const DenseMatrix& node_embeddings, std::span<const std::size_t> offsets) {
  if (offsets.size() < 2) throw std::invalid_argument("graph_readout: no graphs");
  const std::size_t k = node_embeddings.cols();
  DenseMatrix out(offsets.size() - 1, k);
  for (std::size_t g = 0; g + 1 < offsets.size(); ++g) {
    if (offsets[g + 1] <= offsets[g]) throw std::invalid_argument("graph_readout: empty graph " + std::to_string(g));
    auto o = out.row(g);
    for (std::size_t v = offsets[g]; v < offsets[g + 1]; ++v) {
      auto src = node_embeddings.row(v);
      for (std::size_t t = 0; t < k; ++t) o[t] += src[t];
    }
  }
  return out;
}

LossResult softmax_cross_entropy(const DenseMatrix& logits, std::span<const ClassId> labels) {
  if (labels.size() != logits.rows()) throw std::invalid_argument("softmax_cross_entropy: label count mismatch");
  const std::size_t n = logits.rows();
  const std::size_t c = logits.cols();
  LossResult result{0.0, DenseMatrix(n, c)};
  if (n == 0) return result;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    const ClassId y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= c) {
      throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(y) + " out of range");
    }
    auto row = logits.row(r);
    const double shift = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double x : row) sum += std::exp(x - shift);
    const double log_sum = std::log(sum) + shift;
    result.loss += log_sum - row[y];
    auto g = result.grad.row(r);
    for (std::size_t t = 0; t < c; ++t) g[t] = std::exp(row[t] - log_sum) * inv_n;
    g[y] -= inv_n;
  }
  result.loss *= inv_n;
  return result;
}

std::size_t argmax_row(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t t = 1; t < row.size(); ++t) {
    if (row[t] > row[best]) best = t;
  }
  return best;
}

}  // namespace gnnanatomy
