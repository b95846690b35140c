#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gnnanatomy/dense.hpp"

namespace gnnanatomy {

using NodeId = std::uint32_t;
using ClassId = std::int32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Compressed sparse row adjacency without values.
struct Csr {
  std::vector<std::size_t> row_offsets{0};
  std::vector<NodeId> col_indices;

  std::size_t num_rows() const { return row_offsets.empty() ? 0 : row_offsets.size() - 1; }
  std::size_t degree(std::size_t v) const { return row_offsets[v + 1] - row_offsets[v]; }
  std::span<const NodeId> neighbors(std::size_t v) const {
    return {col_indices.data() + row_offsets[v], degree(v)};
  }

  friend bool operator==(const Csr&, const Csr&) = default;
};

/// CSR with real coefficients, used for the normalized propagation operator.
struct WeightedCsr {
  std::size_t num_rows = 0;
  std::size_t num_cols = 0;
  std::vector<std::size_t> row_offsets{0};
  std::vector<NodeId> col_indices;
  std::vector<double> values;

  static WeightedCsr identity(std::size_t n);
  DenseMatrix to_dense() const;
};

struct Graph {
  std::size_t num_nodes = 0;
  Csr adjacency;
  DenseMatrix features;
  std::optional<std::vector<ClassId>> node_labels;

  std::size_t num_undirected_edges() const { return adjacency.col_indices.size() / 2; }

  friend bool operator==(const Graph&, const Graph&) = default;
};

/// Builds a validated-shape graph from an edge list. Each input edge is
/// mirrored; repeated edges collapse to one. Self-loops and out-of-range
/// endpoints throw std::invalid_argument.
Graph make_graph(std::size_t num_nodes, std::span<const Edge> edges, DenseMatrix features,
                 std::optional<std::vector<ClassId>> node_labels = std::nullopt);

/// Every undirected edge once, as (u, v) with u < v, in row order.
std::vector<Edge> undirected_edges(const Graph& graph);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;

  friend bool operator==(const Split&, const Split&) = default;
};

/// Transductive node classification on one partially labeled graph.
struct NodeTask {
  Graph graph;
  int num_classes = 0;
  Split split;

  friend bool operator==(const NodeTask&, const NodeTask&) = default;
};

/// Inductive graph classification over a collection of labeled graphs.
struct GraphTask {
  std::vector<Graph> graphs;
  std::vector<ClassId> graph_labels;
  int num_classes = 0;
  Split split;

  friend bool operator==(const GraphTask&, const GraphTask&) = default;
};

using Task = std::variant<NodeTask, GraphTask>;

/// The ordered set of test predictions of a task.
struct PredictionUniverse {
  std::vector<std::size_t> ids;
  int num_classes = 0;

  std::size_t size() const { return ids.size(); }
};

// Violation lists; an empty list means valid. These never throw.
std::vector<std::string> validate(const Graph& graph);
std::vector<std::string> validate(const NodeTask& task);
std::vector<std::string> validate(const GraphTask& task);
std::vector<std::string> validate(const Task& task);

/// D^-1/2 (A + I) D^-1/2 where D is the degree diagonal of A + I.
WeightedCsr normalized_adjacency(const Graph& graph);
WeightedCsr normalized_adjacency(const Csr& adjacency);

/// Test-set ids in ascending order. Throws std::invalid_argument on an empty
/// test set.
PredictionUniverse prediction_universe(const Task& task);

int num_classes(const Task& task);
std::size_t feature_dim(const Task& task);

}  // namespace gnnanatomy
