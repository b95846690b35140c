#include "gnnanatomy/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace gnnanatomy {

WeightedCsr WeightedCsr::identity(std::size_t n) {
  WeightedCsr m;
  m.num_rows = n;
  m.num_cols = n;
  m.row_offsets.resize(n + 1);
  m.col_indices.resize(n);
  m.values.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    m.row_offsets[i + 1] = i + 1;
    m.col_indices[i] = static_cast<NodeId>(i);
  }
  return m;
}

DenseMatrix WeightedCsr::to_dense() const {
  DenseMatrix out(num_rows, num_cols);
  for (std::size_t r = 0; r < num_rows; ++r) {
    for (std::size_t e = row_offsets[r]; e < row_offsets[r + 1]; ++e) out(r, col_indices[e]) += values[e];
  }
  return out;
}

Graph make_graph(std::size_t num_nodes, std::span<const Edge> edges, DenseMatrix features,
                 std::optional<std::vector<ClassId>> node_labels) {
  std::vector<Edge> directed;
  directed.reserve(edges.size() * 2);
  for (auto [u, v] : edges) {
    if (u >= num_nodes || v >= num_nodes) {
      throw std::invalid_argument("edge (" + std::to_string(u) + "," + std::to_string(v) +
                                  ") references a node outside [0, " + std::to_string(num_nodes) + ")");
    }
    if (u == v) throw std::invalid_argument("self-loop on node " + std::to_string(u));
    directed.emplace_back(u, v);
    directed.emplace_back(v, u);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  Graph g;
  g.num_nodes = num_nodes;
  g.adjacency.row_offsets.assign(num_nodes + 1, 0);
  g.adjacency.col_indices.reserve(directed.size());
  for (auto [u, v] : directed) {
    ++g.adjacency.row_offsets[u + 1];
    g.adjacency.col_indices.push_back(v);
  }
  for (std::size_t i = 0; i < num_nodes; ++i) g.adjacency.row_offsets[i + 1] += g.adjacency.row_offsets[i];
  g.features = std::move(features);
  g.node_labels = std::move(node_labels);
  return g;
}

std::vector<Edge> undirected_edges(const Graph& graph) {
  std::vector<Edge> out;
  out.reserve(graph.num_undirected_edges());
  for (std::size_t u = 0; u < graph.num_nodes; ++u) {
    for (NodeId v : graph.adjacency.neighbors(u)) {
      if (u < v) out.emplace_back(static_cast<NodeId>(u), v);
    }
  }
  return out;
}

std::vector<std::string> validate(const Graph& graph) {
  std::vector<std::string> violations;
  const auto& offsets = graph.adjacency.row_offsets;
  const auto& cols = graph.adjacency.col_indices;
  const std::size_t n = graph.num_nodes;

  bool offsets_ok = true;
  if (offsets.size() != n + 1) {
    violations.push_back("offsets length: expected " + std::to_string(n + 1) + ", got " +
                         std::to_string(offsets.size()));
    offsets_ok = false;
  }
  if (!offsets.empty() && offsets.front() != 0) {
    violations.push_back("offsets must start at 0");
    offsets_ok = false;
  }
  for (std::size_t i = 1; i < offsets.size(); ++i) {
    if (offsets[i] < offsets[i - 1]) {
      violations.push_back("nonmonotone offsets at row " + std::to_string(i - 1));
      offsets_ok = false;
      break;
    }
  }
  if (!offsets.empty() && offsets.back() != cols.size()) {
    violations.push_back("last offset " + std::to_string(offsets.back()) + " != col_indices length " +
                         std::to_string(cols.size()));
    offsets_ok = false;
  }

  if (offsets_ok) {
    std::vector<Edge> directed;
    directed.reserve(cols.size());
    bool range_ok = true;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t e = offsets[u]; e < offsets[u + 1]; ++e) {
        const NodeId v = cols[e];
        if (v >= n) {
          violations.push_back("column index out of range: " + std::to_string(v) + " in row " +
                               std::to_string(u));
          range_ok = false;
          continue;
        }
        if (v == u) violations.push_back("self-loop on node " + std::to_string(u));
        directed.emplace_back(static_cast<NodeId>(u), v);
      }
    }
    std::sort(directed.begin(), directed.end());
    for (std::size_t i = 1; i < directed.size(); ++i) {
      if (directed[i] == directed[i - 1]) {
        violations.push_back("duplicate entry (" + std::to_string(directed[i].first) + "," +
                             std::to_string(directed[i].second) + ")");
      }
    }
    if (range_ok) {
      for (auto [u, v] : directed) {
        if (!std::binary_search(directed.begin(), directed.end(), Edge{v, u})) {
          violations.push_back("asymmetric: edge (" + std::to_string(u) + "," + std::to_string(v) +
                               ") has no reverse");
        }
      }
    }
  }

  if (graph.features.rows() != n) {
    violations.push_back("features has " + std::to_string(graph.features.rows()) + " rows, expected " +
                         std::to_string(n));
  }
  if (graph.features.data().size() != graph.features.rows() * graph.features.cols()) {
    violations.push_back("features storage does not match its shape");
  } else if (!graph.features.all_finite()) {
    violations.push_back("non-finite feature entry");
  }
  if (graph.node_labels && graph.node_labels->size() != n) {
    violations.push_back("node_labels length " + std::to_string(graph.node_labels->size()) + " != num_nodes");
  }
  return violations;
}

namespace {

void check_split(const Split& split, std::size_t universe, std::vector<std::string>& violations,
                 const std::string& what) {
  std::unordered_set<std::size_t> seen;
  auto visit = [&](const std::vector<std::size_t>& ids, const char* name) {
    for (std::size_t id : ids) {
      if (id >= universe) {
        violations.push_back(std::string(name) + " split references " + what + " " + std::to_string(id) +
                             " out of range");
      } else if (!seen.insert(id).second) {
        violations.push_back("splits not disjoint: " + what + " " + std::to_string(id) + " repeated");
      }
    }
  };
  visit(split.train, "train");
  visit(split.val, "val");
  visit(split.test, "test");
  if (split.test.empty()) violations.push_back("test split is empty");
}

}  // namespace

std::vector<std::string> validate(const NodeTask& task) {
  auto violations = validate(task.graph);
  if (task.num_classes < 2) violations.push_back("num_classes must be >= 2");
  check_split(task.split, task.graph.num_nodes, violations, "node");
  if (!task.graph.node_labels) {
    violations.push_back("node task without node labels");
    return violations;
  }
  const auto& labels = *task.graph.node_labels;
  for (const auto* ids : {&task.split.train, &task.split.val, &task.split.test}) {
    for (std::size_t id : *ids) {
      if (id < labels.size() && (labels[id] < 0 || labels[id] >= task.num_classes)) {
        violations.push_back("node " + std::to_string(id) + " label " + std::to_string(labels[id]) +
                             " outside [0, " + std::to_string(task.num_classes) + ")");
      }
    }
  }
  return violations;
}

std::vector<std::string> validate(const GraphTask& task) {
  std::vector<std::string> violations;
  for (std::size_t i = 0; i < task.graphs.size(); ++i) {
    for (auto& v : validate(task.graphs[i])) violations.push_back("graph " + std::to_string(i) + ": " + v);
    if (task.graphs[i].num_nodes == 0) violations.push_back("graph " + std::to_string(i) + " is empty");
  }
  if (task.graph_labels.size() != task.graphs.size()) {
    violations.push_back("graph_labels length " + std::to_string(task.graph_labels.size()) +
                         " != graph count " + std::to_string(task.graphs.size()));
  }
  if (task.num_classes < 2) violations.push_back("num_classes must be >= 2");
  for (std::size_t i = 0; i < task.graph_labels.size(); ++i) {
    if (task.graph_labels[i] < 0 || task.graph_labels[i] >= task.num_classes) {
      violations.push_back("graph " + std::to_string(i) + " label outside [0, " +
                           std::to_string(task.num_classes) + ")");
    }
  }
  if (!task.graphs.empty()) {
    const std::size_t dim = task.graphs.front().features.cols();
    for (std::size_t i = 1; i < task.graphs.size(); ++i) {
      if (task.graphs[i].features.cols() != dim) {
        violations.push_back("graph " + std::to_string(i) + " feature width differs from graph 0");
      }
    }
  }
  check_split(task.split, task.graphs.size(), violations, "graph");
  return violations;
}

std::vector<std::string> validate(const Task& task) {
  return std::visit([](const auto& t) { return validate(t); }, task);
}

WeightedCsr normalized_adjacency(const Csr& adjacency) {
  const std::size_t n = adjacency.num_rows();
  std::vector<double> inv_sqrt_degree(n);
  for (std::size_t v = 0; v < n; ++v) {
    inv_sqrt_degree[v] = 1.0 / std::sqrt(static_cast<double>(adjacency.degree(v) + 1));
  }
  WeightedCsr out;
  out.num_rows = n;
  out.num_cols = n;
  out.row_offsets.assign(n + 1, 0);
  out.col_indices.reserve(adjacency.col_indices.size() + n);
  out.values.reserve(adjacency.col_indices.size() + n);
  for (std::size_t u = 0; u < n; ++u) {
    // Merge the self-loop into the (sorted) neighbor row.
    bool self_done = false;
    auto emit = [&](NodeId v) {
      out.col_indices.push_back(v);
      out.values.push_back(inv_sqrt_degree[u] * inv_sqrt_degree[v]);
    };
    for (NodeId v : adjacency.neighbors(u)) {
      if (!self_done && v > u) {
        emit(static_cast<NodeId>(u));
        self_done = true;
      }
      emit(v);
    }
    if (!self_done) emit(static_cast<NodeId>(u));
    out.row_offsets[u + 1] = out.col_indices.size();
  }
  return out;
}

WeightedCsr normalized_adjacency(const Graph& graph) { return normalized_adjacency(graph.adjacency); }

PredictionUniverse prediction_universe(const Task& task) {
  PredictionUniverse universe;
  std::visit(
      [&](const auto& t) {
        universe.ids = t.split.test;
        universe.num_classes = t.num_classes;
      },
      task);
  if (universe.ids.empty()) throw std::invalid_argument("no predictions: test split is empty");
  std::sort(universe.ids.begin(), universe.ids.end());
  return universe;
}

int num_classes(const Task& task) {
  return std::visit([](const auto& t) { return t.num_classes; }, task);
}

std::size_t feature_dim(const Task& task) {
  if (const auto* node = std::get_if<NodeTask>(&task)) return node->graph.features.cols();
  const auto& graphs = std::get<GraphTask>(task).graphs;
  return graphs.empty() ? 0 : graphs.front().features.cols();
}

}  // namespace gnnanatomy
