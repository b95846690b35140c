#include <algorithm>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "gnnanatomy/model.hpp"
#include "support/gradcheck.hpp"

namespace gnnanatomy {
namespace {

using testing::max_gradient_error;
using testing::random_graph;
using testing::random_parameters;

const std::vector<ModelKind> kAllKinds = {ModelKind::features, ModelKind::gcn,      ModelKind::gin_sum,
                                          ModelKind::gin_mean, ModelKind::gin_max, ModelKind::sage_mean};

ModelSpec spec_for(ModelKind kind, TaskKind task = TaskKind::node) {
  ModelSpec s;
  s.kind = kind;
  s.task_kind = task;
  return s;
}

std::vector<ClassId> random_labels(std::size_t n, int c, Rng& rng) {
  std::vector<ClassId> labels(n);
  for (auto& l : labels) l = static_cast<ClassId>(rng.below(static_cast<std::uint64_t>(c)));
  return labels;
}

/// Relabels node v as perm[v].
Graph permute(const Graph& g, const std::vector<NodeId>& perm) {
  std::vector<Edge> edges;
  for (auto [u, v] : undirected_edges(g)) edges.emplace_back(perm[u], perm[v]);
  DenseMatrix features(g.num_nodes, g.features.cols());
  for (std::size_t v = 0; v < g.num_nodes; ++v) {
    std::copy(g.features.row(v).begin(), g.features.row(v).end(), features.row(perm[v]).begin());
  }
  return make_graph(g.num_nodes, edges, std::move(features));
}

TEST(Model, HiddenWidthRule) {
  EXPECT_EQ(default_hidden_width(3, 2), 6u);
  EXPECT_EQ(default_hidden_width(2, 7), 14u);
  EXPECT_EQ(default_hidden_width(1433, 7), 128u);
  const Model m(spec_for(ModelKind::gcn), 5, 3);
  EXPECT_EQ(m.hidden_width(), 10u);
  EXPECT_EQ(m.layers().size(), 3u);
  EXPECT_FALSE(m.layers().back().relu_after);
}

TEST(Model, ParseNames) {
  EXPECT_EQ(parse_model_kind("gin-max"), ModelKind::gin_max);
  EXPECT_EQ(to_string(ModelKind::sage_mean), "sage-mean");
  EXPECT_THROW(parse_model_kind("gat"), std::invalid_argument);
  EXPECT_EQ(parse_edge_input("ones-matrix"), EdgeInput::ones_matrix);
}

TEST(Model, InitIsSeededAndBiasesStartAtZero) {
  const Model m(spec_for(ModelKind::gin_sum), 4, 3);
  Rng a(9), b(9), c(10);
  const Parameters pa = m.init(a);
  EXPECT_EQ(pa, m.init(b));
  EXPECT_NE(pa, m.init(c));
  for (const auto& t : pa.tensors) {
    const double limit = std::sqrt(6.0 / static_cast<double>(t.rows() + t.cols()));
    for (double x : t.data()) EXPECT_LE(std::abs(x), limit);
  }
  std::size_t zero_tensors = 0;
  for (const auto& t : pa.tensors) {
    if (std::all_of(t.data().begin(), t.data().end(), [](double x) { return x == 0.0; })) ++zero_tensors;
  }
  EXPECT_EQ(zero_tensors, 6u);  // two biases per GIN layer
}

TEST(Model, EdgeOnlyFirstLayerWeightIsRandom) {
  ModelSpec s = spec_for(ModelKind::edges);
  s.propagation = ModelKind::gcn;
  const Model m(s, 8, 2);
  EXPECT_EQ(m.input_dim(), 1u);
  Rng rng(1);
  const Parameters p = m.init(rng);
  EXPECT_TRUE(std::any_of(p.tensors[0].data().begin(), p.tensors[0].data().end(), [](double x) { return x != 0.0; }));
}

TEST(Model, ZeroParametersGiveZeroLogits) {
  Rng rng(2);
  const Graph g = random_graph(6, 3, rng);
  for (ModelKind kind : kAllKinds) {
    const Model m(spec_for(kind), 3, 2);
    EXPECT_EQ(m.forward(m.zeros(), make_model_input(g)), DenseMatrix(6, 2)) << to_string(kind);
  }
}

TEST(Model, ZeroIncomingGradientGivesZeroGradients) {
  Rng rng(4);
  const Graph g = random_graph(5, 2, rng);
  const ModelInput input = make_model_input(g);
  for (ModelKind kind : kAllKinds) {
    const Model m(spec_for(kind), 2, 3);
    const Parameters p = random_parameters(m, rng);
    Model::Cache cache;
    const DenseMatrix logits = m.forward(p, input, &cache);
    EXPECT_EQ(m.backward(p, input, cache, DenseMatrix(logits.rows(), logits.cols())), m.zeros());
  }
}

TEST(Gradients, NodeLevelMatchFiniteDifferences) {
  Rng rng(17);
  for (ModelKind kind : kAllKinds) {
    for (int trial = 0; trial < 5; ++trial) {
      const std::size_t n = 5 + rng.below(6);
      const Graph g = random_graph(n, 3, rng);
      const Model m(spec_for(kind), 3, 3);
      const Parameters p = random_parameters(m, rng);
      std::vector<std::size_t> rows(n);
      std::iota(rows.begin(), rows.end(), 0);
      const auto labels = random_labels(n, 3, rng);
      EXPECT_LT(max_gradient_error(m, p, make_model_input(g), rows, labels), 1e-4) << to_string(kind);
    }
  }
}

TEST(Gradients, EdgeOnlyMatchFiniteDifferences) {
  Rng rng(18);
  for (ModelKind prop : kPropagationKinds) {
    for (EdgeInput input_kind : {EdgeInput::ones_column, EdgeInput::ones_matrix}) {
      const Graph g = random_graph(7, 2, rng);
      ModelSpec s = spec_for(ModelKind::edges);
      s.propagation = prop;
      s.edge_input = input_kind;
      const Model m(s, 2, 2);
      const Parameters p = random_parameters(m, rng);
      const std::vector<std::size_t> rows{0, 2, 4, 6};
      const auto labels = random_labels(rows.size(), 2, rng);
      EXPECT_LT(max_gradient_error(m, p, make_model_input(g), rows, labels), 1e-4) << to_string(prop);
    }
  }
}

TEST(Gradients, GraphReadoutMatchFiniteDifferences) {
  Rng rng(19);
  for (ModelKind kind : kAllKinds) {
    GraphTask task;
    task.num_classes = 2;
    for (int i = 0; i < 3; ++i) task.graphs.push_back(random_graph(3 + rng.below(3), 2, rng));
    task.graph_labels = {0, 1, 1};
    task.split = {{0, 1}, {}, {2}};
    const Model m(spec_for(kind, TaskKind::graph), 2, 2);
    const Parameters p = random_parameters(m, rng);
    const std::vector<std::size_t> rows{0, 1, 2};
    EXPECT_LT(max_gradient_error(m, p, make_model_input(task), rows, task.graph_labels), 1e-4) << to_string(kind);
  }
}

TEST(Model, NodePermutationEquivariance) {
  Rng rng(21);
  for (ModelKind kind : kAllKinds) {
    const Graph g = random_graph(8, 3, rng);
    std::vector<NodeId> perm(8);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span(perm));
    const Graph pg = permute(g, perm);
    const Model m(spec_for(kind), 3, 2);
    const Parameters p = random_parameters(m, rng);
    const DenseMatrix out = m.forward(p, make_model_input(g));
    const DenseMatrix pout = m.forward(p, make_model_input(pg));
    for (std::size_t v = 0; v < 8; ++v)
      for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(out(v, k), pout(perm[v], k), 1e-12) << to_string(kind);
  }
}

TEST(Model, GraphLogitsPermutationInvariant) {
  Rng rng(22);
  const Graph g = random_graph(6, 2, rng);
  std::vector<NodeId> perm{3, 5, 0, 1, 4, 2};
  GraphTask a, b;
  a.num_classes = b.num_classes = 2;
  a.graphs = {g};
  b.graphs = {permute(g, perm)};
  a.graph_labels = b.graph_labels = {0};
  a.split = b.split = {{}, {}, {0}};
  for (ModelKind kind : kAllKinds) {
    const Model m(spec_for(kind, TaskKind::graph), 2, 2);
    const Parameters p = random_parameters(m, rng);
    const DenseMatrix la = m.forward(p, make_model_input(a));
    const DenseMatrix lb = m.forward(p, make_model_input(b));
    ASSERT_EQ(la.rows(), 1u);
    for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(la(0, k), lb(0, k), 1e-12);
  }
}

TEST(FeatureOnly, RowWiseAndBlindToEdges) {
  Rng rng(23);
  const Graph g = random_graph(6, 4, rng);
  const Model m(spec_for(ModelKind::features), 4, 3);
  const Parameters p = random_parameters(m, rng);
  const DenseMatrix full = feature_only_forward(m, g.features, p);
  for (std::size_t v = 0; v < 6; ++v) {
    const DenseMatrix one = feature_only_forward(m, gather_rows(g.features, std::vector<std::size_t>{v}), p);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(one(0, k), full(v, k));
  }
  const Graph rewired = make_graph(6, std::vector<Edge>{{0, 5}}, g.features);
  EXPECT_EQ(m.forward(p, make_model_input(g)), m.forward(p, make_model_input(rewired)));
}

TEST(EdgeOnly, IgnoresFeatures) {
  Rng rng(24);
  for (ModelKind prop : kPropagationKinds) {
    const Graph g = random_graph(7, 3, rng);
    Graph other = g;
    for (double& x : other.features.data()) x = rng.normal() * 100.0;
    ModelSpec s = spec_for(ModelKind::edges);
    s.propagation = prop;
    const Model m(s, 3, 2);
    const Parameters p = random_parameters(m, rng);
    EXPECT_EQ(edge_only_forward(m, g, p), edge_only_forward(m, other, p));
  }
}

TEST(EdgeOnly, GinSumSeesDegree) {
  // Nodes 0-1 form an edge (degree 1); nodes 2-4 a triangle (degree 2).
  const Graph g = make_graph(5, std::vector<Edge>{{0, 1}, {2, 3}, {3, 4}, {2, 4}}, DenseMatrix(5, 1));
  ModelSpec s = spec_for(ModelKind::edges);
  s.propagation = ModelKind::gin_sum;
  const Model m(s, 1, 2);
  Rng rng(5);
  Model::Cache cache;
  m.forward(m.init(rng), make_model_input(g), &cache);
  EXPECT_EQ(cache.layers[0].propagated(0, 0), 2.0);
  EXPECT_EQ(cache.layers[0].propagated(2, 0), 3.0);
}

TEST(EdgeOnly, GcnOnRegularGraphIsConstant) {
  std::vector<Edge> edges;
  for (NodeId i = 0; i < 6; ++i) edges.emplace_back(i, static_cast<NodeId>((i + 1) % 6));
  const Graph g = make_graph(6, edges, DenseMatrix(6, 1));
  ModelSpec s = spec_for(ModelKind::edges);
  Rng rng(6);
  const Model m(s, 1, 3);
  const DenseMatrix out = edge_only_forward(m, g, random_parameters(m, rng));
  for (std::size_t v = 1; v < 6; ++v)
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(out(v, k), out(0, k), 1e-14);
}

TEST(Model, MaxGradientFlowsToLowestTiedNeighbor) {
  // Star centre 0 with leaves 1..3; leaves 1 and 2 tie on the only feature.
  const Graph g = make_graph(4, std::vector<Edge>{{0, 1}, {0, 2}, {0, 3}},
                             DenseMatrix(4, 1, std::vector<double>{0.0, 2.0, 2.0, 1.0}));
  ModelSpec s = spec_for(ModelKind::gin_max);
  s.num_layers = 1;
  const Model m(s, 1, 1);
  Parameters p = m.zeros();
  for (std::size_t t : {0u, 2u}) p.tensors[t].data()[0] = 1.0;  // identity MLP
  Model::Cache cache;
  const ModelInput input = make_model_input(g);
  m.forward(p, input, &cache);
  EXPECT_EQ(cache.layers[0].argmax[0], 1u);
}

}  // namespace
}  // namespace gnnanatomy
