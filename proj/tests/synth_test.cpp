#include <algorithm>
#include <array>
#include <map>
#include <numeric>

#include <gtest/gtest.h>

#include "gnnanatomy/io.hpp"
#include "gnnanatomy/synth.hpp"

namespace gnnanatomy {
namespace {

SynthSpec node_spec(SynthKind kind, int classes, std::uint64_t seed = 1) {
  SynthSpec s;
  s.kind = kind;
  s.num_nodes = 240;
  s.num_classes = classes;
  s.feat_dim = 6;
  s.noise_rate = 0.05;
  s.seed = seed;
  return s;
}

SynthSpec graph_spec(SynthKind kind, int classes) {
  SynthSpec s = node_spec(kind, classes);
  s.task = TaskKind::graph;
  s.num_graphs = 60;
  s.nodes_per_graph = 10;
  return s;
}

std::vector<ClassId> labels_of(const Task& task) {
  if (const auto* n = std::get_if<NodeTask>(&task)) return *n->graph.node_labels;
  return std::get<GraphTask>(task).graph_labels;
}

const Split& split_of(const Task& task) {
  if (const auto* n = std::get_if<NodeTask>(&task)) return n->split;
  return std::get<GraphTask>(task).split;
}

void expect_split_balanced(const Task& task) {
  const auto labels = labels_of(task);
  const int c = num_classes(task);
  const Split& split = split_of(task);
  for (const auto* part : {&split.train, &split.val, &split.test}) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(c));
    for (auto id : *part) ++counts[static_cast<std::size_t>(labels[id])];
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    EXPECT_LE(*hi - *lo, 1u);
    EXPECT_GT(*lo, 0u);
  }
}

class AllKinds : public ::testing::TestWithParam<std::tuple<SynthKind, bool>> {};

TEST_P(AllKinds, ValidDeterministicAndBalanced) {
  const auto [kind, graph_level] = GetParam();
  const int c = kind == SynthKind::joint ? 2 : 3;
  const SynthSpec spec = graph_level ? graph_spec(kind, c) : node_spec(kind, c);
  const Task a = generate(spec);
  EXPECT_TRUE(validate(a).empty());
  EXPECT_EQ(dataset_to_json(a).dump(), dataset_to_json(generate(spec)).dump());
  SynthSpec other = spec;
  other.seed += 1;
  EXPECT_NE(dataset_to_json(a).dump(), dataset_to_json(generate(other)).dump());
  expect_split_balanced(a);
}

INSTANTIATE_TEST_SUITE_P(Synth, AllKinds,
                         ::testing::Combine(::testing::Values(SynthKind::feature, SynthKind::structure, SynthKind::joint),
                                            ::testing::Bool()));

TEST(Synth, ClassCountsBalanced) {
  for (SynthKind kind : {SynthKind::feature, SynthKind::structure}) {
    const auto labels = labels_of(generate(node_spec(kind, 4)));
    std::map<ClassId, std::size_t> counts;
    for (auto l : labels) ++counts[l];
    ASSERT_EQ(counts.size(), 4u);
    for (auto [label, n] : counts) EXPECT_EQ(n, 60u);
  }
}

TEST(Synth, RejectsBadSpecs) {
  SynthSpec s = node_spec(SynthKind::feature, 1);
  EXPECT_THROW(check(s), std::invalid_argument);
  s = node_spec(SynthKind::feature, 2);
  s.noise_rate = 0.5;
  EXPECT_THROW(check(s), std::invalid_argument);
  s = node_spec(SynthKind::joint, 3);
  EXPECT_THROW(check(s), std::invalid_argument);
  s = node_spec(SynthKind::feature, 8);
  s.feat_dim = 4;
  EXPECT_THROW(check(s), std::invalid_argument);
}

TEST(Synth, StructureLabelsAreDegreeBuckets) {
  SynthSpec spec = node_spec(SynthKind::structure, 4);
  spec.noise_rate = 0.0;
  const NodeTask t = gen_structure_task(spec);
  for (std::size_t v = 1; v < t.graph.num_nodes; ++v) {
    const auto d = t.graph.adjacency.degree(v);
    EXPECT_EQ(static_cast<ClassId>((d - 1) / 2), (*t.graph.node_labels)[v]) << "node " << v;
  }
}

TEST(Synth, FeatureGraphIsRegular) {
  const NodeTask t = gen_feature_task(node_spec(SynthKind::feature, 3));
  for (std::size_t v = 0; v < t.graph.num_nodes; ++v) EXPECT_EQ(t.graph.adjacency.degree(v), 4u);
}

TEST(Synth, JointLabelIsXorOfBitAndNeighborMajority) {
  SynthSpec spec = node_spec(SynthKind::joint, 2);
  spec.noise_rate = 0.0;
  const NodeTask t = gen_joint_task(spec);
  // The bit is the sign of the projection on the shared feature direction; node
  // 0 fixes the orientation.
  std::vector<int> bits(t.graph.num_nodes);
  for (std::size_t v = 0; v < t.graph.num_nodes; ++v) {
    double dot = 0.0;
    for (std::size_t k = 0; k < t.graph.features.cols(); ++k) dot += t.graph.features(v, k) * t.graph.features(0, k);
    bits[v] = dot > 0.0 ? 1 : 0;
  }
  int agree = 0;
  for (std::size_t v = 0; v < t.graph.num_nodes; ++v) {
    std::size_t ones = 0;
    for (NodeId u : t.graph.adjacency.neighbors(v)) ones += static_cast<std::size_t>(bits[u]);
    const int majority = 2 * ones > t.graph.adjacency.degree(v) ? 1 : 0;
    agree += (bits[v] ^ majority) == (*t.graph.node_labels)[v] ? 1 : 0;
  }
  // Flipping every bit also flips an odd-degree majority, so the rule holds
  // in either orientation.
  EXPECT_EQ(agree, static_cast<int>(t.graph.num_nodes));
  const Split& s = t.split;
  for (const auto* part : {&s.train, &s.val, &s.test}) {
    std::array<std::size_t, 4> cells{};
    for (auto id : *part) ++cells[static_cast<std::size_t>(2 * bits[id] + (*t.graph.node_labels)[id])];
    EXPECT_EQ(cells[0], cells[1]);
    EXPECT_EQ(cells[1], cells[2]);
    EXPECT_EQ(cells[2], cells[3]);
  }
}

TEST(Synth, DegreeSequenceRealized) {
  Rng rng(4);
  std::vector<std::size_t> degrees(50);
  for (auto& d : degrees) d = 1 + rng.below(6);
  if (std::accumulate(degrees.begin(), degrees.end(), std::size_t{0}) % 2) degrees[0] += 1;
  const auto edges = random_graph_with_degrees(degrees, rng);
  const Graph g = make_graph(50, edges, DenseMatrix(50, 1));
  for (std::size_t v = 0; v < 50; ++v) EXPECT_EQ(g.adjacency.degree(v), degrees[v]);
  EXPECT_THROW(random_graph_with_degrees(std::vector<std::size_t>{1, 1, 1}, rng), std::invalid_argument);
}

}  // namespace
}  // namespace gnnanatomy
