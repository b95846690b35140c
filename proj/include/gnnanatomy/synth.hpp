#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "gnnanatomy/graph.hpp"
#include "gnnanatomy/model.hpp"
#include "gnnanatomy/rng.hpp"

namespace gnnanatomy {

/// Which input carries the label signal.
///   feature:   labels are the argmax of the features' projections on c
///              orthonormal directions; the graph is a random regular graph.
///   structure: labels are degree buckets (edge-count buckets for graph
///              tasks); features are noise.
///   joint:     labels are XOR of a feature bit and a structural bit; each
///              input alone is at chance.
enum class SynthKind { feature, structure, joint };

std::string_view to_string(SynthKind kind);
SynthKind parse_synth_kind(std::string_view name);

struct SynthSpec {
  SynthKind kind = SynthKind::feature;
  TaskKind task = TaskKind::node;
  std::size_t num_nodes = 600;      // node tasks
  std::size_t num_graphs = 0;       // graph tasks
  std::size_t nodes_per_graph = 0;  // graph tasks
  int num_classes = 2;
  std::size_t feat_dim = 8;
  double noise_rate = 0.0;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument for unusable specs (c < 2, noise >= 0.5, joint
/// with c != 2, too few nodes, ...).
void check(const SynthSpec& spec);

NodeTask gen_feature_task(const SynthSpec& spec);
NodeTask gen_structure_task(const SynthSpec& spec);
NodeTask gen_joint_task(const SynthSpec& spec);
GraphTask gen_graph_task(const SynthSpec& spec);

/// Dispatches on spec.kind and spec.task.
Task generate(const SynthSpec& spec);

/// Simple undirected graph with the requested degree sequence, built by
/// random stub matching with restarts. The degree sum must be even.
std::vector<Edge> random_graph_with_degrees(std::span<const std::size_t> degrees, Rng& rng);

}  // namespace gnnanatomy
