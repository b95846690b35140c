#include "gnnanatomy/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace gnnanatomy {

namespace {

// Degree of the label-agnostic graphs behind the feature and joint kinds.
constexpr std::size_t kFeatureGraphDegree = 4;
constexpr std::size_t kJointGraphDegree = 3;
constexpr double kFeatureMargin = 2.0;
constexpr double kFeatureJitter = 0.25;

std::vector<double> random_unit_vector(std::size_t dim, Rng& rng) {
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = rng.normal();
      norm += x * x;
    }
  } while (norm < 1e-12);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

/// Gaussian row with its components along `unit` removed, plus `along * unit`.
void fill_row(std::span<double> row, std::span<const double> unit, double along, Rng& rng, bool with_noise) {
  double dot = 0.0;
  for (std::size_t t = 0; t < row.size(); ++t) {
    row[t] = with_noise ? rng.normal() : 0.0;
    dot += row[t] * unit[t];
  }
  for (std::size_t t = 0; t < row.size(); ++t) row[t] += (along - dot) * unit[t];
}

/// Gaussian row projected off every direction, then `along[k]` added along
/// direction k. Directions must be orthonormal.
void fill_row(std::span<double> row, const std::vector<std::vector<double>>& directions, std::span<const double> along,
              Rng& rng) {
  for (double& x : row) x = rng.normal();
  for (std::size_t k = 0; k < directions.size(); ++k) {
    double dot = 0.0;
    for (std::size_t t = 0; t < row.size(); ++t) dot += row[t] * directions[k][t];
    for (std::size_t t = 0; t < row.size(); ++t) row[t] -= dot * directions[k][t];
  }
  for (std::size_t k = 0; k < directions.size(); ++k) {
    for (std::size_t t = 0; t < row.size(); ++t) row[t] += along[k] * directions[k][t];
  }
}

/// `count` random orthonormal vectors (Gram-Schmidt on Gaussian draws).
std::vector<std::vector<double>> orthonormal_directions(std::size_t count, std::size_t dim, Rng& rng) {
  if (count > dim) throw std::invalid_argument("feature tasks need feat_dim >= num_classes");
  std::vector<std::vector<double>> out;
  while (out.size() < count) {
    auto v = random_unit_vector(dim, rng);
    for (const auto& u : out) {
      double dot = 0.0;
      for (std::size_t t = 0; t < dim; ++t) dot += v[t] * u[t];
      for (std::size_t t = 0; t < dim; ++t) v[t] -= dot * u[t];
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-6) continue;
    for (double& x : v) x /= norm;
    out.push_back(std::move(v));
  }
  return out;
}

/// Labels 0..c-1 repeated to length n, shuffled: every class count within 1.
std::vector<ClassId> balanced_labels(std::size_t n, int c, Rng& rng) {
  std::vector<ClassId> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<ClassId>(i % static_cast<std::size_t>(c));
  rng.shuffle(std::span(labels));
  return labels;
}

/// The class the generator encodes for an item whose observed label is
/// `label`: the label itself, or with probability `noise` a different class.
ClassId hidden_class(ClassId label, int c, double noise, Rng& rng) {
  if (noise > 0.0 && rng.bernoulli(noise)) {
    return static_cast<ClassId>((label + 1 + static_cast<ClassId>(rng.below(static_cast<std::uint64_t>(c - 1)))) % c);
  }
  return label;
}

/// 60/20/20 split inside each stratum. With `equalize`, every stratum
/// contributes as many items as the smallest one; the rest stay unsplit.
Split stratified_split(std::span<const int> stratum, int num_strata, bool equalize, Rng& rng) {
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(num_strata));
  for (std::size_t i = 0; i < stratum.size(); ++i) members[static_cast<std::size_t>(stratum[i])].push_back(i);
  std::size_t smallest = stratum.size();
  for (const auto& m : members) smallest = std::min(smallest, m.size());

  Split split;
  for (auto& m : members) {
    rng.shuffle(std::span(m));
    const std::size_t n = equalize ? smallest : m.size();
    const std::size_t n_train = (6 * n + 5) / 10;
    const std::size_t n_val = (2 * n + 5) / 10;
    for (std::size_t i = 0; i < n; ++i) {
      auto& dst = i < n_train ? split.train : i < n_train + n_val ? split.val : split.test;
      dst.push_back(m[i]);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

/// Uniform random edge set with exactly `edge_count` edges on n nodes.
std::vector<Edge> random_edges(std::size_t n, std::size_t edge_count, Rng& rng) {
  std::vector<Edge> all;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) all.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  rng.shuffle(std::span(all));
  all.resize(std::min(edge_count, all.size()));
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

std::string_view to_string(SynthKind kind) {
  switch (kind) {
    case SynthKind::feature:
      return "feature";
    case SynthKind::structure:
      return "structure";
    case SynthKind::joint:
      return "joint";
  }
  return "unknown";
}

SynthKind parse_synth_kind(std::string_view name) {
  if (name == "feature") return SynthKind::feature;
  if (name == "structure") return SynthKind::structure;
  if (name == "joint") return SynthKind::joint;
  throw std::invalid_argument("unknown synthetic kind '" + std::string(name) + "'");
}

void check(const SynthSpec& spec) {
  if (spec.num_classes < 2) throw std::invalid_argument("synthetic tasks need at least 2 classes");
  if (!(spec.noise_rate >= 0.0 && spec.noise_rate < 0.5)) throw std::invalid_argument("noise rate must lie in [0, 0.5)");
  if (spec.feat_dim < 1) throw std::invalid_argument("feature dimension must be positive");
  if (spec.kind == SynthKind::feature && spec.task == TaskKind::node && spec.feat_dim < static_cast<std::size_t>(spec.num_classes)) {
    throw std::invalid_argument("feature node tasks need feat_dim >= num_classes");
  }
  if (spec.kind == SynthKind::joint && spec.num_classes != 2) {
    throw std::invalid_argument("joint (XOR) tasks are binary; use --classes 2");
  }
  const auto c = static_cast<std::size_t>(spec.num_classes);
  if (spec.task == TaskKind::node) {
    // Every class needs enough members for a nonempty test split.
    if (spec.num_nodes < 5 * c) throw std::invalid_argument("need at least 5 nodes per class");
    if (spec.kind == SynthKind::structure && spec.num_nodes <= 2 * c + 1) {
      throw std::invalid_argument("too few nodes for the requested degree buckets");
    }
    if (spec.kind == SynthKind::joint && spec.num_nodes % 2 != 0) {
      throw std::invalid_argument("joint node tasks use a 3-regular graph and need an even node count");
    }
    if (spec.kind == SynthKind::joint && spec.num_nodes < 40) throw std::invalid_argument("joint node tasks need >= 40 nodes");
  } else {
    if (spec.num_graphs < 5 * c) throw std::invalid_argument("need at least 5 graphs per class");
    if (spec.nodes_per_graph < 4) throw std::invalid_argument("graphs need at least 4 nodes");
  }
}

std::vector<Edge> random_graph_with_degrees(std::span<const std::size_t> degrees, Rng& rng) {
  const std::size_t n = degrees.size();
  const std::size_t total = std::accumulate(degrees.begin(), degrees.end(), std::size_t{0});
  if (total % 2 != 0) throw std::invalid_argument("degree sum must be even");
  for (std::size_t d : degrees) {
    if (d >= n) throw std::invalid_argument("degree exceeds n - 1");
  }
  constexpr int kRestarts = 1000;
  constexpr int kPartnerTries = 64;
  for (int attempt = 0; attempt < kRestarts; ++attempt) {
    std::vector<NodeId> stubs;
    stubs.reserve(total);
    for (std::size_t v = 0; v < n; ++v) stubs.insert(stubs.end(), degrees[v], static_cast<NodeId>(v));
    rng.shuffle(std::span(stubs));
    std::unordered_set<std::uint64_t> present;
    std::vector<Edge> edges;
    bool ok = true;
    while (!stubs.empty()) {
      const NodeId u = stubs.back();
      stubs.pop_back();
      bool matched = false;
      for (int tries = 0; tries < kPartnerTries && !stubs.empty(); ++tries) {
        const std::size_t j = rng.below(stubs.size());
        const NodeId v = stubs[j];
        const std::uint64_t key = static_cast<std::uint64_t>(std::min(u, v)) * n + std::max(u, v);
        if (v == u || present.contains(key)) continue;
        present.insert(key);
        edges.emplace_back(std::min(u, v), std::max(u, v));
        stubs[j] = stubs.back();
        stubs.pop_back();
        matched = true;
        break;
      }
      if (!matched) {
        ok = false;
        break;
      }
    }
    if (ok) {
      std::sort(edges.begin(), edges.end());
      return edges;
    }
  }
  throw std::runtime_error("could not realize the degree sequence as a simple graph");
}

NodeTask gen_feature_task(const SynthSpec& spec) {
  check(spec);
  if (spec.kind != SynthKind::feature) throw std::invalid_argument("gen_feature_task needs kind = feature");
  Rng rng(spec.seed);
  const std::size_t n = spec.num_nodes;
  const int c = spec.num_classes;
  const auto labels = balanced_labels(n, c, rng);
  const auto directions = orthonormal_directions(static_cast<std::size_t>(c), spec.feat_dim, rng);

  // Along direction k the hidden class sits at kFeatureMargin, the others
  // near zero: label = argmax_k <x, u_k> with a fixed margin.
  DenseMatrix features(n, spec.feat_dim);
  std::vector<double> along(static_cast<std::size_t>(c));
  for (std::size_t v = 0; v < n; ++v) {
    const ClassId hidden = hidden_class(labels[v], c, spec.noise_rate, rng);
    for (int k = 0; k < c; ++k) {
      along[static_cast<std::size_t>(k)] = (k == hidden ? kFeatureMargin : 0.0) + rng.uniform(-kFeatureJitter, kFeatureJitter);
    }
    fill_row(features.row(v), directions, along, rng);
  }
  std::vector<std::size_t> degrees(n, std::min(kFeatureGraphDegree, n - 1));
  if ((degrees[0] * n) % 2 != 0) degrees[0] -= 1;
  const auto edges = random_graph_with_degrees(degrees, rng);

  std::vector<int> strata(labels.begin(), labels.end());
  NodeTask task;
  task.num_classes = c;
  task.split = stratified_split(strata, c, false, rng);
  task.graph = make_graph(n, edges, std::move(features), labels);
  return task;
}

NodeTask gen_structure_task(const SynthSpec& spec) {
  check(spec);
  if (spec.kind != SynthKind::structure) throw std::invalid_argument("gen_structure_task needs kind = structure");
  Rng rng(spec.seed);
  const std::size_t n = spec.num_nodes;
  const int c = spec.num_classes;
  const auto labels = balanced_labels(n, c, rng);

  // Class k owns degrees {2k+1, 2k+2}, so degree buckets are the classes.
  std::vector<std::size_t> degrees(n);
  for (std::size_t v = 0; v < n; ++v) {
    const auto hidden = static_cast<std::size_t>(hidden_class(labels[v], c, spec.noise_rate, rng));
    degrees[v] = 2 * hidden + 1 + rng.below(2);
  }
  if (std::accumulate(degrees.begin(), degrees.end(), std::size_t{0}) % 2 != 0) {
    // Move one node to the other degree of its pair.
    degrees[0] += degrees[0] % 2 == 1 ? 1 : -1;
  }
  const auto edges = random_graph_with_degrees(degrees, rng);

  DenseMatrix features(n, spec.feat_dim);
  for (double& x : features.data()) x = rng.normal();

  std::vector<int> strata(labels.begin(), labels.end());
  NodeTask task;
  task.num_classes = c;
  task.split = stratified_split(strata, c, false, rng);
  task.graph = make_graph(n, edges, std::move(features), labels);
  return task;
}

NodeTask gen_joint_task(const SynthSpec& spec) {
  check(spec);
  if (spec.kind != SynthKind::joint) throw std::invalid_argument("gen_joint_task needs kind = joint");
  Rng rng(spec.seed);
  const std::size_t n = spec.num_nodes;
  std::vector<std::size_t> degrees(n, kJointGraphDegree);
  const auto edges = random_graph_with_degrees(degrees, rng);
  std::vector<std::vector<NodeId>> neighbors(n);
  for (auto [u, v] : edges) {
    neighbors[u].push_back(v);
    neighbors[v].push_back(u);
  }

  const auto bits = balanced_labels(n, 2, rng);
  const auto unit = random_unit_vector(spec.feat_dim, rng);
  DenseMatrix features(n, spec.feat_dim);
  std::vector<ClassId> labels(n);
  std::vector<int> strata(n);
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t ones = 0;
    for (NodeId u : neighbors[v]) ones += static_cast<std::size_t>(bits[u]);
    const int majority = 2 * ones > neighbors[v].size() ? 1 : 0;
    ClassId label = bits[v] ^ majority;
    if (spec.noise_rate > 0.0 && rng.bernoulli(spec.noise_rate)) label ^= 1;
    labels[v] = label;
    // The bit is the only thing the features carry.
    fill_row(features.row(v), unit, bits[v] ? 1.0 : -1.0, rng, false);
    strata[v] = 2 * bits[v] + label;
  }

  // Equal-sized (bit, label) strata in every split: given either input
  // alone, the two labels are equally frequent in train, val and test.
  NodeTask task;
  task.num_classes = 2;
  task.split = stratified_split(strata, 4, true, rng);
  task.graph = make_graph(n, edges, std::move(features), std::move(labels));
  return task;
}

GraphTask gen_graph_task(const SynthSpec& spec) {
  check(spec);
  if (spec.task != TaskKind::graph) throw std::invalid_argument("gen_graph_task needs task = graph");
  Rng rng(spec.seed);
  const std::size_t g_count = spec.num_graphs;
  const std::size_t m = spec.nodes_per_graph;
  const int c = spec.num_classes;
  const std::size_t max_edges = m * (m - 1) / 2;
  const auto unit = random_unit_vector(spec.feat_dim, rng);

  GraphTask task;
  task.num_classes = c;
  task.graph_labels = balanced_labels(g_count, c, rng);
  std::vector<int> strata(g_count);

  // Edge-count buckets for structural classes: bucket k spans
  // [base + k*gap, base + k*gap + gap/2].
  const int buckets = spec.kind == SynthKind::joint ? 2 : c;
  const std::size_t base = m / 2;
  const std::size_t gap = std::max<std::size_t>(2, (max_edges - base) / static_cast<std::size_t>(buckets));
  auto bucket_edge_count = [&](std::size_t k) {
    return std::min(max_edges, base + k * gap + rng.below(gap / 2 + 1));
  };

  for (std::size_t g = 0; g < g_count; ++g) {
    const ClassId label = task.graph_labels[g];
    DenseMatrix features(m, spec.feat_dim);
    std::vector<Edge> edges;
    switch (spec.kind) {
      case SynthKind::feature: {
        const ClassId hidden = hidden_class(label, c, spec.noise_rate, rng);
        for (std::size_t v = 0; v < m; ++v) {
          const double along = static_cast<double>(hidden) + rng.uniform(0.2, 0.8) - 0.5 * c;
          fill_row(features.row(v), unit, along, rng, true);
        }
        edges = random_edges(m, m, rng);
        strata[g] = label;
        break;
      }
      case SynthKind::structure: {
        const auto hidden = static_cast<std::size_t>(hidden_class(label, c, spec.noise_rate, rng));
        for (double& x : features.data()) x = rng.normal();
        edges = random_edges(m, bucket_edge_count(hidden), rng);
        strata[g] = label;
        break;
      }
      case SynthKind::joint: {
        // Cycle through the four (bit, bucket) cells so they stay balanced.
        const std::size_t cell = g % 4;
        const int bit = static_cast<int>(cell / 2);
        const std::size_t bucket = cell % 2;
        ClassId value = bit ^ static_cast<int>(bucket);
        if (spec.noise_rate > 0.0 && rng.bernoulli(spec.noise_rate)) value ^= 1;
        task.graph_labels[g] = value;
        for (std::size_t v = 0; v < m; ++v) fill_row(features.row(v), unit, bit ? 1.0 : -1.0, rng, false);
        edges = random_edges(m, bucket_edge_count(bucket), rng);
        strata[g] = static_cast<int>(2 * bit + value);
        break;
      }
    }
    task.graphs.push_back(make_graph(m, edges, std::move(features)));
  }
  const bool joint = spec.kind == SynthKind::joint;
  task.split = stratified_split(strata, joint ? 4 : c, joint, rng);
  return task;
}

Task generate(const SynthSpec& spec) {
  if (spec.task == TaskKind::graph) return gen_graph_task(spec);
  switch (spec.kind) {
    case SynthKind::feature:
      return gen_feature_task(spec);
    case SynthKind::structure:
      return gen_structure_task(spec);
    case SynthKind::joint:
      return gen_joint_task(spec);
  }
  throw std::invalid_argument("unknown synthetic kind");
}

}  // namespace gnnanatomy
