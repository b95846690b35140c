#include "gnnanatomy/measures.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>

namespace gnnanatomy {

namespace {

using Ids = std::vector<std::size_t>;

void require_same_universe(const SolvableSet& a, const SolvableSet& b) {
  if (a.universe_size != b.universe_size || a.dataset_name != b.dataset_name) {
    throw std::invalid_argument("mismatched universes: " + a.model_name + " on '" + a.dataset_name + "' (|P|=" +
                                std::to_string(a.universe_size) + ") vs " + b.model_name + " on '" + b.dataset_name +
                                "' (|P|=" + std::to_string(b.universe_size) + ")");
  }
  if (a.universe_size == 0) throw std::invalid_argument("empty prediction universe");
}

Ids intersect(const Ids& a, const Ids& b) {
  Ids out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

Ids unite(const Ids& a, const Ids& b) {
  Ids out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

double over(std::size_t count, std::size_t total) { return static_cast<double>(count) / static_cast<double>(total); }

}  // namespace

double fande(const SolvableSet& features, const SolvableSet& edges) {
  require_same_universe(features, edges);
  return over(intersect(features.prediction_ids, edges.prediction_ids).size(), features.universe_size);
}

double expected_fande(const SolvableSet& features, const SolvableSet& edges) {
  require_same_universe(features, edges);
  return over(features.size(), features.universe_size) * over(edges.size(), edges.universe_size);
}

double fore(const SolvableSet& features, const SolvableSet& edges) {
  require_same_universe(features, edges);
  return over(unite(features.prediction_ids, edges.prediction_ids).size(), features.universe_size);
}

Ratio retention(const SolvableSet& gnn, const SolvableSet& part) {
  require_same_universe(gnn, part);
  if (part.size() == 0) return std::nullopt;
  return over(intersect(gnn.prediction_ids, part.prediction_ids).size(), part.size());
}

Ratio gap_additional(const SolvableSet& gnn, const SolvableSet& features, const SolvableSet& edges) {
  require_same_universe(gnn, features);
  require_same_universe(gnn, edges);
  const Ids solved_by_parts = unite(features.prediction_ids, edges.prediction_ids);
  const std::size_t unsolved = gnn.universe_size - solved_by_parts.size();
  if (unsolved == 0) return std::nullopt;
  Ids gnn_only;
  std::set_difference(gnn.prediction_ids.begin(), gnn.prediction_ids.end(), solved_by_parts.begin(),
                      solved_by_parts.end(), std::back_inserter(gnn_only));
  return over(gnn_only.size(), unsolved);
}

Ratio jaccard_across_datasets(const SetsByDataset& a, const SetsByDataset& b) {
  if (a.size() != b.size() || !std::equal(a.begin(), a.end(), b.begin(),
                                          [](const auto& x, const auto& y) { return x.first == y.first; })) {
    throw std::invalid_argument("jaccard: architectures cover different datasets");
  }
  std::size_t inter = 0;
  std::size_t uni = 0;
  // Datasets never share ids after namespacing, so pooled counts are sums.
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    inter += intersect(ia->second.prediction_ids, ib->second.prediction_ids).size();
    uni += unite(ia->second.prediction_ids, ib->second.prediction_ids).size();
  }
  if (uni == 0) return std::nullopt;
  return over(inter, uni);
}

std::pair<std::string, double> best_gnn(const std::vector<std::pair<std::string, SolvableSet>>& ordered) {
  if (ordered.empty()) throw std::invalid_argument("best_gnn: no architectures");
  std::size_t best = 0;
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    // Compare counts, not rounded ratios; all sets share |P|.
    if (ordered[i].second.size() > ordered[best].second.size()) best = i;
  }
  return {ordered[best].first, ordered[best].second.ratio()};
}

MeasureReport measure(const SolvableSet& features, const SolvableSet& edges,
                      const std::vector<std::pair<std::string, SolvableSet>>& gnns) {
  require_same_universe(features, edges);
  for (const auto& [name, set] : gnns) require_same_universe(features, set);

  MeasureReport r;
  r.dataset_name = features.dataset_name;
  r.universe_size = features.universe_size;
  r.features_count = features.size();
  r.edges_count = edges.size();
  r.fande_count = intersect(features.prediction_ids, edges.prediction_ids).size();
  r.fore_count = unite(features.prediction_ids, edges.prediction_ids).size();
  r.features = features.ratio();
  r.edges = edges.ratio();
  r.expected_fande = expected_fande(features, edges);
  r.fande = over(r.fande_count, r.universe_size);
  r.fore = over(r.fore_count, r.universe_size);
  std::tie(r.gnn_best_arch, r.gnn_best) = best_gnn(gnns);
  r.edge_propagation = propagation_of(edges.model_name);
  for (const auto& [name, set] : gnns) {
    r.gap.emplace_back(name, GapTriple{retention(set, features), retention(set, edges), gap_additional(set, features, edges)});
  }
  r.alpha = features.alpha;
  r.n_runs = features.n_runs;
  return r;
}

std::string propagation_of(const std::string& model_name) {
  constexpr std::string_view prefix = "edges:";
  if (model_name.starts_with(prefix)) return model_name.substr(prefix.size());
  return {};
}

ReportGrids build_report_grids(const std::vector<MeasureReport>& reports,
                               const std::vector<std::vector<std::pair<std::string, SolvableSet>>>& gnn_sets) {
  if (reports.size() != gnn_sets.size()) throw std::invalid_argument("build_report_grids: one set list per report");
  ReportGrids grids;
  for (const auto& r : reports) {
    if (std::find(grids.datasets.begin(), grids.datasets.end(), r.dataset_name) != grids.datasets.end()) {
      throw std::invalid_argument("dataset '" + r.dataset_name + "' appears twice in the report");
    }
    grids.datasets.push_back(r.dataset_name);
    for (const auto& [arch, triple] : r.gap) {
      if (std::find(grids.architectures.begin(), grids.architectures.end(), arch) == grids.architectures.end()) {
        grids.architectures.push_back(arch);
      }
    }
  }
  const std::size_t n_arch = grids.architectures.size();
  const std::size_t n_data = grids.datasets.size();
  auto blank = std::vector<std::vector<Ratio>>(n_arch, std::vector<Ratio>(n_data));
  grids.feature_retention = blank;
  grids.edge_retention = blank;
  grids.additional = blank;
  auto arch_index = [&](const std::string& arch) {
    return static_cast<std::size_t>(std::find(grids.architectures.begin(), grids.architectures.end(), arch) -
                                    grids.architectures.begin());
  };
  for (std::size_t d = 0; d < n_data; ++d) {
    for (const auto& [arch, triple] : reports[d].gap) {
      const std::size_t a = arch_index(arch);
      grids.feature_retention[a][d] = triple.feature_retention;
      grids.edge_retention[a][d] = triple.edge_retention;
      grids.additional[a][d] = triple.additional;
    }
  }

  std::vector<SetsByDataset> by_arch(n_arch);
  for (std::size_t d = 0; d < n_data; ++d) {
    for (const auto& [arch, set] : gnn_sets[d]) by_arch[arch_index(arch)][grids.datasets[d]] = set;
  }
  grids.jaccard.assign(n_arch, std::vector<Ratio>(n_arch));
  for (std::size_t a = 0; a < n_arch; ++a) {
    for (std::size_t b = 0; b < n_arch; ++b) {
      SetsByDataset left, right;
      for (const auto& [dataset, set] : by_arch[a]) {
        if (auto it = by_arch[b].find(dataset); it != by_arch[b].end()) {
          left.emplace(dataset, set);
          right.emplace(dataset, it->second);
        }
      }
      if (!left.empty()) grids.jaccard[a][b] = jaccard_across_datasets(left, right);
    }
  }
  for (std::size_t d = 0; d < n_data; ++d) {
    for (std::size_t a = 0; a < n_arch; ++a) {
      for (std::size_t b = a + 1; b < n_arch; ++b) {
        auto ia = by_arch[a].find(grids.datasets[d]);
        auto ib = by_arch[b].find(grids.datasets[d]);
        if (ia == by_arch[a].end() || ib == by_arch[b].end()) continue;
        grids.jaccard_by_dataset.push_back({grids.datasets[d], grids.architectures[a], grids.architectures[b],
                                            jaccard_across_datasets({{ia->first, ia->second}}, {{ib->first, ib->second}})});
      }
    }
  }
  return grids;
}

}  // namespace gnnanatomy
