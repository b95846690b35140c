#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gnnanatomy/solvable.hpp"

namespace gnnanatomy {

/// Undefined ratios (empty denominators) are std::nullopt, never 0 or 1.
using Ratio = std::optional<double>;

/// |S_F ∩ S_E| / |P|
double fande(const SolvableSet& features, const SolvableSet& edges);
/// (|S_F| / |P|) * (|S_E| / |P|)
double expected_fande(const SolvableSet& features, const SolvableSet& edges);
/// |S_F ∪ S_E| / |P|
double fore(const SolvableSet& features, const SolvableSet& edges);
/// |S_GNN ∩ S_part| / |S_part|
Ratio retention(const SolvableSet& gnn, const SolvableSet& part);
/// |S_GNN ∩ U| / |U| with U = P \ (S_F ∪ S_E)
Ratio gap_additional(const SolvableSet& gnn, const SolvableSet& features, const SolvableSet& edges);

/// Solvable sets of one architecture, one per dataset.
using SetsByDataset = std::map<std::string, SolvableSet>;

/// Jaccard similarity of the two architectures' solvable sets pooled over all
/// datasets (ids are namespaced by dataset). Needs identical dataset keys.
Ratio jaccard_across_datasets(const SetsByDataset& a, const SetsByDataset& b);

/// Highest |S|/|P|; ties go to the earlier entry in `ordered`.
std::pair<std::string, double> best_gnn(const std::vector<std::pair<std::string, SolvableSet>>& ordered);

struct GapTriple {
  Ratio feature_retention;
  Ratio edge_retention;
  Ratio additional;
};

/// One dataset's row of the ForE table plus its GaP triples.
struct MeasureReport {
  std::string dataset_name;
  double features = 0.0;
  double edges = 0.0;
  double expected_fande = 0.0;
  double fande = 0.0;
  double fore = 0.0;
  double gnn_best = 0.0;
  std::string gnn_best_arch;
  std::string edge_propagation;
  std::vector<std::pair<std::string, GapTriple>> gap;  // per architecture, input order
  double alpha = 0.0;
  std::size_t n_runs = 0;
  std::size_t universe_size = 0;
  std::size_t features_count = 0;
  std::size_t edges_count = 0;
  std::size_t fande_count = 0;
  std::size_t fore_count = 0;
};

/// All sets must share one universe; `gnns` must be nonempty.
MeasureReport measure(const SolvableSet& features, const SolvableSet& edges,
                      const std::vector<std::pair<std::string, SolvableSet>>& gnns);

/// Architecture-by-dataset grids over several datasets. Retention and additional-solve
/// grids have one row per architecture and one column per dataset; the
/// Jaccard grid is architecture x architecture, pooled over the datasets both
/// architectures were measured on.
struct ReportGrids {
  std::vector<std::string> architectures;  // first-seen order
  std::vector<std::string> datasets;       // report order
  std::vector<std::vector<Ratio>> feature_retention;
  std::vector<std::vector<Ratio>> edge_retention;
  std::vector<std::vector<Ratio>> additional;
  std::vector<std::vector<Ratio>> jaccard;

  struct PairRow {
    std::string dataset, arch_a, arch_b;
    Ratio jaccard;
  };
  std::vector<PairRow> jaccard_by_dataset;
};

/// gnn_sets[i] holds the GNN solvable sets behind reports[i].
ReportGrids build_report_grids(const std::vector<MeasureReport>& reports,
                               const std::vector<std::vector<std::pair<std::string, SolvableSet>>>& gnn_sets);

/// The propagation recorded in an edge-only model name ("edges:gin-sum" ->
/// "gin-sum"); empty for other names.
std::string propagation_of(const std::string& model_name);

}  // namespace gnnanatomy
