#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gnnanatomy/graph.hpp"
#include "gnnanatomy/measures.hpp"
#include "gnnanatomy/solvable.hpp"
#include "gnnanatomy/training.hpp"

namespace gnnanatomy {

/// Malformed or inconsistent file content. The message names the file and
/// the offending key.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON documents; `source` only feeds error messages.
nlohmann::ordered_json dataset_to_json(const Task& task);
Task dataset_from_json(const nlohmann::json& doc, const std::string& source = "<memory>");
nlohmann::ordered_json runmatrix_to_json(const RunMatrix& runs);
RunMatrix runmatrix_from_json(const nlohmann::json& doc, const std::string& source = "<memory>");
nlohmann::ordered_json solvable_to_json(const SolvableSet& set);
SolvableSet solvable_from_json(const nlohmann::json& doc, const std::string& source = "<memory>");

Task load_dataset(const std::filesystem::path& path);
void save_dataset(const Task& task, const std::filesystem::path& path);
RunMatrix load_runmatrix(const std::filesystem::path& path);
void save_runmatrix(const RunMatrix& runs, const std::filesystem::path& path);
SolvableSet load_solvable(const std::filesystem::path& path);
void save_solvable(const SolvableSet& set, const std::filesystem::path& path);

/// A measured dataset: the report plus the GNN sets the Jaccard grid needs.
struct MeasureBundle {
  MeasureReport report;
  std::vector<std::pair<std::string, SolvableSet>> gnn_sets;
};

nlohmann::ordered_json measure_to_json(const MeasureBundle& bundle);
MeasureBundle measure_from_json(const nlohmann::json& doc, const std::string& source = "<memory>");

/// Ratios print with three decimals; missing ratios print as an empty cell.
std::string format_ratio(const Ratio& value);

std::string table1_csv(const std::vector<MeasureReport>& rows);
/// Architectures as rows, datasets as columns.
std::string arch_by_dataset_csv(const ReportGrids& grids, const std::vector<std::vector<Ratio>>& cells);
std::string jaccard_csv(const ReportGrids& grids);
std::string jaccard_by_dataset_csv(const ReportGrids& grids);

/// Writes table1.csv, feature_retention.csv, edge_retention.csv,
/// additional.csv, jaccard.csv and jaccard_by_dataset.csv into out_dir.
void emit_report(const std::vector<MeasureReport>& rows, const ReportGrids& grids, const std::filesystem::path& out_dir);

/// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace gnnanatomy
