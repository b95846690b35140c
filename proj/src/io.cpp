#include "gnnanatomy/io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace gnnanatomy {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& source, const std::string& key, const std::string& what) {
  throw FormatError(source + ": key '" + key + "': " + what);
}

const json& field(const json& obj, const char* key, const std::string& source, const std::string& where = "") {
  const std::string name = where.empty() ? key : where + "." + key;
  if (!obj.is_object()) fail(source, where.empty() ? "<root>" : where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(source, name, "missing");
  return *it;
}

std::uint64_t as_count(const json& v, const std::string& source, const std::string& key) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    fail(source, key, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::int64_t as_int(const json& v, const std::string& source, const std::string& key) {
  if (!v.is_number_integer()) fail(source, key, "expected an integer");
  return v.get<std::int64_t>();
}

double as_real(const json& v, const std::string& source, const std::string& key) {
  if (!v.is_number()) fail(source, key, "expected a number");
  return v.get<double>();
}

std::string as_string(const json& v, const std::string& source, const std::string& key) {
  if (!v.is_string()) fail(source, key, "expected a string");
  return v.get<std::string>();
}

const json& as_array(const json& v, const std::string& source, const std::string& key) {
  if (!v.is_array()) fail(source, key, "expected an array");
  return v;
}

std::vector<std::size_t> id_array(const json& v, const std::string& source, const std::string& key) {
  std::vector<std::size_t> out;
  const auto& arr = as_array(v, source, key);
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(as_count(arr[i], source, key + "[" + std::to_string(i) + "]"));
  }
  return out;
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& source,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* a : allowed) known = known || it.key() == a;
    if (!known) fail(source, where.empty() ? it.key() : where + "." + it.key(), "unknown key");
  }
}

DenseMatrix features_from_json(const json& v, std::size_t num_nodes, const std::string& source, const std::string& key) {
  const auto& rows = as_array(v, source, key);
  if (rows.size() != num_nodes) {
    fail(source, key, "has " + std::to_string(rows.size()) + " rows, expected num_nodes = " + std::to_string(num_nodes));
  }
  const std::size_t dim = num_nodes == 0 ? 0 : as_array(rows[0], source, key + "[0]").size();
  DenseMatrix m(num_nodes, dim);
  for (std::size_t r = 0; r < num_nodes; ++r) {
    const std::string row_key = key + "[" + std::to_string(r) + "]";
    const auto& row = as_array(rows[r], source, row_key);
    if (row.size() != dim) fail(source, row_key, "has " + std::to_string(row.size()) + " entries, expected " + std::to_string(dim));
    for (std::size_t c = 0; c < dim; ++c) m(r, c) = as_real(row[c], source, row_key);
  }
  return m;
}

std::vector<Edge> edges_from_json(const json& v, std::size_t num_nodes, const std::string& source, const std::string& key) {
  const auto& arr = as_array(v, source, key);
  std::vector<Edge> edges;
  edges.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string ek = key + "[" + std::to_string(i) + "]";
    const auto& pair = as_array(arr[i], source, ek);
    if (pair.size() != 2) fail(source, ek, "expected a [u, v] pair");
    const auto u = as_count(pair[0], source, ek);
    const auto w = as_count(pair[1], source, ek);
    if (u >= num_nodes || w >= num_nodes) fail(source, ek, "endpoint outside [0, num_nodes)");
    if (u == w) fail(source, ek, "self-loops are not allowed");
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(w));
  }
  return edges;
}

Split split_from_json(const json& v, const std::string& source) {
  if (!v.is_object()) fail(source, "splits", "expected an object");
  reject_unknown_keys(v, {"train", "val", "test"}, source, "splits");
  Split s;
  s.train = id_array(field(v, "train", source, "splits"), source, "splits.train");
  s.val = id_array(field(v, "val", source, "splits"), source, "splits.val");
  s.test = id_array(field(v, "test", source, "splits"), source, "splits.test");
  return s;
}

ordered_json split_to_json(const Split& s) {
  ordered_json out;
  out["train"] = s.train;
  out["val"] = s.val;
  out["test"] = s.test;
  return out;
}

ordered_json features_to_json(const DenseMatrix& m) {
  ordered_json rows = ordered_json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

ordered_json edges_to_json(const Graph& g) {
  ordered_json arr = ordered_json::array();
  for (auto [u, v] : undirected_edges(g)) arr.push_back({u, v});
  return arr;
}

void check_valid(const Task& task, const std::string& source) {
  if (auto violations = validate(task); !violations.empty()) throw FormatError(source + ": invalid task: " + violations.front());
}

json parse(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(source + ": malformed JSON: " + e.what());
  }
}

}  // namespace

ordered_json dataset_to_json(const Task& task) {
  ordered_json doc;
  if (const auto* node = std::get_if<NodeTask>(&task)) {
    doc["task"] = "node_classification";
    doc["num_nodes"] = node->graph.num_nodes;
    doc["num_classes"] = node->num_classes;
    doc["features"] = features_to_json(node->graph.features);
    doc["edges"] = edges_to_json(node->graph);
    doc["labels"] = node->graph.node_labels.value_or(std::vector<ClassId>(node->graph.num_nodes, -1));
    doc["splits"] = split_to_json(node->split);
  } else {
    const auto& gt = std::get<GraphTask>(task);
    doc["task"] = "graph_classification";
    doc["num_classes"] = gt.num_classes;
    ordered_json graphs = ordered_json::array();
    for (std::size_t i = 0; i < gt.graphs.size(); ++i) {
      ordered_json g;
      g["num_nodes"] = gt.graphs[i].num_nodes;
      g["features"] = features_to_json(gt.graphs[i].features);
      g["edges"] = edges_to_json(gt.graphs[i]);
      g["label"] = i < gt.graph_labels.size() ? gt.graph_labels[i] : -1;
      graphs.push_back(std::move(g));
    }
    doc["graphs"] = std::move(graphs);
    doc["splits"] = split_to_json(gt.split);
  }
  return doc;
}

Task dataset_from_json(const json& doc, const std::string& source) {
  if (!doc.is_object()) fail(source, "<root>", "expected an object");
  const std::string kind = as_string(field(doc, "task", source), source, "task");
  if (kind == "node_classification") {
    reject_unknown_keys(doc, {"task", "num_nodes", "num_classes", "features", "edges", "labels", "splits"}, source, "");
    const auto n = as_count(field(doc, "num_nodes", source), source, "num_nodes");
    NodeTask task;
    task.num_classes = static_cast<int>(as_int(field(doc, "num_classes", source), source, "num_classes"));
    DenseMatrix features = features_from_json(field(doc, "features", source), n, source, "features");
    auto edges = edges_from_json(field(doc, "edges", source), n, source, "edges");
    const auto& label_arr = as_array(field(doc, "labels", source), source, "labels");
    if (label_arr.size() != n) fail(source, "labels", "length " + std::to_string(label_arr.size()) + " != num_nodes");
    std::vector<ClassId> labels;
    for (std::size_t i = 0; i < n; ++i) {
      labels.push_back(static_cast<ClassId>(as_int(label_arr[i], source, "labels[" + std::to_string(i) + "]")));
    }
    task.split = split_from_json(field(doc, "splits", source), source);
    task.graph = make_graph(n, edges, std::move(features), std::move(labels));
    Task out = std::move(task);
    check_valid(out, source);
    return out;
  }
  if (kind == "graph_classification") {
    reject_unknown_keys(doc, {"task", "num_classes", "graphs", "splits"}, source, "");
    GraphTask task;
    task.num_classes = static_cast<int>(as_int(field(doc, "num_classes", source), source, "num_classes"));
    const auto& graphs = as_array(field(doc, "graphs", source), source, "graphs");
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      const std::string gk = "graphs[" + std::to_string(i) + "]";
      if (!graphs[i].is_object()) fail(source, gk, "expected an object");
      reject_unknown_keys(graphs[i], {"num_nodes", "features", "edges", "label"}, source, gk);
      const auto n = as_count(field(graphs[i], "num_nodes", source, gk), source, gk + ".num_nodes");
      DenseMatrix features = features_from_json(field(graphs[i], "features", source, gk), n, source, gk + ".features");
      auto edges = edges_from_json(field(graphs[i], "edges", source, gk), n, source, gk + ".edges");
      task.graph_labels.push_back(static_cast<ClassId>(as_int(field(graphs[i], "label", source, gk), source, gk + ".label")));
      task.graphs.push_back(make_graph(n, edges, std::move(features)));
    }
    task.split = split_from_json(field(doc, "splits", source), source);
    Task out = std::move(task);
    check_valid(out, source);
    return out;
  }
  fail(source, "task", "expected \"node_classification\" or \"graph_classification\", got \"" + kind + "\"");
}

ordered_json runmatrix_to_json(const RunMatrix& runs) {
  ordered_json doc;
  doc["model"] = runs.model_name;
  doc["dataset"] = runs.dataset_name;
  doc["num_classes"] = runs.num_classes;
  doc["n_runs"] = runs.n_runs();
  doc["prediction_ids"] = runs.prediction_ids;
  doc["val_accuracy"] = runs.val_accuracy;
  ordered_json rows = ordered_json::array();
  for (std::size_t r = 0; r < runs.n_runs(); ++r) {
    std::string row(runs.n_predictions(), '0');
    for (std::size_t i = 0; i < runs.n_predictions(); ++i) {
      if (runs.correct(r, i)) row[i] = '1';
    }
    rows.push_back(std::move(row));
  }
  doc["correct"] = std::move(rows);
  if (!runs.aborted_runs.empty()) doc["aborted_runs"] = runs.aborted_runs;
  return doc;
}

RunMatrix runmatrix_from_json(const json& doc, const std::string& source) {
  if (!doc.is_object()) fail(source, "<root>", "expected an object");
  reject_unknown_keys(doc, {"model", "dataset", "num_classes", "n_runs", "prediction_ids", "val_accuracy", "correct", "aborted_runs"},
                      source, "");
  const auto n_runs = as_count(field(doc, "n_runs", source), source, "n_runs");
  auto ids = id_array(field(doc, "prediction_ids", source), source, "prediction_ids");
  if (std::set<std::size_t>(ids.begin(), ids.end()).size() != ids.size()) fail(source, "prediction_ids", "ids must be unique");
  const auto& rows = as_array(field(doc, "correct", source), source, "correct");
  if (rows.size() != n_runs) fail(source, "correct", "has " + std::to_string(rows.size()) + " rows, n_runs = " + std::to_string(n_runs));

  RunMatrix runs(n_runs, ids.size());
  runs.model_name = as_string(field(doc, "model", source), source, "model");
  runs.dataset_name = as_string(field(doc, "dataset", source), source, "dataset");
  runs.num_classes = static_cast<int>(as_int(field(doc, "num_classes", source), source, "num_classes"));
  for (std::size_t r = 0; r < n_runs; ++r) {
    const std::string rk = "correct[" + std::to_string(r) + "]";
    const std::string row = as_string(rows[r], source, rk);
    if (row.size() != ids.size()) {
      fail(source, rk, "row " + std::to_string(r) + " has length " + std::to_string(row.size()) + ", expected " +
                           std::to_string(ids.size()));
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i] != '0' && row[i] != '1') fail(source, rk, "row " + std::to_string(r) + " contains a character other than '0'/'1'");
      runs.set_correct(r, i, row[i] == '1');
    }
  }
  const auto& acc = as_array(field(doc, "val_accuracy", source), source, "val_accuracy");
  if (acc.size() != n_runs) fail(source, "val_accuracy", "length " + std::to_string(acc.size()) + " != n_runs");
  for (std::size_t r = 0; r < n_runs; ++r) runs.val_accuracy.push_back(as_real(acc[r], source, "val_accuracy"));
  if (auto it = doc.find("aborted_runs"); it != doc.end()) {
    runs.aborted_runs = id_array(*it, source, "aborted_runs");
    for (auto r : runs.aborted_runs) {
      if (r >= n_runs) fail(source, "aborted_runs", "run index out of range");
    }
  }
  runs.prediction_ids = std::move(ids);
  return runs;
}

ordered_json solvable_to_json(const SolvableSet& set) {
  ordered_json doc;
  doc["dataset"] = set.dataset_name;
  doc["model"] = set.model_name;
  doc["alpha"] = set.alpha;
  doc["n_runs"] = set.n_runs;
  doc["num_classes"] = set.num_classes;
  doc["universe_size"] = set.universe_size;
  doc["critical_count"] = set.critical_count;
  doc["prediction_ids"] = set.prediction_ids;
  return doc;
}

SolvableSet solvable_from_json(const json& doc, const std::string& source) {
  if (!doc.is_object()) fail(source, "<root>", "expected an object");
  reject_unknown_keys(doc, {"dataset", "model", "alpha", "n_runs", "num_classes", "universe_size", "critical_count", "prediction_ids"},
                      source, "");
  SolvableSet set;
  set.dataset_name = as_string(field(doc, "dataset", source), source, "dataset");
  set.model_name = as_string(field(doc, "model", source), source, "model");
  set.alpha = as_real(field(doc, "alpha", source), source, "alpha");
  if (!(set.alpha > 0.0 && set.alpha < 1.0)) fail(source, "alpha", "must lie in (0, 1)");
  set.n_runs = as_count(field(doc, "n_runs", source), source, "n_runs");
  set.num_classes = static_cast<int>(as_int(field(doc, "num_classes", source), source, "num_classes"));
  set.universe_size = as_count(field(doc, "universe_size", source), source, "universe_size");
  set.critical_count = as_count(field(doc, "critical_count", source), source, "critical_count");
  set.prediction_ids = id_array(field(doc, "prediction_ids", source), source, "prediction_ids");
  if (!std::is_sorted(set.prediction_ids.begin(), set.prediction_ids.end()) ||
      std::adjacent_find(set.prediction_ids.begin(), set.prediction_ids.end()) != set.prediction_ids.end()) {
    fail(source, "prediction_ids", "must be strictly ascending");
  }
  if (set.prediction_ids.size() > set.universe_size) fail(source, "prediction_ids", "more ids than universe_size");
  return set;
}

namespace {

ordered_json ratio_json(const Ratio& r) { return r ? ordered_json(*r) : ordered_json(nullptr); }

Ratio ratio_from(const json& v, const std::string& source, const std::string& key) {
  if (v.is_null()) return std::nullopt;
  return as_real(v, source, key);
}

}  // namespace

ordered_json measure_to_json(const MeasureBundle& bundle) {
  const auto& r = bundle.report;
  ordered_json doc;
  doc["dataset"] = r.dataset_name;
  doc["features"] = r.features;
  doc["edges"] = r.edges;
  doc["e_fande"] = r.expected_fande;
  doc["fande"] = r.fande;
  doc["fore"] = r.fore;
  doc["gnn"] = r.gnn_best;
  doc["gnn_arch"] = r.gnn_best_arch;
  doc["edge_propagation"] = r.edge_propagation;
  doc["alpha"] = r.alpha;
  doc["n_runs"] = r.n_runs;
  doc["universe_size"] = r.universe_size;
  doc["counts"] = {{"features", r.features_count}, {"edges", r.edges_count}, {"fande", r.fande_count}, {"fore", r.fore_count}};
  ordered_json gap = ordered_json::array();
  for (const auto& [arch, t] : r.gap) {
    ordered_json g;
    g["architecture"] = arch;
    g["feature_retention"] = ratio_json(t.feature_retention);
    g["edge_retention"] = ratio_json(t.edge_retention);
    g["additional"] = ratio_json(t.additional);
    gap.push_back(std::move(g));
  }
  doc["gap"] = std::move(gap);
  ordered_json sets = ordered_json::array();
  for (const auto& [arch, set] : bundle.gnn_sets) sets.push_back({{"architecture", arch}, {"set", solvable_to_json(set)}});
  doc["gnn_sets"] = std::move(sets);
  return doc;
}

MeasureBundle measure_from_json(const json& doc, const std::string& source) {
  if (!doc.is_object()) fail(source, "<root>", "expected an object");
  MeasureBundle b;
  auto& r = b.report;
  r.dataset_name = as_string(field(doc, "dataset", source), source, "dataset");
  r.features = as_real(field(doc, "features", source), source, "features");
  r.edges = as_real(field(doc, "edges", source), source, "edges");
  r.expected_fande = as_real(field(doc, "e_fande", source), source, "e_fande");
  r.fande = as_real(field(doc, "fande", source), source, "fande");
  r.fore = as_real(field(doc, "fore", source), source, "fore");
  r.gnn_best = as_real(field(doc, "gnn", source), source, "gnn");
  r.gnn_best_arch = as_string(field(doc, "gnn_arch", source), source, "gnn_arch");
  r.edge_propagation = as_string(field(doc, "edge_propagation", source), source, "edge_propagation");
  r.alpha = as_real(field(doc, "alpha", source), source, "alpha");
  r.n_runs = as_count(field(doc, "n_runs", source), source, "n_runs");
  r.universe_size = as_count(field(doc, "universe_size", source), source, "universe_size");
  const auto& counts = field(doc, "counts", source);
  r.features_count = as_count(field(counts, "features", source, "counts"), source, "counts.features");
  r.edges_count = as_count(field(counts, "edges", source, "counts"), source, "counts.edges");
  r.fande_count = as_count(field(counts, "fande", source, "counts"), source, "counts.fande");
  r.fore_count = as_count(field(counts, "fore", source, "counts"), source, "counts.fore");
  const auto& gap = as_array(field(doc, "gap", source), source, "gap");
  for (std::size_t i = 0; i < gap.size(); ++i) {
    const std::string gk = "gap[" + std::to_string(i) + "]";
    GapTriple t{ratio_from(field(gap[i], "feature_retention", source, gk), source, gk + ".feature_retention"),
                ratio_from(field(gap[i], "edge_retention", source, gk), source, gk + ".edge_retention"),
                ratio_from(field(gap[i], "additional", source, gk), source, gk + ".additional")};
    r.gap.emplace_back(as_string(field(gap[i], "architecture", source, gk), source, gk + ".architecture"), t);
  }
  const auto& sets = as_array(field(doc, "gnn_sets", source), source, "gnn_sets");
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const std::string sk = "gnn_sets[" + std::to_string(i) + "]";
    b.gnn_sets.emplace_back(as_string(field(sets[i], "architecture", source, sk), source, sk + ".architecture"),
                            solvable_from_json(field(sets[i], "set", source, sk), source + " (" + sk + ")"));
  }
  return b;
}

std::string format_ratio(const Ratio& value) {
  if (!value) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", *value);
  return buf;
}

std::string table1_csv(const std::vector<MeasureReport>& rows) {
  std::string out = "dataset,features,edges,e_fande,fande,fore,gnn\n";
  for (const auto& r : rows) {
    out += r.dataset_name;
    for (double v : {r.features, r.edges, r.expected_fande, r.fande, r.fore, r.gnn_best}) out += "," + format_ratio(v);
    out += "\n";
  }
  return out;
}

std::string arch_by_dataset_csv(const ReportGrids& grids, const std::vector<std::vector<Ratio>>& cells) {
  std::string out = "architecture";
  for (const auto& d : grids.datasets) out += "," + d;
  out += "\n";
  for (std::size_t a = 0; a < grids.architectures.size(); ++a) {
    out += grids.architectures[a];
    for (std::size_t d = 0; d < grids.datasets.size(); ++d) out += "," + format_ratio(cells[a][d]);
    out += "\n";
  }
  return out;
}

std::string jaccard_csv(const ReportGrids& grids) {
  std::string out = "architecture";
  for (const auto& a : grids.architectures) out += "," + a;
  out += "\n";
  for (std::size_t a = 0; a < grids.architectures.size(); ++a) {
    out += grids.architectures[a];
    for (std::size_t b = 0; b < grids.architectures.size(); ++b) out += "," + format_ratio(grids.jaccard[a][b]);
    out += "\n";
  }
  return out;
}

std::string jaccard_by_dataset_csv(const ReportGrids& grids) {
  std::string out = "dataset,arch_a,arch_b,jaccard\n";
  for (const auto& row : grids.jaccard_by_dataset) {
    out += row.dataset + "," + row.arch_a + "," + row.arch_b + "," + format_ratio(row.jaccard) + "\n";
  }
  return out;
}

void emit_report(const std::vector<MeasureReport>& rows, const ReportGrids& grids, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  write_file_atomic(out_dir / "table1.csv", table1_csv(rows));
  write_file_atomic(out_dir / "feature_retention.csv", arch_by_dataset_csv(grids, grids.feature_retention));
  write_file_atomic(out_dir / "edge_retention.csv", arch_by_dataset_csv(grids, grids.edge_retention));
  write_file_atomic(out_dir / "additional.csv", arch_by_dataset_csv(grids, grids.additional));
  write_file_atomic(out_dir / "jaccard.csv", jaccard_csv(grids));
  write_file_atomic(out_dir / "jaccard_by_dataset.csv", jaccard_by_dataset_csv(grids));
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      fs::remove(tmp);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Task load_dataset(const fs::path& path) { return dataset_from_json(parse(read_file(path), path.string()), path.string()); }

void save_dataset(const Task& task, const fs::path& path) { write_file_atomic(path, dataset_to_json(task).dump() + "\n"); }

RunMatrix load_runmatrix(const fs::path& path) {
  return runmatrix_from_json(parse(read_file(path), path.string()), path.string());
}

void save_runmatrix(const RunMatrix& runs, const fs::path& path) {
  write_file_atomic(path, runmatrix_to_json(runs).dump(1) + "\n");
}

SolvableSet load_solvable(const fs::path& path) {
  return solvable_from_json(parse(read_file(path), path.string()), path.string());
}

void save_solvable(const SolvableSet& set, const fs::path& path) {
  write_file_atomic(path, solvable_to_json(set).dump(1) + "\n");
}

}  // namespace gnnanatomy
