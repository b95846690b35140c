// Command-line entry point: synth -> train -> analyze -> measure -> report.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gnnanatomy/io.hpp"
#include "gnnanatomy/measures.hpp"
#include "gnnanatomy/solvable.hpp"
#include "gnnanatomy/synth.hpp"
#include "gnnanatomy/training.hpp"

namespace fs = std::filesystem;
using namespace gnnanatomy;

namespace {

struct SynthArgs {
  std::string kind;
  std::string task = "node";
  std::size_t nodes = 600;
  std::size_t graphs = 200;
  std::size_t nodes_per_graph = 16;
  int classes = 2;
  std::size_t feat_dim = 8;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

struct TrainArgs {
  std::string dataset;
  std::string name;
  std::string model;
  std::string out;
  TrainConfig config;
  int layers = 3;
  std::size_t hidden = 0;
  std::string edge_input = "ones-column";
};

struct AnalyzeArgs {
  std::string runs_file;
  double alpha = kDefaultAlpha;
  std::string out;
};

struct MeasureArgs {
  std::string features;
  std::string edges;
  std::vector<std::string> gnns;
  std::string out_dir;
};

struct ReportArgs {
  std::vector<std::string> measure_dirs;
  std::string out;
};

void run_synth(const SynthArgs& args) {
  SynthSpec spec;
  spec.kind = parse_synth_kind(args.kind);
  spec.task = args.task == "graph" ? TaskKind::graph : TaskKind::node;
  spec.num_nodes = args.nodes;
  spec.num_graphs = args.graphs;
  spec.nodes_per_graph = args.nodes_per_graph;
  spec.num_classes = args.classes;
  spec.feat_dim = args.feat_dim;
  spec.noise_rate = args.noise;
  spec.seed = args.seed;
  check(spec);
  save_dataset(generate(spec), args.out);
}

void run_train(const TrainArgs& args) {
  check(args.config);
  const Task task = load_dataset(args.dataset);
  const PreparedTask prepared = prepare(task);
  const std::string dataset_name = args.name.empty() ? fs::path(args.dataset).stem().string() : args.name;

  ModelSpec spec;
  spec.num_layers = args.layers;
  if (args.hidden > 0) spec.hidden_width = args.hidden;
  spec.task_kind = prepared.kind;
  spec.edge_input = parse_edge_input(args.edge_input);

  RunMatrix runs;
  if (args.model == "edges") {
    EdgeSelection selection = select_edge_propagation(prepared, args.config, dataset_name, spec);
    for (auto [kind, mean] : selection.mean_val_accuracy) {
      std::fprintf(stderr, "edges: %-9s mean val accuracy %.4f\n", std::string(to_string(kind)).c_str(), mean);
    }
    std::fprintf(stderr, "edges: selected %s\n", std::string(to_string(selection.best_kind)).c_str());
    runs = std::move(selection.runs);
  } else if (args.model.starts_with("edges:")) {
    spec.kind = ModelKind::edges;
    spec.propagation = parse_model_kind(args.model.substr(6));
    runs = run_harness(spec, prepared, args.config, dataset_name);
  } else {
    spec.kind = parse_model_kind(args.model);
    runs = run_harness(spec, prepared, args.config, dataset_name);
  }
  for (auto r : runs.aborted_runs) std::fprintf(stderr, "warning: run %zu aborted (non-finite loss), recorded as all-incorrect\n", r);
  save_runmatrix(runs, args.out);
}

void run_analyze(const AnalyzeArgs& args) {
  const RunMatrix runs = load_runmatrix(args.runs_file);
  save_solvable(solvable_set(runs, args.alpha), args.out);
}

std::string architecture_label(const SolvableSet& set) {
  return set.model_name.empty() ? set.dataset_name : set.model_name;
}

void write_measure_dir(const std::vector<MeasureBundle>& bundles, const fs::path& out_dir, bool with_bundle) {
  std::vector<MeasureReport> rows;
  std::vector<std::vector<std::pair<std::string, SolvableSet>>> sets;
  for (const auto& b : bundles) {
    rows.push_back(b.report);
    sets.push_back(b.gnn_sets);
  }
  const ReportGrids grids = build_report_grids(rows, sets);
  emit_report(rows, grids, out_dir);
  if (with_bundle) write_file_atomic(out_dir / "measure.json", measure_to_json(bundles.front()).dump(1) + "\n");
  for (const auto& r : rows) {
    for (const auto& [arch, t] : r.gap) {
      if (!t.feature_retention || !t.edge_retention || !t.additional) {
        std::fprintf(stderr, "note: %s/%s has undefined GaP ratios (empty denominator); cells left blank\n",
                     r.dataset_name.c_str(), arch.c_str());
      }
    }
  }
}

void run_measure(const MeasureArgs& args) {
  const SolvableSet features = load_solvable(args.features);
  const SolvableSet edges = load_solvable(args.edges);
  MeasureBundle bundle;
  for (const auto& path : args.gnns) {
    SolvableSet set = load_solvable(path);
    const std::string arch = architecture_label(set);
    for (const auto& [existing, s] : bundle.gnn_sets) {
      if (existing == arch) throw std::invalid_argument("architecture '" + arch + "' given twice");
    }
    bundle.gnn_sets.emplace_back(arch, std::move(set));
  }
  bundle.report = measure(features, edges, bundle.gnn_sets);
  write_measure_dir({bundle}, args.out_dir, true);
}

void run_report(const ReportArgs& args) {
  std::vector<MeasureBundle> bundles;
  for (const auto& dir : args.measure_dirs) {
    const fs::path file = fs::path(dir) / "measure.json";
    const std::string source = file.string();
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_file(file));
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(source + ": malformed JSON: " + e.what());
    }
    bundles.push_back(measure_from_json(doc, source));
  }
  write_measure_dir(bundles, args.out, false);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature-only / edge-only / GNN solvable-set analysis for graph datasets"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  SynthArgs synth;
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic dataset with known solvability structure");
  cmd_synth->option_defaults()->always_capture_default();
  cmd_synth->add_option("--kind", synth.kind, "feature | structure | joint")->required()->check(CLI::IsMember({"feature", "structure", "joint"}));
  cmd_synth->add_option("--task", synth.task, "node | graph")->check(CLI::IsMember({"node", "graph"}));
  cmd_synth->add_option("--nodes", synth.nodes, "Node count (node tasks)");
  cmd_synth->add_option("--graphs", synth.graphs, "Graph count (graph tasks)");
  cmd_synth->add_option("--nodes-per-graph", synth.nodes_per_graph, "Nodes per graph (graph tasks)");
  cmd_synth->add_option("--classes", synth.classes, "Number of classes");
  cmd_synth->add_option("--feat-dim", synth.feat_dim, "Feature width");
  cmd_synth->add_option("--noise", synth.noise, "Label noise rate in [0, 0.5)");
  cmd_synth->add_option("--seed", synth.seed, "Generator seed");
  cmd_synth->add_option("--out", synth.out, "Output dataset file")->required();

  TrainArgs train;
  auto* cmd_train = app.add_subcommand("train", "Train one model many times and write its run matrix");
  cmd_train->option_defaults()->always_capture_default();
  cmd_train->set_config("--config", "", "key = value file overriding training defaults");
  cmd_train->add_option("--dataset", train.dataset, "Dataset file")->required()->check(CLI::ExistingFile);
  cmd_train->add_option("--model", train.model,
                        "features | edges | edges:<propagation> | gcn | gin-sum | gin-mean | gin-max | sage-mean")
      ->required();
  cmd_train->add_option("--out", train.out, "Output run-matrix file")->required();
  cmd_train->add_option("--name", train.name, "Dataset name recorded in outputs (default: dataset file stem)");
  cmd_train->add_option("--runs", train.config.n_runs, "Independent runs")->check(CLI::PositiveNumber);
  cmd_train->add_option("--seed-base", train.config.seed_base, "Run r uses seed seed-base + r");
  cmd_train->add_option("--max-epochs", train.config.max_epochs, "Epoch limit")->check(CLI::PositiveNumber);
  cmd_train->add_option("--patience", train.config.patience, "Early-stopping patience in epochs")->check(CLI::PositiveNumber);
  cmd_train->add_option("--lr", train.config.learning_rate, "Adam learning rate")->check(CLI::PositiveNumber);
  cmd_train->add_option("--beta1", train.config.adam_beta1, "Adam beta1");
  cmd_train->add_option("--beta2", train.config.adam_beta2, "Adam beta2");
  cmd_train->add_option("--eps", train.config.adam_eps, "Adam epsilon");
  cmd_train->add_option("--threads", train.config.threads, "Worker threads, 0 = all cores")->envname("GNNANATOMY_THREADS");
  cmd_train->add_option("--layers", train.layers, "Layers per model")->check(CLI::PositiveNumber);
  cmd_train->add_option("--hidden", train.hidden, "Hidden width, 0 = min(128, 2*max(in, out))");
  cmd_train->add_option("--edge-input", train.edge_input, "Edge-only input: ones-column | ones-matrix")
      ->check(CLI::IsMember({"ones-column", "ones-matrix"}));

  AnalyzeArgs analyze;
  auto* cmd_analyze = app.add_subcommand("analyze", "Binomial test per prediction: run matrix -> solvable set");
  cmd_analyze->option_defaults()->always_capture_default();
  cmd_analyze->add_option("--runs-file", analyze.runs_file, "Run-matrix file")->required()->check(CLI::ExistingFile);
  cmd_analyze->add_option("--alpha", analyze.alpha, "Significance level per prediction")->check(CLI::Range(0.0, 1.0));
  cmd_analyze->add_option("--out", analyze.out, "Output solvable-set file")->required();

  MeasureArgs measure_args;
  auto* cmd_measure = app.add_subcommand("measure", "ForE/FandE row, GaP triples and Jaccard grid for one dataset");
  cmd_measure->option_defaults()->always_capture_default();
  cmd_measure->add_option("--features", measure_args.features, "Feature-only solvable set")->required()->check(CLI::ExistingFile);
  cmd_measure->add_option("--edges", measure_args.edges, "Edge-only solvable set")->required()->check(CLI::ExistingFile);
  cmd_measure->add_option("--gnn", measure_args.gnns, "GNN solvable sets (one or more)")->required()->check(CLI::ExistingFile);
  cmd_measure->add_option("--out-dir", measure_args.out_dir, "Output directory")->required();

  ReportArgs report;
  auto* cmd_report = app.add_subcommand("report", "Aggregate measure directories into dataset tables and grids");
  cmd_report->option_defaults()->always_capture_default();
  cmd_report->add_option("--measure-dir", report.measure_dirs, "Directories written by `measure`")->required()->check(CLI::ExistingDirectory);
  cmd_report->add_option("--out", report.out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_synth) run_synth(synth);
    if (*cmd_train) run_train(train);
    if (*cmd_analyze) run_analyze(analyze);
    if (*cmd_measure) run_measure(measure_args);
    if (*cmd_report) run_report(report);
  } catch (const std::exception& e) {
    std::cerr << "gnnanatomy: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
