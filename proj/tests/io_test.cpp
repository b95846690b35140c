#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "gnnanatomy/io.hpp"
#include "gnnanatomy/synth.hpp"

namespace gnnanatomy {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("gnnanatomy_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                                                 ::testing::UnitTest::GetInstance()->current_test_info()->name())) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

SolvableSet make_set(std::vector<std::size_t> ids, std::size_t universe, std::string model, std::string dataset = "d") {
  SolvableSet s;
  s.dataset_name = std::move(dataset);
  s.model_name = std::move(model);
  s.prediction_ids = std::move(ids);
  s.universe_size = universe;
  s.n_runs = 100;
  s.num_classes = 2;
  s.critical_count = 66;
  return s;
}

RunMatrix sample_runs() {
  RunMatrix m(3, 4);
  m.model_name = "edges:gin-sum";
  m.dataset_name = "toy";
  m.num_classes = 3;
  m.prediction_ids = {2, 5, 7, 11};
  m.val_accuracy = {0.5, 0.25, 0.125};
  m.set_correct(0, 1, true);
  m.set_correct(2, 3, true);
  m.aborted_runs = {1};
  return m;
}

TEST(DatasetFile, RoundTripAllSynthKinds) {
  TempDir dir;
  for (SynthKind kind : {SynthKind::feature, SynthKind::structure, SynthKind::joint}) {
    for (TaskKind task : {TaskKind::node, TaskKind::graph}) {
      SynthSpec spec;
      spec.kind = kind;
      spec.task = task;
      spec.num_nodes = 80;
      spec.num_graphs = 40;
      spec.nodes_per_graph = 6;
      spec.num_classes = 2;
      spec.feat_dim = 3;
      spec.noise_rate = 0.1;
      spec.seed = 5;
      const Task t = generate(spec);
      const fs::path file = dir / "d.json";
      save_dataset(t, file);
      EXPECT_EQ(load_dataset(file), t);
    }
  }
}

TEST(DatasetFile, EdgesStoredOnceAndSymmetrizedAtLoad) {
  const std::string doc = R"({"task":"node_classification","num_nodes":3,"num_classes":2,
    "features":[[1.0],[2.0],[3.0]],"edges":[[0,1],[2,1]],"labels":[0,1,0],
    "splits":{"train":[0],"val":[1],"test":[2]}})";
  const Task t = dataset_from_json(nlohmann::json::parse(doc));
  const auto& g = std::get<NodeTask>(t).graph;
  EXPECT_EQ(g.adjacency.degree(1), 2u);
  EXPECT_EQ(dataset_to_json(t)["edges"].size(), 2u);
}

TEST(DatasetFile, RejectsUnknownKeysAndSelfLoops) {
  const std::string base = R"("task":"node_classification","num_nodes":2,"num_classes":2,
    "features":[[1.0],[2.0]],"labels":[0,1],"splits":{"train":[0],"val":[],"test":[1]})";
  const std::string unknown = error_of([&] {
    dataset_from_json(nlohmann::json::parse("{" + base + R"(,"edges":[],"weights":[1]})"), "x.json");
  });
  EXPECT_NE(unknown.find("x.json"), std::string::npos);
  EXPECT_NE(unknown.find("weights"), std::string::npos);
  EXPECT_FALSE(error_of([&] { dataset_from_json(nlohmann::json::parse("{" + base + R"(,"edges":[[1,1]]})")); }).empty());
}

TEST(DatasetFile, DimensionMismatchRejectedAtLoad) {
  const std::string doc = R"({"task":"node_classification","num_nodes":3,"num_classes":2,
    "features":[[1.0],[2.0]],"edges":[],"labels":[0,1,0],"splits":{"train":[0],"val":[1],"test":[2]}})";
  EXPECT_THROW(dataset_from_json(nlohmann::json::parse(doc)), FormatError);
}

TEST(DatasetFile, MalformedJsonNamesTheFile) {
  TempDir dir;
  const fs::path file = dir / "broken.json";
  std::ofstream(file) << "{\"task\": ";
  EXPECT_NE(error_of([&] { load_dataset(file); }).find("broken.json"), std::string::npos);
}

TEST(RunMatrixFile, RoundTrip) {
  TempDir dir;
  const RunMatrix m = sample_runs();
  save_runmatrix(m, dir / "r.json");
  EXPECT_EQ(load_runmatrix(dir / "r.json"), m);
  const auto doc = runmatrix_to_json(m);
  EXPECT_EQ(doc["correct"][0], "0100");
  EXPECT_EQ(doc["n_runs"], 3);
}

TEST(RunMatrixFile, WrongRowLengthNamesRow) {
  auto doc = nlohmann::json::parse(runmatrix_to_json(sample_runs()).dump());
  doc["correct"][2] = "011";
  const std::string msg = error_of([&] { runmatrix_from_json(doc, "runs.json"); });
  EXPECT_NE(msg.find("runs.json"), std::string::npos);
  EXPECT_NE(msg.find("row 2"), std::string::npos);
}

TEST(RunMatrixFile, RejectsBadCharactersAndCounts) {
  auto doc = nlohmann::json::parse(runmatrix_to_json(sample_runs()).dump());
  doc["correct"][0] = "01x0";
  EXPECT_THROW(runmatrix_from_json(doc), FormatError);
  doc = nlohmann::json::parse(runmatrix_to_json(sample_runs()).dump());
  doc["n_runs"] = 4;
  EXPECT_THROW(runmatrix_from_json(doc), FormatError);
}

TEST(SolvableFile, RoundTrip) {
  TempDir dir;
  const SolvableSet s = make_set({1, 4, 9}, 12, "gcn");
  save_solvable(s, dir / "s.json");
  EXPECT_EQ(load_solvable(dir / "s.json"), s);
}

TEST(MeasureFile, RoundTrip) {
  MeasureBundle b;
  b.gnn_sets = {{"gcn", make_set({0, 1}, 4, "gcn")}, {"sage-mean", make_set({3}, 4, "sage-mean")}};
  b.report = measure(make_set({0}, 4, "features"), make_set({}, 4, "edges:gcn"), b.gnn_sets);
  const MeasureBundle back = measure_from_json(nlohmann::json::parse(measure_to_json(b).dump()));
  EXPECT_EQ(measure_to_json(back).dump(), measure_to_json(b).dump());
  EXPECT_FALSE(back.report.gap[0].second.edge_retention.has_value());
}

TEST(Csv, RatioFormatting) {
  EXPECT_EQ(format_ratio(0.74), "0.740");
  EXPECT_EQ(format_ratio(1.0), "1.000");
  EXPECT_EQ(format_ratio(std::nullopt), "");
}

TEST(Csv, TableRowForCoraLikeCounts) {
  std::vector<std::size_t> f, e;
  for (std::size_t i = 0; i < 586; ++i) f.push_back(i);
  for (std::size_t i = 394; i < 740; ++i) e.push_back(i);
  const MeasureReport r = measure(make_set(f, 1000, "features", "cora"), make_set(e, 1000, "edges:gcn", "cora"),
                                  {{"gcn", make_set(f, 1000, "gcn", "cora")}});
  EXPECT_EQ(table1_csv({r}), "dataset,features,edges,e_fande,fande,fore,gnn\ncora,0.586,0.346,0.203,0.192,0.740,0.586\n");
}

TEST(Report, EmitsArchitectureGrids) {
  TempDir dir;
  std::vector<std::pair<std::string, SolvableSet>> g1{{"gcn", make_set({0, 1}, 4, "gcn", "a")},
                                                      {"gin-sum", make_set({2}, 4, "gin-sum", "a")}};
  std::vector<std::pair<std::string, SolvableSet>> g2{{"gcn", make_set({0}, 2, "gcn", "b")},
                                                      {"gin-sum", make_set({0}, 2, "gin-sum", "b")}};
  const MeasureReport r1 = measure(make_set({0}, 4, "features", "a"), make_set({1}, 4, "edges:gcn", "a"), g1);
  const MeasureReport r2 = measure(make_set({}, 2, "features", "b"), make_set({1}, 2, "edges:gcn", "b"), g2);
  const ReportGrids grids = build_report_grids({r1, r2}, {g1, g2});
  emit_report({r1, r2}, grids, dir.path());
  for (const char* name : {"table1.csv", "feature_retention.csv", "edge_retention.csv", "additional.csv", "jaccard.csv",
                           "jaccard_by_dataset.csv"}) {
    EXPECT_TRUE(fs::exists(dir / name)) << name;
  }
  EXPECT_EQ(read_file(dir / "feature_retention.csv"), "architecture,a,b\ngcn,1.000,\ngin-sum,0.000,\n");
  EXPECT_EQ(read_file(dir / "jaccard.csv"), "architecture,gcn,gin-sum\ngcn,1.000,0.250\ngin-sum,0.250,1.000\n");
  const std::string first = read_file(dir / "table1.csv");
  emit_report({r1, r2}, grids, dir.path());
  EXPECT_EQ(read_file(dir / "table1.csv"), first);
}

TEST(AtomicWrite, LeavesNoTemporaryFiles) {
  TempDir dir;
  write_file_atomic(dir / "out.txt", "hello\n");
  write_file_atomic(dir / "out.txt", "again\n");
  EXPECT_EQ(read_file(dir / "out.txt"), "again\n");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path())) ++entries;
  EXPECT_EQ(entries, 1u);
}

}  // namespace
}  // namespace gnnanatomy
