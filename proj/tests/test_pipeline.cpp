#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gnnx/error.hpp"
#include "gnnx/io.hpp"
#include "gnnx/pipeline.hpp"

using namespace gnnx;
namespace fs = std::filesystem;

namespace {

RunConfig small_config() {
    RunConfig c;
    c.ba_params.base_nodes = 30;
    c.ba_params.num_motifs = 6;
    c.ba_params.ba_attachment = 2;
    c.ba_params.noise_fraction = 0.05;
    c.train.epochs = 250;
    c.train.hidden_dim = 10;
    c.train.restarts = 1;
    c.explain.epochs = 50;
    c.eval.t_values = {2, 4};
    c.eval.reference_t = 2;
    c.eval.t_grid = {2, 4};
    c.seed = 7;
    c.threads = 2;
    return c;
}

std::string file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void remove_tree(const std::string& dir) { fs::remove_all(dir); }

}  // namespace

TEST_SUITE("cli_runner") {

TEST_CASE("small end-to-end run produces a complete report and artifacts") {
    const std::string dir = "/tmp/gnnx_pipe_small";
    remove_tree(dir);
    EvalReport report = run_pipeline(small_config(), dir);

    CHECK(report.cohort_size == 30);
    CHECK(report.train_accuracy > 0.5);
    REQUIRE(report.class_metrics.size() == 3);
    CHECK(report.class_metrics[0].cls == "top");
    CHECK(report.class_metrics[1].cls == "shoulder");
    CHECK(report.class_metrics[2].cls == "bottom");

    // a Table-3 row per class and threshold, flip-rate rows per threshold
    CHECK(report.recall_by_threshold.size() == 6);
    REQUIRE(report.flip_rates.size() == 2);
    CHECK(report.flip_rates[0].t == 2);
    CHECK(report.flip_rates[1].t == 4);
    CHECK((report.chosen_t == 2 || report.chosen_t == 4));
    CHECK_FALSE(report.baseline_entropy.empty());
    CHECK_FALSE(report.candidates.empty());
    CHECK(report.nodes.size() == 30);

    // recall at the larger threshold never drops below the smaller one
    for (const auto& cls : {"top", "shoulder", "bottom"}) {
        double at2 = -1.0, at4 = -1.0;
        for (const auto& row : report.recall_by_threshold)
            if (row.cls == cls) (row.t == 2 ? at2 : at4) = row.recall_raw.mean;
        CHECK(at4 >= at2);
    }

    for (const std::string name :
         {"config.json", "graph.txt", "graph.meta.json", "model.txt", "training.json",
          "report.json", "table1_baseline_entropy.csv", "table2_class_metrics.csv",
          "table3_recall_by_threshold.csv", "flip_rates.csv", "fig2_candidates.csv", "nodes.csv"})
        CHECK(fs::exists(dir + "/" + name));
    std::size_t mask_files = 0;
    for (const auto& entry : fs::directory_iterator(dir + "/masks")) {
        (void)entry;
        ++mask_files;
    }
    CHECK(mask_files == 30);
}

TEST_CASE("two identical runs produce byte-identical artifacts") {
    const std::string a = "/tmp/gnnx_pipe_det_a", b = "/tmp/gnnx_pipe_det_b";
    remove_tree(a);
    remove_tree(b);
    RunConfig config = small_config();
    run_pipeline(config, a);
    run_pipeline(config, b);

    std::vector<std::string> rel;
    for (const auto& entry : fs::recursive_directory_iterator(a))
        if (entry.is_regular_file()) rel.push_back(fs::relative(entry.path(), a).string());
    std::sort(rel.begin(), rel.end());
    REQUIRE_FALSE(rel.empty());
    for (const std::string& r : rel) {
        REQUIRE(fs::exists(b + "/" + r));
        CHECK_MESSAGE(file_bytes(a + "/" + r) == file_bytes(b + "/" + r), "differs: ", r);
    }
}

TEST_CASE("an empty cohort is reported with a warning instead of failing") {
    RunConfig config = small_config();
    config.ba_params.num_motifs = 0;
    config.train.epochs = 30;
    const std::string dir = "/tmp/gnnx_pipe_empty";
    remove_tree(dir);
    EvalReport report = run_pipeline(config, dir);
    CHECK(report.cohort_size == 0);
    CHECK_FALSE(report.warnings.empty());
    CHECK(report.class_metrics.empty());
}

TEST_CASE("motif-searched mode writes a loadable remedied ground truth") {
    RunConfig config = small_config();
    config.eval.gt_mode = GroundTruthMode::MotifSearched;
    const std::string dir = "/tmp/gnnx_pipe_searched";
    remove_tree(dir);
    EvalReport report = run_pipeline(config, dir);
    CHECK(report.cohort_size == 30);
    REQUIRE(fs::exists(dir + "/ground_truth.txt"));
    auto gt = load_ground_truth(dir + "/ground_truth.txt");
    CHECK(gt.size() == 30);
    Graph g = load_graph(dir + "/graph.txt");
    for (const auto& [node, edges] : gt) {
        CHECK(g.gt_explanations.count(node) == 1);
        CHECK(edges.is_subset_of(g.edges));
    }
}

TEST_CASE("tree-cycles runs carry a cycle row") {
    RunConfig config;
    config.dataset = DatasetKind::TreeCycles;
    config.tc_params.tree_levels = 4;
    config.tc_params.num_motifs = 4;
    config.tc_params.noise_fraction = 0.0;
    config.train.epochs = 200;
    config.train.hidden_dim = 10;
    config.train.restarts = 1;
    config.explain.epochs = 40;
    config.eval.t_values = {2, 6};
    config.eval.reference_t = 2;
    config.eval.t_grid = {2, 6};
    config.seed = 11;
    config.threads = 2;
    const std::string dir = "/tmp/gnnx_pipe_tc";
    remove_tree(dir);
    EvalReport report = run_pipeline(config, dir);
    CHECK(report.cohort_size == 24);
    REQUIRE(report.class_metrics.size() == 1);
    CHECK(report.class_metrics[0].cls == "cycle");
}

TEST_CASE("emit_report is a pure function of the report") {
    const std::string dir = "/tmp/gnnx_pipe_small";  // produced above
    REQUIRE(fs::exists(dir + "/report.json"));
    EvalReport tiny;
    tiny.dataset_name = "ba-shapes";
    tiny.seed = 1;
    tiny.chosen_t = 6;
    const std::string ea = "/tmp/gnnx_emit_a", eb = "/tmp/gnnx_emit_b";
    remove_tree(ea);
    remove_tree(eb);
    emit_report(tiny, "all", ea);
    emit_report(tiny, "all", eb);
    CHECK(file_bytes(ea + "/report.json") == file_bytes(eb + "/report.json"));
    CHECK(file_bytes(ea + "/table2_class_metrics.csv") ==
          file_bytes(eb + "/table2_class_metrics.csv"));
    CHECK_THROWS_AS(emit_report(tiny, "xml", ea), std::domain_error);
}

TEST_CASE("config round trip and validation") {
    RunConfig config = small_config();
    config.eval.gt_mode = GroundTruthMode::MotifSearched;
    const std::string path = "/tmp/gnnx_config_rt.json";
    save_run_config(config, path);
    RunConfig loaded = load_run_config(path);
    CHECK(loaded.ba_params.base_nodes == 30);
    CHECK(loaded.train.epochs == 250);
    CHECK(loaded.explain.epochs == 50);
    CHECK(loaded.eval.gt_mode == GroundTruthMode::MotifSearched);
    CHECK(loaded.seed == 7);

    const std::string again = "/tmp/gnnx_config_rt2.json";
    save_run_config(loaded, again);
    CHECK(file_bytes(path) == file_bytes(again));

    CHECK_THROWS_AS(load_run_config("/tmp/gnnx_missing_config.json"), IoError);

    RunConfig bad = small_config();
    bad.eval.hops = 2;
    CHECK_THROWS_AS(run_pipeline(bad, "/tmp/gnnx_pipe_bad"), StageError);
}

}  // TEST_SUITE
