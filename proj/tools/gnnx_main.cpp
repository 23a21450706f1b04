// gnnx command line: generate / train / explain / ground-truth / threshold /
// evaluate / run. Every subcommand exits 0 on success and nonzero with a
// stage-tagged message on stderr otherwise.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gnnx/error.hpp"
#include "gnnx/explainer.hpp"
#include "gnnx/io.hpp"
#include "gnnx/motif_search.hpp"
#include "gnnx/parallel.hpp"
#include "gnnx/pipeline.hpp"
#include "gnnx/rng.hpp"
#include "gnnx/threshold.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

int fail(const std::string& stage, const std::string& message) {
    std::cerr << "[" << stage << "] error: " << message << "\n";
    return 1;
}

std::vector<int> parse_node_list(const std::string& spec, const gnnx::Graph& graph) {
    std::vector<int> nodes;
    if (spec == "all") {
        for (const auto& [node, gt] : graph.gt_explanations) nodes.push_back(node);
        return nodes;
    }
    std::size_t start = 0;
    while (start < spec.size()) {
        std::size_t comma = spec.find(',', start);
        if (comma == std::string::npos) comma = spec.size();
        nodes.push_back(std::stoi(spec.substr(start, comma - start)));
        start = comma + 1;
    }
    return nodes;
}

gnnx::RunConfig config_from_file_or_default(const std::string& config_path) {
    if (config_path.empty()) return gnnx::RunConfig{};
    return gnnx::load_run_config(config_path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gnnx: synthetic-benchmark pipeline for evaluating perturbation-based GNN explainers"};
    app.require_subcommand(1);

    // ---- generate ----------------------------------------------------------
    auto* gen = app.add_subcommand("generate", "Generate a synthetic benchmark graph");
    std::string gen_dataset = "ba-shapes", gen_out;
    std::uint64_t gen_seed = 0;
    gnnx::BaShapesParams ba;
    gnnx::TreeCyclesParams tc;
    gen->add_option("--dataset", gen_dataset, "ba-shapes or tree-cycles")
        ->check(CLI::IsMember({"ba-shapes", "tree-cycles"}));
    gen->add_option("--seed", gen_seed, "generation seed");
    gen->add_option("--out", gen_out, "output graph path")->required();
    gen->add_option("--base-nodes", ba.base_nodes, "BA-Shapes base graph size");
    gen->add_option("--num-motifs", ba.num_motifs, "number of motifs");
    gen->add_option("--ba-attachment", ba.ba_attachment, "BA attachment parameter m");
    gen->add_option("--noise-fraction", ba.noise_fraction, "noise edges as a fraction of N");
    gen->add_option("--feature-dim", ba.feature_dim, "node feature width");
    gen->add_option("--tree-levels", tc.tree_levels, "Tree-Cycles levels below the root");
    gen->add_option("--cycle-size", tc.cycle_size, "cycle motif size");

    // ---- train -------------------------------------------------------------
    auto* tr = app.add_subcommand("train", "Train the 3-layer GCN on a graph file");
    std::string tr_graph, tr_out;
    gnnx::TrainConfig train_config;
    tr->add_option("--graph", tr_graph, "input graph path")->required();
    tr->add_option("--out", tr_out, "output model path")->required();
    tr->add_option("--seed", train_config.seed, "training seed");
    tr->add_option("--epochs", train_config.epochs, "training epochs");
    tr->add_option("--hidden-dim", train_config.hidden_dim, "hidden width");
    tr->add_option("--learning-rate", train_config.learning_rate, "learning rate");
    tr->add_option("--weight-decay", train_config.weight_decay, "L2 coefficient");
    std::string tr_optimizer = "adam";
    tr->add_option("--optimizer", tr_optimizer, "adam or gd")
        ->check(CLI::IsMember({"adam", "gd"}));
    tr->add_option("--momentum", train_config.momentum, "heavy-ball momentum (gd only)");
    tr->add_option("--restarts", train_config.restarts, "seeded restarts, best run kept");
    tr->add_option("--train-fraction", train_config.train_fraction, "stratified train fraction");

    // ---- explain -----------------------------------------------------------
    auto* ex = app.add_subcommand("explain", "Optimize soft edge masks for target nodes");
    std::string ex_graph, ex_model, ex_nodes = "all", ex_out;
    gnnx::ExplainConfig explain_config;
    int ex_threads = 0;
    ex->add_option("--graph", ex_graph)->required();
    ex->add_option("--model", ex_model)->required();
    ex->add_option("--nodes", ex_nodes, "'all' (every motif node) or a comma-separated id list");
    ex->add_option("--out", ex_out, "output directory for mask files")->required();
    ex->add_option("--seed", explain_config.seed, "explanation seed");
    ex->add_option("--epochs", explain_config.epochs, "mask optimization epochs");
    ex->add_option("--learning-rate", explain_config.learning_rate);
    ex->add_option("--size-coeff", explain_config.size_coeff, "mask size regularizer");
    ex->add_option("--entropy-coeff", explain_config.entropy_coeff, "mask entropy regularizer");
    ex->add_option("--threads", ex_threads, "worker threads (0 = hardware)");

    // ---- ground-truth -------------------------------------------------------
    auto* gt = app.add_subcommand("ground-truth", "Motif-search remedied ground truth");
    std::string gt_graph, gt_model, gt_mode = "named", gt_out;
    int gt_max_edges = 6;
    int gt_threads = 0;
    gt->add_option("--graph", gt_graph)->required();
    gt->add_option("--model", gt_model)->required();
    gt->add_option("--mode", gt_mode, "named or enumerate")
        ->check(CLI::IsMember({"named", "enumerate"}));
    gt->add_option("--max-edges", gt_max_edges, "candidate size cap for enumerate mode");
    gt->add_option("--out", gt_out, "output ground-truth path")->required();
    gt->add_option("--threads", gt_threads, "worker threads (0 = hardware)");

    // ---- threshold -----------------------------------------------------------
    auto* th = app.add_subcommand("threshold", "Apply top-T thresholds, flips and repair");
    std::string th_graph, th_model, th_masks, th_out, th_grid, th_repair = "on";
    int th_t = -1;
    th->add_option("--graph", th_graph)->required();
    th->add_option("--model", th_model)->required();
    th->add_option("--masks", th_masks, "directory of mask files")->required();
    th->add_option("--T", th_t, "edge-count threshold");
    th->add_option("--grid", th_grid, "comma-separated grid; runs the leak-free grid search");
    th->add_option("--repair", th_repair, "on or off")->check(CLI::IsMember({"on", "off"}));
    th->add_option("--out", th_out, "output path (JSON)")->required();
    double th_gamma = 0.25;
    th->add_option("--size-penalty", th_gamma, "grid-search size penalty");

    // ---- evaluate -------------------------------------------------------------
    auto* ev = app.add_subcommand("evaluate", "Metric tables from persisted artifacts");
    std::string ev_graph, ev_model, ev_masks, ev_gt, ev_out;
    std::vector<int> ev_t_values{6, 20};
    int ev_ref_t = 6;
    ev->add_option("--graph", ev_graph)->required();
    ev->add_option("--model", ev_model)->required();
    ev->add_option("--masks", ev_masks, "directory of mask files")->required();
    ev->add_option("--gt", ev_gt, "optional ground-truth file replacing the annotated one");
    ev->add_option("--T", ev_t_values, "thresholds for the recall table");
    ev->add_option("--reference-T", ev_ref_t, "threshold behind the class-metrics recall column");
    ev->add_option("--out", ev_out, "output directory")->required();

    // ---- run ---------------------------------------------------------------
    auto* run = app.add_subcommand("run", "Full pipeline from a config file");
    std::string run_config_path, run_out;
    std::uint64_t run_seed = 0;
    int run_threads = 0;
    run->add_option("--config", run_config_path, "JSON run config (defaults when omitted)");
    run->add_option("--out", run_out, "output directory")->required();
    auto* seed_opt = run->add_option("--seed", run_seed, "override the config seed");
    auto* threads_opt = run->add_option("--threads", run_threads, "worker threads (0 = hardware)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            gnnx::GenerationStats stats;
            gnnx::RunConfig meta_config;
            gnnx::Graph graph = [&] {
                if (gen_dataset == "ba-shapes") {
                    ba.seed = gen_seed;
                    meta_config.dataset = gnnx::DatasetKind::BaShapes;
                    meta_config.ba_params = ba;
                    return gnnx::generate_ba_shapes(ba, &stats);
                }
                tc.num_motifs = ba.num_motifs;
                tc.noise_fraction = ba.noise_fraction;
                tc.feature_dim = ba.feature_dim;
                tc.seed = gen_seed;
                meta_config.dataset = gnnx::DatasetKind::TreeCycles;
                meta_config.tc_params = tc;
                return gnnx::generate_tree_cycles(tc, &stats);
            }();
            gnnx::save_graph(graph, gen_out);

            ordered_json meta;
            meta["dataset"] = gen_dataset;
            meta["seed"] = gen_seed;
            meta["num_nodes"] = graph.num_nodes;
            meta["num_edges"] = graph.edges.size();
            meta["edge_counts"] =
                ordered_json{{"base_edges", stats.base_edges},
                             {"motif_edges", stats.motif_edges},
                             {"attachment_edges", stats.attachment_edges},
                             {"noise_edges", stats.noise_edges}};
            std::map<int, int> hist;
            for (int label : graph.labels) ++hist[label];
            ordered_json labels;
            for (const auto& [label, count] : hist) labels[std::to_string(label)] = count;
            meta["label_counts"] = labels;
            meta["motif_nodes"] = graph.gt_explanations.size();
            std::ofstream meta_out(gen_out + ".meta.json");
            meta_out << meta.dump(2) << "\n";
            std::cout << "wrote " << gen_out << " (" << graph.num_nodes << " nodes, "
                      << graph.edges.size() << " edges)\n";
            return 0;
        }

        if (*tr) {
            const gnnx::Graph graph = gnnx::load_graph(tr_graph);
            train_config.optimizer = tr_optimizer == "adam" ? gnnx::Optimizer::Adam
                                                            : gnnx::Optimizer::GradientDescent;
            const gnnx::TrainResult result = gnnx::train(graph, train_config);
            gnnx::save_model(result.model, tr_out);
            std::cout << "train accuracy " << result.train_accuracy << ", test accuracy "
                      << result.test_accuracy << "\n";
            return 0;
        }

        if (*ex) {
            const gnnx::Graph graph = gnnx::load_graph(ex_graph);
            const gnnx::GcnModel model = gnnx::load_model(ex_model);
            const std::vector<int> nodes = parse_node_list(ex_nodes, graph);
            if (nodes.empty()) return fail("explain", "no target nodes selected");
            fs::create_directories(ex_out);
            std::vector<gnnx::EdgeMask> masks(nodes.size());
            gnnx::parallel_for(nodes.size(), ex_threads, [&](std::size_t i) {
                masks[i] = gnnx::explain(model, graph, nodes[i], explain_config);
            });
            for (const auto& mask : masks)
                gnnx::save_mask(mask, ex_out + "/mask_" + std::to_string(mask.target) + ".txt");
            std::cout << "wrote " << masks.size() << " masks to " << ex_out << "\n";
            return 0;
        }

        if (*gt) {
            const gnnx::Graph graph = gnnx::load_graph(gt_graph);
            const gnnx::GcnModel model = gnnx::load_model(gt_model);
            std::vector<int> nodes;
            for (const auto& [node, edges] : graph.gt_explanations) nodes.push_back(node);
            if (nodes.empty()) return fail("ground-truth", "graph has no motif nodes");
            std::vector<gnnx::EdgeSet> selected(nodes.size());
            gnnx::parallel_for(nodes.size(), gt_threads, [&](std::size_t i) {
                std::vector<gnnx::MotifCandidate> candidates = gnnx::named_candidates(graph, nodes[i]);
                if (gt_mode == "enumerate") {
                    auto enumerated = gnnx::enumerate_candidates(graph, nodes[i], gt_max_edges);
                    candidates.insert(candidates.end(), enumerated.begin(), enumerated.end());
                }
                selected[i] =
                    gnnx::select_ground_truth(model, graph, nodes[i], candidates).candidate.edges;
            });
            std::map<int, gnnx::EdgeSet> gt_map;
            for (std::size_t i = 0; i < nodes.size(); ++i) gt_map[nodes[i]] = selected[i];
            gnnx::save_ground_truth(gt_map, gt_out);
            std::cout << "wrote remedied ground truth for " << nodes.size() << " nodes\n";
            return 0;
        }

        if (*th || *ev) {
            const std::string stage_name = *th ? "threshold" : "evaluate";
            const gnnx::Graph graph = gnnx::load_graph(*th ? th_graph : ev_graph);
            const gnnx::GcnModel model = gnnx::load_model(*th ? th_model : ev_model);
            std::vector<gnnx::EdgeMask> masks;
            const std::string mask_dir = *th ? th_masks : ev_masks;
            std::vector<fs::path> files;
            for (const auto& entry : fs::directory_iterator(mask_dir))
                if (entry.path().extension() == ".txt") files.push_back(entry.path());
            std::sort(files.begin(), files.end());
            for (const auto& f : files) masks.push_back(gnnx::load_mask(f.string()));
            if (masks.empty()) return fail(stage_name, "no mask files in " + mask_dir);

            if (*th) {
                ordered_json out;
                if (!th_grid.empty()) {
                    std::vector<int> grid;
                    std::size_t start = 0;
                    while (start < th_grid.size()) {
                        std::size_t comma = th_grid.find(',', start);
                        if (comma == std::string::npos) comma = th_grid.size();
                        grid.push_back(std::stoi(th_grid.substr(start, comma - start)));
                        start = comma + 1;
                    }
                    const int best =
                        gnnx::grid_search_threshold(model, graph, masks, grid, th_gamma);
                    out["grid"] = grid;
                    out["size_penalty"] = th_gamma;
                    out["chosen_t"] = best;
                    for (int t : grid)
                        out["flip_rate"][std::to_string(t)] =
                            gnnx::flip_rate(model, graph, masks, t);
                } else {
                    if (th_t < 0) return fail("threshold", "provide --T or --grid");
                    ordered_json records = ordered_json::array();
                    int flips = 0;
                    for (const auto& mask : masks) {
                        ordered_json rec;
                        rec["node"] = mask.target;
                        const gnnx::EdgeSet raw = gnnx::apply_threshold(mask, th_t);
                        const bool flip =
                            gnnx::detect_label_flip(model, graph, mask.target, raw);
                        flips += flip ? 1 : 0;
                        rec["flipped"] = flip;
                        rec["raw_edges"] = raw.size();
                        if (th_repair == "on") {
                            const gnnx::FinalExplanation fixed =
                                gnnx::repair_explanation(model, graph, mask, th_t);
                            rec["repair_steps"] = fixed.repair_steps;
                            rec["final_edges"] = fixed.final_edges.size();
                        }
                        records.push_back(rec);
                    }
                    out["threshold"] = th_t;
                    out["repair"] = th_repair;
                    out["flip_rate"] =
                        static_cast<double>(flips) / static_cast<double>(masks.size());
                    out["nodes"] = records;
                }
                std::ofstream file(th_out);
                if (!file) return fail("threshold", "cannot write " + th_out);
                file << out.dump(2) << "\n";
                std::cout << "wrote " << th_out << "\n";
                return 0;
            }

            // evaluate: metric tables straight from artifacts
            gnnx::Graph eval_graph = graph;
            if (!ev_gt.empty()) {
                auto gt_map = gnnx::load_ground_truth(ev_gt);
                eval_graph = gnnx::Graph::create(graph.num_nodes, graph.edges, graph.features,
                                                 graph.labels, graph.roles, std::move(gt_map));
            }
            gnnx::EvalReport report;
            report.dataset_name = "artifacts";
            report.cohort_size = masks.size();
            report.baseline_entropy = gnnx::baseline_entropy_table(model, eval_graph);

            std::map<std::string, std::vector<double>> rocs, prs;
            std::map<std::string, std::map<int, std::vector<double>>> recalls, precisions;
            for (const auto& mask : masks) {
                const std::string cls =
                    eval_graph.has_roles() ? eval_graph.roles[mask.target] : "motif";
                auto gt_it = eval_graph.gt_explanations.find(mask.target);
                if (gt_it == eval_graph.gt_explanations.end()) continue;
                const gnnx::EdgeSet& gt_edges = gt_it->second;
                gnnx::ScoredEdges scored;
                std::size_t pos = 0;
                for (const gnnx::Edge& e : mask.field) {
                    const bool in_gt = gt_edges.contains(e);
                    pos += in_gt ? 1 : 0;
                    scored.push_back({mask.scores.at(e), in_gt});
                }
                if (pos > 0 && pos < scored.size()) {
                    rocs[cls].push_back(gnnx::roc_auc(scored));
                    prs[cls].push_back(gnnx::pr_auc(scored));
                }
                for (int t : ev_t_values) {
                    const gnnx::EdgeSet raw = gnnx::apply_threshold(mask, t);
                    if (!gt_edges.empty()) {
                        const gnnx::RecallPrecision rp = gnnx::recall_precision(raw, gt_edges);
                        recalls[cls][t].push_back(rp.recall);
                        precisions[cls][t].push_back(rp.precision);
                    }
                }
            }
            for (const auto& [cls, values] : rocs) {
                gnnx::ClassMetricsRow row;
                row.cls = cls;
                row.roc_auc = gnnx::aggregate(values);
                row.pr_auc = gnnx::aggregate(prs[cls]);
                auto ref_it = recalls[cls].find(ev_ref_t);
                if (ref_it != recalls[cls].end() && !ref_it->second.empty()) {
                    row.recall = gnnx::aggregate(ref_it->second);
                    row.precision = gnnx::aggregate(precisions[cls][ev_ref_t]);
                }
                report.class_metrics.push_back(row);
            }
            for (const auto& [cls, per_t] : recalls)
                for (const auto& [t, values] : per_t) {
                    gnnx::RecallAtThresholdRow row;
                    row.cls = cls;
                    row.t = t;
                    row.recall_raw = gnnx::aggregate(values);
                    row.precision_raw = gnnx::aggregate(precisions[cls][t]);
                    report.recall_by_threshold.push_back(row);
                }
            for (int t : ev_t_values) {
                gnnx::FlipRateRow row;
                row.t = t;
                row.rate_overall = gnnx::flip_rate(model, eval_graph, masks, t);
                report.flip_rates.push_back(row);
            }
            gnnx::emit_report(report, "all", ev_out);
            std::cout << "wrote evaluation tables to " << ev_out << "\n";
            return 0;
        }

        if (*run) {
            gnnx::RunConfig config = config_from_file_or_default(run_config_path);
            if (*seed_opt) config.seed = run_seed;
            if (*threads_opt) config.threads = run_threads;
            const gnnx::EvalReport report = gnnx::run_pipeline(config, run_out);
            std::cout << "pipeline finished: train accuracy " << report.train_accuracy
                      << ", cohort " << report.cohort_size << ", chosen T " << report.chosen_t
                      << "\n";
            for (const auto& w : report.warnings) std::cout << "warning: " << w << "\n";
            return 0;
        }
    } catch (const gnnx::StageError& e) {
        return fail(e.stage, e.what());
    } catch (const gnnx::IoError& e) {
        return fail("io", e.what());
    } catch (const std::exception& e) {
        return fail(app.get_subcommands().empty() ? "cli" : app.get_subcommands()[0]->get_name(),
                    e.what());
    }
    return 0;
}
