#include "gnnx/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "gnnx/error.hpp"
#include "gnnx/io.hpp"
#include "gnnx/parallel.hpp"
#include "gnnx/rng.hpp"
#include "gnnx/threshold.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace gnnx {

namespace {

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

ordered_json summary_json(const MetricSummary& s) {
    return ordered_json{{"mean", s.mean}, {"sd", s.sd}, {"count", s.count}};
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

std::string csv_bool(bool b) { return b ? "1" : "0"; }

}  // namespace

std::string dataset_name(DatasetKind kind) {
    return kind == DatasetKind::BaShapes ? "ba-shapes" : "tree-cycles";
}

namespace {

ordered_json ba_params_json(const BaShapesParams& p) {
    return ordered_json{{"base_nodes", p.base_nodes},     {"num_motifs", p.num_motifs},
                        {"ba_attachment", p.ba_attachment}, {"noise_fraction", p.noise_fraction},
                        {"feature_dim", p.feature_dim},    {"seed", p.seed}};
}

ordered_json tc_params_json(const TreeCyclesParams& p) {
    return ordered_json{{"tree_levels", p.tree_levels},   {"num_motifs", p.num_motifs},
                        {"cycle_size", p.cycle_size},     {"noise_fraction", p.noise_fraction},
                        {"feature_dim", p.feature_dim},   {"seed", p.seed}};
}

void ba_params_from_json(const nlohmann::json& j, BaShapesParams& p) {
    p.base_nodes = j.value("base_nodes", p.base_nodes);
    p.num_motifs = j.value("num_motifs", p.num_motifs);
    p.ba_attachment = j.value("ba_attachment", p.ba_attachment);
    p.noise_fraction = j.value("noise_fraction", p.noise_fraction);
    p.feature_dim = j.value("feature_dim", p.feature_dim);
    p.seed = j.value("seed", p.seed);
}

void tc_params_from_json(const nlohmann::json& j, TreeCyclesParams& p) {
    p.tree_levels = j.value("tree_levels", p.tree_levels);
    p.num_motifs = j.value("num_motifs", p.num_motifs);
    p.cycle_size = j.value("cycle_size", p.cycle_size);
    p.noise_fraction = j.value("noise_fraction", p.noise_fraction);
    p.feature_dim = j.value("feature_dim", p.feature_dim);
    p.seed = j.value("seed", p.seed);
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("config parse error in " + path + ": " + e.what());
    }

    RunConfig c;
    const std::string ds = j.value("dataset", std::string("ba-shapes"));
    if (ds == "ba-shapes") c.dataset = DatasetKind::BaShapes;
    else if (ds == "tree-cycles") c.dataset = DatasetKind::TreeCycles;
    else throw IoError("config: unknown dataset '" + ds + "'");

    if (j.contains("dataset_params")) {
        ba_params_from_json(j["dataset_params"], c.ba_params);
        tc_params_from_json(j["dataset_params"], c.tc_params);
    }
    if (j.contains("train")) {
        const auto& t = j["train"];
        c.train.hidden_dim = t.value("hidden_dim", c.train.hidden_dim);
        c.train.epochs = t.value("epochs", c.train.epochs);
        c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
        c.train.weight_decay = t.value("weight_decay", c.train.weight_decay);
        const std::string opt = t.value("optimizer", std::string("adam"));
        if (opt == "adam") c.train.optimizer = Optimizer::Adam;
        else if (opt == "gd") c.train.optimizer = Optimizer::GradientDescent;
        else throw IoError("config: unknown optimizer '" + opt + "'");
        c.train.momentum = t.value("momentum", c.train.momentum);
        c.train.restarts = t.value("restarts", c.train.restarts);
        c.train.train_fraction = t.value("train_fraction", c.train.train_fraction);
        c.train.seed = t.value("seed", c.train.seed);
    }
    if (j.contains("explain")) {
        const auto& e = j["explain"];
        c.explain.epochs = e.value("epochs", c.explain.epochs);
        c.explain.learning_rate = e.value("learning_rate", c.explain.learning_rate);
        c.explain.size_coeff = e.value("size_coeff", c.explain.size_coeff);
        c.explain.entropy_coeff = e.value("entropy_coeff", c.explain.entropy_coeff);
        c.explain.init_logit = e.value("init_logit", c.explain.init_logit);
        c.explain.init_noise = e.value("init_noise", c.explain.init_noise);
        c.explain.seed = e.value("seed", c.explain.seed);
    }
    if (j.contains("eval")) {
        const auto& e = j["eval"];
        c.eval.hops = e.value("hops", c.eval.hops);
        c.eval.t_values = e.value("t_values", c.eval.t_values);
        c.eval.reference_t = e.value("reference_t", c.eval.reference_t);
        c.eval.t_grid = e.value("t_grid", c.eval.t_grid);
        c.eval.size_penalty = e.value("size_penalty", c.eval.size_penalty);
        const std::string mode = e.value("ground_truth_mode", std::string("annotated"));
        if (mode == "annotated") c.eval.gt_mode = GroundTruthMode::Annotated;
        else if (mode == "motif-searched") c.eval.gt_mode = GroundTruthMode::MotifSearched;
        else throw IoError("config: unknown ground_truth_mode '" + mode + "'");
    }
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    return c;
}

void save_run_config(const RunConfig& c, const std::string& path) {
    ordered_json j;
    j["dataset"] = dataset_name(c.dataset);
    j["dataset_params"] = c.dataset == DatasetKind::BaShapes ? ba_params_json(c.ba_params)
                                                             : tc_params_json(c.tc_params);
    j["train"] = ordered_json{{"hidden_dim", c.train.hidden_dim},
                              {"epochs", c.train.epochs},
                              {"learning_rate", c.train.learning_rate},
                              {"weight_decay", c.train.weight_decay},
                              {"optimizer", c.train.optimizer == Optimizer::Adam ? "adam" : "gd"},
                              {"momentum", c.train.momentum},
                              {"restarts", c.train.restarts},
                              {"train_fraction", c.train.train_fraction},
                              {"seed", c.train.seed}};
    j["explain"] = ordered_json{{"epochs", c.explain.epochs},
                                {"learning_rate", c.explain.learning_rate},
                                {"size_coeff", c.explain.size_coeff},
                                {"entropy_coeff", c.explain.entropy_coeff},
                                {"init_logit", c.explain.init_logit},
                                {"init_noise", c.explain.init_noise},
                                {"seed", c.explain.seed}};
    j["eval"] = ordered_json{
        {"hops", c.eval.hops},
        {"t_values", c.eval.t_values},
        {"reference_t", c.eval.reference_t},
        {"t_grid", c.eval.t_grid},
        {"size_penalty", c.eval.size_penalty},
        {"ground_truth_mode",
         c.eval.gt_mode == GroundTruthMode::Annotated ? "annotated" : "motif-searched"}};
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    write_text_file(path, j.dump(2) + "\n");
}

namespace {

struct CohortData {
    std::vector<int> nodes;                 // motif nodes, ascending
    std::vector<std::string> classes;       // role per cohort node
    std::vector<EdgeMask> masks;
    std::vector<EdgeSet> gt_eval;           // ground truth used for metrics
};

void write_dataset_meta(const RunConfig& config, const GenerationStats& stats, const Graph& graph,
                        const std::string& path) {
    ordered_json meta;
    meta["dataset"] = dataset_name(config.dataset);
    meta["params"] = config.dataset == DatasetKind::BaShapes ? ba_params_json(config.ba_params)
                                                             : tc_params_json(config.tc_params);
    meta["num_nodes"] = graph.num_nodes;
    meta["num_edges"] = graph.edges.size();
    ordered_json counts;
    counts["base_edges"] = stats.base_edges;
    counts["motif_edges"] = stats.motif_edges;
    counts["attachment_edges"] = stats.attachment_edges;
    counts["noise_edges"] = stats.noise_edges;
    meta["edge_counts"] = counts;
    std::map<int, int> label_histogram;
    for (int label : graph.labels) ++label_histogram[label];
    ordered_json labels;
    for (const auto& [label, count] : label_histogram)
        labels[std::to_string(label)] = count;
    meta["label_counts"] = labels;
    meta["motif_nodes"] = graph.gt_explanations.size();
    write_text_file(path, meta.dump(2) + "\n");
}

}  // namespace

EvalReport run_pipeline(const RunConfig& config_in, const std::string& out_dir) {
    RunConfig config = config_in;
    if (config.eval.hops != 3)
        throw StageError("config", "eval.hops must equal the 3-layer model depth");
    if (config.eval.t_values.empty() || config.eval.t_grid.empty())
        throw StageError("config", "t_values and t_grid must be nonempty");

    // derive sub-seeds from the root seed
    config.ba_params.seed = mix_seed(config.seed, 1);
    config.tc_params.seed = mix_seed(config.seed, 1);
    config.train.seed = mix_seed(config.seed, 2);
    config.explain.seed = mix_seed(config.seed, 3);

    fs::create_directories(out_dir);
    fs::create_directories(out_dir + "/masks");
    save_run_config(config, out_dir + "/config.json");

    EvalReport report;
    report.dataset_name = dataset_name(config.dataset);
    report.seed = config.seed;

    // --- generate ---------------------------------------------------------
    GenerationStats stats;
    const Graph graph = stage("generate", [&] {
        return config.dataset == DatasetKind::BaShapes
                   ? generate_ba_shapes(config.ba_params, &stats)
                   : generate_tree_cycles(config.tc_params, &stats);
    });
    stage("generate", [&] {
        save_graph(graph, out_dir + "/graph.txt");
        write_dataset_meta(config, stats, graph, out_dir + "/graph.meta.json");
        return 0;
    });

    // --- train ------------------------------------------------------------
    const TrainResult trained = stage("train", [&] { return train(graph, config.train); });
    report.train_accuracy = trained.train_accuracy;
    report.test_accuracy = trained.test_accuracy;
    stage("train", [&] {
        save_model(trained.model, out_dir + "/model.txt");
        ordered_json tj;
        tj["train_accuracy"] = trained.train_accuracy;
        tj["test_accuracy"] = trained.test_accuracy;
        tj["epochs"] = config.train.epochs;
        tj["final_loss"] = trained.loss_history.empty() ? 0.0 : trained.loss_history.back();
        tj["train_nodes"] = trained.train_nodes;
        tj["test_nodes"] = trained.test_nodes;
        tj["loss_history"] = trained.loss_history;
        tj["accuracy_history"] = trained.accuracy_history;
        write_text_file(out_dir + "/training.json", tj.dump(2) + "\n");
        return 0;
    });
    const GcnModel& model = trained.model;

    // --- evaluation cohort: all motif nodes -------------------------------
    CohortData cohort;
    for (const auto& [node, gt] : graph.gt_explanations) {
        cohort.nodes.push_back(node);
        cohort.classes.push_back(graph.has_roles() ? graph.roles[node] : "motif");
    }
    report.cohort_size = cohort.nodes.size();
    if (cohort.nodes.empty())
        report.warnings.push_back("empty evaluation cohort: the dataset has no motif nodes");

    const std::set<int> test_split(trained.test_nodes.begin(), trained.test_nodes.end());

    // --- ground-truth candidates (Table 1 / motif search / candidate file) -
    stage("ground-truth", [&] {
        report.baseline_entropy =
            cohort.nodes.empty() ? std::vector<BaselineEntropyRow>{}
                                 : baseline_entropy_table(model, graph);

        std::vector<std::vector<CandidateRecord>> records(cohort.nodes.size());
        std::vector<EdgeSet> selected(cohort.nodes.size());
        parallel_for(cohort.nodes.size(), config.threads, [&](std::size_t i) {
            const int node = cohort.nodes[i];
            const auto candidates = named_candidates(graph, node);
            for (const auto& cand : candidates) {
                const CandidateScore score = score_candidate(model, graph, node, cand);
                records[i].push_back({node, cohort.classes[i], cand.name, score.size,
                                      score.entropy, score.prediction_correct});
            }
            if (config.eval.gt_mode == GroundTruthMode::MotifSearched)
                selected[i] = select_ground_truth(model, graph, node, candidates).candidate.edges;
        });
        for (auto& r : records)
            report.candidates.insert(report.candidates.end(), r.begin(), r.end());

        if (config.eval.gt_mode == GroundTruthMode::MotifSearched) {
            cohort.gt_eval = std::move(selected);
            std::map<int, EdgeSet> gt_map;
            for (std::size_t i = 0; i < cohort.nodes.size(); ++i)
                gt_map[cohort.nodes[i]] = cohort.gt_eval[i];
            save_ground_truth(gt_map, out_dir + "/ground_truth.txt");
        } else {
            for (int node : cohort.nodes) cohort.gt_eval.push_back(graph.gt_explanations.at(node));
        }
        return 0;
    });

    // --- explain -----------------------------------------------------------
    stage("explain", [&] {
        cohort.masks.resize(cohort.nodes.size());
        parallel_for(cohort.nodes.size(), config.threads, [&](std::size_t i) {
            cohort.masks[i] = explain(model, graph, cohort.nodes[i], config.explain);
        });
        for (const EdgeMask& mask : cohort.masks)
            save_mask(mask, out_dir + "/masks/mask_" + std::to_string(mask.target) + ".txt");
        return 0;
    });

    // --- threshold application, fidelity and metrics ------------------------
    stage("evaluate", [&] {
        const std::size_t n = cohort.nodes.size();
        report.nodes.resize(n);

        struct PerThreshold {
            std::vector<char> flips;
            std::vector<double> recall_raw, precision_raw, recall_rep, precision_rep;
        };
        std::map<int, PerThreshold> per_t;
        std::set<int> all_t(config.eval.t_values.begin(), config.eval.t_values.end());
        all_t.insert(config.eval.reference_t);
        for (int t : all_t) {
            per_t[t].flips.resize(n);
            per_t[t].recall_raw.resize(n);
            per_t[t].precision_raw.resize(n);
            per_t[t].recall_rep.resize(n);
            per_t[t].precision_rep.resize(n);
        }

        parallel_for(n, config.threads, [&](std::size_t i) {
            const int node = cohort.nodes[i];
            const EdgeMask& mask = cohort.masks[i];
            const EdgeSet& gt = cohort.gt_eval[i];
            NodeRecord& rec = report.nodes[i];
            rec.node = node;
            rec.cls = cohort.classes[i];
            rec.field_size = mask.field.size();
            rec.in_test_split = test_split.count(node) > 0;

            // mask scores vs. ground truth; negatives are field edges not in gt
            ScoredEdges scored;
            std::size_t pos = 0;
            for (const Edge& e : mask.field) {
                const bool in_gt = gt.contains(e);
                pos += in_gt ? 1 : 0;
                scored.push_back({mask.scores.at(e), in_gt});
            }
            rec.degenerate_auc = pos == 0 || pos == scored.size();
            if (!rec.degenerate_auc) {
                rec.roc = roc_auc(scored);
                rec.pr = pr_auc(scored);
            }

            for (auto& [t, bucket] : per_t) {
                const EdgeSet final_edges = apply_threshold(mask, t);
                const bool flip = detect_label_flip(model, graph, node, final_edges);
                bucket.flips[i] = flip ? 1 : 0;
                const FinalExplanation repaired = repair_explanation(model, graph, mask, t);
                if (!gt.empty()) {
                    const RecallPrecision raw = recall_precision(final_edges, gt);
                    const RecallPrecision rep = recall_precision(repaired.final_edges, gt);
                    bucket.recall_raw[i] = raw.recall;
                    bucket.precision_raw[i] = raw.precision;
                    bucket.recall_rep[i] = rep.recall;
                    bucket.precision_rep[i] = rep.precision;
                }
                if (t == config.eval.reference_t) {
                    rec.flip_ref = flip;
                    rec.repair_steps_ref = repaired.repair_steps;
                    if (!gt.empty()) {
                        const RecallPrecision raw = recall_precision(final_edges, gt);
                        rec.recall_ref = raw.recall;
                        rec.precision_ref = raw.precision;
                    }
                }
            }
        });

        // per-class aggregation in deterministic class order (by class label)
        std::vector<std::string> class_order;
        {
            std::map<std::pair<int, std::string>, bool> seen;
            for (std::size_t i = 0; i < n; ++i)
                seen[{graph.labels[cohort.nodes[i]], cohort.classes[i]}] = true;
            for (const auto& [key, _] : seen) class_order.push_back(key.second);
        }

        for (const std::string& cls : class_order) {
            std::vector<double> rocs, prs, recalls, precisions;
            std::size_t degenerate = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (cohort.classes[i] != cls) continue;
                if (report.nodes[i].degenerate_auc || cohort.gt_eval[i].empty()) {
                    ++degenerate;
                } else {
                    rocs.push_back(report.nodes[i].roc);
                    prs.push_back(report.nodes[i].pr);
                }
                if (!cohort.gt_eval[i].empty()) {
                    recalls.push_back(report.nodes[i].recall_ref);
                    precisions.push_back(report.nodes[i].precision_ref);
                }
            }
            ClassMetricsRow row;
            row.cls = cls;
            row.degenerate = degenerate;
            if (!rocs.empty()) {
                row.roc_auc = aggregate(rocs);
                row.pr_auc = aggregate(prs);
            }
            if (!recalls.empty()) {
                row.recall = aggregate(recalls);
                row.precision = aggregate(precisions);
            }
            report.class_metrics.push_back(std::move(row));
        }

        for (int t : config.eval.t_values) {
            const PerThreshold& bucket = per_t.at(t);
            for (const std::string& cls : class_order) {
                std::vector<double> rr, pr_, rrep, prep;
                for (std::size_t i = 0; i < n; ++i) {
                    if (cohort.classes[i] != cls || cohort.gt_eval[i].empty()) continue;
                    rr.push_back(bucket.recall_raw[i]);
                    pr_.push_back(bucket.precision_raw[i]);
                    rrep.push_back(bucket.recall_rep[i]);
                    prep.push_back(bucket.precision_rep[i]);
                }
                if (rr.empty()) continue;
                RecallAtThresholdRow row;
                row.cls = cls;
                row.t = t;
                row.recall_raw = aggregate(rr);
                row.precision_raw = aggregate(pr_);
                row.recall_repaired = aggregate(rrep);
                row.precision_repaired = aggregate(prep);
                report.recall_by_threshold.push_back(std::move(row));
            }

            FlipRateRow frow;
            frow.t = t;
            if (n > 0) {
                double flips = 0.0;
                for (std::size_t i = 0; i < n; ++i) flips += bucket.flips[i];
                frow.rate_overall = flips / static_cast<double>(n);
                for (const std::string& cls : class_order) {
                    double cls_flips = 0.0, cls_count = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        if (cohort.classes[i] != cls) continue;
                        cls_flips += bucket.flips[i];
                        cls_count += 1.0;
                    }
                    if (cls_count > 0.0) frow.rate_per_class[cls] = cls_flips / cls_count;
                }
            }
            report.flip_rates.push_back(std::move(frow));
        }

        // leak-free threshold choice on the held-out motif nodes
        std::vector<EdgeMask> masks_test;
        for (std::size_t i = 0; i < n; ++i)
            if (report.nodes[i].in_test_split) masks_test.push_back(cohort.masks[i]);
        if (masks_test.empty() && !cohort.masks.empty()) {
            report.warnings.push_back(
                "no motif nodes in the held-out split; grid search fell back to all masks");
            masks_test = cohort.masks;
        }
        if (!masks_test.empty()) {
            report.chosen_t = grid_search_threshold(model, graph, masks_test, config.eval.t_grid,
                                                    config.eval.size_penalty);
        } else {
            report.chosen_t = -1;
            report.warnings.push_back("grid search skipped: no masks to evaluate");
        }
        return 0;
    });

    stage("report", [&] {
        emit_report(report, "all", out_dir);
        return 0;
    });
    return report;
}

namespace {

std::string class_metrics_csv(const EvalReport& report) {
    std::string out =
        "class,count,degenerate,roc_auc_mean,roc_auc_sd,pr_auc_mean,pr_auc_sd,recall_mean,"
        "recall_sd,precision_mean,precision_sd\n";
    for (const auto& row : report.class_metrics) {
        out += row.cls + ',' + std::to_string(row.recall.count) + ',' +
               std::to_string(row.degenerate) + ',' + format_double(row.roc_auc.mean) + ',' +
               format_double(row.roc_auc.sd) + ',' + format_double(row.pr_auc.mean) + ',' +
               format_double(row.pr_auc.sd) + ',' + format_double(row.recall.mean) + ',' +
               format_double(row.recall.sd) + ',' + format_double(row.precision.mean) + ',' +
               format_double(row.precision.sd) + '\n';
    }
    return out;
}

std::string baseline_entropy_csv(const EvalReport& report) {
    std::string out = "class,method,mean,sd,count\n";
    for (const auto& row : report.baseline_entropy) {
        const auto emit = [&](const std::string& method, const MetricSummary& s) {
            out += row.cls + ',' + method + ',' + format_double(s.mean) + ',' +
                   format_double(s.sd) + ',' + std::to_string(s.count) + '\n';
        };
        emit("ground_truth", row.ground_truth);
        emit("receptive_field", row.receptive_field);
        emit("target_node", row.target_node);
    }
    return out;
}

std::string recall_by_threshold_csv(const EvalReport& report) {
    std::string out =
        "class,threshold,count,recall_mean,recall_sd,precision_mean,precision_sd,"
        "repaired_recall_mean,repaired_recall_sd,repaired_precision_mean,repaired_precision_sd\n";
    for (const auto& row : report.recall_by_threshold) {
        out += row.cls + ',' + std::to_string(row.t) + ',' + std::to_string(row.recall_raw.count) +
               ',' + format_double(row.recall_raw.mean) + ',' + format_double(row.recall_raw.sd) +
               ',' + format_double(row.precision_raw.mean) + ',' +
               format_double(row.precision_raw.sd) + ',' + format_double(row.recall_repaired.mean) +
               ',' + format_double(row.recall_repaired.sd) + ',' +
               format_double(row.precision_repaired.mean) + ',' +
               format_double(row.precision_repaired.sd) + '\n';
    }
    return out;
}

std::string flip_rates_csv(const EvalReport& report) {
    std::string out = "threshold,class,flip_rate\n";
    for (const auto& row : report.flip_rates) {
        out += std::to_string(row.t) + ",all," + format_double(row.rate_overall) + '\n';
        for (const auto& [cls, rate] : row.rate_per_class)
            out += std::to_string(row.t) + ',' + cls + ',' + format_double(rate) + '\n';
    }
    return out;
}

std::string candidates_csv(const EvalReport& report) {
    std::string out = "node,class,candidate,size,entropy,correct\n";
    for (const auto& rec : report.candidates)
        out += std::to_string(rec.node) + ',' + rec.cls + ',' + rec.candidate + ',' +
               std::to_string(rec.size) + ',' + format_double(rec.entropy) + ',' +
               csv_bool(rec.correct) + '\n';
    return out;
}

std::string nodes_csv(const EvalReport& report) {
    std::string out =
        "node,class,field_size,in_test_split,degenerate_auc,roc_auc,pr_auc,recall_ref,"
        "precision_ref,flip_ref,repair_steps_ref\n";
    for (const auto& rec : report.nodes)
        out += std::to_string(rec.node) + ',' + rec.cls + ',' + std::to_string(rec.field_size) +
               ',' + csv_bool(rec.in_test_split) + ',' + csv_bool(rec.degenerate_auc) + ',' +
               format_double(rec.roc) + ',' + format_double(rec.pr) + ',' +
               format_double(rec.recall_ref) + ',' + format_double(rec.precision_ref) + ',' +
               csv_bool(rec.flip_ref) + ',' + std::to_string(rec.repair_steps_ref) + '\n';
    return out;
}

ordered_json report_json(const EvalReport& report) {
    ordered_json j;
    j["dataset"] = report.dataset_name;
    j["seed"] = report.seed;
    j["train_accuracy"] = report.train_accuracy;
    j["test_accuracy"] = report.test_accuracy;
    j["cohort_size"] = report.cohort_size;
    j["chosen_t"] = report.chosen_t;
    j["warnings"] = report.warnings;

    ordered_json table1 = ordered_json::array();
    for (const auto& row : report.baseline_entropy)
        table1.push_back(ordered_json{{"class", row.cls},
                                      {"ground_truth", summary_json(row.ground_truth)},
                                      {"receptive_field", summary_json(row.receptive_field)},
                                      {"target_node", summary_json(row.target_node)}});
    j["baseline_entropy"] = table1;

    ordered_json table2 = ordered_json::array();
    for (const auto& row : report.class_metrics)
        table2.push_back(ordered_json{{"class", row.cls},
                                      {"roc_auc", summary_json(row.roc_auc)},
                                      {"pr_auc", summary_json(row.pr_auc)},
                                      {"recall", summary_json(row.recall)},
                                      {"precision", summary_json(row.precision)},
                                      {"degenerate", row.degenerate}});
    j["class_metrics"] = table2;

    ordered_json table3 = ordered_json::array();
    for (const auto& row : report.recall_by_threshold)
        table3.push_back(ordered_json{{"class", row.cls},
                                      {"threshold", row.t},
                                      {"recall", summary_json(row.recall_raw)},
                                      {"precision", summary_json(row.precision_raw)},
                                      {"repaired_recall", summary_json(row.recall_repaired)},
                                      {"repaired_precision", summary_json(row.precision_repaired)}});
    j["recall_by_threshold"] = table3;

    ordered_json flips = ordered_json::array();
    for (const auto& row : report.flip_rates) {
        ordered_json fr{{"threshold", row.t}, {"overall", row.rate_overall}};
        ordered_json per_class;
        for (const auto& [cls, rate] : row.rate_per_class) per_class[cls] = rate;
        fr["per_class"] = per_class;
        flips.push_back(fr);
    }
    j["flip_rates"] = flips;

    ordered_json nodes = ordered_json::array();
    for (const auto& rec : report.nodes)
        nodes.push_back(ordered_json{{"node", rec.node},
                                     {"class", rec.cls},
                                     {"field_size", rec.field_size},
                                     {"in_test_split", rec.in_test_split},
                                     {"degenerate_auc", rec.degenerate_auc},
                                     {"roc_auc", rec.roc},
                                     {"pr_auc", rec.pr},
                                     {"recall_ref", rec.recall_ref},
                                     {"precision_ref", rec.precision_ref},
                                     {"flip_ref", rec.flip_ref},
                                     {"repair_steps_ref", rec.repair_steps_ref}});
    j["nodes"] = nodes;
    return j;
}

}  // namespace

void emit_report(const EvalReport& report, const std::string& format, const std::string& out_dir) {
    if (format != "json" && format != "csv" && format != "all")
        throw std::domain_error("emit_report: format must be json, csv or all");
    fs::create_directories(out_dir);
    if (format == "json" || format == "all")
        write_text_file(out_dir + "/report.json", report_json(report).dump(2) + "\n");
    if (format == "csv" || format == "all") {
        write_text_file(out_dir + "/table1_baseline_entropy.csv", baseline_entropy_csv(report));
        write_text_file(out_dir + "/table2_class_metrics.csv", class_metrics_csv(report));
        write_text_file(out_dir + "/table3_recall_by_threshold.csv", recall_by_threshold_csv(report));
        write_text_file(out_dir + "/flip_rates.csv", flip_rates_csv(report));
        write_text_file(out_dir + "/fig2_candidates.csv", candidates_csv(report));
        write_text_file(out_dir + "/nodes.csv", nodes_csv(report));
    }
}

}  // namespace gnnx
