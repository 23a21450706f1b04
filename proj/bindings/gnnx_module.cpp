// Python bindings for the main operations: dataset generation, GCN training
// and prediction, mask optimization, metrics, motif search, thresholding and
// the full pipeline.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gnnx/error.hpp"
#include "gnnx/explainer.hpp"
#include "gnnx/gcn.hpp"
#include "gnnx/io.hpp"
#include "gnnx/metrics.hpp"
#include "gnnx/motif_search.hpp"
#include "gnnx/pipeline.hpp"
#include "gnnx/synth.hpp"
#include "gnnx/threshold.hpp"

namespace py = pybind11;
using namespace gnnx;

namespace {

using PyEdge = std::pair<int, int>;

EdgeSet edges_from_py(const std::vector<PyEdge>& pairs) {
    std::vector<Edge> edges;
    edges.reserve(pairs.size());
    for (const auto& [u, v] : pairs) edges.emplace_back(u, v);
    return EdgeSet(std::move(edges));
}

std::vector<PyEdge> edges_to_py(const EdgeSet& edges) {
    std::vector<PyEdge> out;
    out.reserve(edges.size());
    for (const Edge& e : edges) out.emplace_back(e.u, e.v);
    return out;
}

std::map<Edge, double> edge_map_from_py(const std::map<PyEdge, double>& m) {
    std::map<Edge, double> out;
    for (const auto& [e, v] : m) out[Edge(e.first, e.second)] = v;
    return out;
}

std::map<PyEdge, double> edge_map_to_py(const std::map<Edge, double>& m) {
    std::map<PyEdge, double> out;
    for (const auto& [e, v] : m) out[{e.u, e.v}] = v;
    return out;
}

py::array_t<double> matrix_to_numpy(const Matrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    auto buf = out.mutable_unchecked<2>();
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) buf(i, j) = m(i, j);
    return out;
}

Matrix matrix_from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw std::domain_error("expected a 2-d array");
    Matrix m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
    auto buf = a.unchecked<2>();
    for (py::ssize_t i = 0; i < a.shape(0); ++i)
        for (py::ssize_t j = 0; j < a.shape(1); ++j)
            m(static_cast<int>(i), static_cast<int>(j)) = buf(i, j);
    return m;
}

ScoredEdges scored_from_py(const std::vector<double>& scores, const std::vector<bool>& in_gt) {
    if (scores.size() != in_gt.size())
        throw std::domain_error("scores and labels must have the same length");
    ScoredEdges out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = {scores[i], in_gt[i]};
    return out;
}

}  // namespace

PYBIND11_MODULE(_gnnx, m) {
    m.doc() = "Synthetic-benchmark evaluation pipeline for perturbation-based GNN explainers";

    py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError", PyExc_ValueError);
    py::register_exception<EmptyFieldError>(m, "EmptyFieldError", PyExc_ValueError);
    py::register_exception<CapacityError>(m, "CapacityError", PyExc_RuntimeError);

    // ---- dataset generation -------------------------------------------------
    py::class_<BaShapesParams>(m, "BaShapesParams")
        .def(py::init<>())
        .def_readwrite("base_nodes", &BaShapesParams::base_nodes)
        .def_readwrite("num_motifs", &BaShapesParams::num_motifs)
        .def_readwrite("ba_attachment", &BaShapesParams::ba_attachment)
        .def_readwrite("noise_fraction", &BaShapesParams::noise_fraction)
        .def_readwrite("feature_dim", &BaShapesParams::feature_dim)
        .def_readwrite("seed", &BaShapesParams::seed);

    py::class_<TreeCyclesParams>(m, "TreeCyclesParams")
        .def(py::init<>())
        .def_readwrite("tree_levels", &TreeCyclesParams::tree_levels)
        .def_readwrite("num_motifs", &TreeCyclesParams::num_motifs)
        .def_readwrite("cycle_size", &TreeCyclesParams::cycle_size)
        .def_readwrite("noise_fraction", &TreeCyclesParams::noise_fraction)
        .def_readwrite("feature_dim", &TreeCyclesParams::feature_dim)
        .def_readwrite("seed", &TreeCyclesParams::seed);

    py::class_<Graph>(m, "Graph")
        .def_readonly("num_nodes", &Graph::num_nodes)
        .def_readonly("labels", &Graph::labels)
        .def_readonly("roles", &Graph::roles)
        .def_property_readonly("edges", [](const Graph& g) { return edges_to_py(g.edges); })
        .def_property_readonly("features", [](const Graph& g) { return matrix_to_numpy(g.features); })
        .def_property_readonly("gt_explanations",
                               [](const Graph& g) {
                                   std::map<int, std::vector<PyEdge>> out;
                                   for (const auto& [node, gt] : g.gt_explanations)
                                       out[node] = edges_to_py(gt);
                                   return out;
                               })
        .def("num_classes", &Graph::num_classes)
        .def("__repr__", [](const Graph& g) {
            std::ostringstream os;
            os << "Graph(num_nodes=" << g.num_nodes << ", num_edges=" << g.edges.size() << ")";
            return os.str();
        });

    m.def("make_graph",
          [](int num_nodes, const std::vector<PyEdge>& edges,
             const py::array_t<double, py::array::c_style | py::array::forcecast>& features,
             const std::vector<int>& labels, const std::vector<std::string>& roles,
             const std::map<int, std::vector<PyEdge>>& gt) {
              std::map<int, EdgeSet> gt_map;
              for (const auto& [node, pairs] : gt) gt_map[node] = edges_from_py(pairs);
              return Graph::create(num_nodes, edges_from_py(edges), matrix_from_numpy(features),
                                   labels, roles, std::move(gt_map));
          },
          py::arg("num_nodes"), py::arg("edges"), py::arg("features"), py::arg("labels"),
          py::arg("roles") = std::vector<std::string>{},
          py::arg("gt_explanations") = std::map<int, std::vector<PyEdge>>{});

    m.def("generate_ba_shapes",
          [](const BaShapesParams& p) { return generate_ba_shapes(p, nullptr); }, py::arg("params"));
    m.def("generate_tree_cycles",
          [](const TreeCyclesParams& p) { return generate_tree_cycles(p, nullptr); },
          py::arg("params"));

    // ---- graph core ----------------------------------------------------------
    m.def("normalized_adjacency",
          [](const Graph& g, const std::optional<std::map<PyEdge, double>>& weights) {
              if (!weights) return matrix_to_numpy(normalized_adjacency(g));
              auto w = edge_map_from_py(*weights);
              return matrix_to_numpy(normalized_adjacency(g, &w));
          },
          py::arg("graph"), py::arg("weights") = py::none());

    m.def("receptive_field",
          [](const Graph& g, int node, int hops) {
              ReceptiveField f = receptive_field(g, node, hops);
              return py::make_tuple(f.nodes, edges_to_py(f.edges));
          },
          py::arg("graph"), py::arg("node"), py::arg("hops"),
          "Returns (nodes, edges) of the hop-limited neighborhood.");

    // ---- gcn -------------------------------------------------------------------
    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("hidden_dim", &TrainConfig::hidden_dim)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("weight_decay", &TrainConfig::weight_decay)
        .def_readwrite("momentum", &TrainConfig::momentum)
        .def_readwrite("restarts", &TrainConfig::restarts)
        .def_readwrite("train_fraction", &TrainConfig::train_fraction)
        .def_readwrite("seed", &TrainConfig::seed);

    py::class_<GcnModel>(m, "GcnModel")
        .def("num_layers", &GcnModel::num_layers)
        .def("class_count", &GcnModel::class_count)
        .def("input_dim", &GcnModel::input_dim);

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("model", &TrainResult::model)
        .def_readonly("train_nodes", &TrainResult::train_nodes)
        .def_readonly("test_nodes", &TrainResult::test_nodes)
        .def_readonly("loss_history", &TrainResult::loss_history)
        .def_readonly("accuracy_history", &TrainResult::accuracy_history)
        .def_readonly("train_accuracy", &TrainResult::train_accuracy)
        .def_readonly("test_accuracy", &TrainResult::test_accuracy);

    m.def("train", &train, py::arg("graph"), py::arg("config") = TrainConfig{},
          py::call_guard<py::gil_scoped_release>());

    m.def("forward",
          [](const GcnModel& model,
             const py::array_t<double, py::array::c_style | py::array::forcecast>& adj,
             const py::array_t<double, py::array::c_style | py::array::forcecast>& features) {
              ForwardResult r = forward(model, matrix_from_numpy(adj), matrix_from_numpy(features));
              return py::make_tuple(matrix_to_numpy(r.probs), matrix_to_numpy(r.logits));
          },
          py::arg("model"), py::arg("adj_norm"), py::arg("features"),
          "Returns (probabilities, logits), one row per node.");

    m.def("predict_on_subset",
          [](const GcnModel& model, const Graph& g, int node, const std::vector<PyEdge>& kept) {
              Prediction p = predict_on_subset(model, g, node, edges_from_py(kept));
              return py::make_tuple(p.predicted_class, p.probs);
          },
          py::arg("model"), py::arg("graph"), py::arg("node"), py::arg("kept_edges"));

    m.def("mask_gradient",
          [](const GcnModel& model, const Graph& g, int node, const std::vector<PyEdge>& field,
             const std::map<PyEdge, double>& logits, int target_class, double size_coeff,
             double entropy_coeff) {
              MaskLossSpec spec{target_class, size_coeff, entropy_coeff};
              return edge_map_to_py(mask_gradient(model, g, node, edges_from_py(field),
                                                  edge_map_from_py(logits), spec));
          },
          py::arg("model"), py::arg("graph"), py::arg("node"), py::arg("field"), py::arg("logits"),
          py::arg("target_class"), py::arg("size_coeff") = 0.0, py::arg("entropy_coeff") = 0.0);

    m.def("mask_objective",
          [](const GcnModel& model, const Graph& g, int node, const std::vector<PyEdge>& field,
             const std::map<PyEdge, double>& logits, int target_class, double size_coeff,
             double entropy_coeff) {
              MaskLossSpec spec{target_class, size_coeff, entropy_coeff};
              return mask_objective(model, g, node, edges_from_py(field), edge_map_from_py(logits),
                                    spec);
          },
          py::arg("model"), py::arg("graph"), py::arg("node"), py::arg("field"), py::arg("logits"),
          py::arg("target_class"), py::arg("size_coeff") = 0.0, py::arg("entropy_coeff") = 0.0);

    // ---- explainer ---------------------------------------------------------------
    py::class_<ExplainConfig>(m, "ExplainConfig")
        .def(py::init<>())
        .def_readwrite("epochs", &ExplainConfig::epochs)
        .def_readwrite("learning_rate", &ExplainConfig::learning_rate)
        .def_readwrite("size_coeff", &ExplainConfig::size_coeff)
        .def_readwrite("entropy_coeff", &ExplainConfig::entropy_coeff)
        .def_readwrite("init_logit", &ExplainConfig::init_logit)
        .def_readwrite("init_noise", &ExplainConfig::init_noise)
        .def_readwrite("seed", &ExplainConfig::seed);

    py::class_<EdgeMask>(m, "EdgeMask")
        .def_readonly("target", &EdgeMask::target)
        .def_property_readonly("field", [](const EdgeMask& m_) { return edges_to_py(m_.field); })
        .def_property_readonly("scores",
                               [](const EdgeMask& m_) { return edge_map_to_py(m_.scores); });

    m.def("explain", &explain, py::arg("model"), py::arg("graph"), py::arg("node"),
          py::arg("config") = ExplainConfig{}, py::call_guard<py::gil_scoped_release>());
    m.def("baseline_full_field", &baseline_full_field, py::arg("graph"), py::arg("node"),
          py::arg("hops"));
    m.def("baseline_ground_truth", &baseline_ground_truth, py::arg("graph"), py::arg("node"),
          py::arg("hops") = 3);

    // ---- metrics --------------------------------------------------------------------
    m.def("entropy", &entropy, py::arg("probs"));
    m.def("roc_auc",
          [](const std::vector<double>& scores, const std::vector<bool>& in_gt) {
              return roc_auc(scored_from_py(scores, in_gt));
          },
          py::arg("scores"), py::arg("in_ground_truth"));
    m.def("pr_auc",
          [](const std::vector<double>& scores, const std::vector<bool>& in_gt) {
              return pr_auc(scored_from_py(scores, in_gt));
          },
          py::arg("scores"), py::arg("in_ground_truth"));
    m.def("recall_precision",
          [](const std::vector<PyEdge>& final_edges, const std::vector<PyEdge>& gt) {
              RecallPrecision r = recall_precision(edges_from_py(final_edges), edges_from_py(gt));
              return py::make_tuple(r.recall, r.precision, r.empty_final);
          },
          py::arg("final_edges"), py::arg("ground_truth"),
          "Returns (recall, precision, empty_final).");
    m.def("aggregate",
          [](const std::vector<double>& values) {
              MetricSummary s = aggregate(values);
              return py::make_tuple(s.mean, s.sd, s.count);
          },
          py::arg("values"), "Returns (mean, population_sd, count).");

    // ---- motif search ------------------------------------------------------------------
    py::class_<MotifCandidate>(m, "MotifCandidate")
        .def_readonly("name", &MotifCandidate::name)
        .def_property_readonly("edges",
                               [](const MotifCandidate& c) { return edges_to_py(c.edges); });

    m.def("named_candidates", &named_candidates, py::arg("graph"), py::arg("node"));
    m.def("enumerate_candidates",
          [](const Graph& g, int node, int max_edges, std::size_t max_candidates,
             bool allow_truncation) {
              EnumerateOptions opts;
              opts.max_candidates = max_candidates;
              opts.allow_truncation = allow_truncation;
              return enumerate_candidates(g, node, max_edges, opts);
          },
          py::arg("graph"), py::arg("node"), py::arg("max_edges"),
          py::arg("max_candidates") = 10000, py::arg("allow_truncation") = true);
    m.def("score_candidate",
          [](const GcnModel& model, const Graph& g, int node, const MotifCandidate& c) {
              CandidateScore s = score_candidate(model, g, node, c);
              return py::make_tuple(s.entropy, s.prediction_correct, s.size);
          },
          py::arg("model"), py::arg("graph"), py::arg("node"), py::arg("candidate"),
          "Returns (entropy, prediction_correct, size).");
    m.def("select_ground_truth",
          [](const GcnModel& model, const Graph& g, int node,
             const std::vector<MotifCandidate>& candidates) {
              GroundTruthSelection s = select_ground_truth(model, g, node, candidates);
              return py::make_tuple(s.candidate, s.found);
          },
          py::arg("model"), py::arg("graph"), py::arg("node"), py::arg("candidates"));
    m.def("baseline_entropy_table",
          [](const GcnModel& model, const Graph& g, const std::optional<std::string>& cls) {
              py::list rows;
              for (const auto& row : baseline_entropy_table(model, g, cls)) {
                  py::dict d;
                  d["class"] = row.cls;
                  d["ground_truth"] = py::make_tuple(row.ground_truth.mean, row.ground_truth.sd,
                                                     row.ground_truth.count);
                  d["receptive_field"] = py::make_tuple(
                      row.receptive_field.mean, row.receptive_field.sd, row.receptive_field.count);
                  d["target_node"] = py::make_tuple(row.target_node.mean, row.target_node.sd,
                                                    row.target_node.count);
                  rows.append(d);
              }
              return rows;
          },
          py::arg("model"), py::arg("graph"), py::arg("class_filter") = py::none());

    // ---- thresholding -------------------------------------------------------------------
    m.def("apply_threshold",
          [](const EdgeMask& mask, int t) { return edges_to_py(apply_threshold(mask, t)); },
          py::arg("mask"), py::arg("t"));
    m.def("detect_label_flip",
          [](const GcnModel& model, const Graph& g, int node, const std::vector<PyEdge>& final_edges) {
              return detect_label_flip(model, g, node, edges_from_py(final_edges));
          },
          py::arg("model"), py::arg("graph"), py::arg("node"), py::arg("final_edges"));
    m.def("repair_explanation",
          [](const GcnModel& model, const Graph& g, const EdgeMask& mask, int t) {
              FinalExplanation r = repair_explanation(model, g, mask, t);
              py::dict d;
              d["target"] = r.target;
              d["final_edges"] = edges_to_py(r.final_edges);
              d["threshold_t"] = r.threshold_t;
              d["flipped"] = r.flipped;
              d["repaired"] = r.repaired;
              d["repair_steps"] = r.repair_steps;
              return d;
          },
          py::arg("model"), py::arg("graph"), py::arg("mask"), py::arg("t"));
    m.def("flip_rate", &flip_rate, py::arg("model"), py::arg("graph"), py::arg("masks"),
          py::arg("t"));
    m.def("grid_search_threshold", &grid_search_threshold, py::arg("model"), py::arg("graph"),
          py::arg("masks_test"), py::arg("t_grid"), py::arg("size_penalty") = 0.25);

    // ---- io and pipeline ---------------------------------------------------------------
    m.def("save_graph", &save_graph, py::arg("graph"), py::arg("path"));
    m.def("load_graph", &load_graph, py::arg("path"));
    m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));
    m.def("save_mask", &save_mask, py::arg("mask"), py::arg("path"));
    m.def("load_mask", &load_mask, py::arg("path"));

    m.def("run_pipeline",
          [](const std::string& config_json, const std::string& out_dir) {
              RunConfig config;
              if (!config_json.empty()) {
                  const std::string tmp = out_dir + "/.input_config.json";
                  std::filesystem::create_directories(out_dir);
                  std::ofstream(tmp) << config_json;
                  config = load_run_config(tmp);
              }
              EvalReport report;
              {
                  py::gil_scoped_release release;
                  report = run_pipeline(config, out_dir);
              }
              py::dict d;
              d["dataset"] = report.dataset_name;
              d["seed"] = report.seed;
              d["train_accuracy"] = report.train_accuracy;
              d["test_accuracy"] = report.test_accuracy;
              d["cohort_size"] = report.cohort_size;
              d["chosen_t"] = report.chosen_t;
              d["warnings"] = report.warnings;
              return d;
          },
          py::arg("config_json") = std::string{}, py::arg("out_dir"),
          "Runs generate/train/explain/threshold/evaluate; returns a summary dict. "
          "Full tables are written to out_dir.");
}
