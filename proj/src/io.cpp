#include "gnnx/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gnnx/error.hpp"

namespace gnnx {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    return in;
}

void expect_token(std::istream& in, const std::string& expected, const std::string& path) {
    std::string tok;
    if (!(in >> tok) || tok != expected)
        throw IoError("malformed file " + path + ": expected '" + expected + "', got '" + tok + "'");
}

template <typename T>
T read_value(std::istream& in, const std::string& path, const std::string& what) {
    T v;
    if (!(in >> v)) throw IoError("malformed file " + path + ": cannot read " + what);
    return v;
}

void write_edge_lines(std::ofstream& out, const EdgeSet& edges) {
    for (const Edge& e : edges) out << e.u << ' ' << e.v << '\n';
}

}  // namespace

void save_graph(const Graph& graph, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "gnnx-graph v1\n";
    out << "num_nodes " << graph.num_nodes << '\n';
    out << "feature_dim " << graph.features.cols() << '\n';
    out << "edges " << graph.edges.size() << '\n';
    write_edge_lines(out, graph.edges);
    out << "features\n";
    for (int i = 0; i < graph.num_nodes; ++i) {
        for (int j = 0; j < graph.features.cols(); ++j) {
            if (j) out << ' ';
            out << format_double(graph.features(i, j));
        }
        out << '\n';
    }
    out << "labels\n";
    for (int i = 0; i < graph.num_nodes; ++i) {
        if (i) out << ' ';
        out << graph.labels[i];
    }
    out << '\n';
    if (graph.has_roles()) {
        out << "roles\n";
        for (int i = 0; i < graph.num_nodes; ++i) {
            if (i) out << ' ';
            out << graph.roles[i];
        }
        out << '\n';
    }
    out << "gt_explanations " << graph.gt_explanations.size() << '\n';
    for (const auto& [node, gt] : graph.gt_explanations) {
        out << "gt " << node << ' ' << gt.size() << '\n';
        write_edge_lines(out, gt);
    }
    out << "end\n";
    if (!out) throw IoError("write failed: " + path);
}

Graph load_graph(const std::string& path) {
    std::ifstream in = open_in(path);
    expect_token(in, "gnnx-graph", path);
    expect_token(in, "v1", path);
    expect_token(in, "num_nodes", path);
    const int n = read_value<int>(in, path, "num_nodes");
    expect_token(in, "feature_dim", path);
    const int d = read_value<int>(in, path, "feature_dim");
    expect_token(in, "edges", path);
    const auto num_edges = read_value<std::size_t>(in, path, "edge count");
    std::vector<Edge> edges(num_edges);
    for (auto& e : edges) {
        e.u = read_value<int>(in, path, "edge endpoint");
        e.v = read_value<int>(in, path, "edge endpoint");
    }
    expect_token(in, "features", path);
    Matrix features(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) features(i, j) = read_value<double>(in, path, "feature");
    expect_token(in, "labels", path);
    std::vector<int> labels(n);
    for (int& l : labels) l = read_value<int>(in, path, "label");

    std::string tok;
    if (!(in >> tok)) throw IoError("malformed file " + path + ": truncated");
    std::vector<std::string> roles;
    if (tok == "roles") {
        roles.resize(n);
        for (std::string& r : roles) r = read_value<std::string>(in, path, "role");
        if (!(in >> tok)) throw IoError("malformed file " + path + ": truncated");
    }
    if (tok != "gt_explanations")
        throw IoError("malformed file " + path + ": expected gt_explanations");
    const auto num_gt = read_value<std::size_t>(in, path, "gt count");
    std::map<int, EdgeSet> gt;
    for (std::size_t i = 0; i < num_gt; ++i) {
        expect_token(in, "gt", path);
        const int node = read_value<int>(in, path, "gt node");
        const auto count = read_value<std::size_t>(in, path, "gt edge count");
        std::vector<Edge> gt_edges(count);
        for (auto& e : gt_edges) {
            e.u = read_value<int>(in, path, "gt edge endpoint");
            e.v = read_value<int>(in, path, "gt edge endpoint");
        }
        gt[node] = EdgeSet(std::move(gt_edges));
    }
    expect_token(in, "end", path);
    return Graph::create(n, EdgeSet(std::move(edges)), std::move(features), std::move(labels),
                         std::move(roles), std::move(gt));
}

void save_model(const GcnModel& model, const std::string& path) {
    model.validate();
    std::ofstream out = open_out(path);
    out << "gnnx-model v1\n";
    out << "layers " << model.num_layers() << '\n';
    out << "activation relu\n";
    out << "dims";
    out << ' ' << model.input_dim();
    for (const Matrix& w : model.layer_weights) out << ' ' << w.cols();
    out << '\n';
    out << "classes " << model.class_count() << '\n';
    for (int l = 0; l < model.num_layers(); ++l) {
        const Matrix& w = model.layer_weights[l];
        out << "W" << l << ' ' << w.rows() << ' ' << w.cols() << '\n';
        for (int i = 0; i < w.rows(); ++i) {
            for (int j = 0; j < w.cols(); ++j) {
                if (j) out << ' ';
                out << format_double(w(i, j));
            }
            out << '\n';
        }
        out << "b" << l << ' ' << model.layer_biases[l].size() << '\n';
        for (std::size_t j = 0; j < model.layer_biases[l].size(); ++j) {
            if (j) out << ' ';
            out << format_double(model.layer_biases[l][j]);
        }
        out << '\n';
    }
    out << "Wc " << model.classifier.rows() << ' ' << model.classifier.cols() << '\n';
    for (int i = 0; i < model.classifier.rows(); ++i) {
        for (int j = 0; j < model.classifier.cols(); ++j) {
            if (j) out << ' ';
            out << format_double(model.classifier(i, j));
        }
        out << '\n';
    }
    out << "bc " << model.classifier_bias.size() << '\n';
    for (std::size_t j = 0; j < model.classifier_bias.size(); ++j) {
        if (j) out << ' ';
        out << format_double(model.classifier_bias[j]);
    }
    out << '\n';
    out << "end\n";
    if (!out) throw IoError("write failed: " + path);
}

GcnModel load_model(const std::string& path) {
    std::ifstream in = open_in(path);
    expect_token(in, "gnnx-model", path);
    expect_token(in, "v1", path);
    expect_token(in, "layers", path);
    const int layers = read_value<int>(in, path, "layer count");
    expect_token(in, "activation", path);
    expect_token(in, "relu", path);
    expect_token(in, "dims", path);
    std::vector<int> dims(layers + 1);
    for (int& d : dims) d = read_value<int>(in, path, "dimension");
    expect_token(in, "classes", path);
    const int k = read_value<int>(in, path, "class count");

    GcnModel model;
    auto read_matrix = [&](const std::string& tag, int rows, int cols) {
        expect_token(in, tag, path);
        if (read_value<int>(in, path, "rows") != rows || read_value<int>(in, path, "cols") != cols)
            throw IoError("malformed file " + path + ": unexpected shape for " + tag);
        Matrix m(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) m(i, j) = read_value<double>(in, path, "weight");
        return m;
    };
    for (int l = 0; l < layers; ++l) {
        model.layer_weights.push_back(read_matrix("W" + std::to_string(l), dims[l], dims[l + 1]));
        expect_token(in, "b" + std::to_string(l), path);
        const int blen = read_value<int>(in, path, "bias length");
        if (blen != dims[l + 1]) throw IoError("malformed file " + path + ": bias length mismatch");
        std::vector<double> bias(blen);
        for (double& b : bias) b = read_value<double>(in, path, "bias");
        model.layer_biases.push_back(std::move(bias));
    }
    model.classifier = read_matrix("Wc", dims[layers], k);
    expect_token(in, "bc", path);
    if (read_value<int>(in, path, "bias length") != k)
        throw IoError("malformed file " + path + ": classifier bias length mismatch");
    model.classifier_bias.resize(k);
    for (double& b : model.classifier_bias) b = read_value<double>(in, path, "bias");
    expect_token(in, "end", path);
    model.validate();
    return model;
}

void save_mask(const EdgeMask& mask, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "gnnx-mask v1\n";
    out << "target " << mask.target << '\n';
    out << "edges " << mask.field.size() << '\n';
    for (const Edge& e : mask.field) {
        auto it = mask.scores.find(e);
        if (it == mask.scores.end()) throw IoError("mask is missing a score for a field edge");
        out << e.u << ' ' << e.v << ' ' << format_double(it->second) << '\n';
    }
    out << "end\n";
    if (!out) throw IoError("write failed: " + path);
}

EdgeMask load_mask(const std::string& path) {
    std::ifstream in = open_in(path);
    expect_token(in, "gnnx-mask", path);
    expect_token(in, "v1", path);
    expect_token(in, "target", path);
    EdgeMask mask;
    mask.target = read_value<int>(in, path, "target");
    expect_token(in, "edges", path);
    const auto count = read_value<std::size_t>(in, path, "edge count");
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < count; ++i) {
        const int u = read_value<int>(in, path, "edge endpoint");
        const int v = read_value<int>(in, path, "edge endpoint");
        const double score = read_value<double>(in, path, "score");
        edges.emplace_back(u, v);
        mask.scores[Edge(u, v)] = score;
    }
    expect_token(in, "end", path);
    mask.field = EdgeSet(std::move(edges));
    if (mask.field.size() != count) throw IoError("malformed file " + path + ": duplicate edges");
    return mask;
}

void save_ground_truth(const std::map<int, EdgeSet>& gt, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "gnnx-groundtruth v1\n";
    out << "gt_explanations " << gt.size() << '\n';
    for (const auto& [node, edges] : gt) {
        out << "gt " << node << ' ' << edges.size() << '\n';
        write_edge_lines(out, edges);
    }
    out << "end\n";
    if (!out) throw IoError("write failed: " + path);
}

std::map<int, EdgeSet> load_ground_truth(const std::string& path) {
    std::ifstream in = open_in(path);
    expect_token(in, "gnnx-groundtruth", path);
    expect_token(in, "v1", path);
    expect_token(in, "gt_explanations", path);
    const auto count = read_value<std::size_t>(in, path, "entry count");
    std::map<int, EdgeSet> gt;
    for (std::size_t i = 0; i < count; ++i) {
        expect_token(in, "gt", path);
        const int node = read_value<int>(in, path, "node");
        const auto edge_count = read_value<std::size_t>(in, path, "edge count");
        std::vector<Edge> edges(edge_count);
        for (auto& e : edges) {
            e.u = read_value<int>(in, path, "endpoint");
            e.v = read_value<int>(in, path, "endpoint");
        }
        gt[node] = EdgeSet(std::move(edges));
    }
    expect_token(in, "end", path);
    return gt;
}

}  // namespace gnnx
