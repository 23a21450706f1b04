#include "gnnx/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>
#include <tuple>

#include "gnnx/error.hpp"
#include "gnnx/rng.hpp"

namespace gnnx {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

namespace {

double log_sum_exp(const double* v, int n) {
    double m = v[0];
    for (int i = 1; i < n; ++i) m = std::max(m, v[i]);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::exp(v[i] - m);
    return m + std::log(s);
}

void softmax_row(const double* logits, double* out, int n) {
    double m = logits[0];
    for (int i = 1; i < n; ++i) m = std::max(m, logits[i]);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        out[i] = std::exp(logits[i] - m);
        s += out[i];
    }
    for (int i = 0; i < n; ++i) out[i] /= s;
}

int argmax_row(const double* v, int n) {
    int best = 0;
    for (int i = 1; i < n; ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

// binary entropy of sigmoid(m), stable for any finite m
double mask_entropy_term(double m) {
    const double a = std::fabs(m);
    return std::log1p(std::exp(-a)) + sigmoid(-a) * a;
}

// Normalized adjacency of the full unweighted graph in symmetric sparse form.
struct SparseNorm {
    std::vector<double> diag;                          // S_ii = 1/deg_hat
    std::vector<std::tuple<int, int, double>> entries; // (u, v, s) with u < v

    explicit SparseNorm(const Graph& g) {
        const int n = g.num_nodes;
        std::vector<double> deg(n, 1.0);
        for (const Edge& e : g.edges) {
            deg[e.u] += 1.0;
            deg[e.v] += 1.0;
        }
        std::vector<double> inv_sqrt(n);
        diag.resize(n);
        for (int i = 0; i < n; ++i) {
            inv_sqrt[i] = 1.0 / std::sqrt(deg[i]);
            diag[i] = 1.0 / deg[i];
        }
        entries.reserve(g.edges.size());
        for (const Edge& e : g.edges)
            entries.emplace_back(e.u, e.v, inv_sqrt[e.u] * inv_sqrt[e.v]);
    }

    void multiply(const Matrix& h, Matrix& out) const {
        const int d = h.cols();
        if (out.rows() != h.rows() || out.cols() != d) out = Matrix(h.rows(), d);
        for (int i = 0; i < h.rows(); ++i) {
            const double di = diag[i];
            const double* hrow = h.row(i);
            double* orow = out.row(i);
            for (int j = 0; j < d; ++j) orow[j] = di * hrow[j];
        }
        for (const auto& [u, v, s] : entries) {
            const double* hu = h.row(u);
            const double* hv = h.row(v);
            double* ou = out.row(u);
            double* ov = out.row(v);
            for (int j = 0; j < d; ++j) {
                ou[j] += s * hv[j];
                ov[j] += s * hu[j];
            }
        }
    }
};

void add_bias_relu(Matrix& q, const std::vector<double>& bias) {
    for (int i = 0; i < q.rows(); ++i) {
        double* row = q.row(i);
        for (int j = 0; j < q.cols(); ++j) {
            double x = row[j] + bias[j];
            row[j] = x > 0.0 ? x : 0.0;
        }
    }
}

Matrix glorot_init(int rows, int cols, Rng& rng) {
    Matrix w(rows, cols);
    const double a = std::sqrt(6.0 / (rows + cols));
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) w(i, j) = rng.uniform(-a, a);
    return w;
}

}  // namespace

void GcnModel::validate() const {
    if (layer_weights.empty()) throw std::domain_error("gcn: model needs at least one layer");
    if (layer_biases.size() != layer_weights.size())
        throw std::domain_error("gcn: bias count != layer count");
    for (std::size_t l = 0; l + 1 < layer_weights.size(); ++l)
        if (layer_weights[l].cols() != layer_weights[l + 1].rows())
            throw std::domain_error("gcn: layer dimension chain broken at layer " + std::to_string(l));
    for (std::size_t l = 0; l < layer_weights.size(); ++l)
        if (static_cast<int>(layer_biases[l].size()) != layer_weights[l].cols())
            throw std::domain_error("gcn: bias size mismatch at layer " + std::to_string(l));
    if (classifier.rows() != layer_weights.back().cols())
        throw std::domain_error("gcn: classifier input dim mismatch");
    if (classifier.cols() < 1) throw std::domain_error("gcn: class count must be >= 1");
    if (static_cast<int>(classifier_bias.size()) != classifier.cols())
        throw std::domain_error("gcn: classifier bias size mismatch");
}

ForwardResult forward(const GcnModel& model, const Matrix& adj_norm, const Matrix& features) {
    model.validate();
    if (adj_norm.rows() != adj_norm.cols())
        throw std::domain_error("gcn: adjacency not square");
    if (adj_norm.rows() != features.rows())
        throw std::domain_error("gcn: adjacency/features size mismatch");
    if (features.cols() != model.input_dim())
        throw std::domain_error("gcn: feature dim != model input dim");

    Matrix h = features;
    for (int l = 0; l < model.num_layers(); ++l) {
        Matrix q = matmul(matmul(adj_norm, h), model.layer_weights[l]);
        add_bias_relu(q, model.layer_biases[l]);
        h = std::move(q);
    }
    ForwardResult result;
    result.logits = matmul(h, model.classifier);
    for (int i = 0; i < result.logits.rows(); ++i)
        for (int j = 0; j < result.logits.cols(); ++j)
            result.logits(i, j) += model.classifier_bias[j];
    result.probs = Matrix(result.logits.rows(), result.logits.cols());
    for (int i = 0; i < result.logits.rows(); ++i)
        softmax_row(result.logits.row(i), result.probs.row(i), result.logits.cols());
    return result;
}

namespace {

// One seeded run; the split comes from the config seed so every restart
// optimizes the same problem.
TrainResult train_single(const Graph& graph, const TrainConfig& config, std::uint64_t init_seed) {
    const int n = graph.num_nodes;
    const int k = graph.num_classes();
    const int d_in = graph.features.cols();
    const int hidden = config.hidden_dim;
    const int layers = 3;

    Rng rng_init(init_seed);
    GcnModel model;
    for (int l = 0; l < layers; ++l) {
        const int rows = l == 0 ? d_in : hidden;
        model.layer_weights.push_back(glorot_init(rows, hidden, rng_init));
        // small positive bias: with constant features a zero-bias unit is
        // active either for every node or for none, so half the width would
        // start dead
        model.layer_biases.emplace_back(hidden, 0.1);
    }
    model.classifier = glorot_init(hidden, k, rng_init);
    model.classifier_bias.assign(k, 0.0);

    // stratified split, seeded independently of the weights
    Rng rng_split(config.seed);
    std::vector<int> train_nodes, test_nodes;
    for (int cls = 0; cls < k; ++cls) {
        std::vector<int> members;
        for (int i = 0; i < n; ++i)
            if (graph.labels[i] == cls) members.push_back(i);
        if (members.empty()) continue;
        rng_split.shuffle(members);
        auto take = static_cast<std::size_t>(
            std::llround(config.train_fraction * static_cast<double>(members.size())));
        take = std::clamp<std::size_t>(take, 1, members.size());
        for (std::size_t i = 0; i < members.size(); ++i)
            (i < take ? train_nodes : test_nodes).push_back(members[i]);
    }
    std::sort(train_nodes.begin(), train_nodes.end());
    std::sort(test_nodes.begin(), test_nodes.end());
    if (train_nodes.empty()) throw std::domain_error("train: empty training split");

    const SparseNorm s(graph);
    const double inv_train = 1.0 / static_cast<double>(train_nodes.size());

    // first/second-moment buffers; the GD path uses only the first as velocity
    std::vector<Matrix> m1_w(layers), m2_w(layers);
    std::vector<std::vector<double>> m1_b(layers), m2_b(layers);
    for (int l = 0; l < layers; ++l) {
        m1_w[l] = Matrix(model.layer_weights[l].rows(), hidden);
        m2_w[l] = Matrix(model.layer_weights[l].rows(), hidden);
        m1_b[l].assign(hidden, 0.0);
        m2_b[l].assign(hidden, 0.0);
    }
    Matrix m1_c(hidden, k), m2_c(hidden, k);
    std::vector<double> m1_cb(k, 0.0), m2_cb(k, 0.0);

    TrainResult result;
    std::vector<Matrix> h(layers + 1), p(layers);
    Matrix logits, probs, dlogits, dh, dq, dp, scratch;

    auto run_forward = [&]() {
        h[0] = graph.features;
        for (int l = 0; l < layers; ++l) {
            s.multiply(h[l], p[l]);
            h[l + 1] = matmul(p[l], model.layer_weights[l]);
            add_bias_relu(h[l + 1], model.layer_biases[l]);
        }
        logits = matmul(h[layers], model.classifier);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j) logits(i, j) += model.classifier_bias[j];
        probs = Matrix(n, k);
        for (int i = 0; i < n; ++i) softmax_row(logits.row(i), probs.row(i), k);
    };
    auto accuracy_on = [&](const std::vector<int>& nodes) {
        if (nodes.empty()) return 0.0;
        int correct = 0;
        for (int i : nodes)
            if (argmax_row(probs.row(i), k) == graph.labels[i]) ++correct;
        return static_cast<double>(correct) / static_cast<double>(nodes.size());
    };

    GcnModel best_model = model;
    double best_accuracy = -1.0, best_loss = 0.0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        run_forward();

        double loss = 0.0;
        for (int i : train_nodes)
            loss += log_sum_exp(logits.row(i), k) - logits(i, graph.labels[i]);
        loss *= inv_train;
        if (!std::isfinite(loss))
            throw TrainingDivergedError("train: non-finite loss at epoch " + std::to_string(epoch), epoch);
        result.loss_history.push_back(loss);
        const double acc = accuracy_on(train_nodes);
        result.accuracy_history.push_back(acc);
        if (acc > best_accuracy || (acc == best_accuracy && loss < best_loss)) {
            best_accuracy = acc;
            best_loss = loss;
            best_model = model;
        }

        dlogits = Matrix(n, k);
        for (int i : train_nodes) {
            const double* prow = probs.row(i);
            double* drow = dlogits.row(i);
            for (int j = 0; j < k; ++j) drow[j] = prow[j] * inv_train;
            drow[graph.labels[i]] -= inv_train;
        }

        Matrix dwc = matmul_at_b(h[layers], dlogits);
        std::vector<double> dbc(k, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j) dbc[j] += dlogits(i, j);
        for (int r = 0; r < hidden; ++r)
            for (int c = 0; c < k; ++c) dwc(r, c) += config.weight_decay * model.classifier(r, c);
        dh = matmul_a_bt(dlogits, model.classifier);

        std::vector<Matrix> dw(layers);
        std::vector<std::vector<double>> db(layers);
        for (int l = layers - 1; l >= 0; --l) {
            dq = std::move(dh);
            for (int i = 0; i < n; ++i) {
                const double* hrow = h[l + 1].row(i);
                double* row = dq.row(i);
                for (int j = 0; j < hidden; ++j)
                    if (hrow[j] <= 0.0) row[j] = 0.0;
            }
            db[l].assign(hidden, 0.0);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < hidden; ++j) db[l][j] += dq(i, j);
            dw[l] = matmul_at_b(p[l], dq);
            for (int r = 0; r < dw[l].rows(); ++r)
                for (int c = 0; c < hidden; ++c)
                    dw[l](r, c) += config.weight_decay * model.layer_weights[l](r, c);
            if (l > 0) {
                dp = matmul_a_bt(dq, model.layer_weights[l]);
                s.multiply(dp, scratch);
                dh = std::move(scratch);
            }
        }

        // cosine decay to a tenth of the base rate; full-batch Adam at a
        // constant rate oscillates hard near convergence on these graphs
        const double progress = static_cast<double>(epoch) / static_cast<double>(config.epochs);
        const double lr = config.learning_rate *
                          (0.1 + 0.9 * 0.5 * (1.0 + std::cos(3.14159265358979323846 * progress)));
        const double mom = config.momentum;
        const bool adam = config.optimizer == Optimizer::Adam;
        const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
        const double bias1 = 1.0 - std::pow(beta1, epoch + 1);
        const double bias2 = 1.0 - std::pow(beta2, epoch + 1);
        auto step = [&](double& param, double& m1, double& m2, double g) {
            if (adam) {
                m1 = beta1 * m1 + (1.0 - beta1) * g;
                m2 = beta2 * m2 + (1.0 - beta2) * g * g;
                param -= lr * (m1 / bias1) / (std::sqrt(m2 / bias2) + eps);
            } else {
                m1 = mom * m1 + g;
                param -= lr * m1;
            }
        };
        auto step_matrix = [&](Matrix& param, Matrix& m1, Matrix& m2, const Matrix& grad) {
            for (int r = 0; r < param.rows(); ++r)
                for (int c = 0; c < param.cols(); ++c)
                    step(param(r, c), m1(r, c), m2(r, c), grad(r, c));
        };
        auto step_vector = [&](std::vector<double>& param, std::vector<double>& m1,
                               std::vector<double>& m2, const std::vector<double>& grad) {
            for (std::size_t i = 0; i < param.size(); ++i) step(param[i], m1[i], m2[i], grad[i]);
        };
        for (int l = 0; l < layers; ++l) {
            step_matrix(model.layer_weights[l], m1_w[l], m2_w[l], dw[l]);
            step_vector(model.layer_biases[l], m1_b[l], m2_b[l], db[l]);
        }
        step_matrix(model.classifier, m1_c, m2_c, dwc);
        step_vector(model.classifier_bias, m1_cb, m2_cb, dbc);
    }

    // keep the best checkpoint seen during the run (train accuracy, then loss)
    run_forward();
    const double final_accuracy = accuracy_on(train_nodes);
    if (final_accuracy > best_accuracy) best_model = std::move(model);
    model = std::move(best_model);
    run_forward();
    result.train_accuracy = accuracy_on(train_nodes);
    result.test_accuracy = accuracy_on(test_nodes);
    result.model = std::move(model);
    result.train_nodes = std::move(train_nodes);
    result.test_nodes = std::move(test_nodes);
    return result;
}

}  // namespace

TrainResult train(const Graph& graph, const TrainConfig& config) {
    if (graph.num_nodes == 0) throw std::domain_error("train: empty graph");
    if (config.hidden_dim < 1 || config.epochs < 1 || config.learning_rate <= 0.0 ||
        config.weight_decay < 0.0 || config.momentum < 0.0 || config.restarts < 1)
        throw std::domain_error("train: invalid config");
    if (!(config.train_fraction > 0.0 && config.train_fraction <= 1.0))
        throw std::domain_error("train: train_fraction outside (0, 1]");

    TrainResult best;
    for (int r = 0; r < config.restarts; ++r) {
        TrainResult run = train_single(graph, config, mix_seed(config.seed, 7000 + r));
        if (r == 0 || run.train_accuracy > best.train_accuracy ||
            (run.train_accuracy == best.train_accuracy &&
             run.loss_history.back() < best.loss_history.back()))
            best = std::move(run);
    }
    return best;
}

namespace {

struct LocalGraph {
    std::vector<int> nodes;                        // sorted original ids
    std::vector<std::pair<int, int>> edges;        // local indices, canonical order
    std::vector<double> extra_degree;              // kept-edge weight leaving the node set
    Matrix features;
    int target_local = 0;
};

// Nodes reachable from `target` within `hops` through `kept` edges. Edges of
// `kept` leading outside that set still count toward degrees, which keeps the
// target's output identical to the full-graph computation.
LocalGraph build_local(const Graph& graph, int target, const EdgeSet& kept, int hops) {
    std::vector<int> dist(graph.num_nodes, -1);
    std::deque<int> queue;
    dist[target] = 0;
    queue.push_back(target);

    // adjacency restricted to kept edges
    std::map<int, std::vector<int>> kept_adj;
    for (const Edge& e : kept) {
        kept_adj[e.u].push_back(e.v);
        kept_adj[e.v].push_back(e.u);
    }
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        if (dist[u] == hops) continue;
        auto it = kept_adj.find(u);
        if (it == kept_adj.end()) continue;
        for (int v : it->second) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }

    LocalGraph local;
    for (int i = 0; i < graph.num_nodes; ++i)
        if (dist[i] >= 0) local.nodes.push_back(i);
    std::vector<int> index(graph.num_nodes, -1);
    for (std::size_t i = 0; i < local.nodes.size(); ++i) index[local.nodes[i]] = static_cast<int>(i);

    local.extra_degree.assign(local.nodes.size(), 0.0);
    for (const Edge& e : kept) {
        const int iu = index[e.u], iv = index[e.v];
        if (iu >= 0 && iv >= 0) local.edges.emplace_back(iu, iv);
        else if (iu >= 0) local.extra_degree[iu] += 1.0;
        else if (iv >= 0) local.extra_degree[iv] += 1.0;
    }

    local.features = Matrix(static_cast<int>(local.nodes.size()), graph.features.cols());
    for (std::size_t i = 0; i < local.nodes.size(); ++i)
        for (int j = 0; j < graph.features.cols(); ++j)
            local.features(static_cast<int>(i), j) = graph.features(local.nodes[i], j);
    local.target_local = index[target];
    return local;
}

// S * H for a weighted local graph; diag entries of S are 1/D_u.
void local_multiply(const std::vector<std::pair<int, int>>& edges,
                    const std::vector<double>& edge_scale, const std::vector<double>& inv_deg,
                    const Matrix& h, Matrix& out) {
    const int d = h.cols();
    if (out.rows() != h.rows() || out.cols() != d) out = Matrix(h.rows(), d);
    for (int i = 0; i < h.rows(); ++i) {
        const double* hrow = h.row(i);
        double* orow = out.row(i);
        const double di = inv_deg[i];
        for (int j = 0; j < d; ++j) orow[j] = di * hrow[j];
    }
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto [u, v] = edges[e];
        const double s = edge_scale[e];
        if (s == 0.0) continue;
        const double* hu = h.row(u);
        const double* hv = h.row(v);
        double* ou = out.row(u);
        double* ov = out.row(v);
        for (int j = 0; j < d; ++j) {
            ou[j] += s * hv[j];
            ov[j] += s * hu[j];
        }
    }
}

// forward through the conv stack; h_out[l] holds H^l, returns target logits
void local_forward_impl(const GcnModel& model, const LocalGraph& lg,
                        const std::vector<double>& weights, std::vector<Matrix>& h_out,
                        std::vector<double>& target_logits, std::vector<double>& inv_sqrt_deg,
                        std::vector<double>& edge_scale) {
    const int n0 = static_cast<int>(lg.nodes.size());
    const int layers = model.num_layers();

    std::vector<double> deg(n0, 1.0);
    for (int i = 0; i < n0; ++i) deg[i] += lg.extra_degree[i];
    for (std::size_t e = 0; e < lg.edges.size(); ++e) {
        deg[lg.edges[e].first] += weights[e];
        deg[lg.edges[e].second] += weights[e];
    }
    inv_sqrt_deg.resize(n0);
    std::vector<double> inv_deg(n0);
    for (int i = 0; i < n0; ++i) {
        inv_sqrt_deg[i] = 1.0 / std::sqrt(deg[i]);
        inv_deg[i] = 1.0 / deg[i];
    }
    edge_scale.resize(lg.edges.size());
    for (std::size_t e = 0; e < lg.edges.size(); ++e)
        edge_scale[e] = weights[e] * inv_sqrt_deg[lg.edges[e].first] * inv_sqrt_deg[lg.edges[e].second];

    h_out.resize(layers + 1);
    h_out[0] = lg.features;
    Matrix p;
    for (int l = 0; l < layers; ++l) {
        local_multiply(lg.edges, edge_scale, inv_deg, h_out[l], p);
        h_out[l + 1] = matmul(p, model.layer_weights[l]);
        add_bias_relu(h_out[l + 1], model.layer_biases[l]);
    }

    const int k = model.class_count();
    target_logits.assign(k, 0.0);
    const double* zrow = h_out[layers].row(lg.target_local);
    for (int j = 0; j < k; ++j) {
        double sum = model.classifier_bias[j];
        for (int r = 0; r < model.output_dim(); ++r) sum += zrow[r] * model.classifier(r, j);
        target_logits[j] = sum;
    }
}

Prediction predict_from_logits(const std::vector<double>& logits) {
    Prediction pred;
    pred.probs.resize(logits.size());
    softmax_row(logits.data(), pred.probs.data(), static_cast<int>(logits.size()));
    pred.predicted_class = argmax_row(pred.probs.data(), static_cast<int>(pred.probs.size()));
    return pred;
}

}  // namespace

FieldProblem::FieldProblem(const GcnModel& model, const Graph& graph, int target,
                           const EdgeSet& field)
    : model_(&model) {
    model.validate();
    if (target < 0 || target >= graph.num_nodes)
        throw std::domain_error("field: invalid target node");
    if (!field.is_subset_of(graph.edges))
        throw std::domain_error("field: edges not a subset of the graph");
    if (graph.features.cols() != model.input_dim())
        throw std::domain_error("field: feature dim != model input dim");

    // node set: field-edge endpoints plus the target
    std::vector<int> nodes{target};
    for (const Edge& e : field) {
        nodes.push_back(e.u);
        nodes.push_back(e.v);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    nodes_ = std::move(nodes);

    std::vector<int> index(graph.num_nodes, -1);
    for (std::size_t i = 0; i < nodes_.size(); ++i) index[nodes_[i]] = static_cast<int>(i);
    target_local_ = index[target];

    edges_.assign(field.begin(), field.end());
    local_edges_.reserve(edges_.size());
    for (const Edge& e : edges_) local_edges_.emplace_back(index[e.u], index[e.v]);

    features_ = Matrix(static_cast<int>(nodes_.size()), graph.features.cols());
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        for (int j = 0; j < graph.features.cols(); ++j)
            features_(static_cast<int>(i), j) = graph.features(nodes_[i], j);
}

void FieldProblem::forward_local(const std::vector<double>& edge_weights, std::vector<Matrix>& h_out,
                                 std::vector<double>& target_logits,
                                 std::vector<double>& inv_sqrt_deg) const {
    LocalGraph lg;
    lg.nodes = nodes_;
    lg.edges = local_edges_;
    lg.extra_degree.assign(nodes_.size(), 0.0);
    lg.features = features_;
    lg.target_local = target_local_;
    std::vector<double> edge_scale;
    local_forward_impl(*model_, lg, edge_weights, h_out, target_logits, inv_sqrt_deg, edge_scale);
}

Prediction FieldProblem::predict(const std::vector<double>& edge_weights) const {
    if (edge_weights.size() != edges_.size())
        throw std::domain_error("field: weight count != edge count");
    std::vector<Matrix> h;
    std::vector<double> logits, r;
    forward_local(edge_weights, h, logits, r);
    return predict_from_logits(logits);
}

Prediction FieldProblem::predict_full_field() const {
    return predict(std::vector<double>(edges_.size(), 1.0));
}

double FieldProblem::objective(const std::vector<double>& logits_in,
                               const MaskLossSpec& spec) const {
    if (logits_in.size() != edges_.size())
        throw std::domain_error("field: logit count != edge count");
    if (spec.target_class < 0 || spec.target_class >= model_->class_count())
        throw std::domain_error("field: target class out of range");

    std::vector<double> w(edges_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) w[e] = sigmoid(logits_in[e]);

    std::vector<Matrix> h;
    std::vector<double> logits, r;
    forward_local(w, h, logits, r);

    double loss = log_sum_exp(logits.data(), static_cast<int>(logits.size())) - logits[spec.target_class];
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        loss += spec.size_coeff * w[e];
        loss += spec.entropy_coeff * mask_entropy_term(logits_in[e]);
    }
    return loss;
}

std::vector<double> FieldProblem::gradient(const std::vector<double>& logits_in,
                                           const MaskLossSpec& spec) const {
    if (logits_in.size() != edges_.size())
        throw std::domain_error("field: logit count != edge count");
    if (spec.target_class < 0 || spec.target_class >= model_->class_count())
        throw std::domain_error("field: target class out of range");

    const int n0 = static_cast<int>(nodes_.size());
    const int layers = model_->num_layers();
    const std::size_t ne = edges_.size();

    std::vector<double> w(ne);
    for (std::size_t e = 0; e < ne; ++e) w[e] = sigmoid(logits_in[e]);

    std::vector<Matrix> h;
    std::vector<double> target_logits, r;
    forward_local(w, h, target_logits, r);

    std::vector<double> inv_deg(n0), edge_scale(ne);
    for (int i = 0; i < n0; ++i) inv_deg[i] = r[i] * r[i];
    for (std::size_t e = 0; e < ne; ++e)
        edge_scale[e] = w[e] * r[local_edges_[e].first] * r[local_edges_[e].second];

    const int k = model_->class_count();
    std::vector<double> probs(k);
    softmax_row(target_logits.data(), probs.data(), k);

    // dH^L: only the target row is touched by the loss
    Matrix dh(n0, model_->output_dim());
    {
        double* drow = dh.row(target_local_);
        for (int rdim = 0; rdim < model_->output_dim(); ++rdim) {
            double sum = 0.0;
            for (int j = 0; j < k; ++j) {
                const double dl = probs[j] - (j == spec.target_class ? 1.0 : 0.0);
                sum += dl * model_->classifier(rdim, j);
            }
            drow[rdim] = sum;
        }
    }

    // gradient w.r.t. the nonzero entries of S, accumulated over layers
    std::vector<double> ds_uv(ne, 0.0), ds_vu(ne, 0.0), ds_diag(n0, 0.0);

    Matrix dq, dp, scratch;
    for (int l = layers - 1; l >= 0; --l) {
        dq = std::move(dh);
        const int dl_out = model_->layer_weights[l].cols();
        for (int i = 0; i < n0; ++i) {
            const double* hrow = h[l + 1].row(i);
            double* row = dq.row(i);
            for (int j = 0; j < dl_out; ++j)
                if (hrow[j] <= 0.0) row[j] = 0.0;
        }
        dp = matmul_a_bt(dq, model_->layer_weights[l]);

        const int d = dp.cols();
        for (std::size_t e = 0; e < ne; ++e) {
            const auto [u, v] = local_edges_[e];
            const double* dpu = dp.row(u);
            const double* dpv = dp.row(v);
            const double* hu = h[l].row(u);
            const double* hv = h[l].row(v);
            double suv = 0.0, svu = 0.0;
            for (int j = 0; j < d; ++j) {
                suv += dpu[j] * hv[j];
                svu += dpv[j] * hu[j];
            }
            ds_uv[e] += suv;
            ds_vu[e] += svu;
        }
        for (int i = 0; i < n0; ++i) {
            const double* dpi = dp.row(i);
            const double* hi = h[l].row(i);
            double s = 0.0;
            for (int j = 0; j < d; ++j) s += dpi[j] * hi[j];
            ds_diag[i] += s;
        }

        if (l > 0) {
            // S is symmetric, so S^T dP = S dP
            local_multiply(local_edges_, edge_scale, inv_deg, dp, scratch);
            dh = std::move(scratch);
        }
    }

    // chain S -> (w, r) -> degrees -> w
    std::vector<double> dw(ne, 0.0), dr(n0, 0.0);
    for (std::size_t e = 0; e < ne; ++e) {
        const auto [u, v] = local_edges_[e];
        const double both = ds_uv[e] + ds_vu[e];
        dw[e] += both * r[u] * r[v];
        dr[u] += both * w[e] * r[v];
        dr[v] += both * w[e] * r[u];
    }
    for (int i = 0; i < n0; ++i) dr[i] += ds_diag[i] * 2.0 * r[i];

    std::vector<double> ddeg(n0);
    for (int i = 0; i < n0; ++i) ddeg[i] = -0.5 * r[i] * r[i] * r[i] * dr[i];
    for (std::size_t e = 0; e < ne; ++e) {
        const auto [u, v] = local_edges_[e];
        dw[e] += ddeg[u] + ddeg[v];
    }

    std::vector<double> grad(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        const double sprime = w[e] * (1.0 - w[e]);
        grad[e] = dw[e] * sprime + spec.size_coeff * sprime -
                  spec.entropy_coeff * logits_in[e] * sprime;
    }
    return grad;
}

Prediction predict_on_subset(const GcnModel& model, const Graph& graph, int node,
                             const EdgeSet& kept_edges) {
    model.validate();
    if (node < 0 || node >= graph.num_nodes)
        throw std::domain_error("predict_on_subset: invalid node id");
    if (!kept_edges.is_subset_of(graph.edges))
        throw std::domain_error("predict_on_subset: kept edges not a subset of the graph");
    if (graph.features.cols() != model.input_dim())
        throw std::domain_error("predict_on_subset: feature dim != model input dim");

    LocalGraph lg = build_local(graph, node, kept_edges, model.num_layers());
    std::vector<Matrix> h;
    std::vector<double> logits, r, edge_scale;
    local_forward_impl(model, lg, std::vector<double>(lg.edges.size(), 1.0), h, logits, r,
                       edge_scale);
    return predict_from_logits(logits);
}

namespace {

std::vector<double> logits_vector_from_map(const FieldProblem& problem, const EdgeSet& field,
                                           const std::map<Edge, double>& mask_logits) {
    if (mask_logits.size() != field.size())
        throw std::domain_error("mask: logits must be defined exactly on the field edges");
    std::vector<double> v;
    v.reserve(problem.edges().size());
    for (const Edge& e : problem.edges()) {
        auto it = mask_logits.find(e);
        if (it == mask_logits.end())
            throw std::domain_error("mask: logit for an edge outside the field");
        v.push_back(it->second);
    }
    return v;
}

}  // namespace

std::map<Edge, double> mask_gradient(const GcnModel& model, const Graph& graph, int node,
                                     const EdgeSet& field, const std::map<Edge, double>& mask_logits,
                                     const MaskLossSpec& spec) {
    FieldProblem problem(model, graph, node, field);
    std::vector<double> grad = problem.gradient(logits_vector_from_map(problem, field, mask_logits), spec);
    std::map<Edge, double> out;
    for (std::size_t e = 0; e < grad.size(); ++e) out[problem.edges()[e]] = grad[e];
    return out;
}

double mask_objective(const GcnModel& model, const Graph& graph, int node, const EdgeSet& field,
                      const std::map<Edge, double>& mask_logits, const MaskLossSpec& spec) {
    FieldProblem problem(model, graph, node, field);
    return problem.objective(logits_vector_from_map(problem, field, mask_logits), spec);
}

}  // namespace gnnx
