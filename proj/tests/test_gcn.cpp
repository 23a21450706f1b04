#include <doctest.h>

#include <cmath>
#include <vector>

#include "gnnx/error.hpp"
#include "gnnx/gcn.hpp"
#include "gnnx/rng.hpp"
#include "gnnx/synth.hpp"

using namespace gnnx;

namespace {

GcnModel zero_model(int d_in, int hidden, int k, int layers = 3) {
    GcnModel m;
    for (int l = 0; l < layers; ++l) {
        m.layer_weights.emplace_back(l == 0 ? d_in : hidden, hidden);
        m.layer_biases.emplace_back(hidden, 0.0);
    }
    m.classifier = Matrix(hidden, k);
    m.classifier_bias.assign(k, 0.0);
    return m;
}

GcnModel random_model(int d_in, int hidden, int k, Rng& rng, int layers = 3) {
    GcnModel m = zero_model(d_in, hidden, k, layers);
    auto fill = [&](Matrix& w) {
        for (int i = 0; i < w.rows(); ++i)
            for (int j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-0.8, 0.8);
    };
    for (auto& w : m.layer_weights) fill(w);
    for (auto& b : m.layer_biases)
        for (double& x : b) x = rng.uniform(-0.3, 0.3);
    fill(m.classifier);
    for (double& x : m.classifier_bias) x = rng.uniform(-0.3, 0.3);
    return m;
}

Graph random_graph(int n, double p, Rng& rng, int d_in = 4) {
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (rng.uniform() < p) edges.emplace_back(u, v);
    Matrix features(n, d_in);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d_in; ++j) features(i, j) = rng.uniform(-1.0, 1.0);
    std::vector<int> labels(n, 0);
    return Graph::create(n, EdgeSet(std::move(edges)), std::move(features), std::move(labels));
}

// test-local re-evaluation of the three matrix products with its own loops
std::vector<double> forward_oracle_row(const GcnModel& m, const Matrix& adj, const Matrix& x,
                                       int row) {
    const int n = adj.rows();
    std::vector<std::vector<double>> h(n, std::vector<double>(x.cols()));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < x.cols(); ++j) h[i][j] = x(i, j);

    for (int l = 0; l < m.num_layers(); ++l) {
        const Matrix& w = m.layer_weights[l];
        std::vector<std::vector<double>> propagated(n, std::vector<double>(h[0].size(), 0.0));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (std::size_t f = 0; f < h[0].size(); ++f)
                    propagated[i][f] += adj(i, j) * h[j][f];
        std::vector<std::vector<double>> next(n, std::vector<double>(w.cols()));
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < w.cols(); ++c) {
                double sum = m.layer_biases[l][c];
                for (int r = 0; r < w.rows(); ++r) sum += propagated[i][r] * w(r, c);
                next[i][c] = std::max(0.0, sum);
            }
        h = std::move(next);
    }
    std::vector<double> logits(m.class_count());
    for (int c = 0; c < m.class_count(); ++c) {
        double sum = m.classifier_bias[c];
        for (int r = 0; r < m.classifier.rows(); ++r) sum += h[row][r] * m.classifier(r, c);
        logits[c] = sum;
    }
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double z = 0.0;
    for (double v : logits) z += std::exp(v - mx);
    std::vector<double> probs(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) probs[i] = std::exp(logits[i] - mx) / z;
    return probs;
}

}  // namespace

TEST_SUITE("gcn") {

TEST_CASE("all-zero weights give uniform class probabilities") {
    Rng rng(4);
    Graph g = random_graph(8, 0.4, rng);
    GcnModel m = zero_model(4, 6, 4);
    ForwardResult r = forward(m, normalized_adjacency(g), g.features);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 4; ++j) CHECK(r.probs(i, j) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("single isolated node with identity weights reproduces softmax of the features") {
    GcnModel m;
    m.layer_weights.emplace_back(2, 2);
    m.layer_weights[0](0, 0) = 1.0;
    m.layer_weights[0](1, 1) = 1.0;
    m.layer_biases.emplace_back(2, 0.0);
    m.classifier = m.layer_weights[0];
    m.classifier_bias = {0.0, 0.0};

    Matrix adj(1, 1);
    adj(0, 0) = 1.0;
    Matrix features(1, 2);
    features(0, 0) = 0.4;
    features(0, 1) = 1.3;
    ForwardResult r = forward(m, adj, features);
    const double z = std::exp(0.4) + std::exp(1.3);
    CHECK(r.probs(0, 0) == doctest::Approx(std::exp(0.4) / z).epsilon(1e-12));
    CHECK(r.probs(0, 1) == doctest::Approx(std::exp(1.3) / z).epsilon(1e-12));
}

TEST_CASE("forward matches an independently coded oracle on a random graph") {
    Rng rng(31);
    Graph g = random_graph(10, 0.35, rng);
    GcnModel m = random_model(4, 5, 3, rng);
    Matrix adj = normalized_adjacency(g);
    ForwardResult r = forward(m, adj, g.features);
    for (int node = 0; node < g.num_nodes; ++node) {
        std::vector<double> oracle = forward_oracle_row(m, adj, g.features, node);
        for (int j = 0; j < 3; ++j)
            CHECK(r.probs(node, j) == doctest::Approx(oracle[j]).epsilon(1e-9));
    }
}

TEST_CASE("probability rows sum to one") {
    Rng rng(5150);
    Graph g = random_graph(12, 0.3, rng);
    GcnModel m = random_model(4, 6, 5, rng);
    ForwardResult r = forward(m, normalized_adjacency(g), g.features);
    for (int i = 0; i < g.num_nodes; ++i) {
        double sum = 0.0;
        for (int j = 0; j < 5; ++j) {
            CHECK(r.probs(i, j) >= 0.0);
            sum += r.probs(i, j);
        }
        CHECK(std::fabs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("forward rejects dimension mismatches") {
    GcnModel m = zero_model(4, 6, 3);
    Matrix adj(3, 3);
    CHECK_THROWS_AS(forward(m, adj, Matrix(4, 4)), std::domain_error);  // adj/features mismatch
    CHECK_THROWS_AS(forward(m, Matrix(4, 4), Matrix(4, 7)), std::domain_error);  // feature dim
    GcnModel broken = m;
    broken.layer_biases.pop_back();
    CHECK_THROWS_AS(forward(broken, Matrix(4, 4), Matrix(4, 4)), std::domain_error);
}

TEST_CASE("training on a two-cluster toy graph decreases the loss") {
    // two dense clusters bridged by a single edge, labels by cluster
    std::vector<Edge> edges;
    for (int u = 0; u < 10; ++u)
        for (int v = u + 1; v < 10; ++v)
            if ((u + v) % 2 == 0) edges.emplace_back(u, v);
    for (int u = 10; u < 20; ++u)
        for (int v = u + 1; v < 20; ++v)
            if ((u + v) % 2 == 1) edges.emplace_back(u, v);
    edges.emplace_back(9, 10);
    std::vector<int> labels(20, 0);
    for (int i = 10; i < 20; ++i) labels[i] = 1;
    Graph g = Graph::create(20, EdgeSet(std::move(edges)), Matrix(20, 4, 1.0), labels);

    TrainConfig config;
    config.epochs = 10;
    config.learning_rate = 0.001;
    config.optimizer = Optimizer::GradientDescent;
    config.momentum = 0.0;
    config.restarts = 1;
    config.seed = 17;
    TrainResult r = train(g, config);
    REQUIRE(r.loss_history.size() == 10);
    for (std::size_t i = 1; i < r.loss_history.size(); ++i)
        CHECK(r.loss_history[i] < r.loss_history[i - 1]);
}

TEST_CASE("all labels identical: accuracy 1 after the first epoch") {
    Rng rng(6);
    Graph g = random_graph(12, 0.3, rng);  // labels default to all-zero
    TrainConfig config;
    config.epochs = 1;
    config.restarts = 1;
    config.seed = 1;
    TrainResult r = train(g, config);
    CHECK(r.accuracy_history.front() == doctest::Approx(1.0));
    CHECK(r.train_accuracy == doctest::Approx(1.0));
}

TEST_CASE("training is deterministic given the seed") {
    BaShapesParams params;
    params.base_nodes = 30;
    params.num_motifs = 3;
    params.ba_attachment = 2;
    params.seed = 12;
    Graph g = generate_ba_shapes(params);
    TrainConfig config;
    config.epochs = 50;
    config.hidden_dim = 8;
    config.restarts = 2;
    config.seed = 99;
    TrainResult a = train(g, config);
    TrainResult b = train(g, config);
    REQUIRE(a.model.num_layers() == b.model.num_layers());
    for (int l = 0; l < a.model.num_layers(); ++l)
        CHECK(a.model.layer_weights[l].data() == b.model.layer_weights[l].data());
    CHECK(a.model.classifier.data() == b.model.classifier.data());
    CHECK(a.train_nodes == b.train_nodes);
}

TEST_CASE("the split is stratified and seeded") {
    BaShapesParams params;
    params.base_nodes = 50;
    params.num_motifs = 8;
    params.ba_attachment = 2;
    params.seed = 21;
    Graph g = generate_ba_shapes(params);
    TrainConfig config;
    config.epochs = 1;
    config.restarts = 1;
    config.seed = 5;
    TrainResult r = train(g, config);
    // 80% of each class, rounded: base 40/50, tops 6/8, shoulders 13/16, bottoms 13/16
    std::map<int, int> per_class;
    for (int node : r.train_nodes) ++per_class[g.labels[node]];
    CHECK(per_class.at(0) == 40);
    CHECK(per_class.at(1) == 6);
    CHECK(per_class.at(2) == 13);
    CHECK(per_class.at(3) == 13);
    CHECK(r.train_nodes.size() + r.test_nodes.size() == 90);
}

TEST_CASE("diverged training reports the epoch") {
    Rng rng(8);
    Graph g = random_graph(10, 0.4, rng);
    for (int i = 0; i < 10; ++i) g.labels[i] = i % 2;
    TrainConfig config;
    config.epochs = 400;
    config.learning_rate = 1e18;
    config.optimizer = Optimizer::GradientDescent;
    config.momentum = 0.0;
    config.restarts = 1;
    config.seed = 2;
    CHECK_THROWS_AS(train(g, config), TrainingDivergedError);
}

TEST_CASE("predict_on_subset with every edge kept equals the full forward pass") {
    Rng rng(14);
    Graph g = random_graph(14, 0.3, rng);
    GcnModel m = random_model(4, 6, 3, rng);
    ForwardResult full = forward(m, normalized_adjacency(g), g.features);
    for (int node = 0; node < g.num_nodes; ++node) {
        Prediction p = predict_on_subset(m, g, node, g.edges);
        for (int j = 0; j < 3; ++j)
            CHECK(p.probs[j] == doctest::Approx(full.probs(node, j)).epsilon(1e-12));
    }
}

TEST_CASE("predict_on_subset with nothing kept runs on self-loops only") {
    Rng rng(15);
    Graph g = random_graph(9, 0.4, rng);
    GcnModel m = random_model(4, 5, 3, rng);
    // an identity adjacency is exactly the all-self-loop graph
    Matrix eye(g.num_nodes, g.num_nodes);
    for (int i = 0; i < g.num_nodes; ++i) eye(i, i) = 1.0;
    ForwardResult isolated = forward(m, eye, g.features);
    for (int node : {0, 4, 8}) {
        Prediction p = predict_on_subset(m, g, node, EdgeSet{});
        for (int j = 0; j < 3; ++j)
            CHECK(p.probs[j] == doctest::Approx(isolated.probs(node, j)).epsilon(1e-12));
    }
}

TEST_CASE("predict_on_subset validates its inputs") {
    Rng rng(16);
    Graph g = random_graph(6, 0.5, rng);
    GcnModel m = random_model(4, 5, 3, rng);
    CHECK_THROWS_AS(predict_on_subset(m, g, 99, EdgeSet{}), std::domain_error);
    EdgeSet foreign({Edge(0, 5), Edge(1, 4), Edge(2, 3), Edge(0, 4), Edge(1, 5), Edge(0, 3),
                     Edge(1, 3), Edge(2, 5), Edge(2, 4), Edge(3, 5), Edge(3, 4), Edge(4, 5),
                     Edge(0, 1), Edge(0, 2), Edge(1, 2)});
    if (!foreign.is_subset_of(g.edges))
        CHECK_THROWS_AS(predict_on_subset(m, g, 0, foreign), std::domain_error);
}

TEST_CASE("mask gradient: size regularizer alone has a closed form") {
    // zero weights make the cross-entropy constant in the mask
    Rng rng(22);
    Graph g = random_graph(8, 0.5, rng);
    GcnModel m = zero_model(4, 5, 3);
    ReceptiveField field = receptive_field(g, 0, 3);
    REQUIRE(field.edges.size() >= 3);

    std::map<Edge, double> logits;
    double v = -1.0;
    for (const Edge& e : field.edges) logits[e] = (v += 0.35);

    MaskLossSpec spec;
    spec.target_class = 0;
    spec.size_coeff = 0.7;
    spec.entropy_coeff = 0.0;
    auto grad = mask_gradient(m, g, 0, field.edges, logits, spec);
    for (const auto& [e, gval] : grad) {
        const double s = sigmoid(logits.at(e));
        CHECK(gval == doctest::Approx(0.7 * s * (1.0 - s)).epsilon(1e-12));
    }
}

TEST_CASE("mask gradient matches central finite differences") {
    Rng rng(20240502);
    int instances = 0;
    double worst = 0.0;
    while (instances < 12) {
        Graph g = random_graph(6 + rng.uniform_int(9), 0.35, rng);
        GcnModel m = random_model(4, 5, 3, rng);
        ReceptiveField field = receptive_field(g, 0, 3);
        if (field.edges.size() < 2) continue;
        ++instances;

        std::map<Edge, double> logits;
        for (const Edge& e : field.edges) logits[e] = rng.uniform(-2.0, 2.0);
        MaskLossSpec spec;
        spec.target_class = rng.uniform_int(3);
        spec.size_coeff = 0.01;
        spec.entropy_coeff = 0.05;

        auto grad = mask_gradient(m, g, 0, field.edges, logits, spec);
        for (const Edge& e : field.edges) {
            const double h = 1e-5;
            auto hi = logits, lo = logits;
            hi[e] += h;
            lo[e] -= h;
            const double fd = (mask_objective(m, g, 0, field.edges, hi, spec) -
                               mask_objective(m, g, 0, field.edges, lo, spec)) /
                              (2.0 * h);
            const double denom = std::max(std::fabs(grad.at(e)) + std::fabs(fd), 1e-4);
            worst = std::max(worst, std::fabs(grad.at(e) - fd) / denom);
        }
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("mask gradient at saturated logits still matches finite differences") {
    Rng rng(33);
    Graph g = random_graph(9, 0.4, rng);
    GcnModel m = random_model(4, 5, 3, rng);
    ReceptiveField field = receptive_field(g, 2, 3);
    REQUIRE(field.edges.size() >= 2);
    std::map<Edge, double> logits;
    for (const Edge& e : field.edges) logits[e] = 8.0;  // sigmoid ~ 0.99966
    MaskLossSpec spec;
    spec.target_class = 1;
    auto grad = mask_gradient(m, g, 2, field.edges, logits, spec);
    for (const Edge& e : field.edges) {
        const double h = 1e-5;
        auto hi = logits, lo = logits;
        hi[e] += h;
        lo[e] -= h;
        const double fd = (mask_objective(m, g, 2, field.edges, hi, spec) -
                           mask_objective(m, g, 2, field.edges, lo, spec)) /
                          (2.0 * h);
        const double denom = std::max(std::fabs(grad.at(e)) + std::fabs(fd), 1e-4);
        CHECK(std::fabs(grad.at(e) - fd) / denom <= 1e-4);
    }
}

TEST_CASE("mask gradient rejects logits that do not cover the field exactly") {
    // path 0-1-2-3-4-5: the 3-hop field of node 0 is {01, 12, 23}
    std::vector<Edge> edges{Edge(0, 1), Edge(1, 2), Edge(2, 3), Edge(3, 4), Edge(4, 5)};
    Graph g = Graph::create(6, EdgeSet(edges), Matrix(6, 4, 1.0), std::vector<int>(6, 0));
    Rng rng(44);
    GcnModel m = random_model(4, 5, 3, rng);
    ReceptiveField field = receptive_field(g, 0, 3);
    REQUIRE(field.edges.size() == 3);
    MaskLossSpec spec;

    std::map<Edge, double> missing{{Edge(0, 1), 0.0}, {Edge(1, 2), 0.0}};
    CHECK_THROWS_AS(mask_gradient(m, g, 0, field.edges, missing, spec), std::domain_error);

    // an edge outside the field (3-4 exists in the graph but not in the field)
    std::map<Edge, double> outside{
        {Edge(0, 1), 0.0}, {Edge(1, 2), 0.0}, {Edge(3, 4), 0.0}};
    CHECK_THROWS_AS(mask_gradient(m, g, 0, field.edges, outside, spec), std::domain_error);
}

}  // TEST_SUITE
