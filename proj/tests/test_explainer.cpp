#include <doctest.h>

#include <cmath>

#include "gnnx/error.hpp"
#include "gnnx/explainer.hpp"
#include "gnnx/rng.hpp"
#include "gnnx/synth.hpp"

using namespace gnnx;

namespace {

// one small clean BA-Shapes instance and a model trained on it, shared
// across the behavioral cases (training is the expensive part)
struct Fixture {
    Graph graph;
    GcnModel model;

    Fixture() {
        BaShapesParams params;
        params.base_nodes = 30;
        params.num_motifs = 5;
        params.ba_attachment = 2;
        params.noise_fraction = 0.0;
        params.seed = 4;
        graph = generate_ba_shapes(params);

        TrainConfig config;
        config.epochs = 600;
        config.hidden_dim = 16;
        config.restarts = 2;
        config.seed = 10;
        model = train(graph, config).model;
    }
};

const Fixture& fixture() {
    static Fixture f;
    return f;
}

}  // namespace

TEST_SUITE("explainer") {

TEST_CASE("zero epochs and zero regularization return the noisy initialization") {
    const Fixture& f = fixture();
    ExplainConfig config;
    config.epochs = 0;
    config.size_coeff = 0.0;
    config.entropy_coeff = 0.0;
    config.seed = 3;
    EdgeMask mask = explain(f.model, f.graph, 31, config);
    const double lo = sigmoid(-0.1), hi = sigmoid(0.1);
    for (const auto& [e, s] : mask.scores) {
        CHECK(s >= lo);
        CHECK(s <= hi);
    }
    CHECK(mask.scores.size() == mask.field.size());
}

TEST_CASE("scores live strictly inside (0,1) on exactly the field edges") {
    const Fixture& f = fixture();
    ExplainConfig config;
    config.epochs = 40;
    config.seed = 8;
    EdgeMask mask = explain(f.model, f.graph, 33, config);
    ReceptiveField field = receptive_field(f.graph, 33, 3);
    CHECK(mask.field == field.edges);
    REQUIRE(mask.scores.size() == field.edges.size());
    for (const auto& [e, s] : mask.scores) {
        CHECK(field.edges.contains(e));
        CHECK(s > 0.0);
        CHECK(s < 1.0);
    }
}

TEST_CASE("same seed, same node: identical scores to the last bit") {
    const Fixture& f = fixture();
    ExplainConfig config;
    config.epochs = 50;
    config.seed = 77;
    EdgeMask a = explain(f.model, f.graph, 40, config);
    EdgeMask b = explain(f.model, f.graph, 40, config);
    REQUIRE(a.scores.size() == b.scores.size());
    for (const auto& [e, s] : a.scores) CHECK(s == b.scores.at(e));
}

TEST_CASE("extreme size pressure drives the mean score toward zero") {
    const Fixture& f = fixture();
    ExplainConfig config;
    config.size_coeff = 1e3;
    config.seed = 5;
    EdgeMask mask = explain(f.model, f.graph, 35, config);
    double mean = 0.0;
    for (const auto& [e, s] : mask.scores) mean += s;
    mean /= static_cast<double>(mask.scores.size());
    CHECK(mean < 0.1);
}

TEST_CASE("plain descent with a small step does not increase the objective on a smoke graph") {
    // 15-node graph: two triangles bridged by a path
    std::vector<Edge> edges{Edge(0, 1), Edge(1, 2),   Edge(0, 2),   Edge(2, 3),   Edge(3, 4),
                            Edge(4, 5), Edge(5, 6),   Edge(6, 7),   Edge(5, 7),   Edge(7, 8),
                            Edge(8, 9), Edge(9, 10),  Edge(10, 11), Edge(11, 12), Edge(12, 13),
                            Edge(13, 14)};
    Graph g = Graph::create(15, EdgeSet(edges), Matrix(15, 3, 1.0), std::vector<int>(15, 0));
    Rng rng(91);
    GcnModel m;
    {
        TrainConfig tc;
        tc.epochs = 30;
        tc.hidden_dim = 6;
        tc.restarts = 1;
        tc.seed = 1;
        m = train(g, tc).model;
    }
    FieldProblem problem(m, g, 2, receptive_field(g, 2, 3).edges);
    MaskLossSpec spec;
    spec.target_class = problem.predict_full_field().predicted_class;
    spec.size_coeff = 0.005;
    spec.entropy_coeff = 0.02;

    std::vector<double> logits(problem.edge_count());
    for (double& v : logits) v = rng.uniform(-0.1, 0.1);
    double prev = problem.objective(logits, spec);
    for (int epoch = 0; epoch < 25; ++epoch) {
        const auto grad = problem.gradient(logits, spec);
        for (std::size_t e = 0; e < logits.size(); ++e) logits[e] -= 0.01 * grad[e];
        const double now = problem.objective(logits, spec);
        CHECK(now <= prev + 1e-12);
        prev = now;
    }
}

TEST_CASE("house-only field: the bridge edge scores below every house edge") {
    const Fixture& f = fixture();
    // pick a top node whose prediction hinges on its roof
    const int top = 30;  // first motif node of the instance
    REQUIRE(f.graph.roles[top] == kRoleTop);
    ExplainConfig config;
    config.size_coeff = 0.05;  // strong size pressure
    config.entropy_coeff = 0.02;
    config.seed = 21;
    EdgeMask mask = explain(f.model, f.graph, top, config);
    const EdgeSet& house = f.graph.gt_explanations.at(top);
    double min_house = 1.0, max_other = 0.0;
    for (const auto& [e, s] : mask.scores)
        (house.contains(e) ? min_house = std::min(min_house, s)
                           : max_other = std::max(max_other, s));
    CHECK(max_other < min_house);
}

TEST_CASE("two seeds on the same node produce rank-correlated scores") {
    const Fixture& f = fixture();
    ExplainConfig a_cfg, b_cfg;
    a_cfg.seed = 100;
    b_cfg.seed = 200;
    // house nodes of the first two motifs
    for (int node : {30, 31, 35}) {
        EdgeMask a = explain(f.model, f.graph, node, a_cfg);
        EdgeMask b = explain(f.model, f.graph, node, b_cfg);
        REQUIRE(a.scores.size() == b.scores.size());

        // Spearman rank correlation over the shared canonical edge order
        auto ranks = [](const EdgeMask& mask) {
            std::vector<std::pair<double, std::size_t>> order;
            std::size_t i = 0;
            for (const auto& [e, s] : mask.scores) order.emplace_back(s, i++);
            std::sort(order.begin(), order.end());
            std::vector<double> r(order.size());
            for (std::size_t k = 0; k < order.size(); ++k) r[order[k].second] = static_cast<double>(k);
            return r;
        };
        const std::vector<double> ra = ranks(a), rb = ranks(b);
        const double n = static_cast<double>(ra.size());
        double mean = (n - 1.0) / 2.0, num = 0.0, da = 0.0, db = 0.0;
        for (std::size_t k = 0; k < ra.size(); ++k) {
            num += (ra[k] - mean) * (rb[k] - mean);
            da += (ra[k] - mean) * (ra[k] - mean);
            db += (rb[k] - mean) * (rb[k] - mean);
        }
        const double spearman = num / std::sqrt(da * db);
        CHECK(spearman >= 0.7);
    }
}

TEST_CASE("keeping the whole receptive field reproduces the full-graph class") {
    // Not exact for every node: under the kept-edges semantics the degrees of
    // field-boundary nodes drop their out-of-field edges, which can flip a
    // node that sits on a decision boundary. Agreement must still be the norm.
    const Fixture& f = fixture();
    ForwardResult full = forward(f.model, normalized_adjacency(f.graph), f.graph.features);
    int agree = 0, total = 0;
    for (const auto& [node, gt] : f.graph.gt_explanations) {
        const ReceptiveField field = receptive_field(f.graph, node, 3);
        const Prediction p = predict_on_subset(f.model, f.graph, node, field.edges);
        int full_class = 0;
        for (int j = 1; j < full.probs.cols(); ++j)
            if (full.probs(node, j) > full.probs(node, full_class)) full_class = j;
        ++total;
        agree += p.predicted_class == full_class ? 1 : 0;
    }
    CHECK(agree >= (total * 9) / 10);
    CHECK(total == 25);
}

TEST_CASE("explaining an isolated node fails with an empty-field error") {
    Graph g = Graph::create(3, EdgeSet({Edge(1, 2)}), Matrix(3, 4, 1.0), {0, 0, 0});
    Rng rng(1);
    TrainConfig tc;
    tc.epochs = 5;
    tc.hidden_dim = 4;
    tc.restarts = 1;
    GcnModel m = train(g, tc).model;
    CHECK_THROWS_AS(explain(m, g, 0, ExplainConfig{}), EmptyFieldError);
}

TEST_CASE("full-field baseline scores everything 1") {
    const Fixture& f = fixture();
    EdgeMask mask = baseline_full_field(f.graph, 32, 3);
    CHECK(mask.field == receptive_field(f.graph, 32, 3).edges);
    for (const auto& [e, s] : mask.scores) CHECK(s == 1.0);

    EdgeMask empty = baseline_full_field(f.graph, 32, 0);
    CHECK(empty.field.empty());
    CHECK(empty.scores.empty());
}

TEST_CASE("ground-truth baseline marks exactly the motif edges") {
    const Fixture& f = fixture();
    EdgeMask mask = baseline_ground_truth(f.graph, 31);
    int ones = 0;
    for (const auto& [e, s] : mask.scores) {
        CHECK((s == 0.0 || s == 1.0));
        ones += s == 1.0 ? 1 : 0;
    }
    CHECK(ones == 6);

    CHECK_THROWS_AS(baseline_ground_truth(f.graph, 0), std::domain_error);  // base node

    TreeCyclesParams tc;
    tc.tree_levels = 3;
    tc.num_motifs = 2;
    tc.noise_fraction = 0.0;
    tc.seed = 2;
    Graph cycles = generate_tree_cycles(tc);
    EdgeMask cmask = baseline_ground_truth(cycles, 15);
    int cycle_ones = 0;
    for (const auto& [e, s] : cmask.scores) cycle_ones += s == 1.0 ? 1 : 0;
    CHECK(cycle_ones == 6);
}

}  // TEST_SUITE
