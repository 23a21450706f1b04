#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "gnnx/error.hpp"
#include "gnnx/motif_search.hpp"
#include "gnnx/synth.hpp"

using namespace gnnx;

namespace {

GcnModel zero_model(int d_in, int k) {
    GcnModel m;
    for (int l = 0; l < 3; ++l) {
        m.layer_weights.emplace_back(l == 0 ? d_in : 4, 4);
        m.layer_biases.emplace_back(4, 0.0);
    }
    m.classifier = Matrix(4, k);
    m.classifier_bias.assign(k, 0.0);
    return m;
}

Graph small_ba_shapes() {
    BaShapesParams params;
    params.base_nodes = 20;
    params.num_motifs = 2;
    params.ba_attachment = 2;
    params.noise_fraction = 0.0;
    params.seed = 6;
    return generate_ba_shapes(params);
}

// degree-threshold toy: class 1 unless some mass flows in, see test cases
GcnModel handmade_flip_model() {
    GcnModel m;
    m.layer_weights.emplace_back(1, 1);
    m.layer_weights[0](0, 0) = 1.0;
    m.layer_biases.emplace_back(1, -1.05);
    m.classifier = Matrix(1, 2);
    m.classifier(0, 0) = 1.0;
    m.classifier(0, 1) = -1.0;
    m.classifier_bias = {0.0, 0.05};
    return m;
}

// exhaustive oracle: all nonempty edge subsets connected through the target
std::set<EdgeSet> connected_subsets_oracle(const Graph& g, int target, int max_edges) {
    const ReceptiveField field = receptive_field(g, target, 3);
    const std::vector<Edge>& edges = field.edges.edges();
    std::set<EdgeSet> result;
    const std::size_t total = std::size_t(1) << edges.size();
    for (std::size_t bits = 1; bits < total; ++bits) {
        std::vector<Edge> subset;
        for (std::size_t i = 0; i < edges.size(); ++i)
            if (bits & (std::size_t(1) << i)) subset.push_back(edges[i]);
        if (static_cast<int>(subset.size()) > max_edges) continue;
        // connected-through-target check by frontier growth
        std::set<int> reach{target};
        std::set<std::size_t> used;
        bool grew = true;
        while (grew) {
            grew = false;
            for (std::size_t i = 0; i < subset.size(); ++i) {
                if (used.count(i)) continue;
                if (reach.count(subset[i].u) || reach.count(subset[i].v)) {
                    reach.insert(subset[i].u);
                    reach.insert(subset[i].v);
                    used.insert(i);
                    grew = true;
                }
            }
        }
        if (used.size() == subset.size()) result.insert(EdgeSet(subset));
    }
    return result;
}

}  // namespace

TEST_SUITE("groundtruth_search") {

TEST_CASE("named candidates for a house shoulder") {
    Graph g = small_ba_shapes();
    const int shoulder = 21;
    REQUIRE(g.roles[shoulder] == kRoleShoulder);
    auto candidates = named_candidates(g, shoulder);

    std::map<std::string, int> sizes;
    for (const auto& c : candidates) sizes[c.name] = static_cast<int>(c.edges.size());
    CHECK(sizes.at("house") == 6);
    CHECK(sizes.at("triangle") == 3);
    CHECK(sizes.at("square") == 4);
    CHECK(sizes.at("target_only") == 0);
    // four zero-edge candidates for the other house nodes
    int node_candidates = 0;
    for (const auto& c : candidates)
        if (c.name.rfind("node:", 0) == 0) {
            ++node_candidates;
            CHECK(c.edges.empty());
        }
    CHECK(node_candidates == 4);

    // the triangle shares its base edge with the square
    const auto& triangle = *std::find_if(candidates.begin(), candidates.end(),
                                         [](const auto& c) { return c.name == "triangle"; });
    const auto& square = *std::find_if(candidates.begin(), candidates.end(),
                                       [](const auto& c) { return c.name == "square"; });
    CHECK(triangle.edges.intersection_size(square.edges) == 1);
}

TEST_CASE("named candidates for cycle and base nodes") {
    TreeCyclesParams params;
    params.tree_levels = 3;
    params.num_motifs = 2;
    params.noise_fraction = 0.0;
    params.seed = 1;
    Graph g = generate_tree_cycles(params);
    auto candidates = named_candidates(g, 15);  // first cycle node
    REQUIRE(candidates.size() == 2);
    CHECK(candidates[0].name == "cycle");
    CHECK(candidates[0].edges.size() == 6);
    CHECK(candidates[1].name == "target_only");
    CHECK(candidates[1].edges.empty());

    CHECK(named_candidates(g, 0).empty());  // tree node has no motif
}

TEST_CASE("enumeration on a triangle matches the exhaustive oracle") {
    Graph g = Graph::create(3, EdgeSet({Edge(0, 1), Edge(1, 2), Edge(0, 2)}), Matrix(3, 2, 1.0),
                            {0, 0, 0});
    auto candidates = enumerate_candidates(g, 0, 3);
    CHECK(candidates.size() == 6);  // 2 one-edge, 3 two-edge, 1 three-edge

    std::set<EdgeSet> got;
    std::map<std::size_t, int> by_size;
    for (const auto& c : candidates) {
        got.insert(c.edges);
        ++by_size[c.edges.size()];
    }
    CHECK(got.size() == 6);  // no duplicates
    CHECK(by_size[1] == 2);
    CHECK(by_size[2] == 3);
    CHECK(by_size[3] == 1);
    CHECK(got == connected_subsets_oracle(g, 0, 3));
}

TEST_CASE("enumeration with max_edges zero returns only the target-only candidate") {
    Graph g = Graph::create(3, EdgeSet({Edge(0, 1), Edge(1, 2)}), Matrix(3, 2, 1.0), {0, 0, 0});
    auto candidates = enumerate_candidates(g, 1, 0);
    REQUIRE(candidates.size() == 1);
    CHECK(candidates[0].edges.empty());
}

TEST_CASE("enumeration is deterministic, duplicate-free and connected through the target") {
    // lollipop: triangle 0-1-2 with a tail 2-3-4 and a spur 1-5 (7 edges total)
    Graph g = Graph::create(6,
                            EdgeSet({Edge(0, 1), Edge(1, 2), Edge(0, 2), Edge(2, 3), Edge(3, 4),
                                     Edge(1, 5), Edge(4, 5)}),
                            Matrix(6, 2, 1.0), {0, 0, 0, 0, 0, 0});
    const int node = 1;
    auto a = enumerate_candidates(g, node, 3);
    auto b = enumerate_candidates(g, node, 3);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].edges == b[i].edges);

    std::set<EdgeSet> oracle = connected_subsets_oracle(g, node, 3);
    std::set<EdgeSet> got;
    for (const auto& c : a) got.insert(c.edges);
    CHECK(got.size() == a.size());  // no duplicates
    CHECK(got == oracle);

    // canonical order: size never decreases
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i - 1].edges.size() <= a[i].edges.size());
}

TEST_CASE("enumeration around a house node reaches the base square") {
    Graph g = small_ba_shapes();
    const int bottom = 23;
    REQUIRE(g.roles[bottom] == kRoleBottom);
    const EdgeSet& house = g.gt_explanations.at(bottom);
    std::set<int> square_nodes;
    for (const Edge& e : house) {
        if (g.roles[e.u] != kRoleTop) square_nodes.insert(e.u);
        if (g.roles[e.v] != kRoleTop) square_nodes.insert(e.v);
    }
    std::vector<Edge> square;
    for (const Edge& e : house)
        if (square_nodes.count(e.u) && square_nodes.count(e.v)) square.push_back(e);
    EdgeSet square_set(square);
    REQUIRE(square_set.size() == 4);

    EnumerateOptions opts;
    opts.max_candidates = 500000;
    auto candidates = enumerate_candidates(g, bottom, 4, opts);
    const bool found = std::any_of(candidates.begin(), candidates.end(),
                                   [&](const auto& c) { return c.edges == square_set; });
    CHECK(found);
}

TEST_CASE("enumeration cap: truncation and capacity error") {
    Graph g = small_ba_shapes();
    EnumerateOptions opts;
    opts.max_candidates = 5;
    opts.allow_truncation = true;
    auto truncated = enumerate_candidates(g, 21, 4, opts);
    CHECK(truncated.size() == 5);

    opts.allow_truncation = false;
    CHECK_THROWS_AS(enumerate_candidates(g, 21, 4, opts), CapacityError);
}

TEST_CASE("scoring against an all-zero model: maximum entropy, trivially correct") {
    Graph g = small_ba_shapes();
    GcnModel m = zero_model(10, 4);
    auto candidates = named_candidates(g, 21);
    for (const auto& c : candidates) {
        CandidateScore s = score_candidate(m, g, 21, c);
        CHECK(s.entropy == doctest::Approx(std::log(4.0)).epsilon(1e-12));
        CHECK(s.prediction_correct);
        CHECK(s.size == static_cast<int>(c.edges.size()));
    }
}

TEST_CASE("selection: ties break toward fewer edges, then canonical order") {
    Graph g = small_ba_shapes();
    GcnModel m = zero_model(10, 4);  // every candidate ties at ln 4
    auto candidates = named_candidates(g, 21);
    GroundTruthSelection sel = select_ground_truth(m, g, 21, candidates);
    CHECK(sel.found);
    CHECK(sel.candidate.edges.empty());  // a zero-edge candidate wins the tie

    // order invariance
    std::reverse(candidates.begin(), candidates.end());
    GroundTruthSelection sel2 = select_ground_truth(m, g, 21, candidates);
    CHECK(sel2.candidate.edges == sel.candidate.edges);
}

TEST_CASE("selection falls back to the receptive field when every candidate flips") {
    // path 0-1-2 with the handmade threshold model: the full field predicts
    // class 0, the empty subgraph predicts class 1
    Graph g = Graph::create(3, EdgeSet({Edge(0, 1), Edge(1, 2)}), Matrix(3, 1, 1.0), {0, 0, 0});
    GcnModel m = handmade_flip_model();

    const ReceptiveField field = receptive_field(g, 1, 1);
    const Prediction full = predict_on_subset(m, g, 1, field.edges);
    const Prediction empty = predict_on_subset(m, g, 1, EdgeSet{});
    REQUIRE(full.predicted_class != empty.predicted_class);

    std::vector<MotifCandidate> only_empty{{EdgeSet{}, CandidateOrigin::NamedMotif, "target_only"}};
    GroundTruthSelection sel = select_ground_truth(m, g, 1, only_empty);
    CHECK_FALSE(sel.found);
    CHECK(sel.candidate.edges == receptive_field(g, 1, m.num_layers()).edges);

    CHECK_THROWS_AS(select_ground_truth(m, g, 1, {}), std::domain_error);
}

TEST_CASE("selection never returns a flipping candidate when a preserving one exists") {
    Graph g = Graph::create(3, EdgeSet({Edge(0, 1), Edge(1, 2)}), Matrix(3, 1, 1.0), {0, 0, 0});
    GcnModel m = handmade_flip_model();
    std::vector<MotifCandidate> mixed{
        {EdgeSet{}, CandidateOrigin::NamedMotif, "target_only"},  // flips
        {EdgeSet({Edge(0, 1), Edge(1, 2)}), CandidateOrigin::NamedMotif, "full"},
    };
    GroundTruthSelection sel = select_ground_truth(m, g, 1, mixed);
    CHECK(sel.found);
    CHECK(sel.candidate.name == "full");
}

TEST_CASE("baseline entropy table on the zero model") {
    Graph g = small_ba_shapes();
    GcnModel m = zero_model(10, 4);
    auto rows = baseline_entropy_table(m, g);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].cls == kRoleTop);
    CHECK(rows[1].cls == kRoleShoulder);
    CHECK(rows[2].cls == kRoleBottom);
    CHECK(rows[0].ground_truth.count == 2);
    CHECK(rows[1].ground_truth.count == 4);
    CHECK(rows[2].ground_truth.count == 4);
    for (const auto& row : rows) {
        for (const MetricSummary* s : {&row.ground_truth, &row.receptive_field, &row.target_node}) {
            CHECK(s->mean == doctest::Approx(std::log(4.0)).epsilon(1e-12));
            CHECK(s->sd == doctest::Approx(0.0));
        }
    }

    auto filtered = baseline_entropy_table(m, g, std::optional<std::string>(kRoleTop));
    REQUIRE(filtered.size() == 1);
    CHECK(filtered[0].cls == kRoleTop);
}

}  // TEST_SUITE
