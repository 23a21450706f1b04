#include "gnnx/synth.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "gnnx/rng.hpp"

namespace gnnx {

const std::string kRoleBase = "base";
const std::string kRoleTop = "top";
const std::string kRoleShoulder = "shoulder";
const std::string kRoleBottom = "bottom";
const std::string kRoleTree = "tree";
const std::string kRoleCycle = "cycle";

namespace {

// Preferential attachment: each new node connects to m distinct existing
// nodes sampled proportionally to degree (uniform draw from the stub list).
// The first m nodes start isolated and are wired up by node m.
std::vector<Edge> barabasi_albert_edges(int n, int m, Rng& rng) {
    std::vector<Edge> edges;
    std::vector<int> stubs;  // one entry per edge endpoint
    std::vector<int> targets;
    for (int i = 0; i < m; ++i) targets.push_back(i);

    for (int source = m; source < n; ++source) {
        for (int t : targets) {
            edges.emplace_back(source, t);
            stubs.push_back(source);
            stubs.push_back(t);
        }
        targets.clear();
        std::set<int> chosen;
        while (static_cast<int>(chosen.size()) < m) {
            int t = stubs[rng.uniform_int(static_cast<int>(stubs.size()))];
            if (chosen.insert(t).second) targets.push_back(t);
        }
    }
    return edges;
}

// floor(noise_fraction * N) extra edges between distinct non-adjacent pairs;
// duplicates and self-loops are rejected and resampled.
int add_noise_edges(int num_nodes, double noise_fraction, std::set<Edge>& edge_set, Rng& rng) {
    const int count = static_cast<int>(std::floor(noise_fraction * num_nodes));
    int added = 0;
    while (added < count) {
        int u = rng.uniform_int(num_nodes);
        int v = rng.uniform_int(num_nodes);
        if (u == v) continue;
        if (edge_set.insert(Edge(u, v)).second) ++added;
    }
    return count;
}

Matrix ones_features(int num_nodes, int feature_dim) {
    return Matrix(num_nodes, feature_dim, 1.0);
}

}  // namespace

Graph generate_ba_shapes(const BaShapesParams& params, GenerationStats* stats) {
    if (params.base_nodes < params.ba_attachment + 1)
        throw std::domain_error("ba_shapes: base_nodes must be >= ba_attachment + 1");
    if (params.ba_attachment < 1)
        throw std::domain_error("ba_shapes: ba_attachment must be >= 1");
    if (params.noise_fraction < 0.0)
        throw std::domain_error("ba_shapes: negative noise_fraction");
    if (params.num_motifs < 0 || params.feature_dim < 1)
        throw std::domain_error("ba_shapes: invalid parameters");

    Rng rng(params.seed);
    const int base = params.base_nodes;
    const int total = base + 5 * params.num_motifs;

    std::set<Edge> edge_set;
    std::vector<Edge> base_edges = barabasi_albert_edges(base, params.ba_attachment, rng);
    edge_set.insert(base_edges.begin(), base_edges.end());

    std::vector<int> labels(total, 0);
    std::vector<std::string> roles(total, kRoleBase);
    std::map<int, EdgeSet> gt;

    int attachment_edges = 0;
    for (int i = 0; i < params.num_motifs; ++i) {
        const int top = base + 5 * i;
        const int s1 = top + 1, s2 = top + 2, b1 = top + 3, b2 = top + 4;
        // roof triangle (top-s1, top-s2, s1-s2) sharing edge s1-s2 with the
        // square s1-s2-b2-b1
        const Edge house[6] = {Edge(top, s1), Edge(top, s2), Edge(s1, s2),
                               Edge(s2, b2),  Edge(b1, b2),  Edge(s1, b1)};
        std::vector<Edge> house_vec(house, house + 6);
        for (const Edge& e : house_vec) edge_set.insert(e);

        labels[top] = 1;
        labels[s1] = labels[s2] = 2;
        labels[b1] = labels[b2] = 3;
        roles[top] = kRoleTop;
        roles[s1] = roles[s2] = kRoleShoulder;
        roles[b1] = roles[b2] = kRoleBottom;

        EdgeSet house_set(house_vec);
        for (int k = 0; k < 5; ++k) gt[top + k] = house_set;

        int anchor = top + rng.uniform_int(5);
        int attach_to = rng.uniform_int(base);
        edge_set.insert(Edge(anchor, attach_to));
        ++attachment_edges;
    }

    const int noise = add_noise_edges(total, params.noise_fraction, edge_set, rng);
    if (stats) {
        stats->base_edges = static_cast<int>(base_edges.size());
        stats->motif_edges = 6 * params.num_motifs;
        stats->attachment_edges = attachment_edges;
        stats->noise_edges = noise;
    }

    return Graph::create(total, EdgeSet({edge_set.begin(), edge_set.end()}),
                         ones_features(total, params.feature_dim), std::move(labels),
                         std::move(roles), std::move(gt));
}

Graph generate_tree_cycles(const TreeCyclesParams& params, GenerationStats* stats) {
    if (params.tree_levels < 1)
        throw std::domain_error("tree_cycles: tree_levels must be >= 1");
    if (params.cycle_size < 3)
        throw std::domain_error("tree_cycles: cycle_size must be >= 3");
    if (params.noise_fraction < 0.0)
        throw std::domain_error("tree_cycles: negative noise_fraction");
    if (params.num_motifs < 0 || params.feature_dim < 1)
        throw std::domain_error("tree_cycles: invalid parameters");

    Rng rng(params.seed);
    const int tree_nodes = (1 << (params.tree_levels + 1)) - 1;
    const int total = tree_nodes + params.cycle_size * params.num_motifs;

    std::set<Edge> edge_set;
    for (int child = 1; child < tree_nodes; ++child)
        edge_set.insert(Edge(child, (child - 1) / 2));
    const int tree_edges = tree_nodes - 1;

    std::vector<int> labels(total, 0);
    std::vector<std::string> roles(total, kRoleTree);
    std::map<int, EdgeSet> gt;

    int attachment_edges = 0;
    for (int i = 0; i < params.num_motifs; ++i) {
        const int first = tree_nodes + params.cycle_size * i;
        std::vector<Edge> cycle;
        for (int k = 0; k < params.cycle_size; ++k) {
            int a = first + k;
            int b = first + (k + 1) % params.cycle_size;
            cycle.emplace_back(a, b);
            labels[a] = 1;
            roles[a] = kRoleCycle;
        }
        for (const Edge& e : cycle) edge_set.insert(e);
        EdgeSet cycle_set(cycle);
        for (int k = 0; k < params.cycle_size; ++k) gt[first + k] = cycle_set;

        int anchor = first + rng.uniform_int(params.cycle_size);
        int attach_to = rng.uniform_int(tree_nodes);
        edge_set.insert(Edge(anchor, attach_to));
        ++attachment_edges;
    }

    const int noise = add_noise_edges(total, params.noise_fraction, edge_set, rng);
    if (stats) {
        stats->base_edges = tree_edges;
        stats->motif_edges = params.cycle_size * params.num_motifs;
        stats->attachment_edges = attachment_edges;
        stats->noise_edges = noise;
    }

    return Graph::create(total, EdgeSet({edge_set.begin(), edge_set.end()}),
                         ones_features(total, params.feature_dim), std::move(labels),
                         std::move(roles), std::move(gt));
}

}  // namespace gnnx
