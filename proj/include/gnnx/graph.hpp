#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <string>
#include <vector>

#include "gnnx/matrix.hpp"

namespace gnnx {

// Undirected edge stored in canonical orientation u < v. Self-loops are not
// representable on purpose; the GCN adds them transiently via A + I.
struct Edge {
    int u = 0;
    int v = 0;

    Edge() = default;
    Edge(int a, int b) : u(std::min(a, b)), v(std::max(a, b)) {}

    auto operator<=>(const Edge&) const = default;
};

// Sorted, duplicate-free set of undirected edges. Canonical iteration order
// makes every consumer (serialization, thresholding, enumeration)
// deterministic for free.
class EdgeSet {
public:
    EdgeSet() = default;
    explicit EdgeSet(std::vector<Edge> edges) : edges_(std::move(edges)) {
        std::sort(edges_.begin(), edges_.end());
        edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    }

    bool contains(const Edge& e) const {
        return std::binary_search(edges_.begin(), edges_.end(), e);
    }

    // no-op if already present
    void add(const Edge& e) {
        auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
        if (it == edges_.end() || *it != e) edges_.insert(it, e);
    }

    bool is_subset_of(const EdgeSet& other) const {
        return std::includes(other.edges_.begin(), other.edges_.end(),
                             edges_.begin(), edges_.end());
    }

    std::size_t intersection_size(const EdgeSet& other) const {
        std::size_t n = 0;
        auto a = edges_.begin();
        auto b = other.edges_.begin();
        while (a != edges_.end() && b != other.edges_.end()) {
            if (*a < *b) ++a;
            else if (*b < *a) ++b;
            else { ++n; ++a; ++b; }
        }
        return n;
    }

    std::size_t size() const { return edges_.size(); }
    bool empty() const { return edges_.empty(); }
    const std::vector<Edge>& edges() const { return edges_; }
    auto begin() const { return edges_.begin(); }
    auto end() const { return edges_.end(); }

    bool operator==(const EdgeSet&) const = default;
    bool operator<(const EdgeSet& other) const { return edges_ < other.edges_; }

private:
    std::vector<Edge> edges_;
};

// Immutable-by-convention graph value: build it once via Graph::create and
// share it read-only afterwards (explanation workers run concurrently on it).
struct Graph {
    int num_nodes = 0;
    EdgeSet edges;
    Matrix features;                      // num_nodes x feature_dim
    std::vector<int> labels;              // class index per node
    std::vector<std::string> roles;       // optional; empty or one tag per node
    std::map<int, EdgeSet> gt_explanations;  // node -> ground-truth edge set

    // sorted neighbor lists, derived from `edges` at construction
    std::vector<std::vector<int>> adjacency;

    int num_classes() const;
    bool has_roles() const { return !roles.empty(); }

    // Validates invariants (edge endpoints in range, label range, feature row
    // count, gt subsets) and builds adjacency. Throws std::domain_error.
    static Graph create(int num_nodes, EdgeSet edges, Matrix features,
                        std::vector<int> labels, std::vector<std::string> roles = {},
                        std::map<int, EdgeSet> gt_explanations = {});
};

struct ReceptiveField {
    std::vector<int> nodes;  // sorted, always contains the target
    EdgeSet edges;           // edges with both endpoints in `nodes`
};

// D^{-1/2} (A + I) D^{-1/2} as a dense n x n matrix. When weights are given,
// each off-diagonal entry of A is scaled by its edge weight before the
// self-loops are added; degrees are recomputed from the weighted matrix.
Matrix normalized_adjacency(const Graph& graph,
                            const std::map<Edge, double>* weights = nullptr);

// All nodes within `hops` of `node` plus the edges induced among them.
ReceptiveField receptive_field(const Graph& graph, int node, int hops);

}  // namespace gnnx
