#include "gnnx/graph.hpp"

#include <cmath>
#include <deque>
#include <set>
#include <stdexcept>
#include <string>

namespace gnnx {

int Graph::num_classes() const {
    int k = 0;
    for (int label : labels) k = std::max(k, label + 1);
    return k;
}

Graph Graph::create(int num_nodes, EdgeSet edges, Matrix features,
                    std::vector<int> labels, std::vector<std::string> roles,
                    std::map<int, EdgeSet> gt_explanations) {
    if (num_nodes < 0) throw std::domain_error("graph: negative node count");
    for (const Edge& e : edges) {
        if (e.u < 0 || e.v >= num_nodes)
            throw std::domain_error("graph: edge endpoint out of range");
        if (e.u == e.v) throw std::domain_error("graph: self-loop not allowed");
    }
    if (features.rows() != num_nodes)
        throw std::domain_error("graph: feature row count != num_nodes");
    if (static_cast<int>(labels.size()) != num_nodes)
        throw std::domain_error("graph: label count != num_nodes");
    for (int label : labels)
        if (label < 0) throw std::domain_error("graph: negative label");
    if (!roles.empty() && static_cast<int>(roles.size()) != num_nodes)
        throw std::domain_error("graph: role count != num_nodes");
    for (const auto& [node, gt] : gt_explanations) {
        if (node < 0 || node >= num_nodes)
            throw std::domain_error("graph: gt_explanations key out of range");
        if (!gt.is_subset_of(edges))
            throw std::domain_error("graph: gt explanation not a subset of edges");
    }

    Graph g;
    g.num_nodes = num_nodes;
    g.edges = std::move(edges);
    g.features = std::move(features);
    g.labels = std::move(labels);
    g.roles = std::move(roles);
    g.gt_explanations = std::move(gt_explanations);
    g.adjacency.assign(num_nodes, {});
    for (const Edge& e : g.edges) {
        g.adjacency[e.u].push_back(e.v);
        g.adjacency[e.v].push_back(e.u);
    }
    for (auto& nbrs : g.adjacency) std::sort(nbrs.begin(), nbrs.end());
    return g;
}

Matrix normalized_adjacency(const Graph& graph, const std::map<Edge, double>* weights) {
    const int n = graph.num_nodes;
    if (weights) {
        for (const auto& [e, w] : *weights) {
            if (!(w >= 0.0 && w <= 1.0))
                throw std::domain_error("normalized_adjacency: weight outside [0,1]");
            if (!graph.edges.contains(e))
                throw std::domain_error("normalized_adjacency: weight for a non-existent edge");
        }
    }

    Matrix a_hat(n, n);
    for (int i = 0; i < n; ++i) a_hat(i, i) = 1.0;
    for (const Edge& e : graph.edges) {
        double w = 1.0;
        if (weights) {
            auto it = weights->find(e);
            if (it != weights->end()) w = it->second;
        }
        a_hat(e.u, e.v) = w;
        a_hat(e.v, e.u) = w;
    }

    std::vector<double> inv_sqrt_deg(n);
    for (int i = 0; i < n; ++i) {
        double deg = 0.0;
        for (int j = 0; j < n; ++j) deg += a_hat(i, j);
        inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);  // deg >= 1 via the self-loop
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a_hat(i, j) *= inv_sqrt_deg[i] * inv_sqrt_deg[j];
    return a_hat;
}

ReceptiveField receptive_field(const Graph& graph, int node, int hops) {
    if (node < 0 || node >= graph.num_nodes)
        throw std::domain_error("receptive_field: invalid node id " + std::to_string(node));
    if (hops < 0) throw std::domain_error("receptive_field: negative hop count");

    std::vector<int> dist(graph.num_nodes, -1);
    std::deque<int> queue;
    dist[node] = 0;
    queue.push_back(node);
    std::vector<int> nodes;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        nodes.push_back(u);
        if (dist[u] == hops) continue;
        for (int v : graph.adjacency[u]) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    std::sort(nodes.begin(), nodes.end());

    std::vector<Edge> field_edges;
    for (const Edge& e : graph.edges)
        if (dist[e.u] >= 0 && dist[e.v] >= 0) field_edges.push_back(e);

    return ReceptiveField{std::move(nodes), EdgeSet(std::move(field_edges))};
}

}  // namespace gnnx
