#include "gnnx/threshold.hpp"

#include <algorithm>
#include <stdexcept>

namespace gnnx {

namespace {

// mask edges sorted by descending score, ties by canonical edge order
std::vector<Edge> score_order(const EdgeMask& mask) {
    std::vector<Edge> order(mask.field.begin(), mask.field.end());
    std::stable_sort(order.begin(), order.end(), [&](const Edge& a, const Edge& b) {
        return mask.scores.at(a) > mask.scores.at(b);
    });
    return order;
}

int full_field_class(const GcnModel& model, const Graph& graph, int node) {
    const ReceptiveField field = receptive_field(graph, node, model.num_layers());
    return predict_on_subset(model, graph, node, field.edges).predicted_class;
}

}  // namespace

EdgeSet apply_threshold(const EdgeMask& mask, int t) {
    if (t < 0) throw std::domain_error("apply_threshold: negative threshold");
    const std::vector<Edge> order = score_order(mask);
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(t), order.size());
    return EdgeSet(std::vector<Edge>(order.begin(), order.begin() + keep));
}

bool detect_label_flip(const GcnModel& model, const Graph& graph, int node,
                       const EdgeSet& final_edges) {
    const int reference = full_field_class(model, graph, node);
    return predict_on_subset(model, graph, node, final_edges).predicted_class != reference;
}

FinalExplanation repair_explanation(const GcnModel& model, const Graph& graph,
                                    const EdgeMask& mask, int t) {
    if (t < 0) throw std::domain_error("repair_explanation: negative threshold");
    const std::vector<Edge> order = score_order(mask);
    const int reference = full_field_class(model, graph, mask.target);

    std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(t), order.size());
    EdgeSet final_edges(std::vector<Edge>(order.begin(), order.begin() + keep));
    bool flipped_at_t =
        predict_on_subset(model, graph, mask.target, final_edges).predicted_class != reference;

    int steps = 0;
    bool flipped = flipped_at_t;
    while (flipped && keep < order.size()) {
        final_edges.add(order[keep]);
        ++keep;
        ++steps;
        flipped =
            predict_on_subset(model, graph, mask.target, final_edges).predicted_class != reference;
    }

    FinalExplanation result;
    result.target = mask.target;
    result.final_edges = std::move(final_edges);
    result.threshold_t = t;
    result.flipped = flipped;  // false: the full field reproduces the reference by definition
    result.repaired = steps > 0;
    result.repair_steps = steps;
    return result;
}

double flip_rate(const GcnModel& model, const Graph& graph, const std::vector<EdgeMask>& masks,
                 int t) {
    if (masks.empty()) throw std::domain_error("flip_rate: empty mask list");
    int flips = 0;
    for (const EdgeMask& mask : masks)
        if (detect_label_flip(model, graph, mask.target, apply_threshold(mask, t))) ++flips;
    return static_cast<double>(flips) / static_cast<double>(masks.size());
}

int grid_search_threshold(const GcnModel& model, const Graph& graph,
                          const std::vector<EdgeMask>& masks_test, const std::vector<int>& t_grid,
                          double size_penalty) {
    if (t_grid.empty()) throw std::domain_error("grid_search_threshold: empty grid");
    if (masks_test.empty()) throw std::domain_error("grid_search_threshold: empty mask list");

    std::vector<std::size_t> sizes;
    for (const EdgeMask& m : masks_test) sizes.push_back(m.field.size());
    std::sort(sizes.begin(), sizes.end());
    const std::size_t n = sizes.size();
    const double median_field =
        n % 2 == 1 ? static_cast<double>(sizes[n / 2])
                   : 0.5 * static_cast<double>(sizes[n / 2 - 1] + sizes[n / 2]);

    std::vector<int> grid = t_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    int best_t = grid.front();
    double best_objective = 0.0;
    bool first = true;
    for (int t : grid) {
        if (t < 0) throw std::domain_error("grid_search_threshold: negative threshold in grid");
        const double fidelity = 1.0 - flip_rate(model, graph, masks_test, t);
        const double objective = fidelity - size_penalty * static_cast<double>(t) / median_field;
        if (first || objective > best_objective) {
            best_t = t;
            best_objective = objective;
            first = false;
        }
    }
    return best_t;
}

}  // namespace gnnx
