#pragma once

#include <vector>

#include "gnnx/explainer.hpp"
#include "gnnx/gcn.hpp"
#include "gnnx/graph.hpp"

namespace gnnx {

struct FinalExplanation {
    int target = 0;
    EdgeSet final_edges;
    int threshold_t = 0;
    bool flipped = false;    // always false after repair
    bool repaired = false;
    int repair_steps = 0;
};

// The t highest-scored mask edges; score ties resolved by canonical edge
// order, t >= field size returns the whole field.
EdgeSet apply_threshold(const EdgeMask& mask, int t);

// True iff the predicted class under final_edges differs from the predicted
// class under the node's full receptive field.
bool detect_label_flip(const GcnModel& model, const Graph& graph, int node,
                       const EdgeSet& final_edges);

// Top-t subgraph, then while the label flips keep adding the next-highest
// scored edge; the full field is a guaranteed fixed point.
FinalExplanation repair_explanation(const GcnModel& model, const Graph& graph,
                                    const EdgeMask& mask, int t);

// Fraction of masks whose raw top-t subgraph flips the label.
double flip_rate(const GcnModel& model, const Graph& graph, const std::vector<EdgeMask>& masks,
                 int t);

// argmax over the grid of (1 - flip_rate(t)) - size_penalty * t / median
// field size, ties to the smallest t. Sees no ground-truth explanations.
int grid_search_threshold(const GcnModel& model, const Graph& graph,
                          const std::vector<EdgeMask>& masks_test, const std::vector<int>& t_grid,
                          double size_penalty);

}  // namespace gnnx
