#pragma once

#include <cstdint>
#include <functional>
#include <map>

#include "gnnx/gcn.hpp"
#include "gnnx/graph.hpp"

namespace gnnx {

// Soft importance scores on the receptive-field edges of one target node.
struct EdgeMask {
    int target = 0;
    EdgeSet field;
    std::map<Edge, double> scores;  // defined on exactly the field edges, values in [0,1]
};

struct ExplainConfig {
    int epochs = 300;
    double learning_rate = 0.1;
    double size_coeff = 0.005;      // lambda_1, pressure toward small masks
    // lambda_2, pressure toward decisive scores. The regularizer is summed
    // over edges; 0.02 matches the per-edge pressure of the reference
    // mean-normalized coefficient of 1.0 on a mid-sized receptive field.
    double entropy_coeff = 0.02;
    double init_logit = 0.0;
    double init_noise = 0.1;        // logits start at init_logit + U(-noise, noise)
    Optimizer optimizer = Optimizer::Adam;  // plain descent barely moves the logits
    std::uint64_t seed = 0;
};

// Gradient descent on mask logits: minimizes the cross-entropy of the model's
// own full-field prediction under the masked field, plus size and entropy
// regularizers. Deterministic given the seed (the per-node stream is derived
// from seed and node id).
EdgeMask explain(const GcnModel& model, const Graph& graph, int node, const ExplainConfig& config);

// "Receptive Field" baseline: every field edge scored 1.
EdgeMask baseline_full_field(const Graph& graph, int node, int hops);

// "Ground-truth" baseline: gt edges scored 1, the rest of the field 0.
// hops defaults to the 3-layer receptive field used everywhere else.
EdgeMask baseline_ground_truth(const Graph& graph, int node, int hops = 3);

// Plug-in point: evaluation only needs something that maps a node to a mask.
using ExplainerFn = std::function<EdgeMask(const Graph&, int)>;

}  // namespace gnnx
