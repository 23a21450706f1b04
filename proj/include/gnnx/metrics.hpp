#pragma once

#include <cstddef>
#include <vector>

#include "gnnx/graph.hpp"

namespace gnnx {

// One explanation instance viewed as a binary ranking problem: ground-truth
// edges are the positives, their importance scores the predictions.
struct ScoredEdge {
    double score = 0.0;
    bool in_ground_truth = false;
};
using ScoredEdges = std::vector<ScoredEdge>;

struct MetricSummary {
    double mean = 0.0;
    double sd = 0.0;   // population standard deviation
    std::size_t count = 0;
};

struct RecallPrecision {
    double recall = 0.0;
    double precision = 0.0;
    bool empty_final = false;  // precision reported as 0 for an empty final set
};

// Shannon entropy in nats; 0 ln 0 = 0. Input must be a probability row
// (nonnegative, sum within 1e-6 of 1).
double entropy(const std::vector<double>& probs);

// Probability that a random positive outranks a random negative, ties 0.5.
// Needs at least one positive and one negative.
double roc_auc(const ScoredEdges& scored);

// Area under the precision-recall step curve over descending unique score
// thresholds (ties grouped, no interpolation). Needs at least one positive.
double pr_auc(const ScoredEdges& scored);

RecallPrecision recall_precision(const EdgeSet& final_edges, const EdgeSet& ground_truth);

MetricSummary aggregate(const std::vector<double>& values);

}  // namespace gnnx
