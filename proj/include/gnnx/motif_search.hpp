#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gnnx/gcn.hpp"
#include "gnnx/graph.hpp"
#include "gnnx/metrics.hpp"

namespace gnnx {

enum class CandidateOrigin { NamedMotif, Enumerated };

// A potential ground-truth explanation around one target node. Connected
// through the target; zero-edge candidates stand for single-node subgraphs.
struct MotifCandidate {
    EdgeSet edges;
    CandidateOrigin origin = CandidateOrigin::NamedMotif;
    std::string name;
};

struct CandidateScore {
    double entropy = 0.0;
    bool prediction_correct = false;  // agrees with the full-field prediction
    int size = 0;
};

// The named sub-motifs of a node's own motif: for house members the full
// house, roof triangle, base square, target-only and one zero-edge candidate
// per other house node; for cycle members the cycle and target-only. Nodes
// without a motif get an empty list.
std::vector<MotifCandidate> named_candidates(const Graph& graph, int node);

struct EnumerateOptions {
    std::size_t max_candidates = 10000;
    bool allow_truncation = true;
    int hops = 3;  // receptive field the enumeration is restricted to
};

// All connected edge subsets of the receptive field containing the target
// with 1..max_edges edges, in canonical order (size, then lexicographic edge
// list); max_edges = 0 yields exactly the target-only candidate. Truncated
// deterministically at max_candidates, or throws CapacityError when
// truncation is disallowed.
std::vector<MotifCandidate> enumerate_candidates(const Graph& graph, int node, int max_edges,
                                                 const EnumerateOptions& options = {});

CandidateScore score_candidate(const GcnModel& model, const Graph& graph, int node,
                               const MotifCandidate& candidate);

struct GroundTruthSelection {
    MotifCandidate candidate;
    bool found = false;  // false: nothing preserved the prediction, full field returned
};

// Among prediction-preserving candidates picks the one with minimal entropy
// (ties: fewer edges, then canonical edge order). Falls back to the full
// receptive field when every candidate flips the prediction.
GroundTruthSelection select_ground_truth(const GcnModel& model, const Graph& graph, int node,
                                         const std::vector<MotifCandidate>& candidates);

struct BaselineEntropyRow {
    std::string cls;
    MetricSummary ground_truth;
    MetricSummary receptive_field;
    MetricSummary target_node;
};

// Per-class average entropies of the three baselines over all motif nodes.
std::vector<BaselineEntropyRow> baseline_entropy_table(
    const GcnModel& model, const Graph& graph,
    const std::optional<std::string>& class_filter = std::nullopt);

}  // namespace gnnx
