#pragma once

#include <map>
#include <string>

#include "gnnx/explainer.hpp"
#include "gnnx/gcn.hpp"
#include "gnnx/graph.hpp"

namespace gnnx {

// Structured-text artifact files. Writers emit a canonical form (sorted
// edges, 17-significant-digit doubles), so load followed by save reproduces
// the file byte for byte.

void save_graph(const Graph& graph, const std::string& path);
Graph load_graph(const std::string& path);

void save_model(const GcnModel& model, const std::string& path);
GcnModel load_model(const std::string& path);

void save_mask(const EdgeMask& mask, const std::string& path);
EdgeMask load_mask(const std::string& path);

// gt_explanations section alone, in the same syntax the graph file uses; the
// motif-search output is written this way so it can replace the annotated
// ground truth downstream.
void save_ground_truth(const std::map<int, EdgeSet>& gt, const std::string& path);
std::map<int, EdgeSet> load_ground_truth(const std::string& path);

std::string format_double(double v);  // %.17g, round-trip exact

}  // namespace gnnx
