#pragma once

#include <cstdint>
#include <string>

#include "gnnx/graph.hpp"

namespace gnnx {

struct BaShapesParams {
    int base_nodes = 300;
    int num_motifs = 80;
    int ba_attachment = 5;      // edges added per new node in the BA base
    double noise_fraction = 0.1;
    int feature_dim = 10;
    std::uint64_t seed = 0;
};

struct TreeCyclesParams {
    int tree_levels = 8;        // levels below the root; 8 -> 511 tree nodes
    int num_motifs = 80;
    int cycle_size = 6;
    double noise_fraction = 0.1;
    int feature_dim = 10;
    std::uint64_t seed = 0;
};

// Edge-count breakdown recorded during generation; echoed into the dataset
// sidecar so structural checks don't have to re-derive them.
struct GenerationStats {
    int base_edges = 0;
    int motif_edges = 0;
    int attachment_edges = 0;
    int noise_edges = 0;
};

// Barabasi-Albert base + house motifs. Node order: base nodes first, then the
// five nodes of each house as [top, shoulder, shoulder, bottom, bottom].
// Labels: 0 base, 1 top, 2 shoulder, 3 bottom. Every house node's
// gt explanation is the 6 internal edges of its own house.
Graph generate_ba_shapes(const BaShapesParams& params, GenerationStats* stats = nullptr);

// Balanced binary tree + cycle motifs. Labels: 0 tree, 1 cycle; every cycle
// node's gt explanation is its own cycle's edge set.
Graph generate_tree_cycles(const TreeCyclesParams& params, GenerationStats* stats = nullptr);

// Role tags used by the generators ("base", "top", "shoulder", "bottom",
// "tree", "cycle").
extern const std::string kRoleBase;
extern const std::string kRoleTop;
extern const std::string kRoleShoulder;
extern const std::string kRoleBottom;
extern const std::string kRoleTree;
extern const std::string kRoleCycle;

}  // namespace gnnx
