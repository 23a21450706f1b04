#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "gnnx/graph.hpp"
#include "gnnx/matrix.hpp"

namespace gnnx {

// L-layer graph convolutional network: H^{l+1} = relu(S H^l W^l + b^l) with
// S the normalized self-loop adjacency, followed by a linear classifier
// producing per-node logits. Biases are required: with constant node features
// a bias-free stack of these layers collapses to a rank-one representation
// (every node gets the same argmax), so the model would be untrainable on the
// structure-only benchmarks.
struct GcnModel {
    std::vector<Matrix> layer_weights;             // W^l, d_l x d_{l+1}
    std::vector<std::vector<double>> layer_biases; // one vector per layer
    Matrix classifier;                             // d_out x K
    std::vector<double> classifier_bias;           // K

    int num_layers() const { return static_cast<int>(layer_weights.size()); }
    int class_count() const { return classifier.cols(); }
    int input_dim() const { return layer_weights.empty() ? 0 : layer_weights.front().rows(); }
    int output_dim() const { return classifier.rows(); }

    // dimension-chain check; throws std::domain_error
    void validate() const;
};

// Plain full-batch descent stalls far below usable accuracy on the
// constant-feature benchmarks (majority-class plateau), so Adam is the
// default; both are hand-coded and deterministic.
enum class Optimizer { Adam, GradientDescent };

struct TrainConfig {
    int hidden_dim = 20;
    int epochs = 2000;
    double learning_rate = 0.01;
    double weight_decay = 5e-4;
    Optimizer optimizer = Optimizer::Adam;
    double momentum = 0.9;      // heavy-ball term for the GradientDescent path
    int restarts = 5;           // independent seeded starts; the best run wins
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
};

struct ForwardResult {
    Matrix probs;   // n x K, rows sum to 1
    Matrix logits;  // n x K
};

struct TrainResult {
    GcnModel model;
    std::vector<int> train_nodes;      // sorted
    std::vector<int> test_nodes;       // sorted
    std::vector<double> loss_history;  // data loss per epoch
    std::vector<double> accuracy_history;  // training accuracy per epoch
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;        // 0 when the test split is empty
};

struct Prediction {
    int predicted_class = 0;
    std::vector<double> probs;
};

// Coefficients of the explainer objective:
//   CE(target_class | masked field) + size_coeff * sum sigmoid(m)
//                                   + entropy_coeff * sum H_b(sigmoid(m))
struct MaskLossSpec {
    int target_class = 0;
    double size_coeff = 0.0;
    double entropy_coeff = 0.0;
};

ForwardResult forward(const GcnModel& model, const Matrix& adj_norm, const Matrix& features);

// Full-batch gradient descent on cross-entropy with L2 weight decay over a
// seeded stratified split. Throws TrainingDivergedError on non-finite loss.
TrainResult train(const Graph& graph, const TrainConfig& config);

// Runs the model with only `kept_edges` active (every other edge has weight
// 0; self-loops stay) and returns the target node's prediction. Degrees are
// those of the kept subgraph, so keeping a node's full receptive field is
// not bit-identical to the full forward pass: boundary nodes lose the degree
// contribution of their out-of-field edges. Keeping the entire edge set is
// identical.
Prediction predict_on_subset(const GcnModel& model, const Graph& graph, int node,
                             const EdgeSet& kept_edges);

// Gradient of the explainer objective with respect to the mask logits,
// computed by hand-coded reverse mode through the layer products and the
// degree renormalization.
std::map<Edge, double> mask_gradient(const GcnModel& model, const Graph& graph, int node,
                                     const EdgeSet& field, const std::map<Edge, double>& mask_logits,
                                     const MaskLossSpec& spec);

// Objective value at the given logits (forward only); the finite-difference
// companion of mask_gradient.
double mask_objective(const GcnModel& model, const Graph& graph, int node,
                      const EdgeSet& field, const std::map<Edge, double>& mask_logits,
                      const MaskLossSpec& spec);

// Receptive-field computation compiled into flat arrays. explain() runs its
// whole descent loop on one of these; the map-based ops above are wrappers.
class FieldProblem {
public:
    FieldProblem(const GcnModel& model, const Graph& graph, int target, const EdgeSet& field);

    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }

    double objective(const std::vector<double>& logits, const MaskLossSpec& spec) const;
    std::vector<double> gradient(const std::vector<double>& logits, const MaskLossSpec& spec) const;

    // prediction under explicit edge weights in [0,1] (1 = edge kept)
    Prediction predict(const std::vector<double>& edge_weights) const;
    Prediction predict_full_field() const;

private:
    void forward_local(const std::vector<double>& edge_weights, std::vector<Matrix>& h_out,
                       std::vector<double>& target_logits, std::vector<double>& inv_sqrt_deg) const;

    const GcnModel* model_;
    int target_local_ = 0;             // index of the target inside nodes_
    std::vector<int> nodes_;           // sorted original node ids
    std::vector<Edge> edges_;          // canonical order, original ids
    std::vector<std::pair<int, int>> local_edges_;  // same edges, local indices
    Matrix features_;                  // rows for nodes_
};

double sigmoid(double x);

}  // namespace gnnx
