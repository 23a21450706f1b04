#include "gnnx/explainer.hpp"

#include <cmath>

#include <stdexcept>
#include <string>

#include "gnnx/error.hpp"
#include "gnnx/rng.hpp"

namespace gnnx {

EdgeMask explain(const GcnModel& model, const Graph& graph, int node, const ExplainConfig& config) {
    if (config.epochs < 0 || config.learning_rate <= 0.0 || config.size_coeff < 0.0 ||
        config.entropy_coeff < 0.0 || config.init_noise < 0.0)
        throw std::domain_error("explain: invalid config");

    const ReceptiveField field = receptive_field(graph, node, model.num_layers());
    if (field.edges.empty())
        throw EmptyFieldError("explain: node " + std::to_string(node) + " has an empty receptive field");

    FieldProblem problem(model, graph, node, field.edges);

    MaskLossSpec spec;
    spec.target_class = problem.predict_full_field().predicted_class;
    spec.size_coeff = config.size_coeff;
    spec.entropy_coeff = config.entropy_coeff;

    Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(node)));
    std::vector<double> logits(problem.edge_count());
    for (double& m : logits)
        m = config.init_logit + rng.uniform(-config.init_noise, config.init_noise);

    const bool adam = config.optimizer == Optimizer::Adam;
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::vector<double> m1(logits.size(), 0.0), m2(logits.size(), 0.0);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const std::vector<double> grad = problem.gradient(logits, spec);
        if (adam) {
            const double bias1 = 1.0 - std::pow(beta1, epoch + 1);
            const double bias2 = 1.0 - std::pow(beta2, epoch + 1);
            for (std::size_t e = 0; e < logits.size(); ++e) {
                m1[e] = beta1 * m1[e] + (1.0 - beta1) * grad[e];
                m2[e] = beta2 * m2[e] + (1.0 - beta2) * grad[e] * grad[e];
                logits[e] -= config.learning_rate * (m1[e] / bias1) / (std::sqrt(m2[e] / bias2) + eps);
            }
        } else {
            for (std::size_t e = 0; e < logits.size(); ++e)
                logits[e] -= config.learning_rate * grad[e];
        }
    }

    EdgeMask mask;
    mask.target = node;
    mask.field = field.edges;
    for (std::size_t e = 0; e < logits.size(); ++e)
        mask.scores[problem.edges()[e]] = sigmoid(logits[e]);
    return mask;
}

EdgeMask baseline_full_field(const Graph& graph, int node, int hops) {
    const ReceptiveField field = receptive_field(graph, node, hops);
    EdgeMask mask;
    mask.target = node;
    mask.field = field.edges;
    for (const Edge& e : field.edges) mask.scores[e] = 1.0;
    return mask;
}

EdgeMask baseline_ground_truth(const Graph& graph, int node, int hops) {
    auto it = graph.gt_explanations.find(node);
    if (it == graph.gt_explanations.end())
        throw std::domain_error("baseline_ground_truth: node " + std::to_string(node) +
                                " has no ground-truth explanation");
    const ReceptiveField field = receptive_field(graph, node, hops);
    EdgeMask mask;
    mask.target = node;
    mask.field = field.edges;
    for (const Edge& e : field.edges) mask.scores[e] = it->second.contains(e) ? 1.0 : 0.0;
    return mask;
}

}  // namespace gnnx
