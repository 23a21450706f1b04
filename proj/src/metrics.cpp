#include "gnnx/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gnnx/error.hpp"

namespace gnnx {

double entropy(const std::vector<double>& probs) {
    if (probs.empty()) throw std::domain_error("entropy: empty probability row");
    double sum = 0.0;
    for (double p : probs) {
        if (p < 0.0 || !std::isfinite(p)) throw std::domain_error("entropy: negative or non-finite entry");
        sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-6) throw std::domain_error("entropy: row does not sum to 1");
    double h = 0.0;
    for (double p : probs)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

double roc_auc(const ScoredEdges& scored) {
    std::size_t num_pos = 0;
    for (const ScoredEdge& e : scored) num_pos += e.in_ground_truth ? 1 : 0;
    const std::size_t num_neg = scored.size() - num_pos;
    if (num_pos == 0 || num_neg == 0)
        throw UndefinedMetricError("roc_auc: needs at least one positive and one negative edge");

    // Mann-Whitney via average ranks (ties share their rank)
    std::vector<std::size_t> order(scored.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scored[a].score < scored[b].score; });

    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scored[order[j]].score == scored[order[i]].score) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t t = i; t < j; ++t)
            if (scored[order[t]].in_ground_truth) pos_rank_sum += avg_rank;
        i = j;
    }
    const double np = static_cast<double>(num_pos);
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(num_neg));
}

double pr_auc(const ScoredEdges& scored) {
    std::size_t num_pos = 0;
    for (const ScoredEdge& e : scored) num_pos += e.in_ground_truth ? 1 : 0;
    if (num_pos == 0) throw UndefinedMetricError("pr_auc: needs at least one positive edge");

    std::vector<std::size_t> order(scored.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scored[a].score > scored[b].score; });

    double area = 0.0;
    double prev_recall = 0.0;
    std::size_t tp = 0, predicted = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scored[order[j]].score == scored[order[i]].score) ++j;
        for (std::size_t t = i; t < j; ++t) {
            ++predicted;
            if (scored[order[t]].in_ground_truth) ++tp;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(num_pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(predicted);
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    return area;
}

RecallPrecision recall_precision(const EdgeSet& final_edges, const EdgeSet& ground_truth) {
    if (ground_truth.empty())
        throw UndefinedMetricError("recall_precision: empty ground truth");
    const auto hits = static_cast<double>(final_edges.intersection_size(ground_truth));
    RecallPrecision result;
    result.recall = hits / static_cast<double>(ground_truth.size());
    if (final_edges.empty()) {
        result.precision = 0.0;
        result.empty_final = true;
    } else {
        result.precision = hits / static_cast<double>(final_edges.size());
    }
    return result;
}

MetricSummary aggregate(const std::vector<double>& values) {
    if (values.empty()) throw std::domain_error("aggregate: empty value list");
    MetricSummary s;
    s.count = values.size();
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(var / static_cast<double>(values.size()));
    return s;
}

}  // namespace gnnx
