#include "gnnx/motif_search.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "gnnx/error.hpp"
#include "gnnx/synth.hpp"

namespace gnnx {

namespace {

std::vector<int> motif_nodes_of(const EdgeSet& motif) {
    std::vector<int> nodes;
    for (const Edge& e : motif) {
        nodes.push_back(e.u);
        nodes.push_back(e.v);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return nodes;
}

EdgeSet edges_within(const EdgeSet& motif, const std::set<int>& keep) {
    std::vector<Edge> sub;
    for (const Edge& e : motif)
        if (keep.count(e.u) && keep.count(e.v)) sub.push_back(e);
    return EdgeSet(sub);
}

}  // namespace

std::vector<MotifCandidate> named_candidates(const Graph& graph, int node) {
    auto it = graph.gt_explanations.find(node);
    if (it == graph.gt_explanations.end()) return {};
    const EdgeSet& motif = it->second;

    std::vector<MotifCandidate> out;
    const std::vector<int> members = motif_nodes_of(motif);

    bool is_house = false;
    if (graph.has_roles()) {
        is_house = std::all_of(members.begin(), members.end(), [&](int m) {
            const std::string& r = graph.roles[m];
            return r == kRoleTop || r == kRoleShoulder || r == kRoleBottom;
        });
    }

    if (is_house) {
        std::set<int> roof, square;
        for (int m : members) {
            if (graph.roles[m] == kRoleTop || graph.roles[m] == kRoleShoulder) roof.insert(m);
            if (graph.roles[m] != kRoleTop) square.insert(m);
        }
        out.push_back({motif, CandidateOrigin::NamedMotif, "house"});
        out.push_back({edges_within(motif, roof), CandidateOrigin::NamedMotif, "triangle"});
        out.push_back({edges_within(motif, square), CandidateOrigin::NamedMotif, "square"});
        out.push_back({EdgeSet{}, CandidateOrigin::NamedMotif, "target_only"});
        for (int m : members)
            if (m != node)
                out.push_back({EdgeSet{}, CandidateOrigin::NamedMotif,
                               "node:" + graph.roles[m] + ":" + std::to_string(m)});
    } else {
        const std::string motif_name =
            graph.has_roles() && graph.roles[node] == kRoleCycle ? "cycle" : "motif";
        out.push_back({motif, CandidateOrigin::NamedMotif, motif_name});
        out.push_back({EdgeSet{}, CandidateOrigin::NamedMotif, "target_only"});
    }
    return out;
}

std::vector<MotifCandidate> enumerate_candidates(const Graph& graph, int node, int max_edges,
                                                 const EnumerateOptions& options) {
    if (max_edges < 0) throw std::domain_error("enumerate_candidates: negative max_edges");
    const ReceptiveField field = receptive_field(graph, node, options.hops);

    if (max_edges == 0)
        return {{EdgeSet{}, CandidateOrigin::Enumerated, "subset_0"}};

    // edges indexed in canonical order; subsets keyed by sorted index lists
    const std::vector<Edge>& edges = field.edges.edges();
    std::map<int, std::vector<std::size_t>> incident;  // node -> edge indices
    for (std::size_t i = 0; i < edges.size(); ++i) {
        incident[edges[i].u].push_back(i);
        incident[edges[i].v].push_back(i);
    }

    std::vector<MotifCandidate> out;
    std::size_t emitted = 0;
    auto emit = [&](const std::vector<std::size_t>& key) -> bool {
        if (emitted == options.max_candidates) {
            if (options.allow_truncation) return false;
            throw CapacityError("enumerate_candidates: candidate cap exceeded");
        }
        std::vector<Edge> subset;
        for (std::size_t idx : key) subset.push_back(edges[idx]);
        out.push_back({EdgeSet(std::move(subset)), CandidateOrigin::Enumerated,
                       "subset_" + std::to_string(emitted)});
        ++emitted;
        return true;
    };

    // grow level by level so the output is ordered by size then lexicographic
    std::set<std::vector<std::size_t>> level;
    if (auto it = incident.find(node); it != incident.end())
        for (std::size_t i : it->second) level.insert({i});
    for (int size = 1; size <= max_edges && !level.empty(); ++size) {
        for (const auto& key : level)
            if (!emit(key)) return out;
        if (size == max_edges) break;
        std::set<std::vector<std::size_t>> next;
        for (const auto& key : level) {
            std::set<int> covered{node};
            for (std::size_t idx : key) {
                covered.insert(edges[idx].u);
                covered.insert(edges[idx].v);
            }
            for (int u : covered) {
                auto inc = incident.find(u);
                if (inc == incident.end()) continue;
                for (std::size_t cand : inc->second) {
                    if (std::binary_search(key.begin(), key.end(), cand)) continue;
                    std::vector<std::size_t> grown = key;
                    grown.insert(std::lower_bound(grown.begin(), grown.end(), cand), cand);
                    next.insert(std::move(grown));
                }
            }
        }
        level = std::move(next);
    }
    return out;
}

CandidateScore score_candidate(const GcnModel& model, const Graph& graph, int node,
                               const MotifCandidate& candidate) {
    const ReceptiveField field = receptive_field(graph, node, model.num_layers());
    const Prediction reference = predict_on_subset(model, graph, node, field.edges);
    const Prediction under = predict_on_subset(model, graph, node, candidate.edges);
    CandidateScore score;
    score.entropy = entropy(under.probs);
    score.prediction_correct = under.predicted_class == reference.predicted_class;
    score.size = static_cast<int>(candidate.edges.size());
    return score;
}

GroundTruthSelection select_ground_truth(const GcnModel& model, const Graph& graph, int node,
                                         const std::vector<MotifCandidate>& candidates) {
    if (candidates.empty())
        throw std::domain_error("select_ground_truth: empty candidate list");

    const ReceptiveField field = receptive_field(graph, node, model.num_layers());
    const Prediction reference = predict_on_subset(model, graph, node, field.edges);

    const MotifCandidate* best = nullptr;
    double best_entropy = 0.0;
    for (const MotifCandidate& cand : candidates) {
        const Prediction under = predict_on_subset(model, graph, node, cand.edges);
        if (under.predicted_class != reference.predicted_class) continue;
        const double ent = entropy(under.probs);
        if (!best || ent < best_entropy ||
            (ent == best_entropy && (cand.edges.size() < best->edges.size() ||
                                     (cand.edges.size() == best->edges.size() &&
                                      cand.edges < best->edges)))) {
            best = &cand;
            best_entropy = ent;
        }
    }
    if (!best)
        return {{field.edges, CandidateOrigin::NamedMotif, "receptive_field"}, false};
    return {*best, true};
}

std::vector<BaselineEntropyRow> baseline_entropy_table(
    const GcnModel& model, const Graph& graph, const std::optional<std::string>& class_filter) {
    struct Accumulator {
        std::vector<double> gt, field, target;
        int order = 0;
    };
    std::map<std::string, Accumulator> per_class;

    for (const auto& [node, gt] : graph.gt_explanations) {
        const std::string cls = graph.has_roles() ? graph.roles[node] : "motif";
        if (class_filter && cls != *class_filter) continue;

        const ReceptiveField field = receptive_field(graph, node, model.num_layers());
        Accumulator& acc = per_class[cls];
        acc.order = std::max(acc.order, graph.labels[node]);
        acc.gt.push_back(entropy(predict_on_subset(model, graph, node, gt).probs));
        acc.field.push_back(entropy(predict_on_subset(model, graph, node, field.edges).probs));
        acc.target.push_back(entropy(predict_on_subset(model, graph, node, EdgeSet{}).probs));
    }

    std::vector<std::pair<std::string, const Accumulator*>> ordered;
    for (const auto& [cls, acc] : per_class) ordered.emplace_back(cls, &acc);
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        return std::pair(a.second->order, a.first) < std::pair(b.second->order, b.first);
    });

    std::vector<BaselineEntropyRow> rows;
    for (const auto& [cls, acc] : ordered) {
        BaselineEntropyRow row;
        row.cls = cls;
        row.ground_truth = aggregate(acc->gt);
        row.receptive_field = aggregate(acc->field);
        row.target_node = aggregate(acc->target);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace gnnx
