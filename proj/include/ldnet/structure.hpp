// Structural calculus: rank-mincut, primary min-cut, critical and omniscient nodes, induced graphs.
#pragma once

#include <algorithm>
#include <iterator>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ldnet/gf.hpp"
#include "ldnet/netmodel.hpp"

namespace ldnet {

namespace detail {

inline int common_layer(const Network& net, const NodeSet& nodes) {
    if (nodes.empty()) throw std::invalid_argument("node set must be nonempty");
    const int layer = net.layer_of(*nodes.begin());
    for (const auto& node : nodes) {
        if (net.layer_of(node) != layer) throw std::invalid_argument("node set spans several layers");
        if (!net.source_reachable(node)) throw std::invalid_argument("node " + node + " is not source-reachable");
    }
    return layer;
}

// Source-reachable nodes that reach some member of `targets`.
inline NodeSet relevant_ancestors(const Network& net, const NodeSet& targets) {
    NodeSet out;
    for (const auto& node : net.backward_closure(targets)) {
        if (net.source_reachable(node)) out.insert(node);
    }
    return out;
}

// Layer of the first restricted layer whose nodes all share one restricted parent set, or -1.
// Layer 0 qualifies when a single source survives the restriction.
inline int first_rank_one_layer(const Network& net, const NodeSet& targets, int target_layer) {
    const NodeSet relevant = relevant_ancestors(net, targets);
    const bool both_sources = relevant.contains("s1") && relevant.contains("s2");
    if (!both_sources) return 0;
    for (int layer = 1; layer <= target_layer; ++layer) {
        std::optional<NodeSet> shared;
        bool all_clones = true;
        for (const auto& node : net.layer(layer)) {
            if (!relevant.contains(node)) continue;
            NodeSet restricted;
            for (const auto& parent : net.in_neighbors(node)) {
                if (relevant.contains(parent)) restricted.insert(parent);
            }
            if (!shared) {
                shared = std::move(restricted);
            } else if (*shared != restricted) {
                all_clones = false;
                break;
            }
        }
        if (shared && all_clones) return layer;
    }
    return -1;
}

}  // namespace detail

// Exact rank-mincut from {s1,s2} to a same-layer set U (always 1 or 2).
inline int rank_mincut(const Network& net, const NodeSet& targets) {
    const int layer = detail::common_layer(net, targets);
    return detail::first_rank_one_layer(net, targets, layer) >= 0 ? 1 : 2;
}

// Global coefficient pairs (beta_s1, beta_s2) of every node under one-slot random linear coding.
inline std::map<NodeId, gf::Vector> random_global_coefficients(const Network& net, int degree, gf::Rng& rng) {
    std::map<NodeId, gf::Vector> beta;
    std::map<NodeId, gf::FieldElem> alpha;
    for (const auto& node : net.nodes()) {
        gf::Vector coeff = gf::zero_vector(2, degree);
        if (node == "s1") coeff[0] = gf::FieldElem::one(degree);
        if (node == "s2") coeff[1] = gf::FieldElem::one(degree);
        for (const auto& parent : net.in_neighbors(node)) gf::axpy(coeff, alpha.at(parent), beta.at(parent));
        alpha[node] = gf::random_elem(degree, rng);
        beta[node] = std::move(coeff);
    }
    return beta;
}

// Cross-check oracle: rank of U's joint reception under random coding, maximised over three trials.
inline int rank_mincut_randomized(const Network& net, const NodeSet& targets, int degree, std::uint64_t seed) {
    detail::common_layer(net, targets);
    std::size_t best = 0;
    for (std::uint64_t trial = 0; trial < 3; ++trial) {
        gf::Rng rng(gf::mix_seed(seed, trial));
        const auto beta = random_global_coefficients(net, degree, rng);
        std::vector<gf::Vector> rows;
        for (const auto& node : targets) rows.push_back(beta.at(node));
        best = std::max(best, gf::rank_of_rows(rows, 2, degree));
    }
    return static_cast<int>(best);
}

// Lexicographically smallest member of the clone class at the first rank-one layer of U's restriction.
inline NodeId primary_mincut(const Network& net, const NodeSet& targets) {
    const int layer = detail::common_layer(net, targets);
    const int pivot_layer = detail::first_rank_one_layer(net, targets, layer);
    if (pivot_layer < 0)
        throw std::invalid_argument("primary min-cut requires rank-mincut 1, U=" + format_set(targets));
    const NodeSet relevant = detail::relevant_ancestors(net, targets);
    if (pivot_layer == 0) return relevant.contains("s1") ? "s1" : "s2";
    for (const auto& node : net.layer(pivot_layer)) {
        if (relevant.contains(node)) return *clones(net, node).begin();
    }
    throw std::logic_error("rank-one layer without relevant nodes");
}

// Members of the first rank-one layer of U's restriction (all mutual clones).
inline NodeSet primary_mincut_layer_members(const Network& net, const NodeSet& targets) {
    const int layer = detail::common_layer(net, targets);
    const int pivot_layer = detail::first_rank_one_layer(net, targets, layer);
    if (pivot_layer < 0) throw std::invalid_argument("primary min-cut requires rank-mincut 1");
    const NodeSet relevant = detail::relevant_ancestors(net, targets);
    NodeSet out;
    for (const auto& node : net.layer(pivot_layer)) {
        if (relevant.contains(node)) out.insert(node);
    }
    return out;
}

struct CriticalNodeInfo {
    NodeId node;
    int layer = 0;
    NodeSet clone_set;
};

inline NodeSet both_sources() { return {"s1", "s2"}; }

inline CriticalNodeInfo critical_node(const Network& net, int user) {
    require_user(user);
    const NodeId dest = destination_id(user);
    if (!net.reach_of_source(other_user(user)).contains(dest)) return {source_id(user), 0, {}};
    for (int layer = 1; layer <= net.last_layer(); ++layer) {
        for (const auto& node : net.layer(layer)) {
            NodeSet clone_set = clones(net, node);
            if (is_vertex_cut(net, clone_set, both_sources(), {dest})) {
                return {*clone_set.begin(), layer, std::move(clone_set)};
            }
        }
    }
    throw std::logic_error("destination " + dest + " failed to qualify as its own critical node");
}

// Condition (A) for `user`=1 or (B) for `user`=2: K(v) cuts {s1,s2} from d_user and
// the s_other-clones of v cut s_other from d_other.
inline bool omniscient_for(const Network& net, const NodeId& node, int user) {
    const int other = other_user(user);
    return is_vertex_cut(net, clones(net, node), both_sources(), {destination_id(user)}) &&
           is_vertex_cut(net, s_clones(net, node, other), {source_id(other)}, {destination_id(other)});
}

inline bool is_omniscient(const Network& net, const NodeId& node) {
    require_non_source(net, node);
    return omniscient_for(net, node, 1) || omniscient_for(net, node, 2);
}

// Omniscient critical nodes; a network has an omniscient node iff this set is nonempty.
inline NodeSet omniscient_nodes(const Network& net) {
    NodeSet out;
    for (int user : {1, 2}) {
        const CriticalNodeInfo info = critical_node(net, user);
        if (info.layer > 0 && is_omniscient(net, info.node)) out.insert(info.node);
    }
    return out;
}

inline NodeSet omniscient_nodes_full_scan(const Network& net) {
    NodeSet out;
    for (const auto& node : net.nodes()) {
        if (!Network::is_source(node) && is_omniscient(net, node)) out.insert(node);
    }
    return out;
}

enum class Orientation { O12, O21 };

// (p, q) user pair of an orientation: O12 neutralizes s2's interference at user 1's critical node.
inline int first_user(Orientation orientation) { return orientation == Orientation::O12 ? 1 : 2; }
inline int second_user(Orientation orientation) { return orientation == Orientation::O12 ? 2 : 1; }
inline std::string orientation_name(Orientation orientation) { return orientation == Orientation::O12 ? "12" : "21"; }

struct InducedGraph {
    Orientation orientation = Orientation::O12;
    NodeId anchor;
    NodeId pivot;
    NodeSet neutralized;  // P^{s_q}(anchor)
    bool rewired = false;
    Network graph;
    NodeSet dropped;
    NodeSet reach_set;  // members of `neutralized` that reach a destination in `graph`
};

inline InducedGraph induced_graph(const Network& net, Orientation orientation, const NodeId& anchor,
                                  const std::optional<NodeId>& pivot = std::nullopt) {
    const int interferer = second_user(orientation);
    const NodeSet neutralized = s_parents(net, anchor, interferer);
    if (neutralized.empty()) {
        throw std::invalid_argument("anchor " + anchor + " has no " + source_id(interferer) + "-reachable parents");
    }
    const NodeId chosen = pivot.value_or(*neutralized.begin());
    if (!neutralized.contains(chosen))
        throw std::invalid_argument("pivot " + chosen + " is not in " + format_set(neutralized));

    InducedGraph result{orientation, anchor, chosen, neutralized, false, net, {}, {}};
    if (rank_mincut(net, neutralized) == 1) {
        NetworkSpec spec = net.spec();
        spec.warnings.clear();
        for (const auto& node : net.layer(net.layer_of(anchor))) {
            const NodeSet current = parents(net, node);
            if (!current.contains(chosen)) continue;
            NodeSet updated;
            std::set_symmetric_difference(current.begin(), current.end(), neutralized.begin(), neutralized.end(),
                                          std::inserter(updated, updated.end()));
            for (const auto& parent : current) spec.edges.erase({parent, node});
            for (const auto& parent : updated) spec.edges.insert({parent, node});
        }
        result.rewired = true;
        result.graph = build_network(std::move(spec), PruneMode::SourceUnreachableOnly);
        for (const auto& node : net.nodes()) {
            if (!result.graph.contains(node)) result.dropped.insert(node);
        }
    }
    const NodeSet to_destination = result.graph.backward_closure({"d1", "d2"});
    for (const auto& node : neutralized) {
        if (result.graph.contains(node) && to_destination.contains(node)) result.reach_set.insert(node);
    }
    return result;
}

}  // namespace ldnet
