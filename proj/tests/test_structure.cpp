#include <algorithm>

#include "doctest.h"
#include "ldnet/classifier.hpp"
#include "ldnet/structure.hpp"
#include "support.hpp"

using namespace ldnet;
using ldnet::testing::corpus;

namespace {

// A random same-layer set of source-reachable nodes, or nothing when the chosen layer is empty.
std::optional<NodeSet> random_layer_set(const Network& net, gf::Rng& rng) {
    const int layer = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(net.last_layer()));
    const NodeSet& members = net.layer(layer);
    NodeSet chosen;
    for (const auto& node : members) {
        if (rng() % 2 == 0) chosen.insert(node);
    }
    if (chosen.empty() && !members.empty())
        chosen.insert(*std::next(members.begin(), static_cast<long>(rng() % members.size())));
    if (chosen.empty()) return std::nullopt;
    return chosen;
}

}  // namespace

TEST_CASE("rank_mincut examples") {
    CHECK(rank_mincut(corpus("diamond_f4"), {"u4", "u5"}) == 2);
    CHECK(rank_mincut(corpus("asym"), {"u2"}) == 1);
    CHECK(rank_mincut(corpus("asym"), {"s1"}) == 1);
    CHECK(rank_mincut(corpus("diamond_f4"), {"u4", "u6"}) == 1);
    CHECK_THROWS_AS(rank_mincut(corpus("asym"), {"u1", "u4"}), std::invalid_argument);
}

TEST_CASE("rank_mincut_randomized examples") {
    CHECK(rank_mincut_randomized(corpus("diamond_f4"), {"u4", "u5"}, 16, 1) == 2);
    CHECK(rank_mincut_randomized(corpus("diamond_f4"), {"u4", "u6"}, 16, 1) == 1);
}

TEST_CASE("primary min-cut examples") {
    CHECK(primary_mincut(corpus("asym_dashed"), {"u5"}) == "u2");
    CHECK(primary_mincut(corpus("asym"), {"u5"}) == "s2");
    CHECK_THROWS_AS(primary_mincut(corpus("diamond_f4"), {"u4", "u5"}), std::invalid_argument);
}

TEST_CASE("critical node examples") {
    const Network asym = corpus("asym");
    const CriticalNodeInfo first = critical_node(asym, 1);
    CHECK(first.node == "u4");
    CHECK(first.layer == 2);
    const CriticalNodeInfo second = critical_node(asym, 2);
    CHECK(second.node == "d2");
    CHECK(second.layer == 3);
    const Network disjoint = corpus("disjoint");
    CHECK(critical_node(disjoint, 1).node == "s1");
    CHECK(critical_node(disjoint, 1).layer == 0);
    CHECK(critical_node(disjoint, 1).clone_set.empty());
    CHECK(critical_node(disjoint, 2).node == "s2");
}

TEST_CASE("omniscience examples") {
    CHECK(is_omniscient(corpus("zigzag"), "u4"));
    CHECK(omniscient_nodes(corpus("zigzag")) == NodeSet{"u4"});
    const Network asym = corpus("asym");
    CHECK(omniscient_nodes_full_scan(asym).empty());
    CHECK_THROWS_AS(is_omniscient(asym, "s1"), std::invalid_argument);
    // A node fed by both sources that is the only route to d1.
    const Network hub = parse_network(
        "node s1 0\nnode s2 0\nnode h 1\nnode x 1\nnode d1 2\nnode d2 2\n"
        "edge s1 h\nedge s2 h\nedge s2 x\nedge h d1\nedge x d2\n");
    CHECK(is_omniscient(hub, "h"));
}

TEST_CASE("induced graph examples") {
    const Network zigzag = corpus("zigzag");
    const InducedGraph zig = induced_graph(zigzag, Orientation::O12, critical_node(zigzag, 1).node);
    CHECK(zig.rewired);
    CHECK_FALSE(zig.graph.reach_of_source(2).contains("d2"));

    const Network asym = corpus("asym");
    const InducedGraph tri = induced_graph(asym, Orientation::O12, "u4");
    CHECK(tri.rewired);
    CHECK(tri.pivot == "u2");
    CHECK(is_omniscient(tri.graph, "u6"));

    const Network diamond = corpus("diamond_f4");
    const NodeId anchor = critical_node(diamond, 1).node;
    REQUIRE(rank_mincut(diamond, s_parents(diamond, anchor, 2)) == 2);
    const InducedGraph same = induced_graph(diamond, Orientation::O12, anchor);
    CHECK_FALSE(same.rewired);
    CHECK(serialize_network(same.graph) == serialize_network(diamond));
    CHECK_THROWS_AS(induced_graph(asym, Orientation::O12, "u4", NodeId("u1")), std::invalid_argument);
}

TEST_CASE("rank_mincut agrees with the randomized cross-check") {
    gf::Rng rng(31);
    int compared = 0;
    for (const auto& net : ldnet::testing::fuzz_networks(300, 21)) {
        for (int trial = 0; trial < 4; ++trial) {
            const auto set = random_layer_set(net, rng);
            if (!set) continue;
            CAPTURE(serialize_network(net));
            CAPTURE(format_set(*set));
            CHECK(rank_mincut(net, *set) == rank_mincut_randomized(net, *set, 16, rng()));
            ++compared;
        }
    }
    CHECK(compared > 500);
}

TEST_CASE("critical node invariants") {
    for (const auto& net : ldnet::testing::fuzz_networks(300, 22)) {
        for (int user : {1, 2}) {
            const CriticalNodeInfo info = critical_node(net, user);
            const NodeId dest = destination_id(user);
            if (info.layer == 0) {
                CHECK(info.node == source_id(user));
                CHECK_FALSE(net.reach_of_source(other_user(user)).contains(dest));
                continue;
            }
            CHECK(is_vertex_cut(net, info.clone_set, both_sources(), {dest}));
            CHECK(info.clone_set == clones(net, info.node));
            for (int layer = 1; layer <= net.last_layer(); ++layer) {
                for (const auto& node : net.layer(layer)) {
                    if (!is_vertex_cut(net, clones(net, node), both_sources(), {dest})) continue;
                    CHECK(layer >= info.layer);
                    if (layer == info.layer) CHECK(info.clone_set.contains(node));
                }
            }
            // The critical node is the primary min-cut of its destination, up to clones.
            REQUIRE(rank_mincut(net, {dest}) == 1);
            CHECK(clones(net, primary_mincut(net, {dest})).contains(info.node));
            // Two-parent rank for critical nodes past the first internal layer.
            if (info.layer >= 2) CHECK(rank_mincut(net, parents(net, info.node)) == 2);
        }
    }
}

TEST_CASE("omniscient node exists iff a critical node is omniscient") {
    for (const auto& net : ldnet::testing::fuzz_networks(400, 23)) {
        CHECK(omniscient_nodes(net).empty() == omniscient_nodes_full_scan(net).empty());
    }
    for (const auto& name : ldnet::testing::corpus_names()) {
        const Network net = corpus(name);
        CHECK(omniscient_nodes(net).empty() == omniscient_nodes_full_scan(net).empty());
    }
}

TEST_CASE("primary min-cut layer members are mutual clones in the restriction") {
    gf::Rng rng(41);
    for (const auto& net : ldnet::testing::fuzz_networks(300, 24)) {
        for (int trial = 0; trial < 3; ++trial) {
            const auto set = random_layer_set(net, rng);
            if (!set || rank_mincut(net, *set) != 1) continue;
            const NodeSet members = primary_mincut_layer_members(net, *set);
            REQUIRE_FALSE(members.empty());
            const NodeId pmc = primary_mincut(net, *set);
            CHECK(net.layer_of(pmc) == net.layer_of(*members.begin()));
            if (net.layer_of(pmc) == 0) continue;
            const NodeSet relevant = detail::relevant_ancestors(net, *set);
            const auto restricted = [&](const NodeId& node) {
                NodeSet out;
                for (const auto& parent : parents(net, node)) {
                    if (relevant.contains(parent)) out.insert(parent);
                }
                return out;
            };
            for (const auto& member : members) CHECK(restricted(member) == restricted(*members.begin()));
        }
    }
}

TEST_CASE("induced graph rewires only the anchor layer") {
    int rewired = 0;
    for (const auto& net : ldnet::testing::fuzz_networks(400, 25)) {
        const CriticalNodeInfo info = critical_node(net, 1);
        if (info.layer == 0) continue;
        const NodeSet neutralized = s_parents(net, info.node, 2);
        if (neutralized.empty()) continue;
        for (const auto& pivot : neutralized) {
            const InducedGraph induced = induced_graph(net, Orientation::O12, info.node, pivot);
            if (!induced.rewired) {
                CHECK(rank_mincut(net, neutralized) == 2);
                CHECK(serialize_network(induced.graph) == serialize_network(net));
                continue;
            }
            ++rewired;
            const int anchor_layer = net.layer_of(info.node);
            for (const auto& node : induced.graph.nodes()) {
                if (Network::is_source(node)) continue;
                if (!Network::is_destination(node)) CHECK(induced.graph.source_reachable(node));
                NodeSet expected = net.in_neighbors(node);
                if (net.layer_of(node) == anchor_layer && expected.contains(pivot)) {
                    NodeSet flipped;
                    std::set_symmetric_difference(expected.begin(), expected.end(), neutralized.begin(),
                                                  neutralized.end(), std::inserter(flipped, flipped.end()));
                    expected = flipped;
                }
                std::erase_if(expected, [&](const NodeId& parent) { return induced.dropped.contains(parent); });
                CHECK(induced.graph.in_neighbors(node) == expected);
            }
            for (const auto& node : induced.dropped) CHECK_FALSE(induced.graph.contains(node));
        }
    }
    CHECK(rewired > 20);
}

TEST_CASE("omniscience in the induced graph does not depend on the pivot") {
    int checked = 0;
    for (const auto& net : ldnet::testing::fuzz_networks(1000, 26)) {
        if (!omniscient_nodes(net).empty()) continue;
        const CriticalNodeInfo first = critical_node(net, 1);
        const CriticalNodeInfo second = critical_node(net, 2);
        if (first.layer == 0 || first.layer > second.layer) continue;
        const NodeSet neutralized = s_parents(net, first.node, 2);
        if (neutralized.size() < 2) continue;
        std::set<bool> outcomes;
        for (const auto& pivot : neutralized) {
            const InducedGraph induced = induced_graph(net, Orientation::O12, first.node, pivot);
            outcomes.insert(!omniscient_nodes_full_scan(induced.graph).empty());
        }
        CAPTURE(serialize_network(net));
        CHECK(outcomes.size() == 1);
        ++checked;
    }
    CHECK(checked > 10);
}
