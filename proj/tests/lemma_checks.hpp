#pragma once

#include <algorithm>
#include <vector>

#include "ldnet/classifier.hpp"
#include "ldnet/codesim.hpp"
#include "ldnet/structure.hpp"

namespace ldnet::testing {

// Hit counts per instance over repeated seeds.
struct Frequency {
    std::size_t instances = 0;
    std::size_t trials = 0;
    std::size_t hits = 0;
    double worst = 1.0;

    void add(std::size_t instance_hits, std::size_t instance_trials) {
        ++instances;
        trials += instance_trials;
        hits += instance_hits;
        if (instance_trials > 0)
            worst = std::min(worst, static_cast<double>(instance_hits) / static_cast<double>(instance_trials));
    }
    [[nodiscard]] double rate() const {
        return trials == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(trials);
    }
};

constexpr int kLemmaDegree = 16;

inline Reception rlc_reception(const Network& net, std::uint64_t seed) {
    return propagate(net, rlc_assign(net, 1, kLemmaDegree, seed));
}

inline std::size_t reception_rank(const Reception& rec, const NodeSet& nodes) {
    std::vector<gf::Vector> rows;
    for (const auto& node : nodes) rows.push_back(rec.at(0, node));
    return gf::rank_of_rows(rows, rec.symbols, kLemmaDegree);
}

// Every s_i-reachable node sees a nonzero coefficient on s_i's symbol under full random coding.
inline Frequency reachability_frequency(const std::vector<Network>& nets, int seeds) {
    Frequency out;
    for (const auto& net : nets) {
        std::size_t hits = 0;
        for (int seed = 0; seed < seeds; ++seed) {
            const Reception rec = rlc_reception(net, gf::mix_seed(101, static_cast<std::uint64_t>(seed)));
            bool ok = true;
            for (int user : {1, 2}) {
                for (const auto& node : net.reach_of_source(user)) {
                    if (!Network::is_source(node) && rec.at(0, node)[static_cast<std::size_t>(user - 1)].is_zero())
                        ok = false;
                }
            }
            hits += ok ? 1 : 0;
        }
        out.add(hits, static_cast<std::size_t>(seeds));
    }
    return out;
}

// Same-layer sets of rank-mincut two receive a rank-two reception under full random coding.
inline Frequency two_source_frequency(const std::vector<Network>& nets, int seeds) {
    Frequency out;
    for (const auto& net : nets) {
        for (int layer = 1; layer <= net.last_layer(); ++layer) {
            const NodeSet& members = net.layer(layer);
            if (members.size() < 2 || rank_mincut(net, members) != 2) continue;
            std::size_t hits = 0;
            for (int seed = 0; seed < seeds; ++seed) {
                const Reception rec = rlc_reception(net, gf::mix_seed(202, static_cast<std::uint64_t>(seed)));
                hits += reception_rank(rec, members) == 2 ? 1 : 0;
            }
            out.add(hits, static_cast<std::size_t>(seeds));
        }
    }
    return out;
}

// Square networks with 0 < k1* < k2* and rank-two interfering parents of v1*, mirrored so user 1 is earlier.
inline std::vector<Network> neutralization_cases(const std::vector<Network>& nets) {
    std::vector<Network> out;
    for (const auto& raw : nets) {
        const AnalysisReport report = classify(raw);
        if (report.region != RegionKind::Square) continue;
        const auto& trace = report.trace;
        if (trace.critical1.layer == trace.critical2.layer) continue;
        const Network net = trace.critical1.layer < trace.critical2.layer ? raw : mirrored(raw);
        const CriticalNodeInfo first = critical_node(net, 1);
        if (first.layer == 0) continue;
        const NodeSet interfering = s_parents(net, first.node, 2);
        if (interfering.empty() || rank_mincut(net, interfering) != 2) continue;
        out.push_back(net);
    }
    return out;
}

struct NeutralizationFrequencies {
    Frequency reception;  // layer-k1* nodes reaching d2: nonzero receptions spanning dimension two
    Frequency far_layer;  // parents of v2* jointly decode both symbols
};

inline NeutralizationFrequencies neutralization_frequency(const std::vector<Network>& cases, int seeds) {
    NeutralizationFrequencies out;
    for (const auto& net : cases) {
        const CriticalNodeInfo first = critical_node(net, 1);
        const CriticalNodeInfo second = critical_node(net, 2);
        const NodeSet interfering = s_parents(net, first.node, 2);
        const NodeSet toward_d2 = net.backward_closure({"d2"});
        NodeSet boundary;
        for (const auto& node : net.layer(first.layer)) {
            if (toward_d2.contains(node)) boundary.insert(node);
        }
        const NodeSet far = parents(net, second.node);
        std::size_t reception_hits = 0;
        std::size_t far_hits = 0;
        for (int seed = 0; seed < seeds; ++seed) {
            const Rational one(1);
            const CodingScheme base = blank_scheme(net, make_layout({one, one}, 1), kLemmaDegree,
                                                   gf::mix_seed(303, static_cast<std::uint64_t>(seed)));
            Reception rec;
            try {
                rec = propagate(net, solve_neutralization(net, base, interfering, {CriterionKind::Only, 1, {}}));
            } catch (const ResampleError&) {
                continue;
            }
            bool ok = reception_rank(rec, boundary) == 2;
            for (const auto& node : boundary) {
                const gf::Vector& row = rec.at(0, node);
                if (gf::is_zero_vector(row)) ok = false;
                if (net.reach_of_source(1).contains(node) && row[0].is_zero()) ok = false;
            }
            reception_hits += ok ? 1 : 0;
            far_hits += reception_rank(rec, far) == 2 ? 1 : 0;
        }
        out.reception.add(reception_hits, static_cast<std::size_t>(seeds));
        out.far_layer.add(far_hits, static_cast<std::size_t>(seeds));
    }
    return out;
}

}  // namespace ldnet::testing
