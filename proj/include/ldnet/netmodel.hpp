// Layered two-unicast network: data model, text format, pruning and graph queries.
#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ldnet {

using NodeId = std::string;
using NodeSet = std::set<NodeId>;
using Edge = std::pair<NodeId, NodeId>;

// Raised for malformed or invalid network input; `line` is 0 when not tied to a line.
class InputError : public std::runtime_error {
public:
    InputError(const std::string& message, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
    [[nodiscard]] int line() const { return line_; }

private:
    int line_;
};

inline NodeId source_id(int user) { return user == 1 ? "s1" : "s2"; }
inline NodeId destination_id(int user) { return user == 1 ? "d1" : "d2"; }
inline int other_user(int user) { return 3 - user; }

inline void require_user(int user) {
    if (user != 1 && user != 2) throw std::invalid_argument("user index must be 1 or 2");
}

struct NetworkSpec {
    std::string name;
    std::map<NodeId, int> layer_of;
    std::set<Edge> edges;
    std::vector<std::string> warnings;
};

class Network {
public:
    // Checks the layering invariants; pruning is done by build_network.
    explicit Network(NetworkSpec spec) : name_(std::move(spec.name)), warnings_(std::move(spec.warnings)) {
        layer_of_ = std::move(spec.layer_of);
        for (const char* reserved : {"s1", "s2", "d1", "d2"}) {
            if (!layer_of_.contains(reserved)) {
                const std::string kind = reserved[0] == 's' ? "source" : "destination";
                throw InputError("missing " + kind + " " + reserved);
            }
        }
        if (layer_of_.at("s1") != 0 || layer_of_.at("s2") != 0) throw InputError("sources must lie in layer 0");
        last_layer_ = layer_of_.at("d1");
        if (layer_of_.at("d2") != last_layer_) throw InputError("destinations must share the last layer");
        if (last_layer_ < 1) throw InputError("destinations must lie after layer 0");
        layers_.assign(static_cast<std::size_t>(last_layer_) + 1, NodeSet{});
        for (const auto& [node, layer] : layer_of_) {
            const bool reserved = is_source(node) || is_destination(node);
            if (!reserved && (layer <= 0 || layer >= last_layer_)) {
                throw InputError("node " + node + " must lie strictly between the source and destination layers");
            }
            layers_[static_cast<std::size_t>(layer)].insert(node);
        }
        for (const auto& [from, to] : spec.edges) {
            if (!layer_of_.contains(from) || !layer_of_.contains(to)) throw InputError("edge references unknown node");
            if (layer_of_.at(to) != layer_of_.at(from) + 1) {
                throw InputError("non-consecutive-layer edge " + from + " -> " + to);
            }
            edges_.insert({from, to});
            children_[from].insert(to);
            in_neighbors_[to].insert(from);
        }
        for (int layer = 0; layer <= last_layer_; ++layer) {
            for (const auto& node : layers_[static_cast<std::size_t>(layer)]) ordered_nodes_.push_back(node);
        }
        reach_[0] = forward_closure({"s1"});
        reach_[1] = forward_closure({"s2"});
    }

    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] const std::vector<std::string>& warnings() const { return warnings_; }
    [[nodiscard]] int last_layer() const { return last_layer_; }
    [[nodiscard]] int layer_count() const { return last_layer_ + 1; }
    // Nodes ordered by (layer, name).
    [[nodiscard]] const std::vector<NodeId>& nodes() const { return ordered_nodes_; }
    [[nodiscard]] const std::set<Edge>& edges() const { return edges_; }
    [[nodiscard]] const NodeSet& layer(int index) const { return layers_.at(static_cast<std::size_t>(index)); }
    [[nodiscard]] bool contains(const NodeId& node) const { return layer_of_.contains(node); }

    [[nodiscard]] int layer_of(const NodeId& node) const {
        const auto found = layer_of_.find(node);
        if (found == layer_of_.end()) throw std::invalid_argument("unknown node " + node);
        return found->second;
    }

    [[nodiscard]] const NodeSet& children(const NodeId& node) const { return lookup(children_, node); }
    // All in-neighbours, without the source-reachability filter.
    [[nodiscard]] const NodeSet& in_neighbors(const NodeId& node) const { return lookup(in_neighbors_, node); }

    // Nodes reachable from source s_user (including the source itself).
    [[nodiscard]] const NodeSet& reach_of_source(int user) const {
        require_user(user);
        return reach_[user - 1];
    }

    [[nodiscard]] bool source_reachable(const NodeId& node) const {
        return reach_[0].contains(node) || reach_[1].contains(node);
    }

    static bool is_source(const NodeId& node) { return node == "s1" || node == "s2"; }
    static bool is_destination(const NodeId& node) { return node == "d1" || node == "d2"; }

    [[nodiscard]] NodeSet forward_closure(const NodeSet& start) const {
        NodeSet seen;
        std::vector<NodeId> stack;
        for (const auto& node : start) {
            if (!contains(node)) throw std::invalid_argument("unknown node " + node);
            if (seen.insert(node).second) stack.push_back(node);
        }
        while (!stack.empty()) {
            const NodeId node = stack.back();
            stack.pop_back();
            for (const auto& child : children(node)) {
                if (seen.insert(child).second) stack.push_back(child);
            }
        }
        return seen;
    }

    // Nodes from which some member of `targets` is reachable (including the targets).
    [[nodiscard]] NodeSet backward_closure(const NodeSet& targets) const {
        NodeSet seen;
        std::vector<NodeId> stack;
        for (const auto& node : targets) {
            if (!contains(node)) throw std::invalid_argument("unknown node " + node);
            if (seen.insert(node).second) stack.push_back(node);
        }
        while (!stack.empty()) {
            const NodeId node = stack.back();
            stack.pop_back();
            for (const auto& parent : in_neighbors(node)) {
                if (seen.insert(parent).second) stack.push_back(parent);
            }
        }
        return seen;
    }

    [[nodiscard]] NetworkSpec spec() const { return {name_, layer_of_, edges_, warnings_}; }

private:
    static const NodeSet& lookup(const std::map<NodeId, NodeSet>& table, const NodeId& node) {
        static const NodeSet empty;
        const auto found = table.find(node);
        return found == table.end() ? empty : found->second;
    }

    std::string name_;
    std::vector<std::string> warnings_;
    std::map<NodeId, int> layer_of_;
    std::set<Edge> edges_;
    std::map<NodeId, NodeSet> children_;
    std::map<NodeId, NodeSet> in_neighbors_;
    std::vector<NodeSet> layers_;
    std::vector<NodeId> ordered_nodes_;
    NodeSet reach_[2];
    int last_layer_ = 0;
};

enum class PruneMode {
    // Drop nodes unreachable from both sources or reaching no destination; require s_i to reach d_i.
    Validate,
    // Drop nodes unreachable from both sources only; no source/destination requirement.
    SourceUnreachableOnly,
};

// One pass suffices: a node kept by both rules only has kept ancestors on its source paths and
// kept descendants on its destination paths.
inline Network build_network(NetworkSpec spec, PruneMode mode = PruneMode::Validate) {
    const Network raw(spec);
    const NodeSet to_destination = raw.backward_closure({"d1", "d2"});
    NetworkSpec pruned{spec.name, {}, {}, spec.warnings};
    for (const auto& node : raw.nodes()) {
        const bool reserved = Network::is_source(node) || Network::is_destination(node);
        if (!reserved && !raw.source_reachable(node)) {
            pruned.warnings.push_back("pruned node " + node + ": not reachable from any source");
            continue;
        }
        if (!reserved && mode == PruneMode::Validate && !to_destination.contains(node)) {
            pruned.warnings.push_back("pruned node " + node + ": reaches no destination");
            continue;
        }
        pruned.layer_of[node] = raw.layer_of(node);
    }
    for (const auto& edge : spec.edges) {
        if (pruned.layer_of.contains(edge.first) && pruned.layer_of.contains(edge.second)) pruned.edges.insert(edge);
    }
    Network net(std::move(pruned));
    if (mode == PruneMode::Validate) {
        for (int user : {1, 2}) {
            if (!net.reach_of_source(user).contains(destination_id(user))) {
                throw InputError(source_id(user) + " cannot reach " + destination_id(user));
            }
        }
    }
    return net;
}

namespace detail {

inline bool valid_token(const std::string& token) {
    return !token.empty() &&
           std::all_of(token.begin(), token.end(), [](unsigned char ch) { return std::isalnum(ch) != 0 || ch == '_'; });
}

}  // namespace detail

inline Network parse_network(const std::string& text, const std::string& name = "network") {
    NetworkSpec spec;
    spec.name = name;
    struct PendingEdge {
        NodeId from;
        NodeId to;
        int line;
    };
    std::vector<PendingEdge> pending;
    std::istringstream input(text);
    std::string raw_line;
    int line_no = 0;
    while (std::getline(input, raw_line)) {
        ++line_no;
        if (const auto hash = raw_line.find('#'); hash != std::string::npos) raw_line.erase(hash);
        std::istringstream fields(raw_line);
        std::vector<std::string> tokens;
        for (std::string token; fields >> token;) tokens.push_back(token);
        if (tokens.empty()) continue;
        if (tokens[0] == "node") {
            if (tokens.size() != 3 || !detail::valid_token(tokens[1])) {
                throw InputError("syntax error: expected 'node <name> <layer>'", line_no);
            }
            int layer = 0;
            try {
                std::size_t consumed = 0;
                layer = std::stoi(tokens[2], &consumed);
                if (consumed != tokens[2].size() || layer < 0) throw std::invalid_argument("layer");
            } catch (const std::exception&) {
                throw InputError("syntax error: invalid layer '" + tokens[2] + "'", line_no);
            }
            if (!spec.layer_of.emplace(tokens[1], layer).second) {
                throw InputError("duplicate node " + tokens[1], line_no);
            }
        } else if (tokens[0] == "edge") {
            if (tokens.size() != 3 || !detail::valid_token(tokens[1]) || !detail::valid_token(tokens[2])) {
                throw InputError("syntax error: expected 'edge <from> <to>'", line_no);
            }
            pending.push_back({tokens[1], tokens[2], line_no});
        } else {
            throw InputError("syntax error: unknown directive '" + tokens[0] + "'", line_no);
        }
    }
    for (const auto& edge : pending) {
        for (const auto& endpoint : {edge.from, edge.to}) {
            if (!spec.layer_of.contains(endpoint)) throw InputError("unknown node " + endpoint, edge.line);
        }
        if (spec.layer_of.at(edge.to) != spec.layer_of.at(edge.from) + 1) {
            throw InputError("non-consecutive-layer edge " + edge.from + " -> " + edge.to, edge.line);
        }
        if (!spec.edges.insert({edge.from, edge.to}).second) {
            throw InputError("duplicate edge " + edge.from + " -> " + edge.to, edge.line);
        }
    }
    return build_network(std::move(spec), PruneMode::Validate);
}

inline std::string serialize_network(const Network& net) {
    std::ostringstream out;
    for (const auto& node : net.nodes()) out << "node " << node << ' ' << net.layer_of(node) << '\n';
    for (const auto& [from, to] : net.edges()) out << "edge " << from << ' ' << to << '\n';
    return out.str();
}

inline NodeSet reachable_from(const Network& net, const NodeId& source) {
    if (!net.contains(source)) throw std::invalid_argument("unknown node " + source);
    return net.forward_closure({source});
}

inline void require_non_source(const Network& net, const NodeId& node) {
    if (!net.contains(node)) throw std::invalid_argument("unknown node " + node);
    if (Network::is_source(node)) throw std::invalid_argument("node " + node + " is a source");
}

// Parents reachable from at least one source.
inline NodeSet parents(const Network& net, const NodeId& node) {
    require_non_source(net, node);
    NodeSet out;
    for (const auto& parent : net.in_neighbors(node)) {
        if (net.source_reachable(parent)) out.insert(parent);
    }
    return out;
}

// Parents reachable from source s_user.
inline NodeSet s_parents(const Network& net, const NodeId& node, int user) {
    require_non_source(net, node);
    const NodeSet& reach = net.reach_of_source(user);
    NodeSet out;
    for (const auto& parent : net.in_neighbors(node)) {
        if (reach.contains(parent)) out.insert(parent);
    }
    return out;
}

inline NodeSet clones(const Network& net, const NodeId& node) {
    const NodeSet mine = parents(net, node);
    NodeSet out;
    for (const auto& peer : net.layer(net.layer_of(node))) {
        if (parents(net, peer) == mine) out.insert(peer);
    }
    return out;
}

inline NodeSet s_clones(const Network& net, const NodeId& node, int user) {
    const NodeSet mine = s_parents(net, node, user);
    NodeSet out;
    for (const auto& peer : net.layer(net.layer_of(node))) {
        if (s_parents(net, peer, user) == mine) out.insert(peer);
    }
    return out;
}

// True iff removing `cut` leaves no path from from\cut to to\cut.
inline bool is_vertex_cut(const Network& net, const NodeSet& cut, const NodeSet& from, const NodeSet& to) {
    NodeSet seen;
    std::vector<NodeId> stack;
    for (const auto& node : from) {
        if (!cut.contains(node) && seen.insert(node).second) stack.push_back(node);
    }
    while (!stack.empty()) {
        const NodeId node = stack.back();
        stack.pop_back();
        if (to.contains(node)) return false;
        for (const auto& child : net.children(node)) {
            if (!cut.contains(child) && seen.insert(child).second) stack.push_back(child);
        }
    }
    return true;
}

// Swap the roles of (s1,d1) and (s2,d2).
inline NodeId mirror_id(const NodeId& node) {
    static const std::map<NodeId, NodeId> swap{{"s1", "s2"}, {"s2", "s1"}, {"d1", "d2"}, {"d2", "d1"}};
    const auto found = swap.find(node);
    return found == swap.end() ? node : found->second;
}

inline Network mirrored(const Network& net) {
    NetworkSpec spec;
    spec.name = net.name();
    spec.warnings = net.warnings();
    for (const auto& node : net.nodes()) spec.layer_of[mirror_id(node)] = net.layer_of(node);
    for (const auto& [from, to] : net.edges()) spec.edges.insert({mirror_id(from), mirror_id(to)});
    return Network(std::move(spec));
}

inline std::string format_set(const NodeSet& set) {
    std::string out = "{";
    for (const auto& node : set) {
        if (out.size() > 1) out += ",";
        out += node;
    }
    return out + "}";
}

}  // namespace ldnet
