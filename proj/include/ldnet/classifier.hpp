// Condition evaluation, region classification and exact rate-region geometry.
#pragma once

#include <boost/rational.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ldnet/netmodel.hpp"
#include "ldnet/structure.hpp"

namespace ldnet {

using Rational = boost::rational<long long>;

struct RatePair {
    Rational r1;
    Rational r2;
    friend bool operator==(const RatePair&, const RatePair&) = default;
};

inline std::string format_rational(const Rational& value) {
    if (value.denominator() == 1) return std::to_string(value.numerator());
    return std::to_string(value.numerator()) + "/" + std::to_string(value.denominator());
}

inline std::string format_rate(const RatePair& rate) {
    return "(" + format_rational(rate.r1) + "," + format_rational(rate.r2) + ")";
}

enum class RegionKind { Triangle, Trapezoid12, Trapezoid21, Pentagon, Square };

inline std::string region_code(RegionKind kind) {
    switch (kind) {
        case RegionKind::Triangle: return "T";
        case RegionKind::Trapezoid12: return "T12";
        case RegionKind::Trapezoid21: return "T21";
        case RegionKind::Pentagon: return "P";
        case RegionKind::Square: return "S";
    }
    return "?";
}

inline std::string region_name(RegionKind kind) {
    switch (kind) {
        case RegionKind::Triangle: return "Triangle";
        case RegionKind::Trapezoid12: return "Trapezoid12";
        case RegionKind::Trapezoid21: return "Trapezoid21";
        case RegionKind::Pentagon: return "Pentagon";
        case RegionKind::Square: return "Square";
    }
    return "?";
}

inline RegionKind mirror_region(RegionKind kind) {
    if (kind == RegionKind::Trapezoid12) return RegionKind::Trapezoid21;
    if (kind == RegionKind::Trapezoid21) return RegionKind::Trapezoid12;
    return kind;
}

inline bool region_contains(RegionKind kind, const RatePair& rate) {
    const Rational zero(0);
    const Rational one(1);
    const Rational two(2);
    const auto& [r1, r2] = rate;
    if (r1 < zero || r2 < zero || r1 > one || r2 > one) return false;
    switch (kind) {
        case RegionKind::Triangle: return r1 + r2 <= one;
        case RegionKind::Trapezoid12: return two * r1 + r2 <= two;
        case RegionKind::Trapezoid21: return r1 + two * r2 <= two;
        case RegionKind::Pentagon: return r1 + r2 <= Rational(3, 2);
        case RegionKind::Square: return true;
    }
    return false;
}

inline std::vector<RatePair> region_corners(RegionKind kind) {
    const Rational zero(0);
    const Rational half(1, 2);
    const Rational one(1);
    std::vector<RatePair> corners{{one, zero}};
    switch (kind) {
        case RegionKind::Triangle: break;
        case RegionKind::Trapezoid12: corners.push_back({half, one}); break;
        case RegionKind::Trapezoid21: corners.push_back({one, half}); break;
        case RegionKind::Pentagon:
            corners.push_back({one, half});
            corners.push_back({half, one});
            break;
        case RegionKind::Square: corners.push_back({one, one}); break;
    }
    corners.push_back({zero, one});
    return corners;
}

// Flags of one orientation (p,q); (1,2) anchors on v1* and neutralizes s2.
struct OrientationTrace {
    Orientation orientation = Orientation::O12;
    bool applicable = false;
    std::string reason;  // why the flags are not applicable
    bool t1 = false, t2 = false, t3 = false, t4 = false, p4 = false;
    std::optional<NodeId> w;  // Pmc(P^{s_q}(v_p*))
    std::optional<NodeId> u;  // Pmc over the induced graph of {v_q*}
    std::vector<std::string> notes;

    [[nodiscard]] bool q4() const { return t4 || p4; }
    [[nodiscard]] bool trapezoid() const { return applicable && t1 && t2 && t3 && t4; }
    [[nodiscard]] bool pentagon() const { return applicable && t1 && t2 && t3 && p4; }
    [[nodiscard]] bool q() const { return applicable && t1 && t2 && t3 && q4(); }
};

struct ConditionTrace {
    CriticalNodeInfo critical1;
    CriticalNodeInfo critical2;
    NodeSet omniscient;
    OrientationTrace o12;
    OrientationTrace o21;

    [[nodiscard]] const CriticalNodeInfo& critical(int user) const { return user == 1 ? critical1 : critical2; }
    [[nodiscard]] const OrientationTrace& orientation(Orientation which) const {
        return which == Orientation::O12 ? o12 : o21;
    }
};

inline OrientationTrace evaluate_orientation(const Network& net, Orientation orientation,
                                             const CriticalNodeInfo& anchor_info, const CriticalNodeInfo& other_info) {
    OrientationTrace trace;
    trace.orientation = orientation;
    const int interferer = second_user(orientation);
    if (anchor_info.layer > other_info.layer) {
        trace.reason = "anchor critical node lies after the other critical node";
        return trace;
    }
    trace.applicable = true;
    trace.t1 = anchor_info.layer > 0;
    if (!trace.t1) return trace;

    const NodeSet interfering = s_parents(net, anchor_info.node, interferer);
    if (interfering.empty()) {
        trace.notes.push_back("anchor has no " + source_id(interferer) + "-reachable parents");
        return trace;
    }
    trace.t2 = rank_mincut(net, interfering) == 1;
    if (trace.t2) trace.w = primary_mincut(net, interfering);

    const InducedGraph induced = induced_graph(net, orientation, anchor_info.node);
    if (!induced.graph.contains(other_info.node) || !induced.graph.source_reachable(other_info.node)) {
        trace.notes.push_back("critical node " + other_info.node + " is dropped from the induced graph");
    } else {
        trace.u = primary_mincut(induced.graph, {other_info.node});
        if (*trace.u == source_id(interferer)) {
            trace.t3 = false;
        } else if (Network::is_source(*trace.u)) {
            // Only the anchor's source still reaches the other critical node: its destination is cut off.
            trace.t3 = true;
            trace.notes.push_back("induced-graph primary min-cut of " + other_info.node + " is " + *trace.u);
        } else {
            trace.t3 = is_omniscient(induced.graph, *trace.u);
        }
    }

    if (trace.t2) {
        trace.t4 = *trace.w == source_id(interferer);
        if (!trace.t4) {
            trace.p4 = is_vertex_cut(net, s_clones(net, *trace.w, interferer), {source_id(interferer)},
                                     {destination_id(interferer)});
        }
    }
    return trace;
}

inline ConditionTrace eval_conditions(const Network& net) {
    ConditionTrace trace;
    trace.critical1 = critical_node(net, 1);
    trace.critical2 = critical_node(net, 2);
    trace.omniscient = omniscient_nodes(net);
    trace.o12 = evaluate_orientation(net, Orientation::O12, trace.critical1, trace.critical2);
    trace.o21 = evaluate_orientation(net, Orientation::O21, trace.critical2, trace.critical1);
    if (!trace.omniscient.empty()) {
        for (OrientationTrace* orient : {&trace.o12, &trace.o21}) {
            orient->applicable = false;
            orient->reason = "network has an omniscient node";
        }
    }
    return trace;
}

struct AnalysisReport {
    std::string network;
    RegionKind region = RegionKind::Square;
    ConditionTrace trace;
    std::vector<std::string> warnings;
};

inline AnalysisReport classify(const Network& net) {
    AnalysisReport report;
    report.network = net.name();
    report.trace = eval_conditions(net);
    report.warnings = net.warnings();
    const ConditionTrace& trace = report.trace;
    if (!trace.omniscient.empty()) {
        report.region = RegionKind::Triangle;
    } else if (trace.o12.trapezoid() || trace.o21.trapezoid()) {
        if (trace.o12.trapezoid() && trace.o21.trapezoid()) {
            report.warnings.push_back("both trapezoid conditions hold; reporting Trapezoid12");
        }
        report.region = trace.o12.trapezoid() ? RegionKind::Trapezoid12 : RegionKind::Trapezoid21;
    } else if (trace.o12.pentagon() || trace.o21.pentagon()) {
        report.region = RegionKind::Pentagon;
    } else {
        report.region = RegionKind::Square;
    }
    for (const OrientationTrace* orient : {&trace.o12, &trace.o21}) {
        if (!orient->applicable) continue;
        for (const auto& note : orient->notes) {
            report.warnings.push_back("orientation " + orientation_name(orient->orientation) + ": " + note);
        }
    }
    return report;
}

inline nlohmann::ordered_json orientation_json(const OrientationTrace& trace) {
    nlohmann::ordered_json out;
    const auto flag = [&](bool value) -> nlohmann::ordered_json {
        if (!trace.applicable) return "n/a";
        return value;
    };
    out["applicable"] = trace.applicable;
    if (!trace.applicable) out["reason"] = trace.reason;
    out["T1"] = flag(trace.t1);
    out["T2"] = flag(trace.t2);
    out["T3"] = flag(trace.t3);
    out["T4"] = flag(trace.t4);
    out["P4"] = flag(trace.p4);
    out["Q4"] = flag(trace.q4());
    out["T"] = flag(trace.trapezoid());
    out["P"] = flag(trace.pentagon());
    out["Q"] = flag(trace.q());
    out["w"] = trace.w ? nlohmann::ordered_json(*trace.w) : nlohmann::ordered_json(nullptr);
    out["u"] = trace.u ? nlohmann::ordered_json(*trace.u) : nlohmann::ordered_json(nullptr);
    return out;
}

inline nlohmann::ordered_json report_json(const AnalysisReport& report) {
    nlohmann::ordered_json out;
    out["network"] = report.network;
    out["k1"] = report.trace.critical1.layer;
    out["k2"] = report.trace.critical2.layer;
    out["v1"] = report.trace.critical1.node;
    out["v2"] = report.trace.critical2.node;
    out["omniscient"] = std::vector<std::string>(report.trace.omniscient.begin(), report.trace.omniscient.end());
    out["conditions"]["12"] = orientation_json(report.trace.o12);
    out["conditions"]["21"] = orientation_json(report.trace.o21);
    out["region"] = region_code(report.region);
    out["warnings"] = report.warnings;
    return out;
}

inline std::string report_text(const AnalysisReport& report) {
    std::ostringstream out;
    const auto& trace = report.trace;
    out << "network:    " << report.network << '\n';
    out << "region:     " << region_code(report.region) << " (" << region_name(report.region) << ")\n";
    out << "critical 1: " << trace.critical1.node << " at layer " << trace.critical1.layer << '\n';
    out << "critical 2: " << trace.critical2.node << " at layer " << trace.critical2.layer << '\n';
    out << "omniscient: " << format_set(trace.omniscient) << '\n';
    for (const OrientationTrace* orient : {&trace.o12, &trace.o21}) {
        out << "orientation " << orientation_name(orient->orientation) << ": ";
        if (!orient->applicable) {
            out << "n/a (" << orient->reason << ")\n";
            continue;
        }
        const auto bit = [](bool value) { return value ? "1" : "0"; };
        out << "T1=" << bit(orient->t1) << " T2=" << bit(orient->t2) << " T3=" << bit(orient->t3)
            << " T4=" << bit(orient->t4) << " P4=" << bit(orient->p4) << " Q4=" << bit(orient->q4())
            << " w=" << orient->w.value_or("-") << " u=" << orient->u.value_or("-") << '\n';
    }
    for (const auto& warning : report.warnings) out << "warning: " << warning << '\n';
    return out.str();
}

}  // namespace ldnet
