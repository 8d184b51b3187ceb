// Linear coding over GF(2^r): node roles, coefficient resolution under neutralization constraints,
// propagation of global coefficients, decodability checks, table replay and the corner-point drivers.
#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ldnet/classifier.hpp"
#include "ldnet/gf.hpp"
#include "ldnet/netmodel.hpp"
#include "ldnet/structure.hpp"

namespace ldnet {

// A with-high-probability event failed for the drawn coefficients; a fresh seed may succeed.
class ResampleError : public std::runtime_error {
public:
    ResampleError(std::string stage, const std::string& detail)
        : std::runtime_error(stage + ": " + detail), stage_(std::move(stage)) {}
    [[nodiscard]] const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

class OutOfRegionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct SymbolLayout {
    int slots = 1;
    std::vector<std::string> names;
    std::vector<int> owner;
    std::vector<std::array<int, 2>> injection;  // [slot][user - 1] -> symbol index or -1

    [[nodiscard]] std::size_t size() const { return names.size(); }

    [[nodiscard]] std::vector<int> symbols_of(int user) const {
        std::vector<int> out;
        for (std::size_t i = 0; i < owner.size(); ++i) {
            if (owner[i] == user) out.push_back(static_cast<int>(i));
        }
        return out;
    }

    [[nodiscard]] int index_of(const std::string& name) const {
        const auto found = std::find(names.begin(), names.end(), name);
        if (found == names.end()) throw std::invalid_argument("unknown symbol " + name);
        return static_cast<int>(found - names.begin());
    }

    [[nodiscard]] int injected(int slot, int user) const {
        return injection.at(static_cast<std::size_t>(slot))[user - 1];
    }

    int add_symbol(const std::string& name, int user) {
        names.push_back(name);
        owner.push_back(user);
        return static_cast<int>(names.size()) - 1;
    }
};

inline int symbol_count(const Rational& rate, int slots) {
    const Rational count = rate * Rational(slots);
    if (count.denominator() != 1) throw std::invalid_argument("rate " + format_rational(rate) + " needs more slots");
    return static_cast<int>(count.numerator());
}

inline int slots_for(const RatePair& rate) {
    for (const Rational& value : {rate.r1, rate.r2}) {
        if (value < Rational(0) || value > Rational(1) || (value.denominator() != 1 && value.denominator() != 2)) {
            throw std::invalid_argument("rates must be halves in [0,1], got " + format_rate(rate));
        }
    }
    return (rate.r1.denominator() == 2 || rate.r2.denominator() == 2) ? 2 : 1;
}

// One symbol per slot at full rate; a half-rate user repeats its single symbol in both slots.
inline SymbolLayout make_layout(const RatePair& rate, int slots) {
    if (slots < slots_for(rate) || slots > 2) {
        throw std::invalid_argument("rate " + format_rate(rate) + " does not fit " + std::to_string(slots) +
                                    " slot(s)");
    }
    SymbolLayout layout;
    layout.slots = slots;
    layout.injection.assign(static_cast<std::size_t>(layout.slots), {-1, -1});
    for (int user : {1, 2}) {
        const std::string letter = user == 1 ? "a" : "b";
        const int count = symbol_count(user == 1 ? rate.r1 : rate.r2, layout.slots);
        if (count == 0) continue;
        if (count == layout.slots) {
            for (int slot = 0; slot < layout.slots; ++slot) {
                const std::string name = layout.slots == 1 ? letter : letter + std::to_string(slot + 1);
                layout.injection[static_cast<std::size_t>(slot)][user - 1] = layout.add_symbol(name, user);
            }
        } else {
            const int symbol = layout.add_symbol(letter, user);
            for (auto& slot : layout.injection) slot[user - 1] = symbol;
        }
    }
    return layout;
}

inline SymbolLayout make_layout(const RatePair& rate) { return make_layout(rate, slots_for(rate)); }

// Two slots, user 1 active in the first and user 2 in the second.
inline SymbolLayout time_sharing_layout() {
    SymbolLayout layout;
    layout.slots = 2;
    layout.injection.assign(2, {-1, -1});
    layout.injection[0][0] = layout.add_symbol("a", 1);
    layout.injection[1][1] = layout.add_symbol("b", 2);
    return layout;
}

enum class RoleKind { Inject, RLC, Silent, Replay, Neutralize, ZeroForce, ScaledForward };

inline std::string role_name(RoleKind kind) {
    switch (kind) {
        case RoleKind::Inject: return "inject";
        case RoleKind::RLC: return "rlc";
        case RoleKind::Silent: return "silent";
        case RoleKind::Replay: return "replay";
        case RoleKind::Neutralize: return "neutralize";
        case RoleKind::ZeroForce: return "zero-force";
        case RoleKind::ScaledForward: return "scaled-forward";
    }
    return "?";
}

// Inject/ScaledForward: `symbol` is the symbol sent. ZeroForce: `symbol` is the cancelled symbol,
// or -1 for a free combination of the node's receptions in all slots.
struct Role {
    RoleKind kind = RoleKind::RLC;
    int symbol = -1;
    gf::Vector expression;
    std::vector<std::size_t> constraints;
};

// Sum over `aggregate` of the transmissions in `slot` has zero `zeroed` coefficients and,
// when `required` is nonempty, some nonzero `required` coefficient.
struct Constraint {
    int slot = 0;
    NodeSet aggregate;
    std::vector<int> zeroed;
    std::vector<int> required;
    std::string label;
};

using SlotNode = std::pair<int, NodeId>;

struct CodingScheme {
    int slots = 1;
    int degree = 16;
    SymbolLayout layout;
    std::uint64_t seed = 0;
    std::map<SlotNode, Role> roles;
    std::vector<Constraint> constraints;
    std::map<SlotNode, gf::Vector> coefficients;
    std::string route;

    [[nodiscard]] const Role& role(int slot, const NodeId& node) const {
        const auto found = roles.find({slot, node});
        if (found == roles.end())
            throw std::logic_error("no role for " + node + " in slot " + std::to_string(slot + 1));
        return found->second;
    }
};

struct Reception {
    int slots = 1;
    std::size_t symbols = 0;
    std::vector<std::map<NodeId, gf::Vector>> received;
    std::vector<std::map<NodeId, gf::Vector>> transmitted;

    [[nodiscard]] const gf::Vector& at(int slot, const NodeId& node) const {
        return received.at(static_cast<std::size_t>(slot)).at(node);
    }
};

// Sources inject their slot symbol (or stay silent), every other non-destination node does RLC.
inline CodingScheme blank_scheme(const Network& net, const SymbolLayout& layout, int degree, std::uint64_t seed) {
    gf::field_modulus(degree);
    CodingScheme scheme;
    scheme.slots = layout.slots;
    scheme.degree = degree;
    scheme.layout = layout;
    scheme.seed = seed;
    for (int slot = 0; slot < layout.slots; ++slot) {
        for (const auto& node : net.nodes()) {
            if (Network::is_destination(node)) continue;
            Role role;
            if (Network::is_source(node)) {
                const int symbol = layout.injected(slot, node == "s1" ? 1 : 2);
                role.kind = symbol < 0 ? RoleKind::Silent : RoleKind::Inject;
                role.symbol = symbol;
            }
            scheme.roles[{slot, node}] = role;
        }
    }
    return scheme;
}

namespace detail {

inline gf::Vector unit_vector(std::size_t size, int index, int degree) {
    gf::Vector out = gf::zero_vector(size, degree);
    out.at(static_cast<std::size_t>(index)) = gf::FieldElem::one(degree);
    return out;
}

// Coefficients x with sum_t x_t * rows[t] equal to the unit vector of `symbol`, if any.
inline std::optional<gf::Vector> decoding_row(const std::vector<gf::Vector>& rows, int symbol, std::size_t symbols,
                                              int degree) {
    gf::Matrix system(symbols, rows.size(), degree);
    for (std::size_t t = 0; t < rows.size(); ++t) {
        for (std::size_t j = 0; j < symbols; ++j) system.set(j, t, rows[t][j]);
    }
    const gf::SolveResult result = gf::solve(system, unit_vector(symbols, symbol, degree));
    if (!result.consistent()) return std::nullopt;
    return result.particular;
}

struct PreTransmission {
    std::vector<gf::Vector> basis;    // transmission = sum of coefficient_i * basis_i
    std::optional<gf::Vector> fixed;  // set for silent and replayed nodes
};

inline std::vector<gf::Vector> stacked_receptions(const Reception& rec, const NodeId& node) {
    std::vector<gf::Vector> rows;
    for (const auto& slot : rec.received) rows.push_back(slot.at(node));
    return rows;
}

inline PreTransmission pre_transmission(const CodingScheme& scheme, const Reception& rec, int slot,
                                        const NodeId& node) {
    const Role& role = scheme.role(slot, node);
    const std::size_t size = scheme.layout.size();
    const int degree = scheme.degree;
    PreTransmission pre;
    switch (role.kind) {
        case RoleKind::Silent: pre.fixed = gf::zero_vector(size, degree); break;
        case RoleKind::Replay:
            if (role.expression.size() != size)
                throw std::invalid_argument("replay expression size mismatch at " + node);
            pre.fixed = role.expression;
            break;
        case RoleKind::Inject: pre.basis.push_back(unit_vector(size, role.symbol, degree)); break;
        case RoleKind::RLC:
        case RoleKind::Neutralize: pre.basis.push_back(rec.at(slot, node)); break;
        case RoleKind::ScaledForward:
            if (!decoding_row(stacked_receptions(rec, node), role.symbol, size, degree)) {
                throw ResampleError(
                    "scaled-forward",
                    node + " cannot decode " + scheme.layout.names.at(static_cast<std::size_t>(role.symbol)));
            }
            pre.basis.push_back(unit_vector(size, role.symbol, degree));
            break;
        case RoleKind::ZeroForce: {
            if (role.symbol < 0) {
                pre.basis = stacked_receptions(rec, node);
                break;
            }
            if (scheme.slots != 2) throw std::invalid_argument("zero-forcing needs two slots");
            const gf::Vector& first = rec.at(0, node);
            const gf::Vector& second = rec.at(1, node);
            const auto cancelled = static_cast<std::size_t>(role.symbol);
            if (first[cancelled].is_zero()) {
                throw ResampleError("zero-forcing",
                                    node + " received no " + scheme.layout.names[cancelled] + " in slot 1");
            }
            gf::Vector output = second;
            gf::axpy(output, second[cancelled] / first[cancelled], first);
            pre.basis.push_back(std::move(output));
            break;
        }
    }
    return pre;
}

inline gf::Vector combine(const PreTransmission& pre, const gf::Vector& coefficients, std::size_t size, int degree) {
    if (pre.fixed) return *pre.fixed;
    if (coefficients.size() != pre.basis.size()) throw std::logic_error("coefficient count mismatch");
    gf::Vector out = gf::zero_vector(size, degree);
    for (std::size_t i = 0; i < pre.basis.size(); ++i) gf::axpy(out, coefficients[i], pre.basis[i]);
    return out;
}

inline void validate_scheme(const Network& net, const CodingScheme& scheme) {
    if (scheme.slots != scheme.layout.slots) throw std::invalid_argument("slot count disagrees with the symbol layout");
    for (int slot = 0; slot < scheme.slots; ++slot) {
        for (const auto& node : net.nodes()) {
            if (!Network::is_destination(node)) (void)scheme.role(slot, node);
        }
    }
    for (const auto& constraint : scheme.constraints) {
        if (constraint.slot < 0 || constraint.slot >= scheme.slots)
            throw std::invalid_argument("constraint slot out of range");
        if (constraint.aggregate.empty())
            throw std::invalid_argument("constraint " + constraint.label + " has no nodes");
        const int layer = net.layer_of(*constraint.aggregate.begin());
        for (const auto& node : constraint.aggregate) {
            if (net.layer_of(node) != layer || Network::is_destination(node)) {
                throw std::invalid_argument("constraint " + constraint.label + " must sit in one transmitting layer");
            }
        }
    }
}

inline Reception empty_reception(const Network& net, const CodingScheme& scheme) {
    Reception rec;
    rec.slots = scheme.slots;
    rec.symbols = scheme.layout.size();
    rec.received.resize(static_cast<std::size_t>(scheme.slots));
    rec.transmitted.resize(static_cast<std::size_t>(scheme.slots));
    (void)net;
    return rec;
}

inline void receive_layer(const Network& net, const CodingScheme& scheme, Reception& rec, int layer) {
    for (int slot = 0; slot < scheme.slots; ++slot) {
        auto& received = rec.received[static_cast<std::size_t>(slot)];
        const auto& transmitted = rec.transmitted[static_cast<std::size_t>(slot)];
        for (const auto& node : net.layer(layer)) {
            gf::Vector sum = gf::zero_vector(rec.symbols, scheme.degree);
            for (const auto& parent : net.in_neighbors(node)) {
                const auto found = transmitted.find(parent);
                if (found != transmitted.end()) sum = gf::add(sum, found->second);
            }
            received[node] = std::move(sum);
        }
    }
}

// Draws coefficients of one (layer, slot) uniformly from the solution set of its constraints.
inline void solve_layer(const CodingScheme& scheme, const std::map<NodeId, PreTransmission>& pre,
                        const std::vector<const Constraint*>& constraints, gf::Rng& rng,
                        std::map<NodeId, gf::Vector>& chosen) {
    const int degree = scheme.degree;
    std::map<NodeId, std::size_t> offset;
    std::size_t unknowns = 0;
    for (const auto& [node, item] : pre) {
        if (item.fixed) continue;
        offset[node] = unknowns;
        unknowns += item.basis.size();
    }
    std::vector<std::pair<const Constraint*, int>> equations;
    for (const Constraint* constraint : constraints) {
        for (int symbol : constraint->zeroed) equations.emplace_back(constraint, symbol);
    }
    gf::Matrix system(equations.size(), unknowns, degree);
    gf::Vector rhs = gf::zero_vector(equations.size(), degree);
    for (std::size_t row = 0; row < equations.size(); ++row) {
        const auto& [constraint, symbol] = equations[row];
        const auto column = static_cast<std::size_t>(symbol);
        for (const auto& node : constraint->aggregate) {
            const PreTransmission& item = pre.at(node);
            if (item.fixed) {
                rhs[row] += (*item.fixed)[column];
                continue;
            }
            for (std::size_t i = 0; i < item.basis.size(); ++i) {
                system.set(row, offset.at(node) + i, system(row, offset.at(node) + i) + item.basis[i][column]);
            }
        }
    }
    const gf::SolveResult result = gf::solve(system, rhs);
    if (!result.consistent()) {
        std::string labels;
        for (const Constraint* constraint : constraints) labels += (labels.empty() ? "" : ", ") + constraint->label;
        throw ResampleError("neutralization", "infeasible constraints [" + labels + "]");
    }
    const gf::Vector solution = unknowns == 0 ? gf::Vector{} : result.sample(rng);
    for (const auto& [node, start] : offset) {
        const std::size_t count = pre.at(node).basis.size();
        chosen[node] = gf::Vector(solution.begin() + static_cast<std::ptrdiff_t>(start),
                                  solution.begin() + static_cast<std::ptrdiff_t>(start + count));
    }
}

inline gf::Vector aggregate_of(const Reception& rec, const Constraint& constraint, int degree) {
    gf::Vector sum = gf::zero_vector(rec.symbols, degree);
    for (const auto& node : constraint.aggregate) {
        sum = gf::add(sum, rec.transmitted.at(static_cast<std::size_t>(constraint.slot)).at(node));
    }
    return sum;
}

inline void check_required(const CodingScheme& scheme, const Reception& rec, const Constraint& constraint) {
    if (constraint.required.empty()) return;
    const gf::Vector sum = aggregate_of(rec, constraint, scheme.degree);
    for (int symbol : constraint.required) {
        if (!sum[static_cast<std::size_t>(symbol)].is_zero()) return;
    }
    throw ResampleError("neutralization", constraint.label + ": required component vanished");
}

// Layered evaluation; with `rng` the coefficients are drawn and solved, otherwise the stored ones are used.
inline Reception run(const Network& net, CodingScheme& scheme, gf::Rng* rng) {
    validate_scheme(net, scheme);
    Reception rec = empty_reception(net, scheme);
    std::map<std::pair<int, int>, std::vector<const Constraint*>> by_site;
    for (const auto& constraint : scheme.constraints) {
        by_site[{net.layer_of(*constraint.aggregate.begin()), constraint.slot}].push_back(&constraint);
    }
    for (int layer = 0; layer <= net.last_layer(); ++layer) {
        receive_layer(net, scheme, rec, layer);
        if (layer == net.last_layer()) break;
        std::vector<std::map<NodeId, PreTransmission>> pre(static_cast<std::size_t>(scheme.slots));
        for (int slot = 0; slot < scheme.slots; ++slot) {
            for (const auto& node : net.layer(layer)) {
                pre[static_cast<std::size_t>(slot)][node] = pre_transmission(scheme, rec, slot, node);
            }
        }
        for (int slot = 0; slot < scheme.slots; ++slot) {
            const auto& slot_pre = pre[static_cast<std::size_t>(slot)];
            std::map<NodeId, gf::Vector> chosen;
            if (rng != nullptr) {
                const auto site = by_site.find({layer, slot});
                solve_layer(scheme, slot_pre, site == by_site.end() ? std::vector<const Constraint*>{} : site->second,
                            *rng, chosen);
                for (const auto& [node, coefficients] : chosen) scheme.coefficients[{slot, node}] = coefficients;
            }
            for (const auto& [node, item] : slot_pre) {
                gf::Vector coefficients;
                if (!item.fixed) {
                    const auto found = scheme.coefficients.find({slot, node});
                    if (found == scheme.coefficients.end()) {
                        throw std::logic_error("missing coefficients for " + node + " in slot " +
                                               std::to_string(slot + 1));
                    }
                    coefficients = found->second;
                }
                rec.transmitted[static_cast<std::size_t>(slot)][node] =
                    combine(item, coefficients, rec.symbols, scheme.degree);
            }
            if (rng != nullptr) {
                const auto site = by_site.find({layer, slot});
                if (site != by_site.end()) {
                    for (const Constraint* constraint : site->second) check_required(scheme, rec, *constraint);
                }
            }
        }
    }
    return rec;
}

}  // namespace detail

// Draws all free coefficients from the scheme seed, solving each layer's constraints jointly.
inline Reception resolve(const Network& net, CodingScheme& scheme) {
    gf::Rng rng(scheme.seed);
    scheme.coefficients.clear();
    return detail::run(net, scheme, &rng);
}

// Forward pass with the stored coefficients.
inline Reception propagate(const Network& net, const CodingScheme& scheme) {
    CodingScheme copy = scheme;
    return detail::run(net, copy, nullptr);
}

inline CodingScheme rlc_assign(const Network& net, int slots, int degree, std::uint64_t seed) {
    const Rational one(1);
    CodingScheme scheme = blank_scheme(net, make_layout({one, one}, slots), degree, seed);
    scheme.route = "random linear coding";
    resolve(net, scheme);
    return scheme;
}

// Violated constraints of a propagated scheme (empty when every constraint holds exactly).
inline std::vector<std::string> check_constraints(const CodingScheme& scheme, const Reception& rec) {
    std::vector<std::string> violations;
    for (const auto& constraint : scheme.constraints) {
        const gf::Vector sum = detail::aggregate_of(rec, constraint, scheme.degree);
        for (int symbol : constraint.zeroed) {
            if (!sum[static_cast<std::size_t>(symbol)].is_zero()) {
                violations.push_back(constraint.label + ": " + scheme.layout.names[static_cast<std::size_t>(symbol)] +
                                     " not cancelled");
            }
        }
    }
    return violations;
}

enum class CriterionKind { Only, ZeroSum, DecodeAt };

// Only: the aggregate of the target set carries `user`'s symbols only.
// ZeroSum: the aggregate vanishes. DecodeAt: node `at` receives `user`'s symbols only.
struct Criterion {
    CriterionKind kind = CriterionKind::Only;
    int user = 1;
    NodeId at;
};

inline Constraint make_constraint(const Network& net, const SymbolLayout& layout, int slot, const NodeSet& target_set,
                                  const Criterion& criterion) {
    Constraint constraint;
    constraint.slot = slot;
    switch (criterion.kind) {
        case CriterionKind::ZeroSum:
            constraint.aggregate = target_set;
            for (std::size_t i = 0; i < layout.size(); ++i) constraint.zeroed.push_back(static_cast<int>(i));
            constraint.label = "zero-sum " + format_set(target_set);
            break;
        case CriterionKind::Only:
        case CriterionKind::DecodeAt: {
            require_user(criterion.user);
            const bool at_node = criterion.kind == CriterionKind::DecodeAt;
            constraint.aggregate = at_node ? parents(net, criterion.at) : target_set;
            constraint.zeroed = layout.symbols_of(other_user(criterion.user));
            constraint.required = layout.symbols_of(criterion.user);
            constraint.label = (at_node ? "decode-at " + criterion.at : "only " + format_set(target_set)) + " user " +
                               std::to_string(criterion.user);
            break;
        }
    }
    return constraint;
}

// Adds the criterion and re-resolves the scheme from its seed.
inline CodingScheme solve_neutralization(const Network& net, const CodingScheme& scheme, const NodeSet& target_set,
                                         const Criterion& criterion, int slot = 0) {
    CodingScheme out = scheme;
    out.constraints.push_back(make_constraint(net, out.layout, slot, target_set, criterion));
    resolve(net, out);
    return out;
}

struct DestinationVerdict {
    NodeId node;
    std::vector<int> desired;
    bool decodable = false;
    std::size_t rank_all = 0;
    std::size_t rank_interference = 0;
    std::optional<gf::Matrix> decoder;  // rows combine the stacked slot receptions into the desired symbols
};

struct DecodeVerdict {
    std::vector<DestinationVerdict> entries;

    [[nodiscard]] bool all_decodable() const {
        return std::all_of(entries.begin(), entries.end(), [](const auto& entry) { return entry.decodable; });
    }
};

using Demands = std::map<NodeId, std::vector<int>>;

inline Demands user_demands(const SymbolLayout& layout) {
    Demands demands;
    for (int user : {1, 2}) {
        auto symbols = layout.symbols_of(user);
        if (!symbols.empty()) demands[destination_id(user)] = std::move(symbols);
    }
    return demands;
}

inline DecodeVerdict verify_decoding(const Reception& rec, const Demands& demands, int degree) {
    DecodeVerdict verdict;
    for (const auto& [node, desired] : demands) {
        DestinationVerdict entry;
        entry.node = node;
        entry.desired = desired;
        const std::vector<gf::Vector> rows = detail::stacked_receptions(rec, node);
        std::vector<gf::Vector> interference;
        for (const auto& row : rows) {
            gf::Vector kept;
            for (std::size_t j = 0; j < rec.symbols; ++j) {
                if (std::find(desired.begin(), desired.end(), static_cast<int>(j)) == desired.end())
                    kept.push_back(row[j]);
            }
            interference.push_back(std::move(kept));
        }
        entry.rank_all = gf::rank_of_rows(rows, rec.symbols, degree);
        entry.rank_interference = gf::rank_of_rows(interference, rec.symbols - desired.size(), degree);
        entry.decodable = entry.rank_all == entry.rank_interference + desired.size();
        if (entry.decodable) {
            gf::Matrix decoder(desired.size(), rows.size(), degree);
            for (std::size_t i = 0; i < desired.size(); ++i) {
                const auto row = detail::decoding_row(rows, desired[i], rec.symbols, degree);
                if (!row) throw std::logic_error("rank criterion and decoder disagree at " + node);
                for (std::size_t t = 0; t < rows.size(); ++t) decoder.set(i, t, (*row)[t]);
            }
            entry.decoder = std::move(decoder);
        }
        verdict.entries.push_back(std::move(entry));
    }
    return verdict;
}

// ---------------------------------------------------------------------------------------------
// Symbolic expressions and table replay.

// Terms joined by '+' or '-': [coef '*'] symbol, or a bare coefficient; coef is 'rho', 'rho^k' or an integer.
inline gf::Vector parse_expression(const std::string& text, const SymbolLayout& layout, int degree) {
    std::string compact;
    for (char ch : text) {
        if (!std::isspace(static_cast<unsigned char>(ch))) compact += ch;
    }
    if (compact.empty()) throw std::invalid_argument("empty expression");
    const gf::FieldElem rho(degree > 1 ? 2U : 0U, degree);
    gf::Vector out = gf::zero_vector(layout.size(), degree);
    std::size_t pos = 0;
    const auto parse_coefficient = [&](std::string_view token) -> std::optional<gf::FieldElem> {
        if (token.starts_with("rho")) {
            std::uint64_t exponent = 1;
            if (token.size() > 3) {
                if (token[3] != '^' || token.size() == 4) return std::nullopt;
                exponent = std::stoull(std::string(token.substr(4)));
            }
            return gf::pow(rho, exponent);
        }
        if (!token.empty() && std::all_of(token.begin(), token.end(),
                                          [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
            return gf::FieldElem(static_cast<std::uint32_t>(std::stoull(std::string(token))), degree);
        }
        return std::nullopt;
    };
    while (pos < compact.size()) {
        if (compact[pos] == '+' || compact[pos] == '-') ++pos;
        const std::size_t end = compact.find_first_of("+-", pos);
        const std::string term = compact.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
        pos = end == std::string::npos ? compact.size() : end;
        if (term.empty()) throw std::invalid_argument("malformed expression '" + text + "'");
        const std::size_t star = term.find('*');
        gf::FieldElem coefficient = gf::FieldElem::one(degree);
        std::string symbol = term;
        if (star != std::string::npos) {
            const auto parsed = parse_coefficient(term.substr(0, star));
            if (!parsed) throw std::invalid_argument("bad coefficient in '" + text + "'");
            coefficient = *parsed;
            symbol = term.substr(star + 1);
        } else if (const auto bare = parse_coefficient(term)) {
            if (!bare->is_zero()) throw std::invalid_argument("constant term in '" + text + "'");
            continue;
        }
        const auto index = static_cast<std::size_t>(layout.index_of(symbol));
        out[index] += coefficient;
    }
    return out;
}

inline std::string format_expression(const gf::Vector& vec, const SymbolLayout& layout) {
    std::string out;
    for (std::size_t i = 0; i < vec.size(); ++i) {
        if (vec[i].is_zero()) continue;
        if (!out.empty()) out += "+";
        if (vec[i].bits() != 1) out += std::to_string(vec[i].bits()) + "*";
        out += layout.names.at(i);
    }
    return out.empty() ? "0" : out;
}

struct ReplayTable {
    int degree = 1;
    SymbolLayout layout;
    std::map<SlotNode, gf::Vector> transmit;
    std::map<SlotNode, gf::Vector> expect;
};

// Line format: "field r", "slots T", "symbol NAME USER", "transmit SLOT NODE EXPR", "receive SLOT NODE EXPR".
inline ReplayTable parse_replay_table(const std::string& text) {
    ReplayTable table;
    table.layout.slots = 1;
    std::istringstream lines(text);
    std::string line;
    int number = 0;
    std::vector<std::tuple<int, bool, int, NodeId, std::string>> entries;
    while (std::getline(lines, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream words(line);
        std::string keyword;
        if (!(words >> keyword)) continue;
        if (keyword == "field") {
            if (!(words >> table.degree)) throw InputError("expected field degree", number);
        } else if (keyword == "slots") {
            if (!(words >> table.layout.slots) || table.layout.slots < 1 || table.layout.slots > 2) {
                throw InputError("expected slots 1 or 2", number);
            }
        } else if (keyword == "symbol") {
            std::string name;
            int user = 0;
            if (!(words >> name >> user) || (user != 1 && user != 2))
                throw InputError("expected 'symbol NAME USER'", number);
            table.layout.add_symbol(name, user);
        } else if (keyword == "transmit" || keyword == "receive") {
            int slot = 0;
            NodeId node;
            if (!(words >> slot >> node)) throw InputError("expected '" + keyword + " SLOT NODE EXPR'", number);
            std::string expression;
            std::getline(words, expression);
            entries.emplace_back(number, keyword == "transmit", slot, node, expression);
        } else {
            throw InputError("unknown directive '" + keyword + "'", number);
        }
    }
    table.layout.injection.assign(static_cast<std::size_t>(table.layout.slots), {-1, -1});
    gf::field_modulus(table.degree);
    for (const auto& [line_number, is_transmit, slot, node, expression] : entries) {
        if (slot < 1 || slot > table.layout.slots) throw InputError("slot out of range", line_number);
        try {
            auto& target = is_transmit ? table.transmit : table.expect;
            target[{slot - 1, node}] = parse_expression(expression, table.layout, table.degree);
        } catch (const std::invalid_argument& error) {
            throw InputError(error.what(), line_number);
        }
    }
    return table;
}

struct ReplayReport {
    Reception reception;
    std::vector<std::string> mismatches;
    std::size_t checked = 0;

    [[nodiscard]] bool ok() const { return mismatches.empty(); }
};

// Forces every transmission to the table value and compares each tabulated reception.
inline ReplayReport replay_table(const Network& net, const ReplayTable& table) {
    CodingScheme scheme = blank_scheme(net, table.layout, table.degree, 0);
    scheme.route = "replay";
    for (auto& [key, role] : scheme.roles) {
        const auto found = table.transmit.find(key);
        if (found == table.transmit.end()) {
            throw std::invalid_argument("no transmission for " + key.second + " in slot " +
                                        std::to_string(key.first + 1));
        }
        role.kind = RoleKind::Replay;
        role.expression = found->second;
    }
    ReplayReport report;
    report.reception = propagate(net, scheme);
    for (const auto& [key, expected] : table.expect) {
        const auto& [slot, node] = key;
        ++report.checked;
        const auto& slot_map = report.reception.received.at(static_cast<std::size_t>(slot));
        const auto found = slot_map.find(node);
        if (found == slot_map.end()) {
            report.mismatches.push_back("slot " + std::to_string(slot + 1) + " " + node + ": unknown node");
        } else if (found->second != expected) {
            report.mismatches.push_back("slot " + std::to_string(slot + 1) + " " + node + ": expected " +
                                        format_expression(expected, table.layout) + ", got " +
                                        format_expression(found->second, table.layout));
        }
    }
    return report;
}

// ---------------------------------------------------------------------------------------------
// Corner-point drivers.

namespace detail {

inline Orientation orientation_of(int first) { return first == 1 ? Orientation::O12 : Orientation::O21; }

inline bool only_from(const Network& net, const NodeId& node, int user) {
    return net.reach_of_source(user).contains(node) && !net.reach_of_source(other_user(user)).contains(node);
}

inline bool from_both(const Network& net, const NodeId& node) {
    return net.reach_of_source(1).contains(node) && net.reach_of_source(2).contains(node);
}

inline NodeSet set_minus(const NodeSet& lhs, const NodeSet& rhs) {
    NodeSet out;
    std::set_difference(lhs.begin(), lhs.end(), rhs.begin(), rhs.end(), std::inserter(out, out.end()));
    return out;
}

inline NodeSet set_and(const NodeSet& lhs, const NodeSet& rhs) {
    NodeSet out;
    std::set_intersection(lhs.begin(), lhs.end(), rhs.begin(), rhs.end(), std::inserter(out, out.end()));
    return out;
}

// Nodes reached from the clone set of `info` that still reach d_user.
inline NodeSet cloud(const Network& net, const CriticalNodeInfo& info, int user) {
    return set_and(net.forward_closure(info.clone_set), net.backward_closure({destination_id(user)}));
}

// Partition of the critical nodes' parents when both sit in one layer.
struct SameLayerSets {
    NodeSet own_p, own_q, shared;  // P_p, P_q, P_pq
    NodeSet own_p_sp, own_q_sq;    // P_p^{s_p}, P_q^{s_q} (s-parent differences)
};

inline SameLayerSets same_layer_sets(const Network& net, const NodeId& vp, const NodeId& vq, int p) {
    const int q = other_user(p);
    const NodeSet parents_p = parents(net, vp);
    const NodeSet parents_q = parents(net, vq);
    SameLayerSets sets;
    sets.own_p = set_minus(parents_p, parents_q);
    sets.own_q = set_minus(parents_q, parents_p);
    sets.shared = set_and(parents_p, parents_q);
    sets.own_p_sp = set_minus(s_parents(net, vp, p), s_parents(net, vq, p));
    sets.own_q_sq = set_minus(s_parents(net, vq, q), s_parents(net, vp, q));
    return sets;
}

// Same-layer pattern: Case A in orientation (p,q) means P_p^{s_p} is s_p-only and P_q^{s_q} reached by both.
inline bool same_layer_case(const Network& net, const SameLayerSets& sets, int p) {
    const auto all = [&](const NodeSet& set, auto predicate) { return std::all_of(set.begin(), set.end(), predicate); };
    return all(sets.own_p_sp, [&](const NodeId& node) { return only_from(net, node, p); }) &&
           all(sets.own_q_sq, [&](const NodeId& node) { return from_both(net, node); });
}

class PlanBuilder {
public:
    PlanBuilder(const Network& net, const SymbolLayout& layout, int degree)
        : net_(net), scheme_(blank_scheme(net, layout, degree, 0)) {}

    void only(int slot, const NodeSet& aggregate, int user, const std::string& label) {
        Constraint constraint = make_constraint(net_, scheme_.layout, slot, aggregate, {CriterionKind::Only, user, {}});
        constraint.label = label;
        add(std::move(constraint));
    }

    void zero_sum(int slot, const NodeSet& aggregate, const std::string& label) {
        Constraint constraint = make_constraint(net_, scheme_.layout, slot, aggregate, {CriterionKind::ZeroSum, 1, {}});
        constraint.label = label;
        add(std::move(constraint));
    }

    void zero_symbols(int slot, const NodeSet& aggregate, std::vector<int> zeroed, std::vector<int> required,
                      const std::string& label) {
        add({slot, aggregate, std::move(zeroed), std::move(required), label});
    }

    void role(int slot, const NodeId& node, RoleKind kind, int symbol = -1) {
        if (Network::is_source(node) && kind != RoleKind::Silent) {
            throw std::logic_error("cannot assign " + role_name(kind) + " to source " + node);
        }
        Role& target = scheme_.roles.at({slot, node});
        target.kind = kind;
        target.symbol = symbol;
    }

    void note(const std::string& text) { scheme_.route += (scheme_.route.empty() ? "" : "; ") + text; }

    [[nodiscard]] const SymbolLayout& layout() const { return scheme_.layout; }
    [[nodiscard]] int slots() const { return scheme_.slots; }

    CodingScheme finish() {
        for (std::size_t id = 0; id < scheme_.constraints.size(); ++id) {
            const Constraint& constraint = scheme_.constraints[id];
            for (const auto& node : constraint.aggregate) {
                Role& role = scheme_.roles.at({constraint.slot, node});
                if (role.kind == RoleKind::RLC) role.kind = RoleKind::Neutralize;
                role.constraints.push_back(id);
            }
        }
        return scheme_;
    }

private:
    void add(Constraint constraint) {
        if (constraint.aggregate.empty()) return;
        scheme_.constraints.push_back(std::move(constraint));
    }

    const Network& net_;
    CodingScheme scheme_;
};

inline int earlier_user(const ConditionTrace& trace) { return trace.critical1.layer <= trace.critical2.layer ? 1 : 2; }

// Constraints giving each destination a clean copy of its own symbols in `slot` (square region).
inline void plan_full_rate(const Network& net, const AnalysisReport& report, PlanBuilder& plan, int slot) {
    const ConditionTrace& trace = report.trace;
    const int k1 = trace.critical1.layer;
    const int k2 = trace.critical2.layer;
    const std::string tag = "slot " + std::to_string(slot + 1) + " ";
    if (k1 == 0 && k2 == 0) {
        if (slot == 0) plan.note("no cross reachability: routing");
        return;
    }
    if (k1 != k2) {
        const int p = k1 < k2 ? 1 : 2;
        const int q = other_user(p);
        const CriticalNodeInfo& vp = trace.critical(p);
        const CriticalNodeInfo& vq = trace.critical(q);
        plan.only(slot, parents(net, vq.node), q, tag + "clean " + vq.node);
        if (vp.layer == 0) {
            if (slot == 0) plan.note("d" + std::to_string(p) + " unreachable from s" + std::to_string(q));
            return;
        }
        plan.only(slot, parents(net, vp.node), p, tag + "clean " + vp.node);
        const NodeSet interfering = s_parents(net, vp.node, q);
        if (interfering.empty() || rank_mincut(net, interfering) == 2) {
            if (slot == 0) plan.note("interfering parents of " + vp.node + " have rank 2");
            return;
        }
        const OrientationTrace& orient = trace.orientation(orientation_of(p));
        if (!orient.t3) {
            if (slot == 0) plan.note("interfering parents of " + vp.node + " neutralized, induced-graph route");
            plan.zero_sum(slot, interfering, tag + "zero-sum " + format_set(interfering));
            if (orient.u && !Network::is_source(*orient.u)) {
                plan.only(slot, parents(net, *orient.u), q, tag + "clean " + *orient.u);
            }
            return;
        }
        if (orient.q4() || !orient.w || Network::is_source(*orient.w)) {
            throw std::logic_error("square classification without a full-rate route");
        }
        const NodeId& w = *orient.w;
        if (slot == 0) plan.note("neutralization moved to " + w);
        plan.only(slot, parents(net, w), p, tag + "clean " + w);
        const NodeSet second = s_parents(net, w, q);
        if (!second.empty() && rank_mincut(net, second) == 1) {
            const InducedGraph induced = induced_graph(net, orientation_of(p), w);
            if (induced.graph.contains(vq.node) && induced.graph.source_reachable(vq.node)) {
                const NodeId pivot = primary_mincut(induced.graph, {vq.node});
                if (!Network::is_source(pivot)) plan.only(slot, parents(net, pivot), q, tag + "clean " + pivot);
            }
        }
        return;
    }

    // Critical nodes share a layer.
    const NodeId& v1 = trace.critical1.node;
    const NodeId& v2 = trace.critical2.node;
    plan.only(slot, parents(net, v1), 1, tag + "clean " + v1);
    plan.only(slot, parents(net, v2), 2, tag + "clean " + v2);
    const SameLayerSets sets = same_layer_sets(net, v1, v2, 1);
    if (sets.own_p_sp.empty() || sets.own_q_sq.empty() || sets.shared.empty()) {
        if (slot == 0) plan.note("same layer, degenerate parent partition");
        return;
    }
    int p = 0;
    if (same_layer_case(net, sets, 1)) p = 1;
    if (same_layer_case(net, same_layer_sets(net, v2, v1, 2), 2)) p = 2;
    if (p == 0) {
        if (slot == 0) plan.note("same layer, mixed reachability");
        return;
    }
    const int q = other_user(p);
    const NodeId& vp = trace.critical(p).node;
    const NodeId& vq = trace.critical(q).node;
    const SameLayerSets mine = same_layer_sets(net, vp, vq, p);
    const bool p_mixed = std::any_of(mine.own_p.begin(), mine.own_p.end(),
                                     [&](const NodeId& node) { return !net.reach_of_source(p).contains(node); });
    const bool q_mixed =
        std::any_of(mine.own_q.begin(), mine.own_q.end(), [&](const NodeId& node) { return only_from(net, node, p); });
    if (p_mixed || q_mixed || rank_mincut(net, mine.own_q) == 2 || rank_mincut(net, mine.shared) == 2) {
        if (slot == 0) plan.note("same layer, rank-2 parent group");
        return;
    }
    const NodeId w = primary_mincut(net, mine.shared);
    if (!Network::is_source(w) && !is_vertex_cut(net, s_clones(net, w, q), {source_id(q)}, {destination_id(q)})) {
        if (slot == 0) plan.note("same layer, shared parents decode at " + w);
        plan.only(slot, parents(net, w), p, tag + "clean " + w);
        return;
    }
    if (slot == 0) plan.note("same layer, shared parents neutralized");
    plan.zero_sum(slot, mine.shared, tag + "zero-sum " + format_set(mine.shared));
    const NodeId u = primary_mincut(net, mine.own_q);
    if (!Network::is_source(u)) plan.only(slot, parents(net, u), q, tag + "clean " + u);
}

// First (u, w) in lexicographic order with u from `first`, w from `second` and rank-mincut 2.
inline std::optional<std::pair<NodeId, NodeId>> mincut_pair(const Network& net, const NodeSet& first,
                                                            const NodeSet& second) {
    for (const auto& u : first) {
        for (const auto& w : second) {
            if (u != w && rank_mincut(net, {u, w}) == 2) return std::make_pair(u, w);
        }
    }
    return std::nullopt;
}

// Orientation (p,q) with k_p < k_q: user p gets one symbol over two slots, user q two.
inline void plan_half_earlier(const Network& net, const AnalysisReport& report, PlanBuilder& plan, int p) {
    const int q = other_user(p);
    const CriticalNodeInfo& vp = report.trace.critical(p);
    const CriticalNodeInfo& vq = report.trace.critical(q);
    const NodeSet to_q = parents(net, vq.node);
    const NodeSet reached = set_and(to_q, cloud(net, vp, p));
    const int repeated = plan.layout().symbols_of(p).front();
    if (!reached.empty()) {
        plan.note("critical node " + vq.node + " has parents in the cloud of " + vp.node);
        plan.only(0, parents(net, vp.node), p, "slot 1 clean " + vp.node);
        plan.only(0, to_q, q, "slot 1 clean " + vq.node);
        for (const auto& node : vp.clone_set) plan.role(1, node, RoleKind::ScaledForward, repeated);
        plan.only(1, to_q, q, "slot 2 clean " + vq.node);
        return;
    }
    plan.note("critical node " + vq.node + " is outside the cloud of " + vp.node);
    plan.only(1, parents(net, vp.node), p, "slot 2 clean " + vp.node);
    for (int slot = 0; slot < 2; ++slot) {
        for (const auto& node : to_q) {
            if (!Network::is_source(node)) plan.role(slot, node, RoleKind::ZeroForce);
        }
        plan.only(slot, to_q, q, "slot " + std::to_string(slot + 1) + " clean " + vq.node);
    }
}

// Orientation (p,q) with k_p < k_q: user p gets two symbols, user q one repeated symbol.
inline void plan_full_earlier(const Network& net, const AnalysisReport& report, PlanBuilder& plan, int p) {
    const int q = other_user(p);
    const CriticalNodeInfo& vp = report.trace.critical(p);
    const CriticalNodeInfo& vq = report.trace.critical(q);
    const OrientationTrace& orient = report.trace.orientation(orientation_of(p));
    if (!orient.w || Network::is_source(*orient.w)) throw std::logic_error("pentagon route needs an internal w");
    const NodeId& w = *orient.w;
    const NodeSet interfering = s_parents(net, vp.node, q);
    const auto p_symbols = plan.layout().symbols_of(p);
    const int q_symbol = plan.layout().symbols_of(q).front();
    plan.note("zero-forcing at the clones of " + w);
    plan.zero_sum(0, interfering, "slot 1 zero-sum " + format_set(interfering));
    plan.only(0, parents(net, vp.node), p, "slot 1 clean " + vp.node);
    const NodeSet feeding = set_and(clones(net, w), net.backward_closure(interfering));
    for (const auto& node : feeding) plan.role(1, node, RoleKind::ZeroForce, q_symbol);
    for (const auto& node : vp.clone_set) plan.role(1, node, RoleKind::ScaledForward, p_symbols[1]);
    plan.zero_symbols(1, parents(net, vq.node), {p_symbols[1]}, {},
                      "slot 2 no " + plan.layout().names[static_cast<std::size_t>(p_symbols[1])] + " at " + vq.node);
}

// Same layer, pattern oriented (p,q): user p gets one repeated symbol, user q two symbols.
inline void plan_half_same_layer(const Network& net, const AnalysisReport& report, PlanBuilder& plan, int p) {
    const int q = other_user(p);
    const NodeId& vp = report.trace.critical(p).node;
    const NodeId& vq = report.trace.critical(q).node;
    const SameLayerSets sets = same_layer_sets(net, vp, vq, p);
    const int repeated = plan.layout().symbols_of(p).front();
    if (sets.own_p_sp.empty()) throw std::logic_error("same-layer route needs an s_p parent of " + vp);
    const NodeId up = *sets.own_p_sp.begin();
    NodeSet candidates;
    for (const auto& node : sets.shared) {
        if (net.reach_of_source(q).contains(node)) candidates.insert(node);
    }
    const auto pair = mincut_pair(net, sets.own_q_sq, candidates);
    if (!pair) throw std::logic_error("same-layer route found no rank-2 pair for " + vq);
    const auto& [uq, wq] = *pair;
    plan.note("same layer: " + up + " carries user " + std::to_string(p) + ", " + uq + " and " + wq +
              " zero-force its symbol");
    NodeSet layer_parents = parents(net, vp);
    layer_parents.merge(parents(net, vq));
    for (int slot = 0; slot < 2; ++slot) {
        for (const auto& node : layer_parents) plan.role(slot, node, RoleKind::Silent);
    }
    plan.role(0, up, RoleKind::RLC);
    plan.role(0, uq, RoleKind::ZeroForce, repeated);
    plan.role(1, wq, net.reach_of_source(p).contains(wq) ? RoleKind::ZeroForce : RoleKind::RLC,
              net.reach_of_source(p).contains(wq) ? repeated : -1);
}

// Same layer, pattern oriented (p,q): user p gets two symbols, user q one repeated symbol.
inline void plan_full_same_layer(const Network& net, const AnalysisReport& report, PlanBuilder& plan, int p) {
    const int q = other_user(p);
    const NodeId& vp = report.trace.critical(p).node;
    const NodeId& vq = report.trace.critical(q).node;
    const SameLayerSets sets = same_layer_sets(net, vp, vq, p);
    const auto p_symbols = plan.layout().symbols_of(p);
    const int q_symbol = plan.layout().symbols_of(q).front();
    NodeSet shared_both;
    NodeSet own_q_both;
    for (const auto& node : sets.shared) {
        if (from_both(net, node)) shared_both.insert(node);
    }
    for (const auto& node : sets.own_q) {
        if (from_both(net, node)) own_q_both.insert(node);
    }
    const auto pair = mincut_pair(net, own_q_both, shared_both);
    if (!pair) throw std::logic_error("same-layer route found no rank-2 pair for " + vq);
    const auto& [u, w] = *pair;
    plan.note("same layer: " + w + " and " + u + " zero-force user " + std::to_string(q) + "'s symbol");
    for (int slot = 0; slot < 2; ++slot) {
        for (const auto& node : sets.shared) plan.role(slot, node, RoleKind::Silent);
        for (const auto& node : sets.own_q) plan.role(slot, node, RoleKind::Silent);
    }
    plan.role(0, u, RoleKind::RLC);
    plan.role(1, u, RoleKind::ZeroForce, q_symbol);
    plan.role(1, w, RoleKind::ZeroForce, q_symbol);
    plan.zero_symbols(1, parents(net, vq), {p_symbols[1]}, {p_symbols[0]},
                      "slot 2 only " + plan.layout().names[static_cast<std::size_t>(p_symbols[0])] + " at " + vq);
}

}  // namespace detail

// Roles and constraints of the scheme for `target`; coefficients are drawn later.
inline CodingScheme plan_scheme(const Network& net, const AnalysisReport& report, const RatePair& target, int degree) {
    if (!region_contains(report.region, target)) {
        throw OutOfRegionError("rate " + format_rate(target) + " lies outside the " + region_name(report.region) +
                               " region");
    }
    const Rational zero(0);
    const Rational half(1, 2);
    const Rational one(1);
    const bool time_share = target == RatePair{half, half};
    detail::PlanBuilder plan(net, time_share ? time_sharing_layout() : make_layout(target), degree);
    if (target.r1 == zero || target.r2 == zero) {
        plan.note("single user: random linear coding");
        return plan.finish();
    }
    if (time_share) {
        plan.note("time sharing between the single-user corners");
        return plan.finish();
    }
    if (report.region == RegionKind::Square) {
        for (int slot = 0; slot < plan.slots(); ++slot) detail::plan_full_rate(net, report, plan, slot);
        return plan.finish();
    }
    // Only the half-integer corners of the trapezoid and pentagon regions remain.
    const int half_user = target.r1 == half ? 1 : 2;
    const ConditionTrace& trace = report.trace;
    if (trace.critical1.layer != trace.critical2.layer) {
        const int p = detail::earlier_user(trace);
        if (half_user == p) {
            detail::plan_half_earlier(net, report, plan, p);
        } else {
            detail::plan_full_earlier(net, report, plan, p);
        }
        return plan.finish();
    }
    const detail::SameLayerSets sets = detail::same_layer_sets(net, trace.critical1.node, trace.critical2.node, 1);
    int p = 0;
    if (detail::same_layer_case(net, sets, 1)) {
        p = 1;
    } else if (detail::same_layer_case(net, detail::same_layer_sets(net, trace.critical2.node, trace.critical1.node, 2),
                                       2)) {
        p = 2;
    } else {
        throw std::logic_error("same-layer network outside both reachability patterns");
    }
    if (half_user == p) {
        detail::plan_half_same_layer(net, report, plan, p);
    } else {
        detail::plan_full_same_layer(net, report, plan, p);
    }
    return plan.finish();
}

struct AchieveOptions {
    int degree = 16;
    std::uint64_t seed = 1;
    int retries = 20;
};

struct AchieveResult {
    bool success = false;
    int attempts = 0;
    CodingScheme scheme;
    Reception reception;
    DecodeVerdict verdict;
    std::string failed_stage;
    std::string diagnostics;
};

// One attempt: resolve, re-propagate, re-check constraints and decode. Throws ResampleError on failure.
inline void attempt_scheme(const Network& net, CodingScheme& scheme, Reception& reception, DecodeVerdict& verdict) {
    resolve(net, scheme);
    reception = propagate(net, scheme);
    const auto violations = check_constraints(scheme, reception);
    if (!violations.empty()) throw std::logic_error("resolved scheme violates " + violations.front());
    verdict = verify_decoding(reception, user_demands(scheme.layout), scheme.degree);
    for (const auto& entry : verdict.entries) {
        if (!entry.decodable) {
            throw ResampleError("decoding", entry.node + " rank " + std::to_string(entry.rank_all) +
                                                " vs interference rank " + std::to_string(entry.rank_interference));
        }
    }
}

inline AchieveResult achieve(const Network& net, const AnalysisReport& report, const RatePair& target,
                             const AchieveOptions& options = {}) {
    const CodingScheme plan = plan_scheme(net, report, target, options.degree);
    AchieveResult result;
    for (int attempt = 0; attempt <= options.retries; ++attempt) {
        result.attempts = attempt + 1;
        result.scheme = plan;
        result.scheme.seed = gf::mix_seed(options.seed, static_cast<std::uint64_t>(attempt));
        try {
            attempt_scheme(net, result.scheme, result.reception, result.verdict);
            result.success = true;
            result.failed_stage.clear();
            result.diagnostics.clear();
            return result;
        } catch (const ResampleError& error) {
            result.failed_stage = error.stage();
            result.diagnostics = error.what();
        }
    }
    return result;
}

inline AchieveResult achieve(const Network& net, const RatePair& target, const AchieveOptions& options = {}) {
    return achieve(net, classify(net), target, options);
}

// ---------------------------------------------------------------------------------------------
// Scheme dump.

inline nlohmann::ordered_json field_json(const gf::Vector& vec) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& elem : vec) out.push_back(elem.bits());
    return out;
}

inline nlohmann::ordered_json scheme_json(const CodingScheme& scheme, const Reception* reception = nullptr,
                                          const DecodeVerdict* verdict = nullptr) {
    nlohmann::ordered_json out;
    out["slots"] = scheme.slots;
    out["field_degree"] = scheme.degree;
    out["modulus"] = gf::field_modulus(scheme.degree);
    out["seed"] = scheme.seed;
    out["route"] = scheme.route;
    out["symbols"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < scheme.layout.size(); ++i) {
        out["symbols"].push_back({{"name", scheme.layout.names[i]}, {"user", scheme.layout.owner[i]}});
    }
    out["constraints"] = nlohmann::ordered_json::array();
    for (std::size_t id = 0; id < scheme.constraints.size(); ++id) {
        const Constraint& constraint = scheme.constraints[id];
        nlohmann::ordered_json item;
        item["id"] = id;
        item["label"] = constraint.label;
        item["slot"] = constraint.slot + 1;
        item["aggregate"] = std::vector<std::string>(constraint.aggregate.begin(), constraint.aggregate.end());
        nlohmann::ordered_json zeroed = nlohmann::ordered_json::array();
        for (int symbol : constraint.zeroed) zeroed.push_back(scheme.layout.names[static_cast<std::size_t>(symbol)]);
        item["zeroed"] = zeroed;
        nlohmann::ordered_json required = nlohmann::ordered_json::array();
        for (int symbol : constraint.required)
            required.push_back(scheme.layout.names[static_cast<std::size_t>(symbol)]);
        item["required"] = required;
        out["constraints"].push_back(std::move(item));
    }
    out["nodes"] = nlohmann::ordered_json::array();
    for (int slot = 0; slot < scheme.slots; ++slot) {
        for (const auto& [key, role] : scheme.roles) {
            if (key.first != slot) continue;
            nlohmann::ordered_json item;
            item["slot"] = slot + 1;
            item["node"] = key.second;
            item["role"] = role_name(role.kind);
            if (role.symbol >= 0) item["symbol"] = scheme.layout.names[static_cast<std::size_t>(role.symbol)];
            if (role.kind == RoleKind::Replay) item["expression"] = field_json(role.expression);
            if (!role.constraints.empty()) item["constraints"] = role.constraints;
            const auto coefficients = scheme.coefficients.find(key);
            if (coefficients != scheme.coefficients.end()) item["alpha"] = field_json(coefficients->second);
            if (reception != nullptr) {
                item["beta"] = field_json(reception->at(slot, key.second));
                item["transmits"] =
                    field_json(reception->transmitted.at(static_cast<std::size_t>(slot)).at(key.second));
            }
            out["nodes"].push_back(std::move(item));
        }
    }
    if (reception != nullptr) {
        nlohmann::ordered_json destinations = nlohmann::ordered_json::array();
        for (int slot = 0; slot < scheme.slots; ++slot) {
            for (const auto& dest : {"d1", "d2"}) {
                destinations.push_back(
                    {{"slot", slot + 1}, {"node", dest}, {"beta", field_json(reception->at(slot, dest))}});
            }
        }
        out["destinations"] = destinations;
    }
    if (verdict != nullptr) {
        nlohmann::ordered_json verdicts = nlohmann::ordered_json::array();
        for (const auto& entry : verdict->entries) {
            nlohmann::ordered_json item;
            item["node"] = entry.node;
            nlohmann::ordered_json desired = nlohmann::ordered_json::array();
            for (int symbol : entry.desired) desired.push_back(scheme.layout.names[static_cast<std::size_t>(symbol)]);
            item["desired"] = desired;
            item["decodable"] = entry.decodable;
            item["rank"] = entry.rank_all;
            item["interference_rank"] = entry.rank_interference;
            if (entry.decoder) {
                nlohmann::ordered_json rows = nlohmann::ordered_json::array();
                for (std::size_t i = 0; i < entry.decoder->rows(); ++i)
                    rows.push_back(field_json(entry.decoder->row(i)));
                item["decoder"] = rows;
            }
            verdicts.push_back(std::move(item));
        }
        out["verdicts"] = verdicts;
    }
    return out;
}

}  // namespace ldnet
