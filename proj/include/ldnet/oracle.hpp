// Exhaustive linear-code search on small networks, a seeded network generator, and
// classifier-versus-oracle cross-validation.
#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ldnet/classifier.hpp"
#include "ldnet/codesim.hpp"
#include "ldnet/gf.hpp"
#include "ldnet/netmodel.hpp"

namespace ldnet {

enum class CodeShape { Scalar, Matrix };

struct SearchSpace {
    int field_bits = 1;  // GF(2) or GF(4)
    int slots = 1;
    CodeShape shape = CodeShape::Scalar;
    std::uint64_t cap = std::uint64_t{1} << 26;
    unsigned workers = 1;
};

inline std::string describe(const SearchSpace& space) {
    std::string out = "GF(" + std::to_string(1 << space.field_bits) + "), T=" + std::to_string(space.slots) + ", ";
    if (space.shape == CodeShape::Scalar) return out + "scalar per slot";
    return out + "full " + std::to_string(space.slots) + "x" + std::to_string(space.slots) + " matrix per node";
}

enum class OracleStatus { Found, NotFound, CapExceeded };

inline std::string status_name(OracleStatus status) {
    switch (status) {
        case OracleStatus::Found: return "witness";
        case OracleStatus::NotFound: return "not-found";
        case OracleStatus::CapExceeded: return "cap-exceeded";
    }
    return "?";
}

struct OracleResult {
    OracleStatus status = OracleStatus::NotFound;
    std::string verdict;
    std::uint64_t work = 0;          // coefficient assignments and destination pairings evaluated
    std::uint64_t nominal_size = 0;  // plain enumeration size, saturated at 2^64 - 1
    std::optional<CodingScheme> witness;
    Reception reception;
    DecodeVerdict decoding;
};

namespace detail {

// Vectors of at most four symbols over GF(2) or GF(4), two bits per entry.
class PackedField {
public:
    static constexpr int kMaxSymbols = 4;

    PackedField(int bits, int symbols) : bits_(bits), symbols_(symbols), q_(1 << bits) {
        if (bits != 1 && bits != 2) throw std::invalid_argument("oracle fields are GF(2) and GF(4)");
        if (symbols > kMaxSymbols) throw std::invalid_argument("oracle supports at most four symbols");
        for (int a = 0; a < q_; ++a) {
            for (int b = 0; b < q_; ++b) {
                mul_[a][b] = static_cast<std::uint8_t>(gf::mul(gf::FieldElem(static_cast<std::uint32_t>(a), bits),
                                                               gf::FieldElem(static_cast<std::uint32_t>(b), bits))
                                                           .bits());
            }
            if (a != 0)
                inv_[a] = static_cast<std::uint8_t>(gf::inv(gf::FieldElem(static_cast<std::uint32_t>(a), bits)).bits());
        }
        for (int c = 0; c < q_; ++c) {
            for (int v = 0; v < 256; ++v) {
                std::uint8_t out = 0;
                for (int i = 0; i < kMaxSymbols; ++i)
                    out |= static_cast<std::uint8_t>(mul_[c][entry(static_cast<std::uint8_t>(v), i)] << (2 * i));
                scale_[c][v] = out;
            }
        }
    }

    [[nodiscard]] int q() const { return q_; }
    [[nodiscard]] int bits() const { return bits_; }
    [[nodiscard]] int symbols() const { return symbols_; }

    static int entry(std::uint8_t vec, int index) { return (vec >> (2 * index)) & 3; }
    static std::uint8_t unit(int index) { return static_cast<std::uint8_t>(1U << (2 * index)); }
    [[nodiscard]] std::uint8_t scale(int factor, std::uint8_t vec) const { return scale_[factor][vec]; }

    // Reduced row echelon form; nonzero rows first, zero padding after.
    void rref(std::uint8_t* rows, int count) const {
        int rank = 0;
        for (int col = 0; col < symbols_ && rank < count; ++col) {
            int pivot = -1;
            for (int r = rank; r < count; ++r) {
                if (entry(rows[r], col) != 0) {
                    pivot = r;
                    break;
                }
            }
            if (pivot < 0) continue;
            std::swap(rows[rank], rows[pivot]);
            rows[rank] = scale(inv_[entry(rows[rank], col)], rows[rank]);
            for (int r = 0; r < count; ++r) {
                if (r != rank && entry(rows[r], col) != 0) rows[r] ^= scale(entry(rows[r], col), rows[rank]);
            }
            ++rank;
        }
        std::sort(rows + rank, rows + count);
        std::fill(rows + rank, rows + count, std::uint8_t{0});
    }

    [[nodiscard]] int rank(std::vector<std::uint8_t> rows) const {
        rref(rows.data(), static_cast<int>(rows.size()));
        return static_cast<int>(std::count_if(rows.begin(), rows.end(), [](std::uint8_t row) { return row != 0; }));
    }

    // Elements of the span of the nonzero rows, in coefficient-lexicographic order.
    [[nodiscard]] std::vector<std::uint8_t> span(const std::uint8_t* rows, int count) const {
        std::vector<std::uint8_t> basis;
        for (int i = 0; i < count; ++i) {
            if (rows[i] != 0) basis.push_back(rows[i]);
        }
        std::vector<std::uint8_t> out{0};
        for (auto it = basis.rbegin(); it != basis.rend(); ++it) {
            std::vector<std::uint8_t> next;
            next.reserve(out.size() * static_cast<std::size_t>(q_));
            for (int c = 0; c < q_; ++c) {
                for (std::uint8_t partial : out) next.push_back(static_cast<std::uint8_t>(partial ^ scale(c, *it)));
            }
            out = std::move(next);
        }
        return out;
    }

    [[nodiscard]] gf::Vector unpack(std::uint8_t vec, int degree) const {
        gf::Vector out;
        for (int i = 0; i < symbols_; ++i) out.emplace_back(static_cast<std::uint32_t>(entry(vec, i)), degree);
        return out;
    }

private:
    int bits_;
    int symbols_;
    int q_;
    std::uint8_t mul_[4][4]{};
    std::uint8_t inv_[4]{};
    std::uint8_t scale_[4][256]{};
};

// Layered search over canonical reception states. In a run with `width` rows per node, a node
// transmits any element of the span of its received rows in each row.
class ReceptionSearch {
public:
    struct Parent {
        std::uint32_t state = 0;
        std::uint64_t assignment = 0;
        friend bool operator<(const Parent& lhs, const Parent& rhs) {
            return std::tie(lhs.state, lhs.assignment) < std::tie(rhs.state, rhs.assignment);
        }
    };

    struct Layer {
        std::vector<NodeId> nodes;
        std::vector<std::string> states;
        std::vector<Parent> parents;
    };

    ReceptionSearch(const Network& net, const PackedField& field, int width,
                    std::vector<std::array<std::uint8_t, 2>> injections, unsigned workers)
        : net_(net), field_(field), width_(width), workers_(std::max(1U, workers)) {
        for (int index = 0; index <= net.last_layer(); ++index) {
            Layer layer;
            layer.nodes.assign(net.layer(index).begin(), net.layer(index).end());
            layers_.push_back(std::move(layer));
        }
        for (std::size_t i = 0; i < layers_[0].nodes.size(); ++i) {
            const int user = layers_[0].nodes[i] == "s1" ? 1 : 2;
            std::string row;
            for (int t = 0; t < width_; ++t)
                row.push_back(static_cast<char>(injections.at(static_cast<std::size_t>(t))[user - 1]));
            source_rows_.push_back(row);
        }
    }

    // Returns false when the work budget is exhausted.
    bool run(std::uint64_t& work, std::uint64_t cap) {
        layers_[0].states = {std::string(layers_[0].nodes.size() * static_cast<std::size_t>(width_), '\0')};
        layers_[0].parents = {Parent{}};
        for (std::size_t index = 0; index + 1 < layers_.size(); ++index) {
            std::uint64_t planned = 0;
            for (const auto& state : layers_[index].states) {
                planned = saturating_add(planned, assignment_count(index, state));
            }
            if (saturating_add(work, planned) > cap) return false;
            work += planned;
            expand(index);
        }
        return true;
    }

    [[nodiscard]] const Layer& layer(std::size_t index) const { return layers_.at(index); }
    [[nodiscard]] const Layer& last() const { return layers_.back(); }
    [[nodiscard]] int width() const { return width_; }

    // Row `row` of `node` in final-layer state `state`.
    [[nodiscard]] std::uint8_t final_row(std::uint32_t state, const NodeId& node, int row) const {
        const auto& nodes = last().nodes;
        const auto position = static_cast<std::size_t>(std::find(nodes.begin(), nodes.end(), node) - nodes.begin());
        return static_cast<std::uint8_t>(
            last().states.at(state)[position * static_cast<std::size_t>(width_) + static_cast<std::size_t>(row)]);
    }

    // Transmissions along the path to a final-layer state, indexed [row][node].
    [[nodiscard]] std::vector<std::map<NodeId, std::uint8_t>> transmissions(std::uint32_t final_state) const {
        std::vector<std::map<NodeId, std::uint8_t>> out(static_cast<std::size_t>(width_));
        std::uint32_t state = final_state;
        for (std::size_t index = layers_.size() - 1; index > 0; --index) {
            const Parent parent = layers_[index].parents.at(state);
            const auto chosen =
                decode_assignment(index - 1, layers_[index - 1].states.at(parent.state), parent.assignment);
            const auto& nodes = layers_[index - 1].nodes;
            for (std::size_t j = 0; j < nodes.size(); ++j) {
                for (int t = 0; t < width_; ++t) {
                    out[static_cast<std::size_t>(t)][nodes[j]] =
                        chosen[j * static_cast<std::size_t>(width_) + static_cast<std::size_t>(t)];
                }
            }
            state = parent.state;
        }
        return out;
    }

private:
    static std::uint64_t saturating_add(std::uint64_t lhs, std::uint64_t rhs) {
        return lhs > std::numeric_limits<std::uint64_t>::max() - rhs ? std::numeric_limits<std::uint64_t>::max()
                                                                     : lhs + rhs;
    }

    // Candidate transmissions of each node, one list per row.
    [[nodiscard]] std::vector<std::vector<std::uint8_t>> options(std::size_t index, const std::string& state) const {
        std::vector<std::vector<std::uint8_t>> out;
        const auto& nodes = layers_[index].nodes;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            if (index == 0) {
                for (int t = 0; t < width_; ++t)
                    out.push_back({static_cast<std::uint8_t>(source_rows_[j][static_cast<std::size_t>(t)])});
                continue;
            }
            const auto* rows =
                reinterpret_cast<const std::uint8_t*>(state.data()) + j * static_cast<std::size_t>(width_);
            const auto span = field_.span(rows, width_);
            for (int t = 0; t < width_; ++t) out.push_back(span);
        }
        return out;
    }

    [[nodiscard]] std::uint64_t assignment_count(std::size_t index, const std::string& state) const {
        std::uint64_t count = 1;
        for (const auto& list : options(index, state)) {
            if (count > std::numeric_limits<std::uint64_t>::max() / list.size())
                return std::numeric_limits<std::uint64_t>::max();
            count *= list.size();
        }
        return count;
    }

    [[nodiscard]] std::vector<std::uint8_t> decode_assignment(std::size_t index, const std::string& state,
                                                              std::uint64_t assignment) const {
        const auto lists = options(index, state);
        std::vector<std::uint8_t> chosen(lists.size());
        for (std::size_t k = lists.size(); k-- > 0;) {
            chosen[k] = lists[k][assignment % lists[k].size()];
            assignment /= lists[k].size();
        }
        return chosen;
    }

    using StateMap = std::unordered_map<std::string, Parent>;

    void expand_range(std::size_t index, std::size_t begin, std::size_t end, StateMap& found) const {
        const Layer& current = layers_[index];
        const Layer& next = layers_[index + 1];
        std::vector<std::vector<std::size_t>> parent_positions;
        for (const auto& node : next.nodes) {
            std::vector<std::size_t> positions;
            for (std::size_t j = 0; j < current.nodes.size(); ++j) {
                if (net_.in_neighbors(node).contains(current.nodes[j])) positions.push_back(j);
            }
            parent_positions.push_back(std::move(positions));
        }
        const auto w = static_cast<std::size_t>(width_);
        for (std::size_t s = begin; s < end; ++s) {
            const auto lists = options(index, current.states[s]);
            std::vector<std::size_t> digit(lists.size(), 0);
            std::vector<std::uint8_t> chosen(lists.size());
            for (std::size_t k = 0; k < lists.size(); ++k) chosen[k] = lists[k][0];
            std::string key(next.nodes.size() * w, '\0');
            for (std::uint64_t assignment = 0;; ++assignment) {
                for (std::size_t k = 0; k < next.nodes.size(); ++k) {
                    auto* rows = reinterpret_cast<std::uint8_t*>(key.data()) + k * w;
                    for (std::size_t t = 0; t < w; ++t) {
                        std::uint8_t sum = 0;
                        for (std::size_t j : parent_positions[k]) sum ^= chosen[j * w + t];
                        rows[t] = sum;
                    }
                    field_.rref(rows, width_);
                }
                const Parent candidate{static_cast<std::uint32_t>(s), assignment};
                const auto [slot, inserted] = found.try_emplace(key, candidate);
                if (!inserted && candidate < slot->second) slot->second = candidate;
                bool advanced = false;
                for (std::size_t k = lists.size(); k-- > 0;) {
                    if (++digit[k] < lists[k].size()) {
                        chosen[k] = lists[k][digit[k]];
                        advanced = true;
                        break;
                    }
                    digit[k] = 0;
                    chosen[k] = lists[k][0];
                }
                if (!advanced) break;
            }
        }
    }

    void expand(std::size_t index) {
        const std::size_t count = layers_[index].states.size();
        const std::size_t workers = std::min<std::size_t>(workers_, count);
        std::vector<StateMap> partial(workers);
        if (workers <= 1) {
            expand_range(index, 0, count, partial[0]);
        } else {
            std::vector<std::thread> pool;
            for (std::size_t i = 0; i < workers; ++i) {
                pool.emplace_back(
                    [&, i] { expand_range(index, count * i / workers, count * (i + 1) / workers, partial[i]); });
            }
            for (auto& thread : pool) thread.join();
        }
        StateMap merged = std::move(partial[0]);
        for (std::size_t i = 1; i < partial.size(); ++i) {
            for (auto& [key, parent] : partial[i]) {
                const auto [slot, inserted] = merged.try_emplace(key, parent);
                if (!inserted && parent < slot->second) slot->second = parent;
            }
        }
        std::vector<std::pair<Parent, std::string>> ordered;
        ordered.reserve(merged.size());
        for (auto& [key, parent] : merged) ordered.emplace_back(parent, key);
        std::sort(ordered.begin(), ordered.end(),
                  [](const auto& lhs, const auto& rhs) { return lhs.first < rhs.first; });
        Layer& next = layers_[index + 1];
        next.states.clear();
        next.parents.clear();
        for (auto& [parent, key] : ordered) {
            next.parents.push_back(parent);
            next.states.push_back(std::move(key));
        }
    }

    const Network& net_;
    const PackedField& field_;
    int width_;
    unsigned workers_;
    std::vector<Layer> layers_;
    std::vector<std::string> source_rows_;
};

inline bool decodes(const PackedField& field, const std::vector<std::uint8_t>& rows, const std::vector<int>& desired) {
    if (desired.empty()) return true;
    std::uint8_t mask = 0;
    for (int symbol : desired) mask |= static_cast<std::uint8_t>(3U << (2 * symbol));
    std::vector<std::uint8_t> interference;
    for (std::uint8_t row : rows) interference.push_back(static_cast<std::uint8_t>(row & ~mask));
    return field.rank(rows) == field.rank(interference) + static_cast<int>(desired.size());
}

inline std::uint64_t nominal_size(const Network& net, const SearchSpace& space) {
    const std::size_t codable = net.nodes().size() - 4;
    const int cells = space.shape == CodeShape::Scalar ? space.slots : space.slots * space.slots;
    const long double size =
        std::pow(static_cast<long double>(1 << space.field_bits), static_cast<long double>(cells * codable));
    return size >= 18446744073709551615.0L ? std::numeric_limits<std::uint64_t>::max()
                                           : static_cast<std::uint64_t>(size);
}

}  // namespace detail

// Searches linear codes in `space` with fixed source injections: sources send their slot symbol,
// every internal node picks its per-slot output freely from what its code shape allows.
inline OracleResult brute_force_achievable(const Network& net, const RatePair& target, const SearchSpace& space) {
    if (space.slots != 1 && space.slots != 2) throw std::invalid_argument("oracle slots must be 1 or 2");
    const SymbolLayout layout = make_layout(target, space.slots);
    const detail::PackedField field(space.field_bits, static_cast<int>(layout.size()));
    const int degree = space.field_bits;
    const Demands demands = user_demands(layout);

    OracleResult result;
    result.nominal_size = detail::nominal_size(net, space);
    std::vector<std::array<std::uint8_t, 2>> injections;
    for (int slot = 0; slot < layout.slots; ++slot) {
        std::array<std::uint8_t, 2> pair{};
        for (int user : {1, 2}) {
            const int symbol = layout.injected(slot, user);
            pair[static_cast<std::size_t>(user - 1)] = symbol < 0 ? 0 : detail::PackedField::unit(symbol);
        }
        injections.push_back(pair);
    }

    // Transmissions per slot of the chosen path, filled when a witness is found.
    std::vector<std::map<NodeId, std::uint8_t>> sent;
    const auto demand = [&](int user) {
        const auto found = demands.find(destination_id(user));
        return found == demands.end() ? std::vector<int>{} : found->second;
    };

    if (space.shape == CodeShape::Matrix) {
        detail::ReceptionSearch search(net, field, space.slots, injections, space.workers);
        if (!search.run(result.work, space.cap)) {
            result.status = OracleStatus::CapExceeded;
        } else {
            const auto& finals = search.last().states;
            for (std::uint32_t s = 0; s < finals.size() && sent.empty(); ++s) {
                bool ok = true;
                for (int user : {1, 2}) {
                    std::vector<std::uint8_t> rows;
                    for (int t = 0; t < space.slots; ++t) rows.push_back(search.final_row(s, destination_id(user), t));
                    ok = ok && detail::decodes(field, rows, demand(user));
                }
                if (ok) sent = search.transmissions(s);
            }
        }
    } else {
        // Scalar codes never mix slots, so each slot is searched on its own and the
        // destination receptions are paired afterwards.
        std::vector<detail::ReceptionSearch> searches;
        bool within_cap = true;
        for (int slot = 0; slot < space.slots && within_cap; ++slot) {
            searches.emplace_back(net, field, 1,
                                  std::vector<std::array<std::uint8_t, 2>>{injections[static_cast<std::size_t>(slot)]},
                                  space.workers);
            within_cap = searches.back().run(result.work, space.cap);
        }
        std::uint64_t pairings = 1;
        for (const auto& search : searches) pairings *= search.last().states.size();
        if (!within_cap || result.work + pairings > space.cap) {
            result.status = OracleStatus::CapExceeded;
        } else {
            result.work += pairings;
            std::vector<std::uint32_t> index(static_cast<std::size_t>(space.slots), 0);
            for (std::uint64_t combo = 0; combo < pairings && sent.empty(); ++combo) {
                std::uint64_t rest = combo;
                for (int slot = space.slots; slot-- > 0;) {
                    const auto size = searches[static_cast<std::size_t>(slot)].last().states.size();
                    index[static_cast<std::size_t>(slot)] = static_cast<std::uint32_t>(rest % size);
                    rest /= size;
                }
                bool ok = true;
                for (int user : {1, 2}) {
                    std::vector<std::uint8_t> rows;
                    for (int slot = 0; slot < space.slots; ++slot) {
                        rows.push_back(searches[static_cast<std::size_t>(slot)].final_row(
                            index[static_cast<std::size_t>(slot)], destination_id(user), 0));
                    }
                    ok = ok && detail::decodes(field, rows, demand(user));
                }
                if (!ok) continue;
                for (int slot = 0; slot < space.slots; ++slot) {
                    sent.push_back(searches[static_cast<std::size_t>(slot)].transmissions(
                        index[static_cast<std::size_t>(slot)])[0]);
                }
            }
        }
    }

    if (result.status == OracleStatus::CapExceeded) {
        result.verdict = "search budget of " + std::to_string(space.cap) + " exceeded in space " + describe(space);
        return result;
    }
    if (sent.empty()) {
        result.status = OracleStatus::NotFound;
        result.verdict = "no linear witness in space " + describe(space);
        return result;
    }
    CodingScheme scheme = blank_scheme(net, layout, degree, 0);
    scheme.route = "exhaustive search witness, " + describe(space);
    for (auto& [key, role] : scheme.roles) {
        role.kind = RoleKind::Replay;
        role.expression = field.unpack(sent.at(static_cast<std::size_t>(key.first)).at(key.second), degree);
    }
    result.status = OracleStatus::Found;
    result.verdict = "witness found in space " + describe(space);
    result.reception = propagate(net, scheme);
    result.decoding = verify_decoding(result.reception, demands, degree);
    result.witness = std::move(scheme);
    return result;
}

// Each transmission lies in the span allowed by the code shape: the same slot's reception for
// scalar codes, all of the node's receptions for matrix codes. Sources send their injection.
inline bool witness_is_lawful(const Network& net, const CodingScheme& scheme, const Reception& rec, CodeShape shape) {
    const int degree = scheme.degree;
    for (const auto& [key, role] : scheme.roles) {
        const auto& [slot, node] = key;
        const gf::Vector& sent = rec.transmitted.at(static_cast<std::size_t>(slot)).at(node);
        if (Network::is_source(node)) {
            const int symbol = scheme.layout.injected(slot, node == "s1" ? 1 : 2);
            gf::Vector expected = gf::zero_vector(rec.symbols, degree);
            if (symbol >= 0) expected[static_cast<std::size_t>(symbol)] = gf::FieldElem::one(degree);
            if (sent != expected) return false;
            continue;
        }
        std::vector<gf::Vector> rows;
        if (shape == CodeShape::Scalar) {
            rows.push_back(rec.at(slot, node));
        } else {
            for (int t = 0; t < rec.slots; ++t) rows.push_back(rec.at(t, node));
        }
        const std::size_t base = gf::rank_of_rows(rows, rec.symbols, degree);
        rows.push_back(sent);
        if (gf::rank_of_rows(rows, rec.symbols, degree) != base) return false;
    }
    (void)net;
    return true;
}

struct GenParams {
    int internal_layers = 2;
    int min_width = 1;
    int max_width = 3;
    double edge_probability = 0.5;
    std::uint64_t seed = 1;
    int max_attempts = 10000;
};

namespace detail {

inline double unit_interval(gf::Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::optional<Network> try_generate(const GenParams& params, std::uint64_t seed) {
    gf::Rng rng(seed);
    NetworkSpec spec;
    spec.name = "gen-" + std::to_string(params.seed);
    std::vector<std::vector<NodeId>> layers{{"s1", "s2"}};
    int counter = 0;
    for (int layer = 1; layer <= params.internal_layers; ++layer) {
        const auto span = static_cast<std::uint64_t>(params.max_width - params.min_width + 1);
        const int width = params.min_width + static_cast<int>(rng() % span);
        std::vector<NodeId> nodes;
        for (int i = 0; i < width; ++i) nodes.push_back("u" + std::to_string(++counter));
        layers.push_back(std::move(nodes));
    }
    layers.push_back({"d1", "d2"});
    for (std::size_t layer = 0; layer < layers.size(); ++layer) {
        for (const auto& node : layers[layer]) spec.layer_of[node] = static_cast<int>(layer);
    }
    for (std::size_t layer = 0; layer + 1 < layers.size(); ++layer) {
        for (const auto& from : layers[layer]) {
            for (const auto& to : layers[layer + 1]) {
                if (unit_interval(rng) < params.edge_probability) spec.edges.insert({from, to});
            }
        }
    }
    try {
        const Network pruned = build_network(spec, PruneMode::Validate);
        NetworkSpec clean = pruned.spec();
        clean.warnings.clear();
        return build_network(std::move(clean), PruneMode::Validate);
    } catch (const InputError&) {
        return std::nullopt;
    }
}

}  // namespace detail

// Deterministic in `params`; draws are repeated until s1 reaches d1 and s2 reaches d2.
inline Network generate_network(const GenParams& params) {
    if (params.internal_layers < 1 || params.min_width < 1 || params.max_width < params.min_width ||
        !(params.edge_probability > 0.0 && params.edge_probability <= 1.0)) {
        throw std::invalid_argument("generator needs >= 1 internal layer, 1 <= min width <= max width, p in (0,1]");
    }
    for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
        if (auto net = detail::try_generate(params, gf::mix_seed(params.seed, static_cast<std::uint64_t>(attempt)))) {
            return std::move(*net);
        }
    }
    throw std::runtime_error("no valid network after " + std::to_string(params.max_attempts) + " attempts");
}

struct SoundnessCheck {
    RatePair rate;
    SearchSpace space;
    OracleResult result;
};

struct CompletenessCheck {
    RatePair rate;
    bool success = false;
    int attempts = 0;
    std::string detail;
};

struct CrossValidation {
    AnalysisReport report;
    std::vector<SoundnessCheck> soundness;
    std::vector<CompletenessCheck> completeness;
    std::vector<std::string> violations;
    std::vector<std::string> inconclusive;

    [[nodiscard]] bool consistent() const { return violations.empty() && inconclusive.empty(); }
};

// Half-integer grid points expressible in `slots` slots that lie outside `region`.
inline std::vector<RatePair> outside_points(RegionKind region, int slots) {
    std::vector<RatePair> out;
    for (int p = 0; p <= 2; ++p) {
        for (int q = 0; q <= 2; ++q) {
            const RatePair rate{Rational(p, 2), Rational(q, 2)};
            if (slots == 1 && (rate.r1.denominator() != 1 || rate.r2.denominator() != 1)) continue;
            if (!region_contains(region, rate)) out.push_back(rate);
        }
    }
    return out;
}

struct CrossValidateOptions {
    std::uint64_t cap = std::uint64_t{1} << 26;
    int degree = 16;
    int retries = 20;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

inline CrossValidation cross_validate(const Network& net, const CrossValidateOptions& options = {}) {
    CrossValidation out;
    out.report = classify(net);
    for (int bits : {1, 2}) {
        for (int slots : {1, 2}) {
            for (const RatePair& rate : outside_points(out.report.region, slots)) {
                const SearchSpace space{bits, slots, CodeShape::Scalar, options.cap, options.workers};
                SoundnessCheck check{rate, space, brute_force_achievable(net, rate, space)};
                const std::string where = format_rate(rate) + " in " + describe(space);
                if (check.result.status == OracleStatus::Found) {
                    out.violations.push_back("witness outside region " + region_code(out.report.region) + " at " +
                                             where);
                } else if (check.result.status == OracleStatus::CapExceeded) {
                    out.inconclusive.push_back("search budget exceeded at " + where);
                }
                out.soundness.push_back(std::move(check));
            }
        }
    }
    for (const RatePair& rate : region_corners(out.report.region)) {
        CompletenessCheck check{rate, false, 0, {}};
        try {
            const AchieveResult achieved =
                achieve(net, out.report, rate, {options.degree, options.seed, options.retries});
            check.success = achieved.success;
            check.attempts = achieved.attempts;
            check.detail = achieved.success ? achieved.scheme.route : achieved.diagnostics;
        } catch (const std::exception& error) {
            check.detail = error.what();
        }
        if (!check.success) out.violations.push_back("corner " + format_rate(rate) + " not achieved: " + check.detail);
        out.completeness.push_back(std::move(check));
    }
    return out;
}

// Parameters of the `index`-th fuzz network: up to three internal layers of one to three nodes.
inline GenParams fuzz_params(std::uint64_t seed, std::size_t index) {
    GenParams params;
    params.internal_layers = 1 + static_cast<int>(index % 3);
    params.min_width = 1;
    params.max_width = 3;
    params.edge_probability = 0.3 + 0.1 * static_cast<double>(index % 4);
    params.seed = gf::mix_seed(seed, index);
    return params;
}

struct FuzzOutcome {
    std::size_t index = 0;
    std::optional<Network> network;
    std::optional<CrossValidation> validation;
    std::string error;

    [[nodiscard]] bool consistent() const { return validation && validation->consistent(); }
};

// Cross-validates `count` generated networks on a pool of `workers` threads; results are in index order.
inline std::vector<FuzzOutcome> run_fuzz(std::size_t count, std::uint64_t seed, unsigned workers,
                                         const CrossValidateOptions& options = {}) {
    std::vector<FuzzOutcome> outcomes(count);
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t index = next++; index < count; index = next++) {
            FuzzOutcome& outcome = outcomes[index];
            outcome.index = index;
            try {
                outcome.network = generate_network(fuzz_params(seed, index));
                outcome.validation = cross_validate(*outcome.network, options);
            } catch (const std::exception& error) {
                outcome.error = error.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < std::max(1U, workers); ++i) pool.emplace_back(work);
    work();
    for (auto& thread : pool) thread.join();
    return outcomes;
}

inline nlohmann::ordered_json cross_validation_json(const CrossValidation& validation) {
    nlohmann::ordered_json out;
    out["network"] = validation.report.network;
    out["region"] = region_code(validation.report.region);
    out["consistent"] = validation.consistent();
    out["soundness"] = nlohmann::ordered_json::array();
    for (const auto& check : validation.soundness) {
        out["soundness"].push_back({{"rate", format_rate(check.rate)},
                                    {"space", describe(check.space)},
                                    {"status", status_name(check.result.status)},
                                    {"work", check.result.work}});
    }
    out["completeness"] = nlohmann::ordered_json::array();
    for (const auto& check : validation.completeness) {
        out["completeness"].push_back({{"rate", format_rate(check.rate)},
                                       {"success", check.success},
                                       {"attempts", check.attempts},
                                       {"detail", check.detail}});
    }
    out["violations"] = validation.violations;
    out["inconclusive"] = validation.inconclusive;
    return out;
}

}  // namespace ldnet
