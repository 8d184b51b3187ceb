// Acceptance harness: one PASS/FAIL line per criterion; exit status 1 if any criterion fails.
#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include "ldnet/oracle.hpp"
#include "lemma_checks.hpp"
#include "support.hpp"

using namespace ldnet;
using ldnet::testing::corpus;
using ldnet::testing::corpus_path;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

RatePair rate(long long n1, long long d1, long long n2, long long d2) { return {Rational(n1, d1), Rational(n2, d2)}; }

unsigned worker_count() { return std::max(1U, std::thread::hardware_concurrency()); }

std::string fixed(double value, int digits) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(digits);
    out << value;
    return out.str();
}

Outcome corpus_classification() {
    const std::vector<std::pair<std::string, RegionKind>> expected{{"zigzag", RegionKind::Triangle},
                                                                   {"asym", RegionKind::Trapezoid12},
                                                                   {"asym_dashed", RegionKind::Pentagon},
                                                                   {"diamond_f4", RegionKind::Square},
                                                                   {"disjoint", RegionKind::Square}};
    Outcome out{true, ""};
    for (const auto& [name, region] : expected) {
        const RegionKind got = classify(corpus(name)).region;
        out.detail += name + "=" + region_code(got) + " ";
        if (got != region) out.pass = false;
    }
    return out;
}

Outcome table_replay() {
    const std::vector<std::pair<std::string, std::string>> tables{
        {"diamond_f4", "diamond_f4"}, {"asym", "asym_half_one"}, {"asym_dashed", "asym_dashed_one_half"}};
    Outcome out{true, ""};
    for (const auto& [net, table] : tables) {
        const ReplayTable parsed = parse_replay_table(ldnet::testing::read_text(corpus_path(table + ".table")));
        const ReplayReport report = replay_table(corpus(net), parsed);
        out.detail += table + " " + std::to_string(report.checked - report.mismatches.size()) + "/" +
                      std::to_string(report.checked) + " ";
        if (!report.ok()) out.pass = false;
        for (const auto& mismatch : report.mismatches) out.detail += "[" + mismatch + "] ";
    }
    return out;
}

Outcome corner_achievability() {
    const std::vector<std::pair<std::string, RatePair>> cases{
        {"diamond_f4", rate(1, 1, 1, 1)},  {"asym", rate(1, 2, 1, 1)},   {"asym_dashed", rate(1, 1, 1, 2)},
        {"asym_dashed", rate(1, 2, 1, 1)}, {"zigzag", rate(1, 1, 0, 1)}, {"zigzag", rate(0, 1, 1, 1)}};
    Outcome out{true, ""};
    for (const auto& [name, target] : cases) {
        const Network net = corpus(name);
        const AnalysisReport report = classify(net);
        int successes = 0;
        for (std::uint64_t seed = 1; seed <= 100; ++seed) {
            AchieveOptions options;
            options.seed = seed;
            successes += achieve(net, report, target, options).success ? 1 : 0;
        }
        out.detail += name + format_rate(target) + " " + std::to_string(successes) + "/100 ";
        if (successes < 99) out.pass = false;
    }
    return out;
}

Outcome field_separation() {
    const Network net = corpus("diamond_f4");
    const RatePair target = rate(1, 1, 1, 1);
    const auto run = [&](int bits, int slots, CodeShape shape) {
        SearchSpace space;
        space.field_bits = bits;
        space.slots = slots;
        space.shape = shape;
        space.workers = worker_count();
        OracleResult result = brute_force_achievable(net, target, space);
        std::cout << "    " << describe(space) << ": " << status_name(result.status) << " (work " << result.work
                  << ", nominal " << result.nominal_size << ")\n";
        return result;
    };
    const OracleResult gf4 = run(2, 1, CodeShape::Scalar);
    const OracleResult scalar1 = run(1, 1, CodeShape::Scalar);
    const OracleResult scalar2 = run(1, 2, CodeShape::Scalar);
    const OracleResult matrix = run(1, 2, CodeShape::Matrix);
    Outcome out;
    out.pass = gf4.status == OracleStatus::Found && matrix.status == OracleStatus::NotFound;
    out.detail = "GF(4) T=1 " + status_name(gf4.status) + "; GF(2) T=2 full-matrix " + status_name(matrix.status);
    if (matrix.status == OracleStatus::Found) {
        // Multiplication by rho acts on GF(4) = GF(2)^2 as a 2x2 binary matrix, so every GF(4) scalar code embeds.
        out.detail += " (binary 2x2 matrix codes contain the GF(4) scalar codes)";
    }
    out.detail += "; GF(2) scalar T=1 " + status_name(scalar1.status) + ", T=2 " + status_name(scalar2.status);
    return out;
}

Outcome fuzz_consistency() {
    const auto outcomes = run_fuzz(200, 1, worker_count());
    std::size_t consistent = 0;
    std::size_t max_internal = 0;
    std::string first_problem;
    for (const auto& outcome : outcomes) {
        if (outcome.network) max_internal = std::max(max_internal, outcome.network->nodes().size() - 4);
        if (outcome.consistent()) {
            ++consistent;
        } else if (first_problem.empty()) {
            first_problem = outcome.error;
            if (outcome.validation) {
                for (const auto& line : outcome.validation->violations) first_problem += line + "; ";
                for (const auto& line : outcome.validation->inconclusive) first_problem += line + "; ";
            }
        }
    }
    Outcome out{consistent == outcomes.size(), std::to_string(consistent) + "/" + std::to_string(outcomes.size()) +
                                                   " consistent, max internal nodes " + std::to_string(max_internal)};
    if (!first_problem.empty()) out.detail += ", first problem: " + first_problem;
    if (max_internal > 10) out.pass = false;
    return out;
}

Outcome lemma_frequencies() {
    using ldnet::testing::Frequency;
    const auto nets = ldnet::testing::fuzz_networks(60, 61);
    const Frequency reach = ldnet::testing::reachability_frequency(nets, 100);
    const Frequency pair = ldnet::testing::two_source_frequency(nets, 100);
    std::vector<Network> cases = ldnet::testing::neutralization_cases(ldnet::testing::fuzz_networks(3000, 62));
    if (cases.size() > 60) cases.erase(cases.begin() + 60, cases.end());
    const auto neutral = ldnet::testing::neutralization_frequency(cases, 100);
    const auto line = [](const std::string& name, const Frequency& freq) {
        return name + " " + fixed(freq.rate(), 4) + " (worst " + fixed(freq.worst, 2) + " over " +
               std::to_string(freq.instances) + " instances); ";
    };
    Outcome out;
    out.detail = line("reachability", reach) + line("two-source", pair) + line("reception", neutral.reception) +
                 line("rank", neutral.far_layer);
    out.pass = true;
    for (const Frequency* freq : {&reach, &pair, &neutral.reception, &neutral.far_layer}) {
        if (freq->instances == 0 || freq->worst < 0.99) out.pass = false;
    }
    return out;
}

Outcome structural_lemmas() {
    std::vector<Network> nets;
    for (const auto& name : ldnet::testing::corpus_names()) nets.push_back(corpus(name));
    for (auto& net : ldnet::testing::fuzz_networks(500, 71)) nets.push_back(std::move(net));
    std::array<std::size_t, 4> checked{};
    std::array<std::size_t, 4> violations{};
    for (const auto& net : nets) {
        for (int user : {1, 2}) {
            const CriticalNodeInfo info = critical_node(net, user);
            if (info.layer >= 2) {
                ++checked[0];
                if (rank_mincut(net, parents(net, info.node)) != 2) ++violations[0];
            }
        }
        ++checked[1];
        if (omniscient_nodes(net).empty() != omniscient_nodes_full_scan(net).empty()) ++violations[1];

        for (int layer = 1; layer <= net.last_layer(); ++layer) {
            for (const auto& node : net.layer(layer)) {
                const NodeSet target{node};
                if (rank_mincut(net, target) != 1) continue;
                ++checked[2];
                const NodeSet members = primary_mincut_layer_members(net, target);
                const NodeSet relevant = detail::relevant_ancestors(net, target);
                std::set<NodeSet> parent_sets;
                for (const auto& member : members) {
                    if (Network::is_source(member)) continue;
                    NodeSet restricted;
                    for (const auto& parent : parents(net, member)) {
                        if (relevant.contains(parent)) restricted.insert(parent);
                    }
                    parent_sets.insert(restricted);
                }
                if (members.empty() || parent_sets.size() > 1) ++violations[2];
            }
        }

        if (!omniscient_nodes(net).empty()) continue;
        const CriticalNodeInfo first = critical_node(net, 1);
        const CriticalNodeInfo second = critical_node(net, 2);
        for (const auto& [anchor, other, orientation] :
             {std::tuple{first, second, Orientation::O12}, std::tuple{second, first, Orientation::O21}}) {
            if (anchor.layer == 0 || anchor.layer > other.layer) continue;
            const NodeSet neutralized = s_parents(net, anchor.node, second_user(orientation));
            if (neutralized.empty()) continue;
            ++checked[3];
            std::set<bool> outcomes;
            for (const auto& pivot : neutralized) {
                outcomes.insert(
                    !omniscient_nodes_full_scan(induced_graph(net, orientation, anchor.node, pivot).graph).empty());
            }
            if (outcomes.size() > 1) ++violations[3];
        }
    }
    Outcome out{true, std::to_string(nets.size()) + " networks; "};
    const char* names[] = {"critical parents rank 2", "omniscient fast path", "primary min-cut clones",
                           "induced omniscience pivot-free"};
    for (std::size_t i = 0; i < 4; ++i) {
        out.detail += std::string(names[i]) + " " + std::to_string(checked[i] - violations[i]) + "/" +
                      std::to_string(checked[i]) + "; ";
        if (violations[i] != 0 || checked[i] == 0) out.pass = false;
    }
    return out;
}

Outcome mincut_agreement() {
    gf::Rng rng(81);
    std::size_t pairs = 0;
    std::size_t disagreements = 0;
    std::size_t rank_two = 0;
    std::size_t index = 0;
    while (pairs < 1000) {
        const Network net = generate_network(fuzz_params(82, index++));
        const int layer = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(net.last_layer()));
        NodeSet set;
        for (const auto& node : net.layer(layer)) {
            if (rng() % 2 == 0) set.insert(node);
        }
        if (set.empty()) set.insert(*net.layer(layer).begin());
        const int exact = rank_mincut(net, set);
        rank_two += exact == 2 ? 1 : 0;
        if (exact != rank_mincut_randomized(net, set, 16, rng())) ++disagreements;
        ++pairs;
    }
    return {disagreements == 0, std::to_string(pairs) + " pairs (" + std::to_string(rank_two) + " of rank 2), " +
                                    std::to_string(disagreements) + " disagreements"};
}

std::string capture(const std::string& command) {
    std::string output;
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(command.c_str(), "r"), pclose);
    if (!pipe) return "<popen failed>";
    std::array<char, 4096> buffer{};
    while (std::size_t count = std::fread(buffer.data(), 1, buffer.size(), pipe.get()))
        output.append(buffer.data(), count);
    return output;
}

Outcome cli_determinism() {
    const std::string cli = LDNET_CLI_PATH;
    const std::vector<std::string> commands{cli + " analyze --json " + corpus_path("asym.net"),
                                            cli + " analyze " + corpus_path("asym_dashed.net"),
                                            cli + " simulate " + corpus_path("diamond_f4.net") + " --rate 1,1 --seed 5",
                                            cli + " simulate " + corpus_path("asym.net") + " --rate 1/2,1 --seed 3",
                                            cli + " gen --seed 7 --layers 2 --width 2-3 --p 0.5",
                                            cli + " fuzz --count 30 --seed 4"};
    Outcome out{true, ""};
    std::size_t identical = 0;
    for (const auto& command : commands) {
        const std::string first = capture(command + " 2>&1");
        const std::string second = capture(command + " 2>&1");
        if (first == second && !first.empty()) {
            ++identical;
        } else {
            out.pass = false;
            out.detail += "differs: " + command + "; ";
        }
    }
    out.detail =
        std::to_string(identical) + "/" + std::to_string(commands.size()) + " commands byte-identical " + out.detail;
    return out;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"corpus classification", corpus_classification},
        {"table replay", table_replay},
        {"corner achievability over 100 seeds", corner_achievability},
        {"GF(2)/GF(4) separation on diamond_f4", field_separation},
        {"fuzzed classifier/oracle consistency", fuzz_consistency},
        {"lemma frequencies at r=16", lemma_frequencies},
        {"structural lemmas", structural_lemmas},
        {"rank_mincut exact vs randomized", mincut_agreement},
        {"CLI determinism", cli_determinism}};
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = criteria[i].second();
        } catch (const std::exception& error) {
            outcome = {false, std::string("exception: ") + error.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += outcome.pass ? 0 : 1;
        std::cout << (outcome.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first << " ["
                  << fixed(seconds, 2) << " s] " << outcome.detail << std::endl;
    }
    std::cout << criteria.size() - static_cast<std::size_t>(failures) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failures == 0 ? 0 : 1;
}
