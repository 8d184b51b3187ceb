// ldnet: command-line front end for analysis, coding simulation, exhaustive search and fuzzing.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "ldnet/classifier.hpp"
#include "ldnet/codesim.hpp"
#include "ldnet/netmodel.hpp"
#include "ldnet/oracle.hpp"

namespace {

using namespace ldnet;

enum ExitCode : int {
    kOk = 0,
    kInputError = 2,
    kUnachieved = 3,
    kOutOfRegion = 4,
    kNotFound = 5,
    kCapExceeded = 6,
    kFuzzViolation = 7,
};

constexpr const char* kWorkersEnv = "LDNET_WORKERS";

unsigned worker_count() {
    if (const char* value = std::getenv(kWorkersEnv)) {
        try {
            const int parsed = std::stoi(value);
            if (parsed >= 1) return static_cast<unsigned>(parsed);
        } catch (const std::exception&) {
        }
        throw InputError(std::string(kWorkersEnv) + " must be a positive integer");
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string stem(const std::string& path) {
    const auto slash = path.find_last_of('/');
    std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
    if (const auto dot = name.rfind('.'); dot != std::string::npos && dot > 0) name.erase(dot);
    return name;
}

Network load_network(const std::string& path) { return parse_network(read_file(path), stem(path)); }

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << text;
}

// "p/q", an integer, or a decimal that is a multiple of one half.
Rational parse_rate_value(const std::string& text) {
    const auto invalid = [&] { return InputError("invalid rate '" + text + "': use p/q or a multiple of 0.5"); };
    const auto digits = [](const std::string& part) {
        return !part.empty() &&
               std::all_of(part.begin(), part.end(), [](unsigned char ch) { return std::isdigit(ch) != 0; });
    };
    if (const auto slash = text.find('/'); slash != std::string::npos) {
        const std::string num = text.substr(0, slash);
        const std::string den = text.substr(slash + 1);
        if (!digits(num) || !digits(den) || std::stoll(den) == 0) throw invalid();
        return {std::stoll(num), std::stoll(den)};
    }
    const auto dot = text.find('.');
    const std::string whole = text.substr(0, dot);
    std::string fraction = dot == std::string::npos ? "" : text.substr(dot + 1);
    if ((!whole.empty() && !digits(whole)) || (!fraction.empty() && !digits(fraction)) ||
        (whole.empty() && fraction.empty())) {
        throw invalid();
    }
    while (!fraction.empty() && fraction.back() == '0') fraction.pop_back();
    const Rational base(whole.empty() ? 0 : std::stoll(whole));
    if (fraction.empty()) return base;
    if (fraction == "5") return base + Rational(1, 2);
    throw invalid();
}

RatePair parse_rate(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw InputError("rate must be R1,R2");
    const RatePair rate{parse_rate_value(text.substr(0, comma)), parse_rate_value(text.substr(comma + 1))};
    for (const Rational& value : {rate.r1, rate.r2}) {
        if (value < Rational(0) || value > Rational(1) || (value.denominator() != 1 && value.denominator() != 2)) {
            throw InputError("rate " + format_rate(rate) + " must use halves in [0,1]");
        }
    }
    return rate;
}

std::string dot_text(const Network& net) {
    std::ostringstream out;
    out << "digraph \"" << net.name() << "\" {\n";
    out << "  rankdir=LR;\n";
    out << "  node [style=filled, fontname=\"Helvetica\"];\n";
    for (int layer = 0; layer <= net.last_layer(); ++layer) {
        out << "  { rank=same;";
        for (const auto& node : net.layer(layer)) out << " \"" << node << "\";";
        out << " }\n";
    }
    for (const auto& node : net.nodes()) {
        const bool from1 = net.reach_of_source(1).contains(node);
        const bool from2 = net.reach_of_source(2).contains(node);
        const char* color = from1 && from2 ? "plum" : from1 ? "lightblue" : "lightsalmon";
        const char* shape = Network::is_source(node)        ? "box"
                            : Network::is_destination(node) ? "doublecircle"
                                                            : "ellipse";
        out << "  \"" << node << "\" [shape=" << shape << ", fillcolor=" << color << "];\n";
    }
    for (const auto& [from, to] : net.edges()) out << "  \"" << from << "\" -> \"" << to << "\";\n";
    out << "}\n";
    return out.str();
}

int cmd_analyze(const std::string& path, bool json) {
    const Network net = load_network(path);
    const AnalysisReport report = classify(net);
    if (json) {
        std::cout << report_json(report).dump(2) << '\n';
    } else {
        std::cout << report_text(report);
    }
    return kOk;
}

struct SimulateArgs {
    std::string file;
    std::string rate;
    int field_bits = 16;
    std::uint64_t seed = 1;
    int retries = 20;
};

int cmd_simulate(const SimulateArgs& args) {
    const Network net = load_network(args.file);
    const RatePair rate = parse_rate(args.rate);
    if (args.field_bits < 1 || args.field_bits > gf::kMaxDegree) throw InputError("--field-bits must lie in [1,32]");
    if (args.retries < 0) throw InputError("--retries must be nonnegative");
    const AnalysisReport report = classify(net);
    AchieveResult result;
    try {
        result = achieve(net, report, rate, {args.field_bits, args.seed, args.retries});
    } catch (const OutOfRegionError& error) {
        std::cerr << "error: " << error.what() << '\n';
        return kOutOfRegion;
    }
    nlohmann::ordered_json out;
    out["network"] = net.name();
    out["region"] = region_code(report.region);
    out["rate"] = format_rate(rate);
    out["success"] = result.success;
    out["attempts"] = result.attempts;
    if (!result.success) {
        out["failed_stage"] = result.failed_stage;
        out["diagnostics"] = result.diagnostics;
    }
    out["scheme"] =
        result.success ? scheme_json(result.scheme, &result.reception, &result.verdict) : scheme_json(result.scheme);
    std::cout << out.dump(2) << '\n';
    return result.success ? kOk : kUnachieved;
}

struct OracleArgs {
    std::string file;
    std::string rate;
    int field = 2;
    int slots = 1;
    bool matrix = false;
    std::uint64_t cap = std::uint64_t{1} << 26;
};

int cmd_oracle(const OracleArgs& args) {
    const Network net = load_network(args.file);
    const RatePair rate = parse_rate(args.rate);
    if (args.slots < slots_for(rate)) throw InputError("rate " + format_rate(rate) + " needs two slots");
    const SearchSpace space{args.field == 4 ? 2 : 1, args.slots, args.matrix ? CodeShape::Matrix : CodeShape::Scalar,
                            args.cap, worker_count()};
    const OracleResult result = brute_force_achievable(net, rate, space);
    nlohmann::ordered_json out;
    out["network"] = net.name();
    out["rate"] = format_rate(rate);
    out["space"] = describe(space);
    out["status"] = status_name(result.status);
    out["verdict"] = result.verdict;
    out["work"] = result.work;
    out["nominal_size"] = result.nominal_size;
    if (result.witness) out["witness"] = scheme_json(*result.witness, &result.reception, &result.decoding);
    std::cout << out.dump(2) << '\n';
    switch (result.status) {
        case OracleStatus::Found: return kOk;
        case OracleStatus::NotFound: return kNotFound;
        case OracleStatus::CapExceeded: return kCapExceeded;
    }
    return kOk;
}

struct GenArgs {
    int layers = 2;
    std::string width = "1-3";
    double p = 0.5;
    std::uint64_t seed = 1;
    std::string output;
};

int cmd_gen(const GenArgs& args) {
    GenParams params;
    params.internal_layers = args.layers;
    params.edge_probability = args.p;
    params.seed = args.seed;
    try {
        const auto dash = args.width.find('-');
        params.min_width = std::stoi(args.width.substr(0, dash));
        params.max_width = dash == std::string::npos ? params.min_width : std::stoi(args.width.substr(dash + 1));
        const Network net = generate_network(params);
        write_output(args.output, serialize_network(net));
    } catch (const std::invalid_argument& error) {
        throw InputError(error.what());
    }
    return kOk;
}

struct FuzzArgs {
    std::size_t count = 200;
    std::uint64_t seed = 1;
    std::string counterexample = "fuzz-counterexample.net";
};

int cmd_fuzz(const FuzzArgs& args) {
    const auto outcomes = run_fuzz(args.count, args.seed, worker_count());
    std::map<std::string, std::size_t> regions;
    std::size_t consistent = 0;
    const FuzzOutcome* first_failure = nullptr;
    for (const auto& outcome : outcomes) {
        if (outcome.validation) ++regions[region_code(outcome.validation->report.region)];
        if (outcome.consistent()) {
            ++consistent;
            continue;
        }
        if (first_failure == nullptr) first_failure = &outcome;
        std::cout << "network " << outcome.index << ": ";
        if (!outcome.validation) {
            std::cout << "error: " << outcome.error << '\n';
            continue;
        }
        std::cout << "region " << region_code(outcome.validation->report.region) << '\n';
        for (const auto& violation : outcome.validation->violations) std::cout << "  violation: " << violation << '\n';
        for (const auto& note : outcome.validation->inconclusive) std::cout << "  inconclusive: " << note << '\n';
    }
    std::cout << "regions:";
    for (const auto& [code, count] : regions) std::cout << ' ' << code << '=' << count;
    std::cout << '\n' << consistent << '/' << outcomes.size() << " consistent\n";
    if (first_failure == nullptr) return kOk;
    std::ostringstream file;
    file << "# fuzz counterexample: seed " << args.seed << ", network " << first_failure->index << '\n';
    if (first_failure->validation) {
        for (const auto& violation : first_failure->validation->violations) file << "# " << violation << '\n';
        for (const auto& note : first_failure->validation->inconclusive) file << "# " << note << '\n';
    } else {
        file << "# " << first_failure->error << '\n';
    }
    if (first_failure->network) file << serialize_network(*first_failure->network);
    write_output(args.counterexample, file.str());
    std::cerr << "counterexample written to " << args.counterexample << '\n';
    return kFuzzViolation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-unicast layered linear deterministic networks: region analysis and linear coding schemes"};
    app.require_subcommand(1);

    bool text_flag = false;
    bool json_flag = false;
    std::string analyze_file;
    auto* analyze = app.add_subcommand("analyze", "Classify the capacity region of a network");
    analyze->add_option("file", analyze_file, "Network file")->required();
    auto* text_opt = analyze->add_flag("--text", text_flag, "Human-readable report (default)");
    analyze->add_flag("--json", json_flag, "JSON report")->excludes(text_opt);

    SimulateArgs simulate_args;
    auto* simulate = app.add_subcommand("simulate", "Construct and verify a linear scheme for a region corner");
    simulate->add_option("file", simulate_args.file, "Network file")->required();
    simulate->add_option("--rate", simulate_args.rate, "Target rate pair R1,R2")->required();
    simulate->add_option("--field-bits", simulate_args.field_bits, "Field degree r of GF(2^r)")->capture_default_str();
    simulate->add_option("--seed", simulate_args.seed, "Master seed")->capture_default_str();
    simulate->add_option("--retries", simulate_args.retries, "Fresh draws after the first attempt")
        ->capture_default_str();

    OracleArgs oracle_args;
    auto* oracle = app.add_subcommand("oracle", "Exhaustive search for a linear witness over GF(2) or GF(4)");
    oracle->add_option("file", oracle_args.file, "Network file")->required();
    oracle->add_option("--rate", oracle_args.rate, "Target rate pair R1,R2")->required();
    oracle->add_option("--field", oracle_args.field, "Field size")->check(CLI::IsMember({2, 4}))->capture_default_str();
    oracle->add_option("--slots", oracle_args.slots, "Channel uses T")
        ->check(CLI::IsMember({1, 2}))
        ->capture_default_str();
    oracle->add_flag("--matrix", oracle_args.matrix, "Full T x T matrix per node instead of one scalar per slot");
    oracle->add_option("--cap", oracle_args.cap, "Search budget")->capture_default_str();

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "Generate a random layered network");
    gen->add_option("--layers", gen_args.layers, "Internal layers")->capture_default_str();
    gen->add_option("--width", gen_args.width, "Nodes per internal layer, N or MIN-MAX")->capture_default_str();
    gen->add_option("--p", gen_args.p, "Edge probability")->capture_default_str();
    gen->add_option("--seed", gen_args.seed, "Seed")->capture_default_str();
    gen->add_option("-o,--output", gen_args.output, "Output file (stdout if omitted)");

    std::string dot_file;
    std::string dot_output;
    auto* dot = app.add_subcommand("dot", "Export Graphviz DOT");
    dot->add_option("file", dot_file, "Network file")->required();
    dot->add_option("-o,--output", dot_output, "Output file (stdout if omitted)");

    FuzzArgs fuzz_args;
    auto* fuzz = app.add_subcommand("fuzz", "Cross-validate the classifier against the oracle on generated networks");
    fuzz->add_option("--count", fuzz_args.count, "Number of networks")->capture_default_str();
    fuzz->add_option("--seed", fuzz_args.seed, "Master seed")->capture_default_str();
    fuzz->add_option("--counterexample", fuzz_args.counterexample, "Where to write the first failing network")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& error) {
        const int code = app.exit(error);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(analyze_file, json_flag);
        if (simulate->parsed()) return cmd_simulate(simulate_args);
        if (oracle->parsed()) return cmd_oracle(oracle_args);
        if (gen->parsed()) return cmd_gen(gen_args);
        if (dot->parsed()) {
            write_output(dot_output, dot_text(load_network(dot_file)));
            return kOk;
        }
        if (fuzz->parsed()) return cmd_fuzz(fuzz_args);
    } catch (const InputError& error) {
        std::cerr << "error: " << error.what() << '\n';
        return kInputError;
    } catch (const std::invalid_argument& error) {
        std::cerr << "error: " << error.what() << '\n';
        return kInputError;
    }
    return kOk;
}
