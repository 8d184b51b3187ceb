#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <vector>

#include "ldnet/netmodel.hpp"
#include "ldnet/oracle.hpp"

namespace ldnet::testing {

inline std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline std::string corpus_path(const std::string& file) { return std::string(LDNET_CORPUS_DIR) + "/" + file; }

inline Network corpus(const std::string& name) { return parse_network(read_text(corpus_path(name + ".net")), name); }

// Random layered networks from the fuzz parameter schedule.
inline std::vector<Network> fuzz_networks(std::size_t count, std::uint64_t seed) {
    std::vector<Network> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(generate_network(fuzz_params(seed, i)));
    return out;
}

inline const std::vector<std::string>& corpus_names() {
    static const std::vector<std::string> names{"zigzag", "asym", "asym_dashed", "diamond_f4", "disjoint"};
    return names;
}

}  // namespace ldnet::testing
