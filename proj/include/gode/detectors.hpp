#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gode/graph.hpp"
#include "gode/params.hpp"

namespace gode {

// Uniform detector entry point: fit trains on the whole graph and returns
// the per-node outlier scores (higher = more outlying).
struct DetectorInfo {
    std::string name;
    bool deep;
    // Hyperparameter keys this detector samples from the benchmark grid.
    std::vector<std::string> grid_keys;
    ScoreVector (*fit)(const AttributedGraph&, const ParamMap&, std::uint64_t seed);
};

const std::vector<DetectorInfo>& detector_registry();
const DetectorInfo* find_detector(std::string_view name);
std::vector<std::string> detector_names();

// Parses "algo1,algo2,..." or "all"; validates every name.
std::vector<std::string> parse_algo_list(const std::string& csv);

}  // namespace gode
