#pragma once

#include <cstdint>

#include "gode/graph.hpp"

namespace gode {
namespace synth {

// Random partition graph: num_classes blocks of nodes_per_class nodes,
// intra/inter edge probabilities set so the expected mean degree is avg_degree
// and the expected fraction of intra-class edges is homophily. Features are
// class-conditional Gaussians (per-class mean drawn once from N(0, I), unit
// noise per node).
struct PartitionGraphConfig {
    std::size_t num_classes = 2;
    std::size_t nodes_per_class = 500;
    double homophily = 0.5;
    double avg_degree = 5.0;
    std::size_t num_channels = 64;
    std::uint64_t seed = 0;
};

AttributedGraph generate_partition_graph(const PartitionGraphConfig& cfg);

// m: clique size (structural) / candidate-pool size (contextual);
// n: number of cliques / contextual batches.
struct InjectionParams {
    std::size_t m = 10;
    std::size_t n = 10;
    std::uint64_t seed = 0;
};

struct InjectionResult {
    AttributedGraph graph;
    OutlierLabels labels;
};

// n disjoint cliques of m sampled nodes each made fully connected; exactly
// m*n nodes labeled structural. Features untouched.
InjectionResult inject_structural(const AttributedGraph& g, const InjectionParams& p);

// m*n target nodes sampled; each target's feature row is overwritten with the
// row of the most Euclidean-distant of m sampled candidates. Distances and
// replacement values are taken from the pre-injection feature matrix, so
// swaps do not cascade. Structure untouched.
InjectionResult inject_contextual(const AttributedGraph& g, const InjectionParams& p);

// Structural first, then contextual. By default the contextual targets are
// sampled disjointly from the structural set for exact label counts;
// allow_overlap samples the two sets independently.
InjectionResult inject_combined(const AttributedGraph& g, const InjectionParams& structural,
                                const InjectionParams& contextual,
                                bool allow_overlap = false);

// Replays the contextual argmax for a given run; used to audit that each
// recorded swap picked the most distant pool candidate.
struct ContextualChoice {
    std::size_t target;
    std::size_t chosen;
    double sq_distance;
};
std::vector<ContextualChoice> contextual_replay(const AttributedGraph& g,
                                                const InjectionParams& p);

}  // namespace synth
}  // namespace gode
