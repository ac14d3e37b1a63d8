#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "gode/graph.hpp"

namespace gode {
namespace bundle {

// On-disk graph bundle: meta.json, edges.csv ("u,v" per line, u<v when
// undirected), features.csv (one row per node, shortest round-trip decimals),
// labels.csv (node_id,kind; absent when unlabeled). Provenance carries enough
// generator/injection state to regenerate the bundle from seeds.
struct Bundle {
    AttributedGraph graph;
    std::optional<OutlierLabels> labels;
    std::string provenance_json;  // "{}" when absent
};

void save_bundle(const std::filesystem::path& dir, const AttributedGraph& graph,
                 const OutlierLabels* labels, const std::string& provenance_json);

// Loads and re-validates every graph invariant; malformed input raises
// ValidationError with file and line diagnostics, never crashes.
Bundle load_bundle(const std::filesystem::path& dir);

// Replays the provenance block (generator config + injection list) and
// returns the regenerated graph and labels.
Bundle regenerate(const std::string& provenance_json);

}  // namespace bundle
}  // namespace gode
