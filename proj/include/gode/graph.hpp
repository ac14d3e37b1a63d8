#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "gode/matrix.hpp"

namespace gode {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

// Immutable attributed graph in CSR form. Neighbor lists are strictly sorted,
// self-loops and duplicate edges are never stored, and undirected graphs keep
// both (u,v) and (v,u). Safe to share across threads once built.
class AttributedGraph {
public:
    AttributedGraph() = default;

    std::size_t num_nodes() const noexcept { return num_nodes_; }
    std::size_t num_features() const noexcept { return features_.cols(); }
    bool directed() const noexcept { return directed_; }

    // Stored directed arcs; for an undirected graph this is twice the edge count.
    std::size_t num_arcs() const noexcept { return col_indices_.size(); }
    // Undirected edge count (each edge counted once); for directed graphs the arc count.
    std::size_t num_edges() const noexcept {
        return directed_ ? col_indices_.size() : col_indices_.size() / 2;
    }

    std::span<const NodeId> neighbors(NodeId u) const {
        return {col_indices_.data() + row_offsets_[u],
                col_indices_.data() + row_offsets_[u + 1]};
    }
    std::size_t degree(NodeId u) const { return row_offsets_[u + 1] - row_offsets_[u]; }
    bool has_edge(NodeId u, NodeId v) const;

    const std::vector<std::size_t>& row_offsets() const noexcept { return row_offsets_; }
    const std::vector<NodeId>& col_indices() const noexcept { return col_indices_; }
    const Matrix& features() const noexcept { return features_; }
    std::span<const double> feature_row(NodeId u) const { return features_.row(u); }

    // Canonical edge list: u < v once per edge when undirected, all arcs when directed.
    std::vector<Edge> edge_list() const;

    friend AttributedGraph build_graph(std::span<const Edge> edges, Matrix features,
                                       bool directed);
    friend AttributedGraph replace_features(const AttributedGraph& g, Matrix features);

private:
    std::size_t num_nodes_ = 0;
    bool directed_ = false;
    std::vector<std::size_t> row_offsets_{0};
    std::vector<NodeId> col_indices_;
    Matrix features_;
};

// Validates node indices and feature finiteness, drops self-loops and
// duplicates, mirrors edges when undirected, and produces sorted CSR.
// The node count is the feature row count.
AttributedGraph build_graph(std::span<const Edge> edges, Matrix features, bool directed);

// Same structure, different features (used by contextual injection).
AttributedGraph replace_features(const AttributedGraph& g, Matrix features);

// Undirected copy: every arc mirrored. Returns the input unchanged when
// already undirected.
AttributedGraph symmetrized(const AttributedGraph& g);

// Out-degrees straight from the CSR offsets.
std::vector<std::size_t> degrees(const AttributedGraph& g);

// CSR sparse matrix with values; used for the normalized adjacency.
struct SparseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_offsets{0};
    std::vector<NodeId> col_indices;
    std::vector<double> values;

    // y = S * x  (dense x), sequential and deterministic.
    Matrix multiply(const Matrix& x) const;
    // y = S^T * x.
    Matrix multiply_transposed(const Matrix& x) const;
    Matrix to_dense() const;
};

// A_hat = D~^{-1/2} (A + I) D~^{-1/2} with D~ the degree of A + I.
// Self-loops are re-added here; isolated nodes get the single entry 1.
SparseMatrix normalized_adjacency(const AttributedGraph& g);

// Dense 0/1 adjacency (no self-loops). Guarded by a node cap because the
// decoders that need it are quadratic in memory.
inline constexpr std::size_t kDenseAdjacencyCap = 20000;
Matrix dense_adjacency(const AttributedGraph& g);

enum class OutlierKind : std::uint8_t { none = 0, contextual = 1, structural = 2, both = 3 };

const char* to_string(OutlierKind k);

// Per-node ground-truth outlier flags with type.
struct OutlierLabels {
    std::vector<OutlierKind> kind;

    std::size_t size() const noexcept { return kind.size(); }
    bool empty() const noexcept { return kind.empty(); }

    bool is_outlier(std::size_t i) const { return kind[i] != OutlierKind::none; }
    std::vector<int> binary() const;
    // Positives for one type (includes `both`).
    std::vector<int> binary_for(OutlierKind k) const;

    std::size_t num_outliers() const;
    std::size_t count(OutlierKind k) const;

    void merge(const OutlierLabels& other);
};

// Per-node outlier scores, higher = more outlying.
using ScoreVector = std::vector<double>;

}  // namespace gode
