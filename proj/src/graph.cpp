#include "gode/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gode/error.hpp"

namespace gode {

bool AttributedGraph::has_edge(NodeId u, NodeId v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<Edge> AttributedGraph::edge_list() const {
    std::vector<Edge> out;
    out.reserve(num_edges());
    for (NodeId u = 0; u < num_nodes_; ++u) {
        for (NodeId v : neighbors(u)) {
            if (directed_ || u < v) out.emplace_back(u, v);
        }
    }
    return out;
}

AttributedGraph build_graph(std::span<const Edge> edges, Matrix features, bool directed) {
    const std::size_t n = features.rows();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < features.cols(); ++j) {
            if (!std::isfinite(features(i, j))) {
                throw ValidationError("non-finite feature at node " + std::to_string(i) +
                                      ", column " + std::to_string(j));
            }
        }
    }

    std::vector<Edge> arcs;
    arcs.reserve(directed ? edges.size() : edges.size() * 2);
    for (const auto& [u, v] : edges) {
        if (u >= n || v >= n) {
            throw ValidationError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                                  ") out of range for " + std::to_string(n) + " nodes");
        }
        if (u == v) continue;  // self-loops dropped
        arcs.emplace_back(u, v);
        if (!directed) arcs.emplace_back(v, u);
    }
    std::sort(arcs.begin(), arcs.end());
    arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());

    AttributedGraph g;
    g.num_nodes_ = n;
    g.directed_ = directed;
    g.features_ = std::move(features);
    g.row_offsets_.assign(n + 1, 0);
    g.col_indices_.reserve(arcs.size());
    for (const auto& [u, v] : arcs) g.row_offsets_[u + 1]++;
    for (std::size_t i = 0; i < n; ++i) g.row_offsets_[i + 1] += g.row_offsets_[i];
    for (const auto& [u, v] : arcs) g.col_indices_.push_back(v);
    return g;
}

AttributedGraph replace_features(const AttributedGraph& g, Matrix features) {
    if (features.rows() != g.num_nodes() || features.cols() != g.num_features()) {
        throw ValidationError("replacement feature matrix shape mismatch");
    }
    for (std::size_t i = 0; i < features.rows(); ++i) {
        for (std::size_t j = 0; j < features.cols(); ++j) {
            if (!std::isfinite(features(i, j))) {
                throw ValidationError("non-finite feature at node " + std::to_string(i) +
                                      ", column " + std::to_string(j));
            }
        }
    }
    AttributedGraph out = g;
    out.features_ = std::move(features);
    return out;
}

AttributedGraph symmetrized(const AttributedGraph& g) {
    if (!g.directed()) return g;
    auto arcs = g.edge_list();
    Matrix features = g.features();
    return build_graph(arcs, std::move(features), /*directed=*/false);
}

std::vector<std::size_t> degrees(const AttributedGraph& g) {
    std::vector<std::size_t> d(g.num_nodes());
    for (NodeId u = 0; u < g.num_nodes(); ++u) d[u] = g.degree(u);
    return d;
}

Matrix SparseMatrix::multiply(const Matrix& x) const {
    Matrix y(rows, x.cols());
    for (std::size_t i = 0; i < rows; ++i) {
        double* yrow = y.data() + i * x.cols();
        for (std::size_t e = row_offsets[i]; e < row_offsets[i + 1]; ++e) {
            const double w = values[e];
            const double* xrow = x.data() + col_indices[e] * x.cols();
            for (std::size_t j = 0; j < x.cols(); ++j) yrow[j] += w * xrow[j];
        }
    }
    return y;
}

Matrix SparseMatrix::multiply_transposed(const Matrix& x) const {
    Matrix y(cols, x.cols());
    for (std::size_t i = 0; i < rows; ++i) {
        const double* xrow = x.data() + i * x.cols();
        for (std::size_t e = row_offsets[i]; e < row_offsets[i + 1]; ++e) {
            const double w = values[e];
            double* yrow = y.data() + col_indices[e] * x.cols();
            for (std::size_t j = 0; j < x.cols(); ++j) yrow[j] += w * xrow[j];
        }
    }
    return y;
}

Matrix SparseMatrix::to_dense() const {
    Matrix d(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t e = row_offsets[i]; e < row_offsets[i + 1]; ++e) {
            d(i, col_indices[e]) = values[e];
        }
    }
    return d;
}

SparseMatrix normalized_adjacency(const AttributedGraph& g) {
    const std::size_t n = g.num_nodes();
    std::vector<double> inv_sqrt(n);
    for (NodeId u = 0; u < n; ++u) inv_sqrt[u] = 1.0 / std::sqrt(double(g.degree(u)) + 1.0);

    SparseMatrix s;
    s.rows = s.cols = n;
    s.row_offsets.assign(n + 1, 0);
    for (NodeId u = 0; u < n; ++u) s.row_offsets[u + 1] = s.row_offsets[u] + g.degree(u) + 1;
    s.col_indices.reserve(s.row_offsets[n]);
    s.values.reserve(s.row_offsets[n]);
    for (NodeId u = 0; u < n; ++u) {
        bool self_emitted = false;
        for (NodeId v : g.neighbors(u)) {
            if (!self_emitted && v > u) {
                s.col_indices.push_back(u);
                s.values.push_back(inv_sqrt[u] * inv_sqrt[u]);
                self_emitted = true;
            }
            s.col_indices.push_back(v);
            s.values.push_back(inv_sqrt[u] * inv_sqrt[v]);
        }
        if (!self_emitted) {
            s.col_indices.push_back(u);
            s.values.push_back(inv_sqrt[u] * inv_sqrt[u]);
        }
    }
    return s;
}

Matrix dense_adjacency(const AttributedGraph& g) {
    if (g.num_nodes() > kDenseAdjacencyCap) {
        throw Error(ErrorCode::trial_failure,
                    "graph with " + std::to_string(g.num_nodes()) +
                        " nodes exceeds the dense adjacency cap of " +
                        std::to_string(kDenseAdjacencyCap));
    }
    Matrix a(g.num_nodes(), g.num_nodes());
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        for (NodeId v : g.neighbors(u)) a(u, v) = 1.0;
    }
    return a;
}

const char* to_string(OutlierKind k) {
    switch (k) {
        case OutlierKind::none: return "none";
        case OutlierKind::contextual: return "contextual";
        case OutlierKind::structural: return "structural";
        case OutlierKind::both: return "both";
    }
    return "none";
}

std::vector<int> OutlierLabels::binary() const {
    std::vector<int> b(kind.size());
    for (std::size_t i = 0; i < kind.size(); ++i) b[i] = kind[i] != OutlierKind::none;
    return b;
}

std::vector<int> OutlierLabels::binary_for(OutlierKind k) const {
    std::vector<int> b(kind.size());
    for (std::size_t i = 0; i < kind.size(); ++i) {
        b[i] = kind[i] == k || kind[i] == OutlierKind::both;
    }
    return b;
}

std::size_t OutlierLabels::num_outliers() const {
    std::size_t c = 0;
    for (auto k : kind) c += k != OutlierKind::none;
    return c;
}

std::size_t OutlierLabels::count(OutlierKind k) const {
    std::size_t c = 0;
    for (auto x : kind) c += x == k;
    return c;
}

void OutlierLabels::merge(const OutlierLabels& other) {
    if (kind.size() != other.kind.size()) {
        throw ValidationError("label vectors of different lengths cannot be merged");
    }
    for (std::size_t i = 0; i < kind.size(); ++i) {
        if (other.kind[i] == OutlierKind::none) continue;
        if (kind[i] == OutlierKind::none) kind[i] = other.kind[i];
        else if (kind[i] != other.kind[i]) kind[i] = OutlierKind::both;
    }
}

}  // namespace gode
