#include <algorithm>

#include "gode/detectors_deep.hpp"

namespace gode {
namespace deep {

namespace {

void intersect(std::span<const NodeId> a, std::span<const NodeId> b,
               std::vector<NodeId>& out) {
    out.clear();
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) { out.push_back(a[i]), ++i, ++j; }
        else if (a[i] < b[j]) ++i;
        else ++j;
    }
}

}  // namespace

Matrix motif_degree_matrix(const AttributedGraph& g0, std::span<const Motif> motifs) {
    const AttributedGraph g = symmetrized(g0);
    const std::size_t n = g.num_nodes();
    Matrix m(n, motifs.size());

    bool want_triangle = false, want_clique = false;
    for (Motif mo : motifs) {
        want_triangle |= mo == Motif::triangle;
        want_clique |= mo == Motif::four_clique;
    }

    std::vector<double> triangles(n, 0.0);
    std::vector<double> cliques(n, 0.0);
    if (want_triangle || want_clique) {
        std::vector<NodeId> common;
        for (NodeId u = 0; u < n; ++u) {
            for (NodeId v : g.neighbors(u)) {
                if (v <= u) continue;
                // Triangles through edge (u,v): common neighbors.
                intersect(g.neighbors(u), g.neighbors(v), common);
                for (NodeId w : common) {
                    if (w <= v) continue;  // each triangle once: u < v < w
                    triangles[u] += 1.0;
                    triangles[v] += 1.0;
                    triangles[w] += 1.0;
                    if (want_clique) {
                        // Extend to 4-cliques: common neighbors of all three
                        // beyond w keep each clique counted once.
                        auto nu = g.neighbors(u);
                        auto nv = g.neighbors(v);
                        auto nw = g.neighbors(w);
                        std::size_t a = 0, b = 0, c = 0;
                        while (a < nu.size() && b < nv.size() && c < nw.size()) {
                            const NodeId x = nu[a];
                            if (x == nv[b] && x == nw[c]) {
                                if (x > w) {
                                    cliques[u] += 1.0;
                                    cliques[v] += 1.0;
                                    cliques[w] += 1.0;
                                    cliques[x] += 1.0;
                                }
                                ++a, ++b, ++c;
                            } else {
                                const NodeId mx = std::max({nu[a], nv[b], nw[c]});
                                while (a < nu.size() && nu[a] < mx) ++a;
                                while (b < nv.size() && nv[b] < mx) ++b;
                                while (c < nw.size() && nw[c] < mx) ++c;
                            }
                        }
                    }
                }
            }
        }
    }

    for (NodeId u = 0; u < n; ++u) {
        const double deg = double(g.degree(u));
        for (std::size_t k = 0; k < motifs.size(); ++k) {
            switch (motifs[k]) {
                case Motif::degree: m(u, k) = deg; break;
                case Motif::wedge: m(u, k) = deg * (deg - 1.0) / 2.0; break;
                case Motif::triangle: m(u, k) = triangles[u]; break;
                case Motif::four_clique: m(u, k) = cliques[u]; break;
            }
        }
    }
    return m;
}

}  // namespace deep
}  // namespace gode
