#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "gode/error.hpp"
#include "gode/graph.hpp"
#include "gode/rng.hpp"

using namespace gode;

namespace {

AttributedGraph make(std::vector<Edge> edges, std::size_t n, std::size_t d = 1,
                     bool directed = false) {
    Matrix x(n, d);
    for (std::size_t i = 0; i < x.size(); ++i) x.storage()[i] = double(i);
    return build_graph(edges, std::move(x), directed);
}

AttributedGraph random_graph(Rng& rng, std::size_t n, double p) {
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
            if (rng.uniform() < p) edges.emplace_back(u, v);
        }
    }
    Matrix x(n, 3);
    for (auto& v : x.storage()) v = rng.normal();
    return build_graph(edges, std::move(x), false);
}

}  // namespace

TEST_CASE("undirected edge is mirrored") {
    auto g = make({{0, 1}}, 2);
    CHECK(g.degree(0) == 1);
    CHECK(g.degree(1) == 1);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(1, 0));
    CHECK(g.num_edges() == 1);
    CHECK(g.num_arcs() == 2);
}

TEST_CASE("self-loops and duplicates are dropped") {
    auto g = make({{0, 0}, {0, 1}, {0, 1}}, 2);
    CHECK(g.num_edges() == 1);
    CHECK_FALSE(g.has_edge(0, 0));
}

TEST_CASE("build_graph rejects bad input") {
    CHECK_THROWS_AS(make({{0, 5}}, 2), ValidationError);
    Matrix x(2, 2);
    x(1, 1) = std::nan("");
    std::vector<Edge> edges{{0, 1}};
    CHECK_THROWS_WITH_AS(build_graph(edges, std::move(x), false),
                         doctest::Contains("node 1"), ValidationError);
}

TEST_CASE("degrees on fixed shapes") {
    auto tri = make({{0, 1}, {1, 2}, {0, 2}}, 3);
    CHECK(degrees(tri) == std::vector<std::size_t>{2, 2, 2});

    auto star = make({{0, 1}, {0, 2}, {0, 3}, {0, 4}}, 5);
    auto d = degrees(star);
    CHECK(d[0] == 4);
    for (int i = 1; i < 5; ++i) CHECK(d[i] == 1);
}

TEST_CASE("normalized adjacency of an isolated node is identity") {
    auto g = make({}, 1);
    auto a = normalized_adjacency(g);
    REQUIRE(a.values.size() == 1);
    CHECK(a.values[0] == doctest::Approx(1.0));
}

TEST_CASE("normalized adjacency of a single edge is all 0.5") {
    auto g = make({{0, 1}}, 2);
    auto a = normalized_adjacency(g).to_dense();
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) CHECK(a(i, j) == doctest::Approx(0.5));
    }
}

TEST_CASE("normalized adjacency row sums are positive; exactly 1 on regular graphs") {
    // Note: row sums can exceed 1 on irregular graphs (a degree-4 star's
    // center row sums to 1/5 + 4/sqrt(10)), so only positivity is generic.
    Rng rng(7);
    for (int it = 0; it < 20; ++it) {
        auto g = random_graph(rng, 12, 0.3);
        auto a = normalized_adjacency(g).to_dense();
        for (std::size_t i = 0; i < g.num_nodes(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < g.num_nodes(); ++j) s += a(i, j);
            CHECK(s > 0.0);
        }
    }
    // k-regular graphs: every row sums to exactly (k+1) / (k+1) = 1.
    auto cyc = make({{0, 1}, {1, 2}, {2, 3}, {3, 0}}, 4);
    auto a = normalized_adjacency(cyc).to_dense();
    for (std::size_t i = 0; i < 4; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < 4; ++j) s += a(i, j);
        CHECK(s == doctest::Approx(1.0));
    }
    // complete graph on 5 nodes: 4-regular
    std::vector<Edge> k5;
    for (NodeId u = 0; u < 5; ++u) {
        for (NodeId v = u + 1; v < 5; ++v) k5.emplace_back(u, v);
    }
    auto complete = make(k5, 5);
    auto ak = normalized_adjacency(complete).to_dense();
    for (std::size_t i = 0; i < 5; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < 5; ++j) s += ak(i, j);
        CHECK(s == doctest::Approx(1.0));
    }
}

TEST_CASE("normalized adjacency matches the entrywise closed form") {
    Rng rng(21);
    for (int it = 0; it < 25; ++it) {
        auto g = random_graph(rng, 10, 0.35);
        auto a = normalized_adjacency(g).to_dense();
        auto d = degrees(g);
        for (NodeId u = 0; u < g.num_nodes(); ++u) {
            for (NodeId v = 0; v < g.num_nodes(); ++v) {
                double expected = 0.0;
                if (u == v) expected = 1.0 / double(d[u] + 1);
                else if (g.has_edge(u, v)) {
                    expected = 1.0 / std::sqrt(double(d[u] + 1) * double(d[v] + 1));
                }
                CHECK(a(u, v) == doctest::Approx(expected).epsilon(1e-12));
            }
        }
        // symmetry on undirected graphs
        for (NodeId u = 0; u < g.num_nodes(); ++u) {
            for (NodeId v = 0; v < g.num_nodes(); ++v) {
                CHECK(a(u, v) == doctest::Approx(a(v, u)));
            }
        }
    }
}

TEST_CASE("edge list round-trips through build_graph") {
    Rng rng(3);
    for (int it = 0; it < 20; ++it) {
        auto g = random_graph(rng, 15, 0.25);
        auto edges = g.edge_list();
        Matrix x = g.features();
        auto g2 = build_graph(edges, std::move(x), false);
        CHECK(g2.edge_list() == edges);
        CHECK(g2.row_offsets() == g.row_offsets());
        CHECK(g2.col_indices() == g.col_indices());
    }
}

TEST_CASE("directed storage keeps arcs one-way; symmetrized mirrors them") {
    auto g = make({{0, 1}, {2, 1}}, 3, 1, /*directed=*/true);
    CHECK(g.has_edge(0, 1));
    CHECK_FALSE(g.has_edge(1, 0));
    CHECK(g.num_edges() == 2);
    auto s = symmetrized(g);
    CHECK(s.has_edge(1, 0));
    CHECK(s.has_edge(1, 2));
    CHECK_FALSE(s.directed());
}

TEST_CASE("neighbor lists are strictly sorted and unique") {
    Rng rng(11);
    for (int it = 0; it < 10; ++it) {
        auto g = random_graph(rng, 20, 0.2);
        for (NodeId u = 0; u < g.num_nodes(); ++u) {
            auto nb = g.neighbors(u);
            for (std::size_t i = 1; i < nb.size(); ++i) CHECK(nb[i - 1] < nb[i]);
            CHECK(std::find(nb.begin(), nb.end(), u) == nb.end());
        }
    }
}

TEST_CASE("labels merge and count") {
    OutlierLabels a;
    a.kind = {OutlierKind::none, OutlierKind::structural, OutlierKind::none};
    OutlierLabels b;
    b.kind = {OutlierKind::contextual, OutlierKind::contextual, OutlierKind::none};
    a.merge(b);
    CHECK(a.kind[0] == OutlierKind::contextual);
    CHECK(a.kind[1] == OutlierKind::both);
    CHECK(a.num_outliers() == 2);
    CHECK(a.binary() == std::vector<int>{1, 1, 0});
    CHECK(a.binary_for(OutlierKind::structural) == std::vector<int>{0, 1, 0});
    CHECK(a.binary_for(OutlierKind::contextual) == std::vector<int>{1, 1, 0});
}

TEST_CASE("dense adjacency refuses oversized graphs") {
    Matrix x(kDenseAdjacencyCap + 1, 0);
    auto g = build_graph({}, std::move(x), false);
    CHECK_THROWS_AS(dense_adjacency(g), Error);
}
