#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "gode/error.hpp"
#include "gode/rng.hpp"
#include "gode/synth.hpp"

using namespace gode;
using namespace gode::synth;

TEST_CASE("partition graph has the configured shape") {
    PartitionGraphConfig cfg;
    cfg.seed = 42;
    auto g = generate_partition_graph(cfg);
    CHECK(g.num_nodes() == 1000);
    CHECK(g.num_features() == 64);
    CHECK_FALSE(g.directed());
}

TEST_CASE("homophily one yields zero inter-class edges") {
    PartitionGraphConfig cfg;
    cfg.nodes_per_class = 50;
    cfg.homophily = 1.0;
    cfg.avg_degree = 6.0;
    cfg.seed = 3;
    auto g = generate_partition_graph(cfg);
    for (const auto& [u, v] : g.edge_list()) {
        CHECK(u / 50 == v / 50);
    }
}

TEST_CASE("empirical mean degree tracks avg_degree over seeds") {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        PartitionGraphConfig cfg;
        cfg.seed = seed;
        auto g = generate_partition_graph(cfg);
        total += 2.0 * double(g.num_edges()) / double(g.num_nodes());
    }
    const double mean_degree = total / 10.0;
    CHECK(mean_degree > 4.5);
    CHECK(mean_degree < 5.5);
}

TEST_CASE("generation is deterministic in the seed") {
    PartitionGraphConfig cfg;
    cfg.nodes_per_class = 100;
    cfg.seed = 17;
    auto a = generate_partition_graph(cfg);
    auto b = generate_partition_graph(cfg);
    CHECK(a.col_indices() == b.col_indices());
    CHECK(a.features().storage() == b.features().storage());
}

TEST_CASE("degenerate config is rejected") {
    PartitionGraphConfig cfg;
    cfg.num_classes = 0;
    CHECK_THROWS_AS(generate_partition_graph(cfg), ValidationError);
}

namespace {

AttributedGraph small_partition(std::uint64_t seed, std::size_t npc = 100) {
    PartitionGraphConfig cfg;
    cfg.nodes_per_class = npc;
    cfg.num_channels = 8;
    cfg.seed = seed;
    return generate_partition_graph(cfg);
}

}  // namespace

TEST_CASE("structural injection builds labeled cliques and never removes edges") {
    auto g = small_partition(1);
    InjectionParams p{10, 3, 77};
    auto r = inject_structural(g, p);

    CHECK(r.labels.count(OutlierKind::structural) == 30);
    CHECK(r.labels.num_outliers() == 30);
    CHECK(r.graph.features().storage() == g.features().storage());

    // existing edges kept
    for (const auto& [u, v] : g.edge_list()) CHECK(r.graph.has_edge(u, v));

    // every labeled node's degree is at least m-1, clique pairs all present
    std::vector<NodeId> members;
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        if (r.labels.kind[u] == OutlierKind::structural) {
            members.push_back(u);
            CHECK(r.graph.degree(u) >= 9);
        }
    }
    CHECK(members.size() == 30);
}

TEST_CASE("structural groups form full cliques with m(m-1)/2 internal edges") {
    auto g = small_partition(2);
    InjectionParams p{6, 4, 5};
    auto r = inject_structural(g, p);
    // Recover groups by replaying the sampler.
    Rng rng(p.seed);
    auto members = rng.sample_without_replacement(g.num_nodes(), p.m * p.n);
    for (std::size_t grp = 0; grp < p.n; ++grp) {
        std::size_t internal = 0;
        for (std::size_t i = 0; i < p.m; ++i) {
            for (std::size_t j = i + 1; j < p.m; ++j) {
                if (r.graph.has_edge(NodeId(members[grp * p.m + i]),
                                     NodeId(members[grp * p.m + j]))) {
                    ++internal;
                }
            }
        }
        CHECK(internal == p.m * (p.m - 1) / 2);
    }
}

TEST_CASE("minimal clique on an edgeless pair") {
    Matrix x(2, 2, 0.5);
    auto g = build_graph({}, std::move(x), false);
    auto r = inject_structural(g, {2, 1, 9});
    CHECK(r.graph.num_edges() == 1);
    CHECK(r.labels.num_outliers() == 2);
}

TEST_CASE("structural injection rejects insufficient nodes") {
    auto g = small_partition(3, 10);  // 20 nodes
    CHECK_THROWS_AS(inject_structural(g, {10, 3, 1}), ValidationError);
    CHECK_THROWS_AS(inject_structural(g, {1, 1, 1}), ValidationError);
}

TEST_CASE("contextual injection swaps to the most distant pool candidate") {
    auto g = small_partition(4);
    InjectionParams p{10, 5, 31};
    auto r = inject_contextual(g, p);

    CHECK(r.labels.count(OutlierKind::contextual) == 50);
    CHECK(r.graph.col_indices() == g.col_indices());  // structure untouched

    // replay oracle: every recorded swap matches the argmax over its pool
    auto choices = contextual_replay(g, p);
    CHECK(choices.size() == 50);
    for (const auto& c : choices) {
        CHECK(r.labels.kind[c.target] == OutlierKind::contextual);
        auto expected = g.feature_row(NodeId(c.chosen));
        auto actual = r.graph.feature_row(NodeId(c.target));
        for (std::size_t k = 0; k < expected.size(); ++k) {
            CHECK(actual[k] == expected[k]);
        }
        // the swap distance is the max over m candidates, so at least the
        // distance to the chosen one replayed independently
        double d = 0.0;
        auto xi = g.feature_row(NodeId(c.target));
        auto xj = g.feature_row(NodeId(c.chosen));
        for (std::size_t k = 0; k < xi.size(); ++k) {
            d += (xi[k] - xj[k]) * (xi[k] - xj[k]);
        }
        CHECK(d == doctest::Approx(c.sq_distance));
    }
}

TEST_CASE("contextual injection on identical features keeps values") {
    Matrix x(20, 4, 1.25);
    auto g = build_graph({}, std::move(x), false);
    auto r = inject_contextual(g, {5, 2, 3});
    CHECK(r.labels.num_outliers() == 10);
    for (double v : r.graph.features().storage()) CHECK(v == 1.25);
}

TEST_CASE("combined injection with disjoint sampling has exact counts") {
    auto g = small_partition(5, 500);
    InjectionParams s{10, 10, 100};
    InjectionParams c{10, 10, 200};
    auto r = inject_combined(g, s, c, /*allow_overlap=*/false);
    CHECK(r.labels.count(OutlierKind::structural) == 100);
    CHECK(r.labels.count(OutlierKind::contextual) == 100);
    CHECK(r.labels.count(OutlierKind::both) == 0);
    CHECK(r.labels.num_outliers() == 200);
}

TEST_CASE("combined injection with overlap stays within bounds") {
    auto g = small_partition(6, 50);  // 100 nodes
    InjectionParams s{10, 1, 1};
    InjectionParams c{10, 1, 2};
    auto r = inject_combined(g, s, c, /*allow_overlap=*/true);
    const auto total = r.labels.num_outliers();
    CHECK(total >= 10);
    CHECK(total <= 20);
    CHECK(r.labels.count(OutlierKind::structural) + r.labels.count(OutlierKind::both) ==
          10);
    CHECK(r.labels.count(OutlierKind::contextual) + r.labels.count(OutlierKind::both) ==
          10);
}

TEST_CASE("n = 0 for one type matches single-type injection") {
    auto g = small_partition(7);
    InjectionParams s{10, 2, 11};
    InjectionParams none{10, 0, 12};
    auto combined = inject_combined(g, s, none, false);
    auto single = inject_structural(g, s);
    CHECK(combined.graph.col_indices() == single.graph.col_indices());
    CHECK(combined.labels.binary() == single.labels.binary());
}

TEST_CASE("injection is deterministic given the seed") {
    auto g = small_partition(8);
    InjectionParams p{10, 4, 123};
    auto a = inject_structural(g, p);
    auto b = inject_structural(g, p);
    CHECK(a.graph.col_indices() == b.graph.col_indices());
    auto ac = inject_contextual(g, p);
    auto bc = inject_contextual(g, p);
    CHECK(ac.graph.features().storage() == bc.graph.features().storage());
}
