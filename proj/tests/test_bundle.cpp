#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gode/bundle.hpp"
#include "gode/error.hpp"
#include "gode/rng.hpp"
#include "gode/synth.hpp"

using namespace gode;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("gode_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

void patch_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

synth::InjectionResult labeled_graph(std::uint64_t seed) {
    synth::PartitionGraphConfig cfg;
    cfg.nodes_per_class = 50;
    cfg.num_channels = 8;
    cfg.seed = seed;
    auto g = synth::generate_partition_graph(cfg);
    return synth::inject_combined(g, {5, 2, seed + 1}, {5, 2, seed + 2}, false);
}

}  // namespace

TEST_CASE("save/load round-trips graph, labels and provenance") {
    auto dir = temp_dir("roundtrip");
    auto r = labeled_graph(3);
    const std::string prov = R"({"generator":{"type":"partition","seed":3}})";
    bundle::save_bundle(dir, r.graph, &r.labels, prov);

    auto b = bundle::load_bundle(dir);
    CHECK(b.graph.num_nodes() == r.graph.num_nodes());
    CHECK(b.graph.row_offsets() == r.graph.row_offsets());
    CHECK(b.graph.col_indices() == r.graph.col_indices());
    CHECK(b.graph.features().storage() == r.graph.features().storage());
    REQUIRE(b.labels.has_value());
    CHECK(b.labels->binary() == r.labels.binary());
    CHECK(b.labels->count(OutlierKind::structural) ==
          r.labels.count(OutlierKind::structural));

    // a second save of the loaded bundle is byte-identical
    auto dir2 = temp_dir("roundtrip2");
    bundle::save_bundle(dir2, b.graph, &*b.labels, prov);
    CHECK(slurp(dir / "edges.csv") == slurp(dir2 / "edges.csv"));
    CHECK(slurp(dir / "features.csv") == slurp(dir2 / "features.csv"));
    CHECK(slurp(dir / "labels.csv") == slurp(dir2 / "labels.csv"));
}

TEST_CASE("directed bundles round-trip with one line per arc") {
    auto dir = temp_dir("directed");
    Matrix x(4, 2);
    for (std::size_t i = 0; i < x.size(); ++i) x.storage()[i] = 0.5 * double(i);
    std::vector<Edge> arcs{{0, 1}, {1, 0}, {2, 3}};
    auto g = build_graph(arcs, std::move(x), /*directed=*/true);
    bundle::save_bundle(dir, g, nullptr, "{}");
    auto b = bundle::load_bundle(dir);
    CHECK(b.graph.directed());
    CHECK(b.graph.num_edges() == 3);
    CHECK(b.graph.has_edge(0, 1));
    CHECK(b.graph.has_edge(1, 0));
    CHECK(b.graph.has_edge(2, 3));
    CHECK_FALSE(b.graph.has_edge(3, 2));
}

TEST_CASE("unlabeled bundles have no labels.csv") {
    auto dir = temp_dir("unlabeled");
    auto r = labeled_graph(4);
    bundle::save_bundle(dir, r.graph, nullptr, "{}");
    CHECK_FALSE(fs::exists(dir / "labels.csv"));
    auto b = bundle::load_bundle(dir);
    CHECK_FALSE(b.labels.has_value());
}

TEST_CASE("regenerating from provenance reproduces edges.csv byte for byte") {
    auto dir = temp_dir("regen");
    synth::PartitionGraphConfig cfg;
    cfg.seed = 11;
    auto g = synth::generate_partition_graph(cfg);
    auto inj = synth::inject_combined(g, {10, 10, hash_combine(99, "structural")},
                                      {10, 10, hash_combine(99, "contextual")}, false);
    const std::string prov = R"({
      "generator": {"type":"partition","num_classes":2,"nodes_per_class":500,
                    "homophily":0.5,"avg_degree":5.0,"num_channels":64,"seed":11},
      "injections": [{"type":"both","m":10,"n":10,"seed":99,"allow_overlap":false}]
    })";
    bundle::save_bundle(dir, inj.graph, &inj.labels, prov);

    auto reg = bundle::regenerate(prov);
    auto dir2 = temp_dir("regen2");
    REQUIRE(reg.labels.has_value());
    bundle::save_bundle(dir2, reg.graph, &*reg.labels, prov);
    CHECK(slurp(dir / "edges.csv") == slurp(dir2 / "edges.csv"));
    CHECK(slurp(dir / "features.csv") == slurp(dir2 / "features.csv"));
    CHECK(slurp(dir / "labels.csv") == slurp(dir2 / "labels.csv"));
}

TEST_CASE("loader rejects malformed bundles with file+line diagnostics") {
    auto r = labeled_graph(5);

    SUBCASE("truncated features") {
        auto dir = temp_dir("trunc");
        bundle::save_bundle(dir, r.graph, &r.labels, "{}");
        auto lines = slurp(dir / "features.csv");
        patch_file(dir / "features.csv", lines.substr(0, lines.size() / 2));
        CHECK_THROWS_WITH_AS(bundle::load_bundle(dir),
                             doctest::Contains("features.csv"), ValidationError);
    }
    SUBCASE("mirrored duplicate edge") {
        auto dir = temp_dir("dupedge");
        bundle::save_bundle(dir, r.graph, &r.labels, "{}");
        // append the reverse of the first edge; adjust the meta count to match
        auto edges = slurp(dir / "edges.csv");
        const auto nl = edges.find('\n');
        const auto comma = edges.find(',');
        const std::string u = edges.substr(0, comma);
        const std::string v = edges.substr(comma + 1, nl - comma - 1);
        patch_file(dir / "edges.csv", edges + v + "," + u + "\n");
        auto meta = slurp(dir / "meta.json");
        const std::string needle = "\"num_edges\": " + std::to_string(r.graph.num_edges());
        meta.replace(meta.find(needle), needle.size(),
                     "\"num_edges\": " + std::to_string(r.graph.num_edges() + 1));
        patch_file(dir / "meta.json", meta);
        CHECK_THROWS_WITH_AS(bundle::load_bundle(dir), doctest::Contains("duplicate"),
                             ValidationError);
    }
    SUBCASE("unknown label kind") {
        auto dir = temp_dir("badkind");
        bundle::save_bundle(dir, r.graph, &r.labels, "{}");
        auto labels = slurp(dir / "labels.csv");
        const auto comma = labels.find(',');
        const auto nl = labels.find('\n');
        labels.replace(comma + 1, nl - comma - 1, "weird");
        patch_file(dir / "labels.csv", labels);
        CHECK_THROWS_WITH_AS(bundle::load_bundle(dir), doctest::Contains("unknown kind"),
                             ValidationError);
    }
    SUBCASE("non-finite feature value") {
        auto dir = temp_dir("nonfinite");
        bundle::save_bundle(dir, r.graph, &r.labels, "{}");
        auto feats = slurp(dir / "features.csv");
        const auto comma = feats.find(',');
        feats.replace(0, comma, "nan");
        patch_file(dir / "features.csv", feats);
        CHECK_THROWS_AS(bundle::load_bundle(dir), ValidationError);
    }
    SUBCASE("edge count mismatch in meta") {
        auto dir = temp_dir("count");
        bundle::save_bundle(dir, r.graph, &r.labels, "{}");
        auto meta = slurp(dir / "meta.json");
        const std::string needle = "\"num_edges\": " + std::to_string(r.graph.num_edges());
        meta.replace(meta.find(needle), needle.size(), "\"num_edges\": 1");
        patch_file(dir / "meta.json", meta);
        CHECK_THROWS_WITH_AS(bundle::load_bundle(dir), doctest::Contains("num_edges"),
                             ValidationError);
    }
    SUBCASE("missing directory") {
        CHECK_THROWS_AS(bundle::load_bundle("/nonexistent/gode_bundle"), Error);
    }
}

TEST_CASE("fuzzing malformed bundles never crashes") {
    auto dir = temp_dir("fuzz_src");
    auto r = labeled_graph(6);
    bundle::save_bundle(dir, r.graph, &r.labels, "{}");
    const std::array<fs::path, 4> files = {dir / "meta.json", dir / "edges.csv",
                                           dir / "features.csv", dir / "labels.csv"};
    std::array<std::string, 4> originals;
    for (std::size_t i = 0; i < files.size(); ++i) originals[i] = slurp(files[i]);

    Rng rng(1234);
    std::size_t load_failures = 0;
    for (int it = 0; it < 1000; ++it) {
        const std::size_t which = rng.index(files.size());
        std::string mutated = originals[which];
        switch (rng.index(5)) {
            case 0:  // truncate
                mutated.resize(rng.index(mutated.size() + 1));
                break;
            case 1: {  // flip bytes
                for (int k = 0; k < 5 && !mutated.empty(); ++k) {
                    mutated[rng.index(mutated.size())] = char(rng.index(256));
                }
                break;
            }
            case 2:  // duplicate content
                mutated += mutated.substr(0, rng.index(mutated.size() + 1));
                break;
            case 3:  // inject junk line
                mutated.insert(rng.index(mutated.size() + 1), "\n???,###\n");
                break;
            case 4:  // huge counts in meta
                if (which == 0) {
                    mutated = R"({"num_nodes": 99999999999999, "num_features": 9999999,)"
                              R"( "directed": false})";
                }
                break;
        }
        patch_file(files[which], mutated);
        try {
            auto b = bundle::load_bundle(dir);
            (void)b;
        } catch (const Error&) {
            ++load_failures;
        }
        patch_file(files[which], originals[which]);
    }
    // most mutations must be caught as validation errors, and none may crash
    CHECK(load_failures > 500);
    auto intact = bundle::load_bundle(dir);
    CHECK(intact.graph.num_nodes() == r.graph.num_nodes());
}
