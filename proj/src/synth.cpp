#include "gode/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gode/error.hpp"
#include "gode/rng.hpp"

namespace gode {
namespace synth {

namespace {

// Emits successes of a Bernoulli(p) run over [begin, end) via geometric jumps.
template <typename F>
void bernoulli_run(Rng& rng, std::size_t begin, std::size_t end, double p, F&& emit) {
    if (p <= 0.0 || begin >= end) return;
    if (p >= 1.0) {
        for (std::size_t v = begin; v < end; ++v) emit(v);
        return;
    }
    const double log1mp = std::log1p(-p);
    std::size_t v = begin;
    while (true) {
        const double u = rng.uniform();
        const double jump = std::floor(std::log(u) / log1mp);
        if (jump >= double(end - v)) return;
        v += std::size_t(jump);
        emit(v);
        ++v;
        if (v >= end) return;
    }
}

void check_injection(const AttributedGraph& g, const InjectionParams& p,
                     bool structural) {
    if (p.n == 0) return;
    if (structural && p.m < 2) throw ValidationError("clique size m must be at least 2");
    if (p.m * p.n > g.num_nodes()) {
        throw ValidationError("injection needs m*n <= num_nodes (" +
                              std::to_string(p.m * p.n) + " > " +
                              std::to_string(g.num_nodes()) + ")");
    }
    if (!structural && p.m > g.num_nodes() - 1) {
        throw ValidationError("contextual pool size m exceeds num_nodes - 1");
    }
}

std::vector<ContextualChoice> contextual_choices(const AttributedGraph& g,
                                                 const InjectionParams& p,
                                                 const std::vector<std::size_t>* universe) {
    check_injection(g, p, /*structural=*/false);
    Rng rng(p.seed);
    const std::size_t n = g.num_nodes();
    const std::size_t total = p.m * p.n;

    std::vector<std::size_t> targets;
    if (universe) {
        if (total > universe->size()) {
            throw ValidationError("not enough nodes left for disjoint contextual sampling");
        }
        for (std::size_t idx : rng.sample_without_replacement(universe->size(), total)) {
            targets.push_back((*universe)[idx]);
        }
    } else {
        targets = rng.sample_without_replacement(n, total);
    }

    std::vector<ContextualChoice> out;
    out.reserve(total);
    for (std::size_t i : targets) {
        // Pool of m distinct nodes other than i: draw from [0, n-1) and skip i.
        auto pool = rng.sample_without_replacement(n - 1, p.m);
        std::size_t best = n;
        double best_d = -1.0;
        auto xi = g.feature_row(NodeId(i));
        for (std::size_t raw : pool) {
            const std::size_t j = raw >= i ? raw + 1 : raw;
            auto xj = g.feature_row(NodeId(j));
            double d = 0.0;
            for (std::size_t c = 0; c < xi.size(); ++c) {
                const double diff = xi[c] - xj[c];
                d += diff * diff;
            }
            if (d > best_d) {
                best_d = d;
                best = j;
            }
        }
        out.push_back({i, best, best_d});
    }
    return out;
}

InjectionResult apply_contextual(const AttributedGraph& g, const InjectionParams& p,
                                 const std::vector<std::size_t>* universe) {
    OutlierLabels labels;
    labels.kind.assign(g.num_nodes(), OutlierKind::none);
    if (p.n == 0) return {g, std::move(labels)};

    Matrix features = g.features();
    for (const auto& c : contextual_choices(g, p, universe)) {
        auto src = g.feature_row(NodeId(c.chosen));
        std::copy(src.begin(), src.end(), features.row(c.target).begin());
        labels.kind[c.target] = OutlierKind::contextual;
    }
    return {replace_features(g, std::move(features)), std::move(labels)};
}

InjectionResult apply_structural(const AttributedGraph& g, const InjectionParams& p) {
    OutlierLabels labels;
    labels.kind.assign(g.num_nodes(), OutlierKind::none);
    if (p.n == 0) return {g, std::move(labels)};
    check_injection(g, p, /*structural=*/true);

    Rng rng(p.seed);
    auto members = rng.sample_without_replacement(g.num_nodes(), p.m * p.n);
    auto edges = g.edge_list();
    for (std::size_t grp = 0; grp < p.n; ++grp) {
        for (std::size_t i = 0; i < p.m; ++i) {
            const NodeId u = NodeId(members[grp * p.m + i]);
            labels.kind[u] = OutlierKind::structural;
            for (std::size_t j = i + 1; j < p.m; ++j) {
                const NodeId v = NodeId(members[grp * p.m + j]);
                edges.emplace_back(u, v);
                if (g.directed()) edges.emplace_back(v, u);
            }
        }
    }
    Matrix features = g.features();
    return {build_graph(edges, std::move(features), g.directed()), std::move(labels)};
}

}  // namespace

AttributedGraph generate_partition_graph(const PartitionGraphConfig& cfg) {
    const std::size_t n = cfg.num_classes * cfg.nodes_per_class;
    if (n == 0) throw ValidationError("partition graph config yields zero nodes");
    if (cfg.homophily < 0.0 || cfg.homophily > 1.0) {
        throw ValidationError("homophily must lie in [0, 1]");
    }
    if (cfg.avg_degree <= 0.0) throw ValidationError("avg_degree must be positive");
    if (cfg.num_channels == 0) throw ValidationError("num_channels must be positive");

    Rng rng(cfg.seed);
    const double p_in = cfg.nodes_per_class > 1
                            ? std::min(1.0, cfg.avg_degree * cfg.homophily /
                                                double(cfg.nodes_per_class - 1))
                            : 0.0;
    const double p_out = cfg.num_classes > 1
                             ? std::min(1.0, cfg.avg_degree * (1.0 - cfg.homophily) /
                                                 double(n - cfg.nodes_per_class))
                             : 0.0;

    std::vector<Edge> edges;
    edges.reserve(std::size_t(cfg.avg_degree * double(n) / 2.0) + 16);
    for (std::size_t u = 0; u < n; ++u) {
        const std::size_t class_end = (u / cfg.nodes_per_class + 1) * cfg.nodes_per_class;
        bernoulli_run(rng, u + 1, class_end, p_in,
                      [&](std::size_t v) { edges.emplace_back(NodeId(u), NodeId(v)); });
        bernoulli_run(rng, class_end, n, p_out,
                      [&](std::size_t v) { edges.emplace_back(NodeId(u), NodeId(v)); });
    }

    Matrix means(cfg.num_classes, cfg.num_channels);
    for (auto& v : means.storage()) v = rng.normal();
    Matrix features(n, cfg.num_channels);
    for (std::size_t u = 0; u < n; ++u) {
        const std::size_t c = u / cfg.nodes_per_class;
        auto row = features.row(u);
        for (std::size_t j = 0; j < cfg.num_channels; ++j) row[j] = means(c, j) + rng.normal();
    }
    return build_graph(edges, std::move(features), /*directed=*/false);
}

InjectionResult inject_structural(const AttributedGraph& g, const InjectionParams& p) {
    return apply_structural(g, p);
}

InjectionResult inject_contextual(const AttributedGraph& g, const InjectionParams& p) {
    return apply_contextual(g, p, nullptr);
}

InjectionResult inject_combined(const AttributedGraph& g, const InjectionParams& structural,
                                const InjectionParams& contextual, bool allow_overlap) {
    InjectionResult s = apply_structural(g, structural);
    InjectionResult out;
    if (allow_overlap) {
        out = apply_contextual(s.graph, contextual, nullptr);
    } else {
        std::vector<std::size_t> universe;
        universe.reserve(g.num_nodes());
        for (std::size_t i = 0; i < g.num_nodes(); ++i) {
            if (s.labels.kind[i] == OutlierKind::none) universe.push_back(i);
        }
        out = apply_contextual(s.graph, contextual, &universe);
    }
    out.labels.merge(s.labels);
    return out;
}

std::vector<ContextualChoice> contextual_replay(const AttributedGraph& g,
                                                const InjectionParams& p) {
    return contextual_choices(g, p, nullptr);
}

}  // namespace synth
}  // namespace gode
