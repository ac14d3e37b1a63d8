#include "gode/bundle.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "gode/error.hpp"
#include "gode/rng.hpp"
#include "gode/synth.hpp"

namespace gode {
namespace bundle {

namespace {

using nlohmann::json;

// Caps keep fuzzed metadata from requesting absurd allocations.
constexpr std::size_t kMaxNodes = 10'000'000;
constexpr std::size_t kMaxCells = 200'000'000;

std::string fmt_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

double parse_double(std::string_view s, const std::string& where) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw ValidationError(where + ": malformed number '" + std::string(s) + "'");
    }
    if (!std::isfinite(v)) {
        throw ValidationError(where + ": non-finite value '" + std::string(s) + "'");
    }
    return v;
}

std::size_t parse_index(std::string_view s, const std::string& where) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw ValidationError(where + ": malformed index '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::string> read_lines(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t end = line.find(sep, pos);
        if (end == std::string_view::npos) {
            out.push_back(line.substr(pos));
            return out;
        }
        out.push_back(line.substr(pos, end - pos));
        pos = end + 1;
    }
}

}  // namespace

void save_bundle(const std::filesystem::path& dir, const AttributedGraph& graph,
                 const OutlierLabels* labels, const std::string& provenance_json) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    const auto edges = graph.edge_list();

    json meta;
    meta["num_nodes"] = graph.num_nodes();
    meta["num_features"] = graph.num_features();
    meta["num_edges"] = edges.size();
    meta["directed"] = graph.directed();
    meta["labeled"] = labels != nullptr && !labels->empty();
    if (labels && !labels->empty()) meta["num_outliers"] = labels->num_outliers();
    meta["provenance"] =
        provenance_json.empty() ? json::object() : json::parse(provenance_json);

    {
        std::ofstream out(dir / "meta.json");
        if (!out) throw IoError("cannot write " + (dir / "meta.json").string());
        out << meta.dump(2) << "\n";
    }
    {
        std::ofstream out(dir / "edges.csv");
        if (!out) throw IoError("cannot write " + (dir / "edges.csv").string());
        for (const auto& [u, v] : edges) out << u << "," << v << "\n";
    }
    {
        std::ofstream out(dir / "features.csv");
        if (!out) throw IoError("cannot write " + (dir / "features.csv").string());
        const Matrix& x = graph.features();
        for (std::size_t i = 0; i < x.rows(); ++i) {
            for (std::size_t j = 0; j < x.cols(); ++j) {
                if (j) out << ",";
                out << fmt_double(x(i, j));
            }
            out << "\n";
        }
    }
    if (labels && !labels->empty()) {
        std::ofstream out(dir / "labels.csv");
        if (!out) throw IoError("cannot write " + (dir / "labels.csv").string());
        for (std::size_t i = 0; i < labels->size(); ++i) {
            if (labels->kind[i] != OutlierKind::none) {
                out << i << "," << to_string(labels->kind[i]) << "\n";
            }
        }
    } else {
        std::filesystem::remove(dir / "labels.csv", ec);
    }
}

Bundle load_bundle(const std::filesystem::path& dir) {
    try {
        const auto meta_path = dir / "meta.json";
        std::ifstream meta_in(meta_path);
        if (!meta_in) throw IoError("cannot open " + meta_path.string());
        json meta;
        try {
            meta = json::parse(meta_in);
        } catch (const json::exception& e) {
            throw ValidationError(meta_path.string() + ": " + e.what());
        }
        if (!meta.is_object() || !meta.contains("num_nodes") ||
            !meta.contains("num_features") || !meta.contains("directed")) {
            throw ValidationError(meta_path.string() +
                                  ": missing num_nodes/num_features/directed");
        }
        if (!meta["num_nodes"].is_number_unsigned() ||
            !meta["num_features"].is_number_unsigned() || !meta["directed"].is_boolean()) {
            throw ValidationError(meta_path.string() + ": malformed field types");
        }
        const std::size_t n = meta["num_nodes"].get<std::size_t>();
        const std::size_t d = meta["num_features"].get<std::size_t>();
        const bool directed = meta["directed"].get<bool>();
        if (n > kMaxNodes || (d != 0 && n > kMaxCells / std::max<std::size_t>(d, 1))) {
            throw ValidationError(meta_path.string() + ": implausible graph size");
        }

        // features.csv
        const auto feat_path = dir / "features.csv";
        auto feat_lines = read_lines(feat_path);
        while (!feat_lines.empty() && feat_lines.back().empty()) feat_lines.pop_back();
        if (feat_lines.size() != n) {
            throw ValidationError(feat_path.string() + ": expected " + std::to_string(n) +
                                  " rows, found " + std::to_string(feat_lines.size()));
        }
        Matrix features(n, d);
        for (std::size_t i = 0; i < n; ++i) {
            const auto fields = split(feat_lines[i], ',');
            if (fields.size() != d) {
                throw ValidationError(feat_path.string() + ":" + std::to_string(i + 1) +
                                      ": expected " + std::to_string(d) +
                                      " fields, found " + std::to_string(fields.size()));
            }
            for (std::size_t j = 0; j < d; ++j) {
                features(i, j) = parse_double(
                    fields[j], feat_path.string() + ":" + std::to_string(i + 1));
            }
        }

        // edges.csv
        const auto edge_path = dir / "edges.csv";
        auto edge_lines = read_lines(edge_path);
        while (!edge_lines.empty() && edge_lines.back().empty()) edge_lines.pop_back();
        if (meta.contains("num_edges")) {
            if (!meta["num_edges"].is_number_unsigned() ||
                meta["num_edges"].get<std::size_t>() != edge_lines.size()) {
                throw ValidationError(meta_path.string() + ": num_edges does not match " +
                                      edge_path.string());
            }
        }
        std::vector<Edge> edges;
        edges.reserve(edge_lines.size());
        std::set<Edge> seen;
        for (std::size_t i = 0; i < edge_lines.size(); ++i) {
            const std::string where = edge_path.string() + ":" + std::to_string(i + 1);
            const auto fields = split(edge_lines[i], ',');
            if (fields.size() != 2) throw ValidationError(where + ": expected 'u,v'");
            const std::size_t u = parse_index(fields[0], where);
            const std::size_t v = parse_index(fields[1], where);
            if (u >= n || v >= n) throw ValidationError(where + ": node index out of range");
            if (u == v) throw ValidationError(where + ": self-loop");
            const Edge key = directed ? Edge{NodeId(u), NodeId(v)}
                                      : Edge{NodeId(std::min(u, v)), NodeId(std::max(u, v))};
            if (!seen.insert(key).second) {
                throw ValidationError(where + ": duplicate edge");
            }
            edges.emplace_back(NodeId(u), NodeId(v));
        }

        Bundle b;
        b.graph = build_graph(edges, std::move(features), directed);

        // labels.csv
        const bool labeled = meta.value("labeled", false);
        const auto label_path = dir / "labels.csv";
        if (labeled) {
            OutlierLabels labels;
            labels.kind.assign(n, OutlierKind::none);
            auto label_lines = read_lines(label_path);
            while (!label_lines.empty() && label_lines.back().empty()) label_lines.pop_back();
            for (std::size_t i = 0; i < label_lines.size(); ++i) {
                const std::string where = label_path.string() + ":" + std::to_string(i + 1);
                const auto fields = split(label_lines[i], ',');
                if (fields.size() != 2) {
                    throw ValidationError(where + ": expected 'node_id,kind'");
                }
                const std::size_t id = parse_index(fields[0], where);
                if (id >= n) throw ValidationError(where + ": node index out of range");
                if (labels.kind[id] != OutlierKind::none) {
                    throw ValidationError(where + ": duplicate label for node " +
                                          std::to_string(id));
                }
                const std::string_view kind = fields[1];
                if (kind == "contextual") labels.kind[id] = OutlierKind::contextual;
                else if (kind == "structural") labels.kind[id] = OutlierKind::structural;
                else if (kind == "both") labels.kind[id] = OutlierKind::both;
                else throw ValidationError(where + ": unknown kind '" + std::string(kind) + "'");
            }
            if (meta.contains("num_outliers") &&
                (!meta["num_outliers"].is_number_unsigned() ||
                 meta["num_outliers"].get<std::size_t>() != labels.num_outliers())) {
                throw ValidationError(meta_path.string() + ": num_outliers does not match " +
                                      label_path.string());
            }
            b.labels = std::move(labels);
        } else if (std::filesystem::exists(label_path)) {
            throw ValidationError(meta_path.string() +
                                  ": labeled=false but labels.csv present");
        }

        b.provenance_json = meta.value("provenance", json::object()).dump();
        return b;
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw ValidationError("bundle " + dir.string() + ": " + e.what());
    }
}

Bundle regenerate(const std::string& provenance_json) {
    json prov;
    try {
        prov = json::parse(provenance_json);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("provenance: ") + e.what());
    }
    if (!prov.contains("generator")) {
        throw ValidationError("provenance has no generator block");
    }
    const json& gen = prov["generator"];
    if (gen.value("type", "") != "partition") {
        throw ValidationError("unknown generator type in provenance");
    }
    synth::PartitionGraphConfig cfg;
    cfg.num_classes = gen.value("num_classes", cfg.num_classes);
    cfg.nodes_per_class = gen.value("nodes_per_class", cfg.nodes_per_class);
    cfg.homophily = gen.value("homophily", cfg.homophily);
    cfg.avg_degree = gen.value("avg_degree", cfg.avg_degree);
    cfg.num_channels = gen.value("num_channels", cfg.num_channels);
    cfg.seed = gen.value("seed", cfg.seed);

    Bundle b;
    b.graph = synth::generate_partition_graph(cfg);
    b.provenance_json = provenance_json;
    if (!prov.contains("injections")) return b;

    OutlierLabels labels;
    labels.kind.assign(b.graph.num_nodes(), OutlierKind::none);
    for (const json& inj : prov["injections"]) {
        const std::string type = inj.value("type", "");
        synth::InjectionParams ip;
        ip.m = inj.value("m", ip.m);
        ip.n = inj.value("n", ip.n);
        ip.seed = inj.value("seed", ip.seed);
        synth::InjectionResult r;
        if (type == "structural") {
            r = synth::inject_structural(b.graph, ip);
        } else if (type == "contextual") {
            r = synth::inject_contextual(b.graph, ip);
        } else if (type == "both") {
            synth::InjectionParams sp = ip, cp = ip;
            sp.seed = hash_combine(ip.seed, "structural");
            cp.seed = hash_combine(ip.seed, "contextual");
            r = synth::inject_combined(b.graph, sp, cp, inj.value("allow_overlap", false));
        } else {
            throw ValidationError("unknown injection type in provenance: " + type);
        }
        b.graph = std::move(r.graph);
        labels.merge(r.labels);
    }
    b.labels = std::move(labels);
    return b;
}

}  // namespace bundle
}  // namespace gode
