#include "gode.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gode/bench.hpp"
#include "gode/bundle.hpp"
#include "gode/detectors.hpp"
#include "gode/error.hpp"
#include "gode/metrics.hpp"
#include "gode/report.hpp"
#include "gode/rng.hpp"
#include "gode/synth.hpp"

using nlohmann::json;

struct gode_graph {
    gode::AttributedGraph graph;
    std::optional<gode::OutlierLabels> labels;
    std::string provenance_json = "{}";
};

struct gode_scores {
    gode::ScoreVector values;
};

namespace {

thread_local std::string t_last_error = "";

gode_status set_error(const std::exception& e) {
    t_last_error = e.what();
    if (const auto* err = dynamic_cast<const gode::Error*>(&e)) {
        switch (err->code()) {
            case gode::ErrorCode::validation: return GODE_ERR_VALIDATION;
            case gode::ErrorCode::trial_failure: return GODE_ERR_TRIALS;
            case gode::ErrorCode::io: return GODE_ERR_IO;
            case gode::ErrorCode::internal: return GODE_ERR_INTERNAL;
        }
    }
    return GODE_ERR_INTERNAL;
}

gode_status invalid_argument(const char* what) {
    t_last_error = what;
    return GODE_ERR_VALIDATION;
}

template <typename F>
gode_status guarded(F&& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        return set_error(e);
    } catch (...) {
        t_last_error = "unknown error";
        return GODE_ERR_INTERNAL;
    }
}

std::vector<std::size_t> parse_size_list(const std::string& csv) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        std::size_t end = csv.find(',', pos);
        if (end == std::string::npos) end = csv.size();
        const std::string item = csv.substr(pos, end - pos);
        pos = end + 1;
        if (item.empty()) continue;
        std::size_t v = 0;
        try {
            v = std::stoull(item);
        } catch (...) {
            throw gode::ValidationError("malformed count '" + item + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) throw gode::ValidationError("empty size list");
    return out;
}

}  // namespace

extern "C" {

const char* gode_version(void) { return "0.1.0"; }

const char* gode_last_error(void) { return t_last_error.c_str(); }

const char* gode_detector_names(void) {
    static const std::string names = [] {
        std::string s;
        for (const auto& n : gode::detector_names()) {
            if (!s.empty()) s += ",";
            s += n;
        }
        return s;
    }();
    return names.c_str();
}

void gode_graph_free(gode_graph* g) { delete g; }
void gode_scores_free(gode_scores* s) { delete s; }

gode_status gode_generate(const gode_gen_config* cfg, gode_graph** out) {
    if (!cfg || !out) return invalid_argument("null argument");
    return guarded([&] {
        gode::synth::PartitionGraphConfig c;
        c.num_classes = cfg->num_classes;
        c.nodes_per_class = cfg->nodes_per_class;
        c.homophily = cfg->homophily;
        c.avg_degree = cfg->avg_degree;
        c.num_channels = cfg->num_channels;
        c.seed = cfg->seed;
        auto g = std::make_unique<gode_graph>();
        g->graph = gode::synth::generate_partition_graph(c);
        json prov;
        prov["generator"] = {{"type", "partition"},
                             {"num_classes", c.num_classes},
                             {"nodes_per_class", c.nodes_per_class},
                             {"homophily", c.homophily},
                             {"avg_degree", c.avg_degree},
                             {"num_channels", c.num_channels},
                             {"seed", c.seed}};
        prov["injections"] = json::array();
        g->provenance_json = prov.dump();
        *out = g.release();
        return GODE_OK;
    });
}

gode_status gode_inject(const gode_graph* g, const char* type, size_t m, size_t n,
                        uint64_t seed, int allow_overlap, gode_graph** out) {
    if (!g || !type || !out) return invalid_argument("null argument");
    return guarded([&] {
        const std::string kind = type;
        gode::synth::InjectionParams ip{m, n, seed};
        gode::synth::InjectionResult r;
        if (kind == "structural") {
            r = gode::synth::inject_structural(g->graph, ip);
        } else if (kind == "contextual") {
            r = gode::synth::inject_contextual(g->graph, ip);
        } else if (kind == "both") {
            gode::synth::InjectionParams sp = ip, cp = ip;
            sp.seed = gode::hash_combine(seed, "structural");
            cp.seed = gode::hash_combine(seed, "contextual");
            r = gode::synth::inject_combined(g->graph, sp, cp, allow_overlap != 0);
        } else {
            throw gode::ValidationError("injection type must be structural, contextual or both");
        }
        auto ng = std::make_unique<gode_graph>();
        ng->graph = std::move(r.graph);
        if (g->labels) {
            r.labels.merge(*g->labels);
        }
        ng->labels = std::move(r.labels);

        json prov = json::parse(g->provenance_json.empty() ? "{}" : g->provenance_json);
        if (!prov.contains("injections")) prov["injections"] = json::array();
        json entry = {{"type", kind}, {"m", m}, {"n", n}, {"seed", seed}};
        if (kind == "both") entry["allow_overlap"] = allow_overlap != 0;
        prov["injections"].push_back(entry);
        ng->provenance_json = prov.dump();
        *out = ng.release();
        return GODE_OK;
    });
}

gode_status gode_bundle_save(const gode_graph* g, const char* dir) {
    if (!g || !dir) return invalid_argument("null argument");
    return guarded([&] {
        gode::bundle::save_bundle(dir, g->graph, g->labels ? &*g->labels : nullptr,
                                  g->provenance_json);
        return GODE_OK;
    });
}

gode_status gode_bundle_load(const char* dir, gode_graph** out) {
    if (!dir || !out) return invalid_argument("null argument");
    return guarded([&] {
        auto b = gode::bundle::load_bundle(dir);
        auto g = std::make_unique<gode_graph>();
        g->graph = std::move(b.graph);
        g->labels = std::move(b.labels);
        g->provenance_json = std::move(b.provenance_json);
        *out = g.release();
        return GODE_OK;
    });
}

size_t gode_graph_num_nodes(const gode_graph* g) { return g ? g->graph.num_nodes() : 0; }
size_t gode_graph_num_edges(const gode_graph* g) { return g ? g->graph.num_edges() : 0; }
size_t gode_graph_num_features(const gode_graph* g) {
    return g ? g->graph.num_features() : 0;
}
int gode_graph_is_labeled(const gode_graph* g) {
    return g && g->labels && g->labels->num_outliers() > 0 ? 1 : 0;
}

gode_status gode_detect(const gode_graph* g, const char* algorithm, const char* params,
                        uint64_t seed, gode_scores** out) {
    if (!g || !algorithm || !out) return invalid_argument("null argument");
    return guarded([&] {
        const gode::DetectorInfo* info = gode::find_detector(algorithm);
        if (!info) {
            throw gode::ValidationError("unknown detector: " + std::string(algorithm));
        }
        gode::ParamMap pm = gode::ParamMap::parse(params ? params : "");
        auto s = std::make_unique<gode_scores>();
        s->values = info->fit(g->graph, pm, seed);
        *out = s.release();
        return GODE_OK;
    });
}

size_t gode_scores_size(const gode_scores* s) { return s ? s->values.size() : 0; }

gode_status gode_scores_get(const gode_scores* s, double* buffer, size_t len) {
    if (!s || !buffer) return invalid_argument("null argument");
    if (len < s->values.size()) return invalid_argument("buffer too small");
    std::memcpy(buffer, s->values.data(), s->values.size() * sizeof(double));
    return GODE_OK;
}

gode_status gode_evaluate(const gode_graph* g, const gode_scores* s, gode_metrics* out) {
    if (!g || !s || !out) return invalid_argument("null argument");
    return guarded([&] {
        if (!g->labels || g->labels->num_outliers() == 0) {
            throw gode::ValidationError("graph has no ground-truth labels");
        }
        const auto y = g->labels->binary();
        out->auc = gode::metrics::roc_auc(s->values, y);
        out->ap = gode::metrics::average_precision(s->values, y);
        out->recall_at_k =
            gode::metrics::recall_at_k(s->values, y, g->labels->num_outliers());
        // Reuse the per-type convention from the harness via a tiny trial-less path.
        auto per_type = [&](gode::OutlierKind kind) {
            std::vector<double> sc;
            std::vector<int> yy;
            for (std::size_t i = 0; i < g->labels->size(); ++i) {
                const auto k = g->labels->kind[i];
                if (k == gode::OutlierKind::none) {
                    sc.push_back(s->values[i]);
                    yy.push_back(0);
                } else if (k == kind || k == gode::OutlierKind::both) {
                    sc.push_back(s->values[i]);
                    yy.push_back(1);
                }
            }
            const bool has_pos = std::find(yy.begin(), yy.end(), 1) != yy.end();
            const bool has_neg = std::find(yy.begin(), yy.end(), 0) != yy.end();
            if (!has_pos || !has_neg) return std::numeric_limits<double>::quiet_NaN();
            return gode::metrics::roc_auc(sc, yy);
        };
        out->auc_contextual = per_type(gode::OutlierKind::contextual);
        out->auc_structural = per_type(gode::OutlierKind::structural);
        return GODE_OK;
    });
}

gode_status gode_benchmark(const gode_bench_config* cfg) {
    if (!cfg || !cfg->dataset_dirs || !cfg->algorithms || !cfg->results_csv) {
        return invalid_argument("null argument");
    }
    return guarded([&] {
        std::vector<gode::bench::Dataset> datasets;
        for (std::size_t i = 0; i < cfg->num_datasets; ++i) {
            auto b = gode::bundle::load_bundle(cfg->dataset_dirs[i]);
            gode::bench::Dataset d;
            d.id = std::filesystem::path(cfg->dataset_dirs[i]).filename().string();
            if (d.id.empty()) d.id = cfg->dataset_dirs[i];
            d.graph = std::move(b.graph);
            d.labels = std::move(b.labels);
            datasets.push_back(std::move(d));
        }
        const auto algos = gode::parse_algo_list(cfg->algorithms);

        gode::bench::BenchmarkConfig bc;
        bc.grid = gode::bench::GridSpace::defaults();
        bc.grid.trials = cfg->trials ? cfg->trials : 20;
        bc.grid.master_seed = cfg->master_seed;
        bc.workers = cfg->workers ? cfg->workers : 1;

        auto results = gode::bench::run_benchmark(datasets, algos, bc);
        gode::bench::write_results_csv(cfg->results_csv, results);
        if (cfg->report_md) {
            auto rows = gode::bench::aggregate(results);
            std::ofstream out(cfg->report_md);
            if (!out) throw gode::IoError(std::string("cannot write ") + cfg->report_md);
            out << gode::report::markdown(rows, cfg->per_type != 0);
        }
        if (cfg->epoch_list && cfg->epoch_csv) {
            std::vector<gode::bench::EpochPoint> points;
            for (const auto& d : datasets) {
                auto pts = gode::bench::epoch_study(d, algos, parse_size_list(cfg->epoch_list),
                                                    cfg->master_seed);
                points.insert(points.end(), pts.begin(), pts.end());
            }
            gode::bench::write_epoch_csv(cfg->epoch_csv, points);
        }
        std::size_t failures = 0;
        for (const auto& r : results) failures += !r.ok();
        if (failures > 0) {
            t_last_error = std::to_string(failures) + " trial(s) failed";
            return GODE_ERR_TRIALS;
        }
        return GODE_OK;
    });
}

gode_status gode_report(const char* results_csv, const char* format, int per_type,
                        const char* out_path) {
    if (!results_csv || !format) return invalid_argument("null argument");
    return guarded([&] {
        auto results = gode::bench::read_results_csv(results_csv);
        auto rows = gode::bench::aggregate(results);
        std::string text;
        const std::string fmt = format;
        if (fmt == "md") {
            text = gode::report::markdown(rows, per_type != 0);
        } else if (fmt == "csv") {
            text = gode::report::csv(rows);
        } else {
            throw gode::ValidationError("report format must be md or csv");
        }
        if (out_path) {
            std::ofstream out(out_path);
            if (!out) throw gode::IoError(std::string("cannot write ") + out_path);
            out << text;
        } else {
            std::cout << text;
        }
        return GODE_OK;
    });
}

gode_status gode_scale(const char* sizes, const char* algorithms, uint64_t seed,
                       size_t epochs, const char* out_csv) {
    if (!sizes || !algorithms || !out_csv) return invalid_argument("null argument");
    return guarded([&] {
        const auto size_list = parse_size_list(sizes);
        const auto algos = gode::parse_algo_list(algorithms);
        auto cells = gode::bench::scalability_sweep(size_list, algos, seed,
                                                    epochs ? epochs : 10);
        gode::bench::write_scale_csv(out_csv, cells);
        std::size_t failures = 0;
        for (const auto& c : cells) failures += c.status != "ok";
        if (failures > 0) {
            t_last_error = std::to_string(failures) + " sweep cell(s) failed";
            return GODE_ERR_TRIALS;
        }
        return GODE_OK;
    });
}

}  // extern "C"
