// Command-line front end; talks to the engine exclusively through the C API.
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gode.h"

namespace {

int exit_code(gode_status st) {
    switch (st) {
        case GODE_OK: return 0;
        case GODE_ERR_TRIALS: return 3;
        case GODE_ERR_VALIDATION:
        case GODE_ERR_IO: return 2;
        default: return 1;
    }
}

int fail(gode_status st) {
    std::cerr << "error: " << gode_last_error() << "\n";
    return exit_code(st);
}

struct GraphHandle {
    gode_graph* g = nullptr;
    ~GraphHandle() { gode_graph_free(g); }
};

struct ScoresHandle {
    gode_scores* s = nullptr;
    ~ScoresHandle() { gode_scores_free(s); }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph outlier detection engine"};
    app.require_subcommand(1);

    // ---- generate ----
    auto* gen = app.add_subcommand("generate", "synthesize a random partition graph");
    gode_gen_config gen_cfg{2, 500, 0.5, 5.0, 64, 0};
    std::string gen_out;
    gen->add_option("--classes", gen_cfg.num_classes, "number of classes");
    gen->add_option("--nodes-per-class", gen_cfg.nodes_per_class, "nodes per class");
    gen->add_option("--homophily", gen_cfg.homophily, "intra-class edge fraction");
    gen->add_option("--avg-degree", gen_cfg.avg_degree, "expected mean degree");
    gen->add_option("--channels", gen_cfg.num_channels, "feature dimensions");
    gen->add_option("--seed", gen_cfg.seed, "generator seed");
    gen->add_option("--out", gen_out, "output bundle directory")->required();

    // ---- inject ----
    auto* inj = app.add_subcommand("inject", "inject labeled outliers into a bundle");
    std::string inj_in, inj_out, inj_type = "both";
    std::uint64_t inj_seed = 0;
    std::size_t inj_m = 10, inj_n = 10;
    bool inj_overlap = false;
    inj->add_option("--in", inj_in, "input bundle directory")->required();
    inj->add_option("--type", inj_type, "structural | contextual | both");
    inj->add_option("--m", inj_m, "clique size / candidate pool size");
    inj->add_option("--n", inj_n, "number of cliques / contextual batches");
    inj->add_option("--seed", inj_seed, "injection seed");
    inj->add_flag("--allow-overlap", inj_overlap,
                  "sample the two types independently (combined injection only)");
    inj->add_option("--out", inj_out, "output bundle directory")->required();

    // ---- detect ----
    auto* det = app.add_subcommand("detect", "run one detector on a bundle");
    std::string det_in, det_algo, det_params, det_scores = "scores.csv";
    std::uint64_t det_seed = 0;
    det->add_option("--in", det_in, "input bundle directory")->required();
    det->add_option("--algo", det_algo,
                    std::string("detector name (") + gode_detector_names() + ")")
        ->required();
    det->add_option("--params", det_params, "KEY=VAL[,KEY=VAL...] hyperparameters");
    det->add_option("--seed", det_seed, "detector seed");
    det->add_option("--scores", det_scores, "scores output path (node_id,score)");

    // ---- benchmark ----
    auto* ben = app.add_subcommand("benchmark", "random-grid benchmark over datasets");
    std::vector<std::string> ben_datasets;
    std::string ben_algos = "all", ben_out = "results.csv", ben_report, ben_epochs;
    std::size_t ben_trials = 20, ben_workers = 1;
    std::uint64_t ben_seed = 0;
    bool ben_per_type = false;
    ben->add_option("--datasets", ben_datasets, "bundle directories")->required();
    ben->add_option("--algos", ben_algos, "comma-separated detector list or 'all'");
    ben->add_option("--trials", ben_trials, "random grid trials per detector");
    ben->add_option("--seed", ben_seed, "master seed");
    ben->add_option("--workers", ben_workers, "worker threads");
    ben->add_option("--out", ben_out, "results csv path");
    ben->add_option("--report", ben_report, "also write a markdown report here");
    ben->add_flag("--per-type", ben_per_type, "report per-type AUC tables");
    ben->add_option("--epoch-list", ben_epochs,
                    "comma-separated epoch budgets for an epoch study");

    // ---- report ----
    auto* rep = app.add_subcommand("report", "aggregate a results csv");
    std::string rep_results, rep_format = "md", rep_out;
    bool rep_per_type = false;
    rep->add_option("--results", rep_results, "results csv path")->required();
    rep->add_option("--format", rep_format, "md | csv");
    rep->add_flag("--per-type", rep_per_type, "include per-type AUC tables");
    rep->add_option("--out", rep_out, "output path (default stdout)");

    // ---- scale ----
    auto* sca = app.add_subcommand("scale", "runtime/memory sweep over graph sizes");
    std::string sca_sizes = "100,500,1000,5000", sca_algos, sca_out = "scal.csv";
    std::uint64_t sca_seed = 0;
    std::size_t sca_epochs = 10;
    sca->add_option("--sizes", sca_sizes, "ascending node counts");
    sca->add_option("--algos", sca_algos, "comma-separated detector list or 'all'")
        ->required();
    sca->add_option("--seed", sca_seed, "sweep seed");
    sca->add_option("--epochs", sca_epochs, "training epochs per cell");
    sca->add_option("--out", sca_out, "output csv path");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        GraphHandle g;
        gode_status st = gode_generate(&gen_cfg, &g.g);
        if (st != GODE_OK) return fail(st);
        st = gode_bundle_save(g.g, gen_out.c_str());
        if (st != GODE_OK) return fail(st);
        std::cout << "wrote " << gen_out << " (" << gode_graph_num_nodes(g.g) << " nodes, "
                  << gode_graph_num_edges(g.g) << " edges)\n";
        return 0;
    }

    if (inj->parsed()) {
        GraphHandle in;
        gode_status st = gode_bundle_load(inj_in.c_str(), &in.g);
        if (st != GODE_OK) return fail(st);
        GraphHandle out;
        st = gode_inject(in.g, inj_type.c_str(), inj_m, inj_n, inj_seed,
                         inj_overlap ? 1 : 0, &out.g);
        if (st != GODE_OK) return fail(st);
        st = gode_bundle_save(out.g, inj_out.c_str());
        if (st != GODE_OK) return fail(st);
        std::cout << "wrote " << inj_out << " (" << gode_graph_num_edges(out.g)
                  << " edges)\n";
        return 0;
    }

    if (det->parsed()) {
        GraphHandle g;
        gode_status st = gode_bundle_load(det_in.c_str(), &g.g);
        if (st != GODE_OK) return fail(st);
        ScoresHandle s;
        st = gode_detect(g.g, det_algo.c_str(), det_params.c_str(), det_seed, &s.s);
        if (st != GODE_OK) return fail(st);

        const size_t n = gode_scores_size(s.s);
        std::vector<double> values(n);
        st = gode_scores_get(s.s, values.data(), n);
        if (st != GODE_OK) return fail(st);
        std::ofstream out(det_scores);
        if (!out) {
            std::cerr << "error: cannot write " << det_scores << "\n";
            return 2;
        }
        out << "node_id,score\n";
        out.precision(17);
        for (size_t i = 0; i < n; ++i) out << i << "," << values[i] << "\n";

        if (gode_graph_is_labeled(g.g)) {
            gode_metrics m{};
            st = gode_evaluate(g.g, s.s, &m);
            if (st != GODE_OK) return fail(st);
            std::printf("auc=%.6f ap=%.6f recall_at_k=%.6f", m.auc, m.ap, m.recall_at_k);
            if (!std::isnan(m.auc_contextual)) {
                std::printf(" auc_contextual=%.6f", m.auc_contextual);
            }
            if (!std::isnan(m.auc_structural)) {
                std::printf(" auc_structural=%.6f", m.auc_structural);
            }
            std::printf("\n");
        }
        return 0;
    }

    if (ben->parsed()) {
        std::vector<const char*> dirs;
        for (const auto& d : ben_datasets) dirs.push_back(d.c_str());
        std::string epoch_csv;
        if (!ben_epochs.empty()) {
            epoch_csv = ben_out;
            const auto dot = epoch_csv.rfind(".csv");
            if (dot != std::string::npos) epoch_csv.resize(dot);
            epoch_csv += "_epochs.csv";
        }
        gode_bench_config cfg{};
        cfg.dataset_dirs = dirs.data();
        cfg.num_datasets = dirs.size();
        cfg.algorithms = ben_algos.c_str();
        cfg.trials = ben_trials;
        cfg.master_seed = ben_seed;
        cfg.workers = ben_workers;
        cfg.results_csv = ben_out.c_str();
        cfg.report_md = ben_report.empty() ? nullptr : ben_report.c_str();
        cfg.per_type = ben_per_type ? 1 : 0;
        cfg.epoch_list = ben_epochs.empty() ? nullptr : ben_epochs.c_str();
        cfg.epoch_csv = ben_epochs.empty() ? nullptr : epoch_csv.c_str();
        const gode_status st = gode_benchmark(&cfg);
        if (st == GODE_OK) {
            std::cout << "wrote " << ben_out << "\n";
            return 0;
        }
        if (st == GODE_ERR_TRIALS) {
            std::cerr << "warning: " << gode_last_error() << "; partial results in "
                      << ben_out << "\n";
            return 3;
        }
        return fail(st);
    }

    if (rep->parsed()) {
        const gode_status st =
            gode_report(rep_results.c_str(), rep_format.c_str(), rep_per_type ? 1 : 0,
                        rep_out.empty() ? nullptr : rep_out.c_str());
        if (st != GODE_OK) return fail(st);
        return 0;
    }

    if (sca->parsed()) {
        const gode_status st = gode_scale(sca_sizes.c_str(), sca_algos.c_str(), sca_seed,
                                          sca_epochs, sca_out.c_str());
        if (st == GODE_OK) {
            std::cout << "wrote " << sca_out << "\n";
            return 0;
        }
        if (st == GODE_ERR_TRIALS) {
            std::cerr << "warning: " << gode_last_error() << "; partial sweep in "
                      << sca_out << "\n";
            return 3;
        }
        return fail(st);
    }

    return 0;
}
