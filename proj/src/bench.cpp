#include "gode/bench.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include <unistd.h>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "gode/detectors.hpp"
#include "gode/error.hpp"
#include "gode/metrics.hpp"
#include "gode/rng.hpp"
#include "gode/synth.hpp"

namespace gode {
namespace bench {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

class MemoryWatcher {
public:
    MemoryWatcher() {
#if defined(__GLIBC__)
        malloc_trim(0);  // return freed arenas so the baseline is honest
#endif
        baseline_ = current_rss_bytes();
        peak_.store(baseline_);
        thread_ = std::thread([this] {
            while (!stop_.load(std::memory_order_relaxed)) {
                sample();
                std::this_thread::sleep_for(std::chrono::milliseconds(10));
            }
        });
    }

    std::uint64_t finish() {
        stop_.store(true);
        thread_.join();
        sample();
        const std::uint64_t p = peak_.load();
        return p > baseline_ ? p - baseline_ : 0;
    }

    ~MemoryWatcher() {
        if (thread_.joinable()) {
            stop_.store(true);
            thread_.join();
        }
    }

private:
    void sample() {
        const std::uint64_t r = current_rss_bytes();
        std::uint64_t cur = peak_.load();
        while (r > cur && !peak_.compare_exchange_weak(cur, r)) {
        }
    }

    std::uint64_t baseline_ = 0;
    std::atomic<std::uint64_t> peak_{0};
    std::atomic<bool> stop_{false};
    std::thread thread_;
};

void accumulate_stats(Stats& s, std::vector<double>& values) {
    s.count = values.size();
    if (values.empty()) return;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= double(values.size());
    double var = 0.0;
    double mx = values[0];
    for (double v : values) {
        var += (v - mean) * (v - mean);
        mx = std::max(mx, v);
    }
    s.mean = mean;
    s.stddev = std::sqrt(var / double(values.size()));
    s.max = mx;
}

// AUC over one outlier type: positives are that kind (plus `both`),
// negatives are unlabeled nodes; the other kind is excluded.
double per_type_auc(const ScoreVector& scores, const OutlierLabels& labels,
                    OutlierKind kind) {
    std::vector<double> s;
    std::vector<int> y;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const OutlierKind k = labels.kind[i];
        if (k == OutlierKind::none) {
            s.push_back(scores[i]);
            y.push_back(0);
        } else if (k == kind || k == OutlierKind::both) {
            s.push_back(scores[i]);
            y.push_back(1);
        }
    }
    const bool has_pos = std::find(y.begin(), y.end(), 1) != y.end();
    const bool has_neg = std::find(y.begin(), y.end(), 0) != y.end();
    if (!has_pos || !has_neg) return kNaN;
    return metrics::roc_auc(s, y);
}

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

std::vector<std::string> parse_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_opt_double(const std::string& s) {
    if (s.empty()) return kNaN;
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw ValidationError("results csv: malformed number '" + s + "'");
    }
    return v;
}

std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw ValidationError("results csv: malformed integer '" + s + "'");
    }
    return v;
}

}  // namespace

std::uint64_t current_rss_bytes() {
    std::ifstream statm("/proc/self/statm");
    std::uint64_t total = 0, resident = 0;
    if (statm >> total >> resident) {
        return resident * std::uint64_t(sysconf(_SC_PAGESIZE));
    }
    return 0;
}

GridSpace GridSpace::defaults() {
    GridSpace g;
    g.candidates["dropout"] = {0.0, 0.1, 0.3};
    g.candidates["lr"] = {0.1, 0.05, 0.01};
    g.candidates["weight_decay"] = {0.01};
    g.candidates["epochs"] = {300.0};
    g.candidates["alpha"] = {std::string("auto")};
    g.candidates["hid_dim"] = {32.0, 48.0, 64.0};
    g.candidates["eps"] = {0.3, 0.5, 0.8};
    g.candidates["mu"] = {2.0, 5.0, 10.0};
    g.candidates["theta"] = {10.0, 40.0, 90.0};
    g.candidates["eta"] = {3.0, 5.0, 8.0};
    g.candidates["noise_dim"] = {8.0, 16.0, 32.0};
    g.candidates["struct_hid"] = {4.0, 5.0, 6.0};
    return g;
}

std::vector<ParamMap> sample_grid(const GridSpace& space, const std::string& detector) {
    const DetectorInfo* info = find_detector(detector);
    if (!info) throw ValidationError("unknown detector: " + detector);
    if (space.trials < 1) throw ValidationError("grid needs at least one trial");
    for (const auto& [key, list] : space.candidates) {
        if (list.empty()) throw ValidationError("empty candidate list for '" + key + "'");
    }

    std::vector<ParamMap> out;
    out.reserve(space.trials);
    for (std::size_t t = 0; t < space.trials; ++t) {
        Rng rng(hash_combine(hash_combine(space.master_seed, detector), t));
        ParamMap pm;
        for (const std::string& key : info->grid_keys) {
            auto it = space.candidates.find(key);
            if (it == space.candidates.end()) continue;  // no candidates: detector default
            const auto& list = it->second;
            const auto& v = list[rng.index(list.size())];
            if (const double* d = std::get_if<double>(&v)) pm.set(key, *d);
            else pm.set(key, std::get<std::string>(v));
        }
        out.push_back(std::move(pm));
    }
    return out;
}

std::uint64_t trial_seed(std::uint64_t master_seed, const std::string& dataset,
                         const std::string& algorithm, std::size_t trial) {
    return hash_combine(hash_combine(hash_combine(master_seed, dataset), algorithm), trial);
}

TrialResult run_trial(const Dataset& data, const std::string& algorithm,
                      const ParamMap& params, std::uint64_t seed) {
    TrialResult r;
    r.dataset = data.id;
    r.algorithm = algorithm;
    r.seed = seed;
    r.params = params;

    const DetectorInfo* info = find_detector(algorithm);
    if (!info) throw ValidationError("unknown detector: " + algorithm);

    MemoryWatcher watcher;
    const auto start = std::chrono::steady_clock::now();
    ScoreVector scores;
    try {
        scores = info->fit(data.graph, params, seed);
        const auto end = std::chrono::steady_clock::now();
        r.runtime_ms = std::chrono::duration<double, std::milli>(end - start).count();
        r.peak_mem_bytes = watcher.finish();

        for (double s : scores) {
            if (!std::isfinite(s)) throw DivergenceError("non-finite score emitted");
        }
        if (data.labels && data.labels->num_outliers() > 0 &&
            data.labels->num_outliers() < data.labels->size()) {
            const auto y = data.labels->binary();
            r.auc = metrics::roc_auc(scores, y);
            r.ap = metrics::average_precision(scores, y);
            r.recall_at_k = metrics::recall_at_k(scores, y, data.labels->num_outliers());
            r.auc_contextual = per_type_auc(scores, *data.labels, OutlierKind::contextual);
            r.auc_structural = per_type_auc(scores, *data.labels, OutlierKind::structural);
        }
    } catch (const DivergenceError& e) {
        const auto end = std::chrono::steady_clock::now();
        r.runtime_ms = std::chrono::duration<double, std::milli>(end - start).count();
        r.peak_mem_bytes = watcher.finish();
        r.status = "divergence";
        r.message = e.what();
    } catch (const std::bad_alloc&) {
        const auto end = std::chrono::steady_clock::now();
        r.runtime_ms = std::chrono::duration<double, std::milli>(end - start).count();
        r.peak_mem_bytes = watcher.finish();
        r.status = "oom";
        r.message = "allocation failed";
    } catch (const Error& e) {
        const auto end = std::chrono::steady_clock::now();
        r.runtime_ms = std::chrono::duration<double, std::milli>(end - start).count();
        r.peak_mem_bytes = watcher.finish();
        r.status = e.code() == ErrorCode::trial_failure ? "oom" : "error";
        r.message = e.what();
    }
    return r;
}

std::vector<TrialResult> run_benchmark(const std::vector<Dataset>& datasets,
                                       const std::vector<std::string>& algorithms,
                                       const BenchmarkConfig& config) {
    struct Job {
        const Dataset* data;
        const std::string* algo;
        std::size_t trial;
        ParamMap params;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const auto& data : datasets) {
        for (const auto& algo : algorithms) {
            auto assignments = sample_grid(config.grid, algo);
            for (std::size_t t = 0; t < assignments.size(); ++t) {
                jobs.push_back({&data, &algo, t, std::move(assignments[t]),
                                trial_seed(config.grid.master_seed, data.id, algo, t)});
            }
        }
    }

    std::vector<TrialResult> results(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) break;
            const Job& j = jobs[i];
            results[i] = run_trial(*j.data, *j.algo, j.params, j.seed);
            results[i].trial = j.trial;
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, config.workers);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return results;
}

std::vector<AggregateRow> aggregate(const std::vector<TrialResult>& results) {
    std::map<std::pair<std::string, std::string>, AggregateRow> rows;
    std::map<std::pair<std::string, std::string>, std::array<std::vector<double>, 7>> acc;
    for (const auto& r : results) {
        const auto key = std::make_pair(r.dataset, r.algorithm);
        auto& row = rows[key];
        row.dataset = r.dataset;
        row.algorithm = r.algorithm;
        if (!r.ok()) {
            ++row.failures;
            continue;
        }
        ++row.successes;
        auto& a = acc[key];
        if (!std::isnan(r.auc)) a[0].push_back(r.auc);
        if (!std::isnan(r.ap)) a[1].push_back(r.ap);
        if (!std::isnan(r.recall_at_k)) a[2].push_back(r.recall_at_k);
        if (!std::isnan(r.auc_contextual)) a[3].push_back(r.auc_contextual);
        if (!std::isnan(r.auc_structural)) a[4].push_back(r.auc_structural);
        a[5].push_back(r.runtime_ms);
        a[6].push_back(double(r.peak_mem_bytes));
    }
    std::vector<AggregateRow> out;
    for (auto& [key, row] : rows) {
        auto& a = acc[key];
        accumulate_stats(row.auc, a[0]);
        accumulate_stats(row.ap, a[1]);
        accumulate_stats(row.recall_at_k, a[2]);
        accumulate_stats(row.auc_contextual, a[3]);
        accumulate_stats(row.auc_structural, a[4]);
        accumulate_stats(row.runtime_ms, a[5]);
        accumulate_stats(row.peak_mem_bytes, a[6]);
        out.push_back(std::move(row));
    }
    return out;
}

void write_results_csv(const std::filesystem::path& path,
                       const std::vector<TrialResult>& results) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "dataset,algorithm,trial,seed,params_json,auc,ap,recall_at_k,"
           "auc_contextual,auc_structural,runtime_ms,peak_mem_bytes,status\n";
    auto opt = [](double v) { return std::isnan(v) ? std::string() : fmt_double(v); };
    for (const auto& r : results) {
        out << csv_quote(r.dataset) << "," << r.algorithm << "," << r.trial << ","
            << r.seed << "," << csv_quote(r.params.to_json()) << "," << opt(r.auc) << ","
            << opt(r.ap) << "," << opt(r.recall_at_k) << "," << opt(r.auc_contextual)
            << "," << opt(r.auc_structural) << "," << fmt_double(r.runtime_ms) << ","
            << r.peak_mem_bytes << "," << r.status << "\n";
    }
}

std::vector<TrialResult> read_results_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::vector<TrialResult> out;
    bool header = true;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        const auto f = parse_csv_line(line);
        if (f.size() != 13) {
            throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                                  ": expected 13 fields, found " +
                                  std::to_string(f.size()));
        }
        TrialResult r;
        r.dataset = f[0];
        r.algorithm = f[1];
        r.trial = parse_u64(f[2]);
        r.seed = parse_u64(f[3]);
        r.auc = parse_opt_double(f[5]);
        r.ap = parse_opt_double(f[6]);
        r.recall_at_k = parse_opt_double(f[7]);
        r.auc_contextual = parse_opt_double(f[8]);
        r.auc_structural = parse_opt_double(f[9]);
        r.runtime_ms = parse_opt_double(f[10]);
        r.peak_mem_bytes = parse_u64(f[11]);
        r.status = f[12];
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<ScaleCell> scalability_sweep(const std::vector<std::size_t>& sizes,
                                         const std::vector<std::string>& algorithms,
                                         std::uint64_t seed, std::size_t epochs) {
    if (!std::is_sorted(sizes.begin(), sizes.end())) {
        throw ValidationError("scalability sweep sizes must be ascending");
    }
    std::vector<ScaleCell> cells;
    for (std::size_t size : sizes) {
        if (size < 2) throw ValidationError("sweep size must be at least 2");
        synth::PartitionGraphConfig cfg;
        cfg.nodes_per_class = size / 2;
        cfg.seed = hash_combine(seed, size);
        auto base = synth::generate_partition_graph(cfg);
        synth::InjectionParams ip{10, 1, hash_combine(cfg.seed, "inject")};
        ip.m = std::min<std::size_t>(ip.m, base.num_nodes() / 2);
        auto injected = synth::inject_combined(base, ip, ip, /*allow_overlap=*/true);

        Dataset data{"gen_" + std::to_string(size), std::move(injected.graph),
                     std::move(injected.labels)};
        for (const auto& algo : algorithms) {
            ParamMap params;
            params.set("epochs", double(epochs));
            TrialResult r =
                run_trial(data, algo, params, trial_seed(seed, data.id, algo, 0));
            cells.push_back({size, algo, r.runtime_ms, r.peak_mem_bytes, r.status});
        }
    }
    return cells;
}

void write_scale_csv(const std::filesystem::path& path,
                     const std::vector<ScaleCell>& cells) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "num_nodes,algorithm,runtime_ms,peak_mem_bytes,status\n";
    for (const auto& c : cells) {
        out << c.num_nodes << "," << c.algorithm << "," << fmt_double(c.runtime_ms) << ","
            << c.peak_mem_bytes << "," << c.status << "\n";
    }
}

std::vector<EpochPoint> epoch_study(const Dataset& data,
                                    const std::vector<std::string>& algorithms,
                                    const std::vector<std::size_t>& epoch_list,
                                    std::uint64_t master_seed) {
    std::vector<EpochPoint> out;
    for (const auto& algo : algorithms) {
        std::vector<EpochPoint> pts;
        for (std::size_t e : epoch_list) {
            ParamMap params;
            params.set("epochs", double(e));
            TrialResult r =
                run_trial(data, algo, params, trial_seed(master_seed, data.id, algo, 0));
            EpochPoint pt;
            pt.dataset = data.id;
            pt.algorithm = algo;
            pt.epochs = e;
            pt.auc = r.auc;
            pt.runtime_ms = r.runtime_ms;
            pt.peak_mem_bytes = r.peak_mem_bytes;
            pt.status = r.status;
            pts.push_back(pt);
        }
        // Convergence rule: first point whose AUC improves on its predecessor
        // by less than half a percentage point.
        for (std::size_t i = 1; i < pts.size(); ++i) {
            if (!std::isnan(pts[i].auc) && !std::isnan(pts[i - 1].auc) &&
                pts[i].auc - pts[i - 1].auc < 0.005) {
                pts[i].converged_optimal = true;
                break;
            }
        }
        std::size_t best = 0;
        bool any = false;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (!std::isnan(pts[i].auc) && (!any || pts[i].auc > pts[best].auc)) {
                best = i;
                any = true;
            }
        }
        if (any) pts[best].best = true;
        out.insert(out.end(), pts.begin(), pts.end());
    }
    return out;
}

void write_epoch_csv(const std::filesystem::path& path,
                     const std::vector<EpochPoint>& points) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "dataset,algorithm,epochs,auc,runtime_ms,peak_mem_bytes,status,"
           "converged_optimal,best\n";
    auto opt = [](double v) { return std::isnan(v) ? std::string() : fmt_double(v); };
    for (const auto& p : points) {
        out << csv_quote(p.dataset) << "," << p.algorithm << "," << p.epochs << ","
            << opt(p.auc) << "," << fmt_double(p.runtime_ms) << "," << p.peak_mem_bytes
            << "," << p.status << "," << (p.converged_optimal ? 1 : 0) << ","
            << (p.best ? 1 : 0) << "\n";
    }
}

}  // namespace bench
}  // namespace gode
