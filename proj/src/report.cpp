#include "gode/report.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace gode {
namespace report {

namespace {

std::string pct_cell(const bench::Stats& s, std::size_t failures) {
    std::ostringstream os;
    if (s.count == 0) {
        os << (failures > 0 ? "FAIL" : "-");
        return os.str();
    }
    os.setf(std::ios::fixed);
    os.precision(2);
    os << 100.0 * s.mean << "±" << 100.0 * s.stddev << " (" << 100.0 * s.max << ")";
    if (failures > 0) os << " [" << failures << " failed]";
    return os.str();
}

std::string ms_cell(const bench::Stats& s) {
    std::ostringstream os;
    if (s.count == 0) {
        os << "-";
        return os.str();
    }
    os.setf(std::ios::fixed);
    os.precision(1);
    os << s.mean << " ms (max " << s.max << ")";
    return os.str();
}

std::string mem_cell(const bench::Stats& s) {
    std::ostringstream os;
    if (s.count == 0) {
        os << "-";
        return os.str();
    }
    os.setf(std::ios::fixed);
    os.precision(1);
    os << s.max / (1024.0 * 1024.0) << " MiB";
    return os.str();
}

const bench::AggregateRow* find_row(const std::vector<bench::AggregateRow>& rows,
                                    const std::string& dataset, const std::string& algo) {
    for (const auto& r : rows) {
        if (r.dataset == dataset && r.algorithm == algo) return &r;
    }
    return nullptr;
}

void metric_table(std::ostringstream& os, const std::vector<bench::AggregateRow>& rows,
                  const std::vector<std::string>& datasets,
                  const std::vector<std::string>& algos, const std::string& title,
                  bench::Stats bench::AggregateRow::*metric) {
    os << "## " << title << "\n\n";
    os << "| Algorithm |";
    for (const auto& d : datasets) os << " " << d << " |";
    os << "\n|---|";
    for (std::size_t i = 0; i < datasets.size(); ++i) os << "---|";
    os << "\n";
    for (const auto& a : algos) {
        os << "| " << a << " |";
        for (const auto& d : datasets) {
            const auto* r = find_row(rows, d, a);
            os << " " << (r ? pct_cell(r->*metric, r->failures) : "-") << " |";
        }
        os << "\n";
    }
    os << "\n";
}

}  // namespace

std::string markdown(const std::vector<bench::AggregateRow>& rows, bool per_type) {
    std::set<std::string> dset, aset;
    for (const auto& r : rows) {
        dset.insert(r.dataset);
        aset.insert(r.algorithm);
    }
    const std::vector<std::string> datasets(dset.begin(), dset.end());
    const std::vector<std::string> algos(aset.begin(), aset.end());

    std::ostringstream os;
    os << "# Benchmark report\n\n";
    os << "Cells show mean±std (max) over hyperparameter trials, in percent.\n\n";
    metric_table(os, rows, datasets, algos, "ROC-AUC", &bench::AggregateRow::auc);
    metric_table(os, rows, datasets, algos, "Average Precision", &bench::AggregateRow::ap);
    metric_table(os, rows, datasets, algos, "Recall@k", &bench::AggregateRow::recall_at_k);
    if (per_type) {
        metric_table(os, rows, datasets, algos, "ROC-AUC (contextual outliers)",
                     &bench::AggregateRow::auc_contextual);
        metric_table(os, rows, datasets, algos, "ROC-AUC (structural outliers)",
                     &bench::AggregateRow::auc_structural);
    }

    os << "## Efficiency\n\n";
    os << "| Algorithm |";
    for (const auto& d : datasets) os << " " << d << " runtime | " << d << " peak mem |";
    os << "\n|---|";
    for (std::size_t i = 0; i < datasets.size(); ++i) os << "---|---|";
    os << "\n";
    for (const auto& a : algos) {
        os << "| " << a << " |";
        for (const auto& d : datasets) {
            const auto* r = find_row(rows, d, a);
            os << " " << (r ? ms_cell(r->runtime_ms) : "-") << " | "
               << (r ? mem_cell(r->peak_mem_bytes) : "-") << " |";
        }
        os << "\n";
    }
    os << "\n";
    return os.str();
}

std::string csv(const std::vector<bench::AggregateRow>& rows) {
    std::ostringstream os;
    os << "dataset,algorithm,successes,failures";
    for (const char* m : {"auc", "ap", "recall_at_k", "auc_contextual", "auc_structural",
                          "runtime_ms", "peak_mem_bytes"}) {
        os << "," << m << "_mean," << m << "_std," << m << "_max";
    }
    os << "\n";
    auto emit = [&](const bench::Stats& s) {
        if (s.count == 0) {
            os << ",,,";
            return;
        }
        os << "," << s.mean << "," << s.stddev << "," << s.max;
    };
    for (const auto& r : rows) {
        os << r.dataset << "," << r.algorithm << "," << r.successes << "," << r.failures;
        emit(r.auc);
        emit(r.ap);
        emit(r.recall_at_k);
        emit(r.auc_contextual);
        emit(r.auc_structural);
        emit(r.runtime_ms);
        emit(r.peak_mem_bytes);
        os << "\n";
    }
    return os.str();
}

}  // namespace report
}  // namespace gode
