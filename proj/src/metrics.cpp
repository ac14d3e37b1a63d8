#include "gode/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gode/error.hpp"

namespace gode {
namespace metrics {

namespace {

void check_lengths(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) {
        throw ValidationError("scores and labels differ in length");
    }
    for (double s : scores) {
        if (!std::isfinite(s)) throw ValidationError("non-finite score");
    }
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    check_lengths(scores, labels);
    const std::size_t n = scores.size();
    std::size_t npos = 0;
    for (int l : labels) npos += l != 0;
    const std::size_t nneg = n - npos;
    if (npos == 0 || nneg == 0) {
        throw ValidationError("roc_auc needs both classes present");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Midranks over tie groups; ranks are multiples of 0.5 so the sum is exact
    // at the sizes we care about.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * double(i + 1 + j);  // average of ranks i+1..j
        for (std::size_t t = i; t < j; ++t) {
            if (labels[order[t]] != 0) rank_sum_pos += midrank;
        }
        i = j;
    }
    const double u = rank_sum_pos - 0.5 * double(npos) * double(npos + 1);
    return u / (double(npos) * double(nneg));
}

double average_precision(std::span<const double> scores, std::span<const int> labels) {
    check_lengths(scores, labels);
    const std::size_t n = scores.size();
    std::size_t npos = 0;
    for (int l : labels) npos += l != 0;
    if (npos == 0) throw ValidationError("average_precision needs at least one positive");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double ap = 0.0;
    double prev_recall = 0.0;
    std::size_t tp = 0;
    std::size_t seen = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        for (std::size_t t = i; t < j; ++t) tp += labels[order[t]] != 0;
        seen = j;
        const double precision = double(tp) / double(seen);
        const double recall = double(tp) / double(npos);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    return ap;
}

double recall_at_k(std::span<const double> scores, std::span<const int> labels,
                   std::size_t k) {
    check_lengths(scores, labels);
    const std::size_t n = scores.size();
    if (k == 0 || k > n) {
        throw ValidationError("recall_at_k needs 1 <= k <= n, got k=" + std::to_string(k));
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    // Descending score, ascending index on ties: deterministic top-k.
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    std::size_t hits = 0;
    for (std::size_t t = 0; t < k; ++t) hits += labels[order[t]] != 0;
    return double(hits) / double(k);
}

}  // namespace metrics
}  // namespace gode
