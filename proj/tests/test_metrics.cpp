#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gode/error.hpp"
#include "gode/metrics.hpp"
#include "gode/rng.hpp"

using namespace gode;
using namespace gode::metrics;

namespace {

// Independent oracles: pairwise enumeration for AUC, from-scratch threshold
// sweep for AP. These stay brute force on purpose.
double auc_oracle(std::span<const double> s, std::span<const int> y) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!y[i]) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[j]) continue;
            ++pairs;
            if (s[i] > s[j]) wins += 1.0;
            else if (s[i] == s[j]) wins += 0.5;
        }
    }
    return wins / double(pairs);
}

double ap_oracle(std::span<const double> s, std::span<const int> y) {
    std::vector<double> thresholds(s.begin(), s.end());
    std::sort(thresholds.begin(), thresholds.end(), std::greater<double>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    std::size_t npos = 0;
    for (int v : y) npos += v != 0;
    double ap = 0.0, prev_recall = 0.0;
    for (double t : thresholds) {
        std::size_t tp = 0, pred = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] >= t) {
                ++pred;
                tp += y[i] != 0;
            }
        }
        const double precision = double(tp) / double(pred);
        const double recall = double(tp) / double(npos);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return ap;
}

}  // namespace

TEST_CASE("roc_auc on pinned examples") {
    CHECK(roc_auc(std::vector<double>{1, 0, 0, 1}, std::vector<int>{1, 0, 0, 1}) == 1.0);
    CHECK(roc_auc(std::vector<double>{0.3, 0.3, 0.3}, std::vector<int>{1, 0, 1}) == 0.5);
    CHECK(roc_auc(std::vector<double>{0.9, 0.8, 0.1, 0.4}, std::vector<int>{1, 0, 0, 1}) ==
          doctest::Approx(0.75));
}

TEST_CASE("roc_auc rejects degenerate inputs") {
    CHECK_THROWS_AS(roc_auc(std::vector<double>{1, 2}, std::vector<int>{1, 1}),
                    ValidationError);
    CHECK_THROWS_AS(roc_auc(std::vector<double>{1, 2}, std::vector<int>{0}),
                    ValidationError);
}

TEST_CASE("average_precision on pinned examples") {
    CHECK(average_precision(std::vector<double>{0.9, 0.8, 0.7},
                            std::vector<int>{1, 0, 1}) == doctest::Approx(0.5 + 0.5 * 2.0 / 3.0));
    CHECK(average_precision(std::vector<double>{0.9, 0.1}, std::vector<int>{1, 0}) == 1.0);
}

TEST_CASE("recall_at_k on pinned examples") {
    CHECK(recall_at_k(std::vector<double>{0.9, 0.8, 0.1, 0.4}, std::vector<int>{1, 0, 0, 1},
                      2) == doctest::Approx(0.5));
    // all tied, k = n: recall equals the outlier ratio
    CHECK(recall_at_k(std::vector<double>{1, 1, 1, 1}, std::vector<int>{1, 0, 0, 1}, 4) ==
          doctest::Approx(0.5));
    // boundary ties broken by ascending index
    CHECK(recall_at_k(std::vector<double>{0.5, 0.5, 0.5}, std::vector<int>{0, 1, 1}, 1) ==
          0.0);
    CHECK_THROWS_AS(recall_at_k(std::vector<double>{1}, std::vector<int>{1}, 2),
                    ValidationError);
}

TEST_CASE("metrics agree with brute-force oracles on random instances") {
    Rng rng(99);
    for (int it = 0; it < 300; ++it) {
        const std::size_t n = 2 + rng.index(60);
        std::vector<double> s(n);
        std::vector<int> y(n);
        bool pos = false, neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            // coarse grid forces plenty of ties
            s[i] = double(rng.index(8)) / 4.0;
            y[i] = rng.uniform() < 0.3;
            pos |= y[i] == 1;
            neg |= y[i] == 0;
        }
        if (!pos) y[0] = 1;
        if (!neg) y[n - 1] = 0;
        CHECK(std::abs(roc_auc(s, y) - auc_oracle(s, y)) <= 1e-9);
        CHECK(std::abs(average_precision(s, y) - ap_oracle(s, y)) <= 1e-9);
    }
}

TEST_CASE("metrics are invariant under strictly monotone score transforms") {
    Rng rng(123);
    for (int it = 0; it < 50; ++it) {
        const std::size_t n = 5 + rng.index(40);
        std::vector<double> s(n), s2(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = rng.normal();
            s2[i] = std::exp(0.5 * s[i]) + 3.0;  // strictly increasing map
            y[i] = rng.uniform() < 0.4;
        }
        y[0] = 1;
        y[1] = 0;
        CHECK(roc_auc(s, y) == doctest::Approx(roc_auc(s2, y)).epsilon(1e-12));
        CHECK(average_precision(s, y) ==
              doctest::Approx(average_precision(s2, y)).epsilon(1e-12));
        const std::size_t k = 1 + rng.index(n - 1);
        CHECK(recall_at_k(s, y, k) == recall_at_k(s2, y, k));
    }
}

TEST_CASE("average precision of random scores concentrates on the positive rate") {
    Rng rng(2024);
    const std::size_t n = 120;
    const double p = 0.25;
    double acc = 0.0;
    for (int it = 0; it < 1000; ++it) {
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = rng.uniform();
            y[i] = rng.uniform() < p;
        }
        y[0] = 1;  // at least one positive
        acc += average_precision(s, y);
    }
    CHECK(std::abs(acc / 1000.0 - p) < 0.05);
}

TEST_CASE("auc(scores) + auc(-scores) = 1 exactly") {
    Rng rng(5);
    for (int it = 0; it < 100; ++it) {
        const std::size_t n = 3 + rng.index(50);
        std::vector<double> s(n), neg(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = double(rng.index(6));
            neg[i] = -s[i];
            y[i] = rng.uniform() < 0.5;
        }
        y[0] = 1;
        y[n - 1] = 0;
        CHECK(roc_auc(s, y) + roc_auc(neg, y) == 1.0);
    }
}
