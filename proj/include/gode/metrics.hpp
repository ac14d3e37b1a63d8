#pragma once

#include <cstddef>
#include <span>

#include "gode/graph.hpp"

namespace gode {
namespace metrics {

// ROC-AUC with the Mann-Whitney half-credit tie convention:
// P(score_out > score_in) + 0.5 * P(tie) over all outlier/inlier pairs.
// Requires both classes present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// AP = sum_n (R_n - R_{n-1}) * P_n over the descending-score threshold sweep.
// Requires at least one positive.
double average_precision(std::span<const double> scores, std::span<const int> labels);

// |true outliers in the top k by score| / k. Boundary ties broken by
// ascending node index.
double recall_at_k(std::span<const double> scores, std::span<const int> labels,
                   std::size_t k);

}  // namespace metrics
}  // namespace gode
