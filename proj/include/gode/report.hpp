#pragma once

#include <string>
#include <vector>

#include "gode/bench.hpp"

namespace gode {
namespace report {

// Markdown report: per-metric tables of "mean±std (max)" cells in percent
// (two decimals), one row per algorithm and one column per dataset, plus
// runtime/memory summaries. per_type adds contextual/structural AUC columns.
std::string markdown(const std::vector<bench::AggregateRow>& rows, bool per_type);

// Flat CSV of the aggregates.
std::string csv(const std::vector<bench::AggregateRow>& rows);

}  // namespace report
}  // namespace gode
