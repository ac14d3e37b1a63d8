#pragma once

#include <cstdint>

#include "gode/graph.hpp"

namespace gode {
namespace classic {

struct LofParams {
    std::size_t k_neighbors = 20;
};

// Local outlier factor on feature rows only; graph structure ignored.
ScoreVector lof_fit(const AttributedGraph& g, const LofParams& p);

struct IForestParams {
    std::size_t num_trees = 100;
    std::size_t subsample = 256;  // capped at n
    std::uint64_t seed = 0;
};

// Isolation forest on feature rows; score = 2^(-E[h]/c(psi)).
ScoreVector iforest_fit(const AttributedGraph& g, const IForestParams& p);

struct ScanParams {
    double eps = 0.5;
    std::size_t mu = 2;
};

// Structural clustering; cluster members score 1.0, hubs 0.5, outliers 0.0,
// with a small sigma-based tie-break inside each band.
ScoreVector scan_fit(const AttributedGraph& g, const ScanParams& p);

struct ResidualParams {
    double alpha_w = 0.01;  // projection penalty ||W||_{2,1}
    double beta_r = 0.01;   // residual penalty ||R||_{2,1}
    double gamma_l = 0.01;  // graph smoothness tr(R^T L R)
    double lr = 0.01;       // relative step; scaled by the curvature bound per block
    std::size_t epochs = 300;
};

// min ||X - WX - R||_F^2 + aw*||W||_{2,1} + br*||R||_{2,1} + gl*tr(R^T L R),
// L = D - A, by proximal gradient descent with per-block normalized steps.
// score_i = ||R_i||_2.
ScoreVector radar_fit(const AttributedGraph& g, const ResidualParams& p, std::uint64_t seed);

// Radar objective plus the attribute-selection penalty aw*||W^T||_{2,1}
// (column sparsity on the projection).
ScoreVector anomalous_fit(const AttributedGraph& g, const ResidualParams& p,
                          std::uint64_t seed);

// Exposed for the residual-detector tests: epoch-by-epoch objective values.
std::vector<double> residual_loss_trace(const AttributedGraph& g, const ResidualParams& p,
                                        bool column_penalty);

}  // namespace classic
}  // namespace gode
