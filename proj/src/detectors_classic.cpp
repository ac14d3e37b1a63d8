#include "gode/detectors_classic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "gode/error.hpp"
#include "gode/matrix.hpp"
#include "gode/rng.hpp"

namespace gode {
namespace classic {

namespace {

constexpr double kInfLrd = 1e10;

double sq_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Average unsuccessful-search path length in a BST of n nodes.
double avg_path_length(std::size_t n) {
    if (n < 2) return 0.0;
    if (n == 2) return 1.0;
    const double h = std::log(double(n - 1)) + 0.5772156649015329;
    return 2.0 * h - 2.0 * double(n - 1) / double(n);
}

}  // namespace

ScoreVector lof_fit(const AttributedGraph& g, const LofParams& p) {
    const std::size_t n = g.num_nodes();
    const std::size_t k = p.k_neighbors;
    if (k < 1 || k >= n) {
        throw ValidationError("lof needs 1 <= k < num_nodes, got k=" + std::to_string(k));
    }

    // Brute-force kNN with ties: neighborhood = all points within the k-distance.
    std::vector<std::vector<std::size_t>> nbrs(n);
    std::vector<std::vector<double>> nbr_dist(n);
    std::vector<double> kdist(n);
    std::vector<double> dists(n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = g.feature_row(NodeId(i));
        for (std::size_t j = 0; j < n; ++j) {
            dists[j] = j == i ? std::numeric_limits<double>::infinity()
                              : std::sqrt(sq_distance(xi, g.feature_row(NodeId(j))));
        }
        std::iota(order.begin(), order.end(), 0);
        std::nth_element(order.begin(), order.begin() + k - 1, order.end(),
                         [&](std::size_t a, std::size_t b) { return dists[a] < dists[b]; });
        kdist[i] = dists[order[k - 1]];
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && dists[j] <= kdist[i]) {
                nbrs[i].push_back(j);
                nbr_dist[i].push_back(dists[j]);
            }
        }
    }

    std::vector<double> lrd(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t t = 0; t < nbrs[i].size(); ++t) {
            sum += std::max(kdist[nbrs[i][t]], nbr_dist[i][t]);
        }
        lrd[i] = sum > 0.0 ? double(nbrs[i].size()) / sum : kInfLrd;
    }

    ScoreVector score(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j : nbrs[i]) s += lrd[j];
        score[i] = s / (double(nbrs[i].size()) * lrd[i]);
    }
    return score;
}

namespace {

struct ITreeNode {
    int feature = -1;  // -1: leaf
    double split = 0.0;
    std::int32_t left = -1, right = -1;
    std::size_t size = 0;
};

struct ITree {
    std::vector<ITreeNode> nodes;

    std::int32_t build(const Matrix& x, std::vector<std::size_t>& idx, std::size_t lo,
                       std::size_t hi, std::size_t depth, std::size_t max_depth, Rng& rng) {
        const std::size_t count = hi - lo;
        if (count <= 1 || depth >= max_depth) {
            nodes.push_back({-1, 0.0, -1, -1, count});
            return std::int32_t(nodes.size() - 1);
        }
        // Candidate features with spread; leaf out when all rows identical.
        std::vector<int> candidates;
        for (std::size_t f = 0; f < x.cols(); ++f) {
            double mn = x(idx[lo], f), mx = mn;
            for (std::size_t t = lo + 1; t < hi; ++t) {
                mn = std::min(mn, x(idx[t], f));
                mx = std::max(mx, x(idx[t], f));
            }
            if (mx > mn) candidates.push_back(int(f));
        }
        if (candidates.empty()) {
            nodes.push_back({-1, 0.0, -1, -1, count});
            return std::int32_t(nodes.size() - 1);
        }
        const int f = candidates[rng.index(candidates.size())];
        double mn = x(idx[lo], f), mx = mn;
        for (std::size_t t = lo + 1; t < hi; ++t) {
            mn = std::min(mn, x(idx[t], std::size_t(f)));
            mx = std::max(mx, x(idx[t], std::size_t(f)));
        }
        const double split = rng.uniform(mn, mx);
        auto mid_it = std::partition(idx.begin() + lo, idx.begin() + hi,
                                     [&](std::size_t r) { return x(r, std::size_t(f)) < split; });
        const std::size_t mid = std::size_t(mid_it - idx.begin());
        if (mid == lo || mid == hi) {
            nodes.push_back({-1, 0.0, -1, -1, count});
            return std::int32_t(nodes.size() - 1);
        }
        const std::int32_t self = std::int32_t(nodes.size());
        nodes.push_back({f, split, -1, -1, count});
        const std::int32_t l = build(x, idx, lo, mid, depth + 1, max_depth, rng);
        const std::int32_t r = build(x, idx, mid, hi, depth + 1, max_depth, rng);
        nodes[std::size_t(self)].left = l;
        nodes[std::size_t(self)].right = r;
        return self;
    }

    double path_length(std::span<const double> row) const {
        std::int32_t cur = 0;
        double depth = 0.0;
        while (nodes[std::size_t(cur)].feature >= 0) {
            const auto& nd = nodes[std::size_t(cur)];
            cur = row[std::size_t(nd.feature)] < nd.split ? nd.left : nd.right;
            depth += 1.0;
        }
        return depth + avg_path_length(nodes[std::size_t(cur)].size);
    }
};

}  // namespace

ScoreVector iforest_fit(const AttributedGraph& g, const IForestParams& p) {
    const std::size_t n = g.num_nodes();
    if (p.num_trees < 1) throw ValidationError("iforest needs at least one tree");
    const std::size_t psi = std::min(p.subsample, n);
    const std::size_t max_depth = std::size_t(std::ceil(std::log2(std::max<std::size_t>(psi, 2))));
    Rng rng(p.seed);

    std::vector<ITree> forest(p.num_trees);
    for (auto& tree : forest) {
        auto sample = rng.sample_without_replacement(n, psi);
        tree.build(g.features(), sample, 0, psi, 0, max_depth, rng);
    }

    const double c = avg_path_length(psi);
    ScoreVector score(n);
    for (std::size_t i = 0; i < n; ++i) {
        double h = 0.0;
        for (const auto& tree : forest) h += tree.path_length(g.feature_row(NodeId(i)));
        h /= double(p.num_trees);
        score[i] = std::pow(2.0, -h / std::max(c, 1e-12));
    }
    return score;
}

ScoreVector scan_fit(const AttributedGraph& g0, const ScanParams& p) {
    if (p.eps <= 0.0 || p.eps > 1.0) throw ValidationError("scan needs eps in (0, 1]");
    if (p.mu < 2) throw ValidationError("scan needs mu >= 2");
    const AttributedGraph g = symmetrized(g0);
    const std::size_t n = g.num_nodes();

    // Structural similarity over closed neighborhoods via sorted-list
    // intersection; |closed(u) ^ closed(v)| = |N(u) ^ N(v)| + [u in N(v)] + [v in N(u)].
    auto sigma = [&](NodeId u, NodeId v) {
        auto nu = g.neighbors(u);
        auto nv = g.neighbors(v);
        std::size_t common = 0;
        std::size_t a = 0, b = 0;
        while (a < nu.size() && b < nv.size()) {
            if (nu[a] == nv[b]) { ++common, ++a, ++b; }
            else if (nu[a] < nv[b]) ++a;
            else ++b;
        }
        common += 2;  // u,v adjacent: u in closed(v), v in closed(u)
        return double(common) /
               std::sqrt(double(nu.size() + 1) * double(nv.size() + 1));
    };

    // Epsilon-neighborhood sizes (self always qualifies, sigma(u,u)=1).
    std::vector<std::vector<NodeId>> eps_nbr(n);
    std::vector<double> max_sigma(n, 0.0);
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v : g.neighbors(u)) {
            if (v < u) continue;
            const double s = sigma(u, v);
            max_sigma[u] = std::max(max_sigma[u], s);
            max_sigma[v] = std::max(max_sigma[v], s);
            if (s >= p.eps) {
                eps_nbr[u].push_back(v);
                eps_nbr[v].push_back(u);
            }
        }
    }
    std::vector<bool> core(n);
    for (NodeId u = 0; u < n; ++u) core[u] = eps_nbr[u].size() + 1 >= p.mu;

    // Grow clusters from cores; non-core reachable nodes join as border members.
    std::vector<std::int64_t> cluster(n, -1);
    std::int64_t next_cluster = 0;
    for (NodeId u = 0; u < n; ++u) {
        if (!core[u] || cluster[u] != -1) continue;
        std::queue<NodeId> q;
        q.push(u);
        cluster[u] = next_cluster;
        while (!q.empty()) {
            const NodeId w = q.front();
            q.pop();
            if (!core[w]) continue;
            for (NodeId v : eps_nbr[w]) {
                if (cluster[v] == -1) {
                    cluster[v] = next_cluster;
                    q.push(v);
                }
            }
        }
        ++next_cluster;
    }

    ScoreVector score(n);
    for (NodeId u = 0; u < n; ++u) {
        double band = 0.0;
        if (cluster[u] != -1) {
            band = 1.0;
        } else {
            // Hub: adjacent to two or more distinct clusters.
            std::int64_t seen = -1;
            for (NodeId v : g.neighbors(u)) {
                if (cluster[v] == -1) continue;
                if (seen == -1) seen = cluster[v];
                else if (cluster[v] != seen) { band = 0.5; break; }
            }
        }
        // sigma tie-break keeps a total order inside each band
        score[u] = band == 0.0 && g.degree(u) == 0 ? 0.0
                                                   : band + 1e-4 * max_sigma[u];
    }
    return score;
}

namespace {

double spectral_norm_sq(const Matrix& x) {
    // Largest eigenvalue of X^T X via power iteration on the d x d Gram matrix.
    const std::size_t d = x.cols();
    Matrix gram = matmul_tn(x, x);
    std::vector<double> v(d, 1.0 / std::sqrt(double(d)));
    std::vector<double> w(d);
    double lambda = 0.0;
    for (int it = 0; it < 50; ++it) {
        for (std::size_t i = 0; i < d; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += gram(i, j) * v[j];
            w[i] = s;
        }
        double norm = 0.0;
        for (double z : w) norm += z * z;
        norm = std::sqrt(norm);
        if (norm == 0.0) return 0.0;
        for (std::size_t i = 0; i < d; ++i) v[i] = w[i] / norm;
        lambda = norm;
    }
    return lambda;
}

// Row-wise l2,1 proximal shrinkage: row <- row * max(0, 1 - t/||row||).
void prox_rows(Matrix& m, double t) {
    if (t <= 0.0) return;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        double norm = 0.0;
        for (double v : row) norm += v * v;
        norm = std::sqrt(norm);
        const double scale = norm > t ? 1.0 - t / norm : 0.0;
        for (auto& v : row) v *= scale;
    }
}

void prox_cols(Matrix& m, double t) {
    if (t <= 0.0) return;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double norm = 0.0;
        for (std::size_t r = 0; r < m.rows(); ++r) norm += m(r, c) * m(r, c);
        norm = std::sqrt(norm);
        const double scale = norm > t ? 1.0 - t / norm : 0.0;
        for (std::size_t r = 0; r < m.rows(); ++r) m(r, c) *= scale;
    }
}

double l21_norm(const Matrix& m) {
    double s = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double norm = 0.0;
        for (double v : m.row(r)) norm += v * v;
        s += std::sqrt(norm);
    }
    return s;
}

double l21_norm_cols(const Matrix& m) {
    double s = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double norm = 0.0;
        for (std::size_t r = 0; r < m.rows(); ++r) norm += m(r, c) * m(r, c);
        s += std::sqrt(norm);
    }
    return s;
}

struct ResidualFit {
    Matrix r;
    std::vector<double> loss_trace;
};

// Proximal gradient descent on the residual objective. Step sizes are the
// grid lr scaled by per-block curvature bounds, which keeps every grid point
// stable and makes the trajectory scale-equivariant in X.
ResidualFit residual_solve(const AttributedGraph& g0, const ResidualParams& p,
                           bool column_penalty, bool trace) {
    const AttributedGraph g = symmetrized(g0);
    const std::size_t n = g.num_nodes();
    const Matrix& x = g.features();

    // Unnormalized Laplacian L = D - A as an operator: (L R) = D R - A R.
    auto laplacian_apply = [&](const Matrix& r) {
        Matrix out(n, r.cols());
        for (NodeId u = 0; u < n; ++u) {
            auto orow = out.row(u);
            auto rrow = r.row(u);
            const double deg = double(g.degree(u));
            for (std::size_t c = 0; c < r.cols(); ++c) orow[c] = deg * rrow[c];
            for (NodeId v : g.neighbors(u)) {
                auto rv = r.row(v);
                for (std::size_t c = 0; c < r.cols(); ++c) orow[c] -= rv[c];
            }
        }
        return out;
    };

    std::size_t dmax = 0;
    for (NodeId u = 0; u < n; ++u) dmax = std::max(dmax, g.degree(u));
    const double lip_w = 2.0 * std::max(spectral_norm_sq(x), 1e-12);
    const double lip_r = 2.0 + 2.0 * p.gamma_l * 2.0 * double(dmax);
    // Factor 2 on each block bounds simultaneous two-block descent.
    const double eta_w = p.lr / (2.0 * lip_w);
    const double eta_r = p.lr / (2.0 * lip_r);

    Matrix w(n, n);
    Matrix r(n, x.cols());
    ResidualFit fit;
    Matrix wx(n, x.cols());
    for (std::size_t epoch = 0; epoch < p.epochs; ++epoch) {
        gemm(w, x, wx);
        Matrix e = x;  // E = X - WX - R
        for (std::size_t i = 0; i < e.size(); ++i) {
            e.storage()[i] -= wx.storage()[i] + r.storage()[i];
        }

        if (trace) {
            double loss = 0.0;
            for (double v : e.storage()) loss += v * v;
            loss += p.alpha_w * l21_norm(w);
            if (column_penalty) loss += p.alpha_w * l21_norm_cols(w);
            loss += p.beta_r * l21_norm(r);
            Matrix lr_ = laplacian_apply(r);
            for (std::size_t i = 0; i < r.size(); ++i) {
                loss += p.gamma_l * r.storage()[i] * lr_.storage()[i];
            }
            fit.loss_trace.push_back(loss);
        }

        // W step: grad = -2 E X^T, then row (and optionally column) shrinkage.
        Matrix gw = matmul_nt(e, x);
        for (std::size_t i = 0; i < w.size(); ++i) {
            w.storage()[i] += 2.0 * eta_w * gw.storage()[i];
        }
        prox_rows(w, eta_w * p.alpha_w);
        if (column_penalty) prox_cols(w, eta_w * p.alpha_w);

        // R step: grad = -2 E + 2 gamma L R, then row shrinkage.
        Matrix lr_ = laplacian_apply(r);
        for (std::size_t i = 0; i < r.size(); ++i) {
            r.storage()[i] += eta_r * (2.0 * e.storage()[i] -
                                       2.0 * p.gamma_l * lr_.storage()[i]);
        }
        prox_rows(r, eta_r * p.beta_r);

        double probe = 0.0;
        for (double v : r.storage()) probe += v;
        for (double v : w.storage()) probe += v;
        if (!std::isfinite(probe)) {
            throw DivergenceError("residual detector diverged at epoch " +
                                  std::to_string(epoch));
        }
    }
    fit.r = std::move(r);
    return fit;
}

ScoreVector residual_scores(const Matrix& r) {
    ScoreVector s(r.rows());
    for (std::size_t i = 0; i < r.rows(); ++i) {
        double norm = 0.0;
        for (double v : r.row(i)) norm += v * v;
        s[i] = std::sqrt(norm);
    }
    return s;
}

}  // namespace

ScoreVector radar_fit(const AttributedGraph& g, const ResidualParams& p, std::uint64_t) {
    return residual_scores(residual_solve(g, p, false, false).r);
}

ScoreVector anomalous_fit(const AttributedGraph& g, const ResidualParams& p, std::uint64_t) {
    return residual_scores(residual_solve(g, p, true, false).r);
}

std::vector<double> residual_loss_trace(const AttributedGraph& g, const ResidualParams& p,
                                        bool column_penalty) {
    return residual_solve(g, p, column_penalty, true).loss_trace;
}

}  // namespace classic
}  // namespace gode
