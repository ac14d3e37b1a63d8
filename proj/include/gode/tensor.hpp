#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "gode/graph.hpp"
#include "gode/matrix.hpp"
#include "gode/rng.hpp"

namespace gode {

// Trainable parameter: value plus gradient accumulator and Adam moments.
struct Param {
    Matrix value;
    Matrix grad;
    Matrix m;
    Matrix v;

    explicit Param(Matrix init = {}) : value(std::move(init)) {
        grad = Matrix(value.rows(), value.cols());
    }

    void zero_grad() {
        if (!grad.same_shape(value)) grad = Matrix(value.rows(), value.cols());
        grad.fill(0.0);
    }
};

void glorot_uniform(Matrix& w, Rng& rng);

// Adam with decoupled weight decay. Step count lives here; moments live in
// the params so optimizer state shape-matches parameters by construction.
class Adam {
public:
    Adam(double lr, double weight_decay) : lr_(lr), weight_decay_(weight_decay) {}

    void step(std::span<Param* const> params);
    std::uint64_t step_count() const noexcept { return step_count_; }
    double lr() const noexcept { return lr_; }

private:
    double lr_;
    double weight_decay_;
    std::uint64_t step_count_ = 0;
};

// Reverse-mode tape over dense matrices. Nodes are created in execution order
// and the backward pass walks them strictly in reverse; tensors recorded on
// the tape are never mutated in place.
class Tape {
public:
    using Id = std::int32_t;

    // Constant leaf (no gradient).
    Id input(Matrix value);
    // Constant leaf that borrows the matrix instead of copying it; the
    // referenced matrix must outlive the tape pass.
    Id input_ref(const Matrix& value);
    // Parameter leaf; backward accumulates into p.grad. The param must
    // outlive the tape pass.
    Id leaf(Param& p);

    Id matmul(Id a, Id b);
    // a * b^T
    Id matmul_nt(Id a, Id b);
    Id spmm(const SparseMatrix& s, Id x);
    Id add(Id a, Id b);
    Id sub(Id a, Id b);
    Id hadamard(Id a, Id b);
    Id scale(Id a, double c);
    // Broadcast-add a 1 x cols bias row to every row.
    Id add_bias(Id a, Id bias);

    Id relu(Id a);
    Id leaky_relu(Id a, double slope = 0.2);
    Id sigmoid(Id a);
    Id tanh(Id a);

    // Training mode zeroes entries w.p. p and rescales survivors by 1/(1-p);
    // eval mode is the identity.
    Id dropout(Id a, double p, bool training, Rng& rng);

    // E x 1 of dot(a_row[u], b_row[v]) over the given pairs.
    Id pair_dot(Id a, Id b, std::span<const Edge> pairs);

    // Single-head attention aggregation over closed neighborhoods:
    // raw score e_ij = leaky_relu(src_i + dst_j), alpha = softmax over
    // j in N(i) u {i}, out_i = sum_j alpha_ij x_j. src/dst are n x 1.
    Id attention_aggregate(Id x, Id src, Id dst, const AttributedGraph& g,
                           double slope = 0.2);

    // ---- scalar losses ----
    // Constant matrices passed to the losses are captured by reference and
    // must outlive the backward pass; temporaries are rejected.
    // sum((pred - target)^2)
    Id frobenius_sq(Id pred, const Matrix& target);
    Id frobenius_sq(Id, Matrix&&) = delete;
    // sum(w . (pred - target)^2), w an elementwise constant weight
    Id weighted_sq(Id pred, const Matrix& target, const Matrix& weight);
    Id weighted_sq(Id, Matrix&&, const Matrix&) = delete;
    Id weighted_sq(Id, const Matrix&, Matrix&&) = delete;
    // sum_i w_i * ||pred_i - target_i||^2 with constant per-row weights
    Id row_weighted_sq(Id pred, const Matrix& target, std::span<const double> row_w);
    Id row_weighted_sq(Id, Matrix&&, std::span<const double>) = delete;
    // sum_i w_i * ||a_i - b_i||^2, both differentiable
    Id row_weighted_sqdiff(Id a, Id b, std::span<const double> row_w);
    // binary cross-entropy on probabilities, clamped to [1e-7, 1 - 1e-7];
    // row_w optional per-row weights. Targets are copied (they are small
    // 0/1 vectors in practice).
    Id bce(Id probs, Matrix targets, std::span<const double> row_w = {});
    // sum_i w_i * sum_{j in N(i)} ||h_i - h_j||^2
    Id neighbor_sqdiff(Id h, const AttributedGraph& g, std::span<const double> row_w);
    // sum_{i unperturbed} ||a_i - b_i||^2 + sum_{i perturbed} max(0, margin - ||a_i - b_i||)^2
    Id contrastive_margin(Id a, Id b, std::span<const std::uint8_t> perturbed, double margin);
    // Fused sigmoid(z z^T) reconstruction of a dense adjacency under an
    // optional elementwise weight; avoids materializing the n^2 gradient.
    // loss = sum(w . (sigmoid(z z^T) - target)^2)
    Id sigmoid_dot_recon(Id z, const Matrix& target, const Matrix* weight = nullptr);

    Id sum(Id a);
    // c1 * a + c2 * b elementwise (same shape; used to combine scalar losses)
    Id axpby(double c1, Id a, double c2, Id b);

    const Matrix& value(Id id) const {
        const Node& n = *nodes_[std::size_t(id)];
        return n.ref ? *n.ref : n.value;
    }
    const Matrix& grad(Id id) const { return nodes_[std::size_t(id)]->grad; }

    void backward(Id loss);
    // Drops all nodes; params keep their accumulated grads.
    void clear();

    std::size_t num_nodes() const noexcept { return nodes_.size(); }

private:
    struct Node {
        Matrix value;
        const Matrix* ref = nullptr;
        Matrix grad;
        bool needs_grad = false;
        std::function<void(Tape&, Node&)> back;
    };

    Node& node(Id id) { return *nodes_[std::size_t(id)]; }
    Id push(Matrix value, bool needs_grad, std::function<void(Tape&, Node&)> back);
    void ensure_grad(Id id);
    void accumulate(Id id, const Matrix& g);
    friend struct TapeAccess;

    std::vector<std::unique_ptr<Node>> nodes_;
};

// Per-row L2 reconstruction errors ||pred_i - target_i||_2 (plain eval helper).
std::vector<double> row_errors(const Matrix& pred, const Matrix& target);
// Per-row squared errors.
std::vector<double> row_sq_errors(const Matrix& pred, const Matrix& target);

}  // namespace gode
