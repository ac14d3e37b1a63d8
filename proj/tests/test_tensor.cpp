#include <doctest.h>

#include <cmath>
#include <functional>

#include "gode/graph.hpp"
#include "gode/rng.hpp"
#include "gode/tensor.hpp"

using namespace gode;

namespace {

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
    Matrix m(r, c);
    for (auto& v : m.storage()) v = scale * rng.normal();
    return m;
}

// Central finite differences against the tape gradient for a scalar loss
// built by `build`. Checks every coordinate of every parameter.
void check_gradients(std::vector<Param*> params,
                     const std::function<double(bool)>& loss, double tol = 1e-4) {
    loss(true);  // fill grads
    std::vector<Matrix> grads;
    for (Param* p : params) grads.push_back(p->grad);
    const double h = 1e-4;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto& value = params[pi]->value.storage();
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double keep = value[i];
            value[i] = keep + h;
            const double up = loss(false);
            value[i] = keep - h;
            const double down = loss(false);
            value[i] = keep;
            const double fd = (up - down) / (2.0 * h);
            const double an = grads[pi].storage()[i];
            const double err = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1.0});
            CHECK(err < tol);
        }
    }
}

AttributedGraph tiny_graph(Rng& rng, std::size_t n = 6, std::size_t d = 4) {
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
            if (rng.uniform() < 0.5) edges.emplace_back(u, v);
        }
    }
    edges.emplace_back(0, 1);  // keep it connected enough
    Matrix x = random_matrix(rng, n, d);
    return build_graph(edges, std::move(x), false);
}

}  // namespace

TEST_CASE("matmul forward and pinned gradients") {
    Tape t;
    Param a(Matrix(1, 1, 2.0));
    Param b(Matrix(1, 1, 3.0));
    Tape::Id prod = t.matmul(t.leaf(a), t.leaf(b));
    CHECK(t.value(prod)(0, 0) == 6.0);
    a.zero_grad();
    b.zero_grad();
    t.backward(t.sum(prod));
    CHECK(a.grad(0, 0) == 3.0);
    CHECK(b.grad(0, 0) == 2.0);
}

TEST_CASE("identity matmul propagates gradients unchanged") {
    Rng rng(1);
    Matrix eye(3, 3);
    for (int i = 0; i < 3; ++i) eye(i, i) = 1.0;
    Param x(random_matrix(rng, 3, 2));
    x.zero_grad();
    Tape t;
    Tape::Id out = t.matmul(t.input(eye), t.leaf(x));
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(t.value(out).storage()[i] == doctest::Approx(x.value.storage()[i]));
    }
    t.backward(t.sum(out));
    for (double g : x.grad.storage()) CHECK(g == doctest::Approx(1.0));
}

TEST_CASE("elementwise activations match pinned values") {
    Tape t;
    Param x(Matrix(1, 2));
    x.value(0, 0) = -1.0;
    x.value(0, 1) = 2.0;
    Tape::Id r = t.relu(t.leaf(x));
    CHECK(t.value(r)(0, 0) == 0.0);
    CHECK(t.value(r)(0, 1) == 2.0);
    x.zero_grad();
    t.backward(t.sum(r));
    CHECK(x.grad(0, 0) == 0.0);
    CHECK(x.grad(0, 1) == 1.0);

    Tape t2;
    Param z(Matrix(1, 1, 0.0));
    Tape::Id s = t2.sigmoid(t2.leaf(z));
    CHECK(t2.value(s)(0, 0) == doctest::Approx(0.5));
    z.zero_grad();
    t2.backward(t2.sum(s));
    CHECK(z.grad(0, 0) == doctest::Approx(0.25));
}

TEST_CASE("every primitive passes finite-difference checks on random inputs") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        Param a(random_matrix(rng, 4, 3));
        Param b(random_matrix(rng, 3, 2));
        Param c(random_matrix(rng, 4, 2));
        Param bias(random_matrix(rng, 1, 2));
        const Matrix target = random_matrix(rng, 4, 2);
        Matrix weight = random_matrix(rng, 4, 2);
        for (auto& v : weight.storage()) v = std::abs(v) + 0.1;
        std::vector<double> row_w;
        for (int i = 0; i < 4; ++i) row_w.push_back(0.1 + rng.uniform());
        auto g = tiny_graph(rng, 4, 2);
        auto ahat = normalized_adjacency(g);

        SUBCASE("matmul") {
            check_gradients({&a, &b}, [&](bool grad) {
                if (grad) { a.zero_grad(); b.zero_grad(); }
                Tape t;
                Tape::Id l = t.frobenius_sq(t.matmul(t.leaf(a), t.leaf(b)), target);
                const double v = t.value(l)(0, 0);
                if (grad) t.backward(l);
                return v;
            });
        }
        SUBCASE("matmul_nt") {
            Param bt(random_matrix(rng, 2, 3));
            check_gradients({&a, &bt}, [&](bool grad) {
                if (grad) { a.zero_grad(); bt.zero_grad(); }
                Tape t;
                Tape::Id l = t.frobenius_sq(t.matmul_nt(t.leaf(a), t.leaf(bt)), target);
                const double v = t.value(l)(0, 0);
                if (grad) t.backward(l);
                return v;
            });
        }
        SUBCASE("spmm matches dense matmul exactly") {
            Param x(random_matrix(rng, 4, 2));
            Matrix dense = ahat.to_dense();
            Tape t;
            Tape::Id via_sparse = t.spmm(ahat, t.leaf(x));
            Tape::Id via_dense = t.matmul(t.input(dense), t.leaf(x));
            for (std::size_t i = 0; i < 8; ++i) {
                CHECK(t.value(via_sparse).storage()[i] ==
                      doctest::Approx(t.value(via_dense).storage()[i]).epsilon(1e-12));
            }
            check_gradients({&x}, [&](bool grad) {
                if (grad) x.zero_grad();
                Tape t2;
                Tape::Id l = t2.frobenius_sq(t2.spmm(ahat, t2.leaf(x)), target);
                const double v = t2.value(l)(0, 0);
                if (grad) t2.backward(l);
                return v;
            });
        }
        SUBCASE("activations and bias") {
            check_gradients({&a, &b, &bias}, [&](bool grad) {
                if (grad) { a.zero_grad(); b.zero_grad(); bias.zero_grad(); }
                Tape t;
                Tape::Id h = t.add_bias(t.matmul(t.leaf(a), t.leaf(b)), t.leaf(bias));
                // offset keeps values away from the relu/leaky kinks
                h = t.scale(h, 1.0);
                Tape::Id l1 = t.frobenius_sq(t.tanh(h), target);
                Tape::Id l2 = t.frobenius_sq(t.sigmoid(h), target);
                Tape::Id l = t.axpby(1.0, l1, 0.7, l2);
                const double v = t.value(l)(0, 0);
                if (grad) t.backward(l);
                return v;
            });
        }
        SUBCASE("relu and leaky_relu away from kinks") {
            // shift inputs so |h| stays > 1e-3: central differences stay clean
            Param x(random_matrix(rng, 4, 2));
            for (auto& v : x.value.storage()) {
                if (std::abs(v) < 0.05) v = v < 0 ? v - 0.1 : v + 0.1;
            }
            check_gradients({&x}, [&](bool grad) {
                if (grad) x.zero_grad();
                Tape t;
                Tape::Id l = t.axpby(1.0, t.frobenius_sq(t.relu(t.leaf(x)), target), 0.5,
                                     t.frobenius_sq(t.leaky_relu(t.leaf(x)), target));
                const double v = t.value(l)(0, 0);
                if (grad) t.backward(l);
                return v;
            });
        }
        SUBCASE("losses") {
            check_gradients({&c}, [&](bool grad) {
                if (grad) c.zero_grad();
                Tape t;
                Tape::Id pred = t.leaf(c);
                Tape::Id l = t.frobenius_sq(pred, target);
                l = t.axpby(1.0, l, 0.5, t.weighted_sq(pred, target, weight));
                l = t.axpby(1.0, l, 0.25, t.row_weighted_sq(pred, target, row_w));
                const double v = t.value(l)(0, 0);
                if (grad) t.backward(l);
                return v;
            });
        }
        SUBCASE("bce through sigmoid") {
            Matrix targets01(4, 2);
            for (auto& v : targets01.storage()) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
            check_gradients({&c}, [&](bool grad) {
                if (grad) c.zero_grad();
                Tape t;
                Tape::Id l = t.bce(t.sigmoid(t.leaf(c)), targets01, row_w);
                const double v = t.value(l)(0, 0);
                if (grad) t.backward(l);
                return v;
            });
        }
        SUBCASE("pair_dot, neighbor_sqdiff, sqdiff, contrastive, attention") {
            Param z(random_matrix(rng, 4, 3));
            Param z2(random_matrix(rng, 4, 3));
            Param src(random_matrix(rng, 4, 1, 0.3));
            Param dst(random_matrix(rng, 4, 1, 0.3));
            auto edges = g.edge_list();
            std::vector<std::uint8_t> mask{1, 0, 1, 0};
            const Matrix attn_target = random_matrix(rng, 4, 3);
            check_gradients({&z, &z2, &src, &dst}, [&](bool grad) {
                if (grad) { z.zero_grad(); z2.zero_grad(); src.zero_grad(); dst.zero_grad(); }
                Tape t;
                Tape::Id zi = t.leaf(z);
                Tape::Id zj = t.leaf(z2);
                Tape::Id l = t.sum(t.sigmoid(t.pair_dot(zi, zj, edges)));
                l = t.axpby(1.0, l, 0.5, t.neighbor_sqdiff(zi, g, row_w));
                l = t.axpby(1.0, l, 0.25, t.row_weighted_sqdiff(zi, zj, row_w));
                l = t.axpby(1.0, l, 0.5, t.contrastive_margin(zi, zj, mask, 1.0));
                l = t.axpby(1.0, l, 0.3,
                            t.frobenius_sq(
                                t.attention_aggregate(zi, t.leaf(src), t.leaf(dst), g),
                                attn_target));
                const double v = t.value(l)(0, 0);
                if (grad) t.backward(l);
                return v;
            });
        }
        SUBCASE("sigmoid_dot_recon fused op") {
            Param z(random_matrix(rng, 4, 3, 0.5));
            Matrix adj = dense_adjacency(g);
            Matrix w(4, 4);
            for (auto& v : w.storage()) v = 0.5 + rng.uniform();
            check_gradients({&z}, [&](bool grad) {
                if (grad) z.zero_grad();
                Tape t;
                Tape::Id l = t.sigmoid_dot_recon(t.leaf(z), adj, &w);
                const double v = t.value(l)(0, 0);
                if (grad) t.backward(l);
                return v;
            });
        }
    }
}

TEST_CASE("spmm on a single-edge normalized adjacency") {
    Matrix x(2, 1);
    x(0, 0) = 1.0;
    x(1, 0) = 3.0;
    auto g = build_graph(std::vector<Edge>{{0, 1}}, Matrix(2, 1), false);
    auto ahat = normalized_adjacency(g);
    Tape t;
    Tape::Id out = t.spmm(ahat, t.input(x));
    CHECK(t.value(out)(0, 0) == doctest::Approx(2.0));
    CHECK(t.value(out)(1, 0) == doctest::Approx(2.0));
}

TEST_CASE("dropout semantics") {
    Rng rng(77);
    Matrix x(100, 50, 1.0);
    Tape t;
    Tape::Id in = t.input(x);
    CHECK(t.dropout(in, 0.0, true, rng) == in);   // p = 0: identity
    CHECK(t.dropout(in, 0.3, false, rng) == in);  // eval mode: identity

    const double p = 0.3;
    Tape::Id out = t.dropout(in, p, true, rng);
    std::size_t survivors = 0;
    for (double v : t.value(out).storage()) {
        if (v != 0.0) {
            CHECK(v == doctest::Approx(1.0 / 0.7));
            ++survivors;
        }
    }
    // survivor fraction within 3 sigma of 1 - p
    const double nels = 5000.0;
    const double sigma = std::sqrt(p * (1 - p) / nels);
    CHECK(std::abs(double(survivors) / nels - 0.7) < 3.0 * sigma);
    CHECK_THROWS(t.dropout(in, 1.0, true, rng));
}

TEST_CASE("adam pinned first step and convergence on a quadratic") {
    // zero gradient, zero weight decay: parameters unchanged
    {
        Param w(Matrix(2, 2, 1.5));
        w.zero_grad();
        Adam opt(0.1, 0.0);
        std::vector<Param*> ps{&w};
        opt.step(ps);
        for (double v : w.value.storage()) CHECK(v == 1.5);
    }
    // constant gradient 1, lr 0.1: first step ~ -0.1
    {
        Param w(Matrix(1, 1, 0.7));
        w.zero_grad();
        w.grad(0, 0) = 1.0;
        Adam opt(0.1, 0.0);
        std::vector<Param*> ps{&w};
        opt.step(ps);
        CHECK(w.value(0, 0) == doctest::Approx(0.6).epsilon(1e-6));
    }
    // convex quadratic: the loss collapses over 100 steps (Adam wiggles near
    // the optimum, so the check is on the overall decrease)
    {
        Rng rng(3);
        Param w(random_matrix(rng, 3, 1));
        Adam opt(0.05, 0.0);
        std::vector<Param*> ps{&w};
        const Matrix target = random_matrix(rng, 3, 1);
        double first = 0.0, last = 0.0;
        for (int step = 0; step < 100; ++step) {
            w.zero_grad();
            Tape t;
            Tape::Id l = t.frobenius_sq(t.leaf(w), target);
            const double lv = t.value(l)(0, 0);
            if (step == 0) first = lv;
            last = lv;
            t.backward(l);
            opt.step(ps);
        }
        CHECK(last < 1e-2 * first);
        CHECK(last < 1e-2);
    }
}

TEST_CASE("training is bit-deterministic given the seed") {
    auto run = [] {
        Rng rng(42);
        Param w(random_matrix(rng, 4, 4));
        Param b(random_matrix(rng, 1, 4));
        Adam opt(0.05, 0.01);
        std::vector<Param*> ps{&w, &b};
        const Matrix x = random_matrix(rng, 6, 4);
        const Matrix target = random_matrix(rng, 6, 4);
        for (int e = 0; e < 20; ++e) {
            for (Param* p : ps) p->zero_grad();
            Tape t;
            Tape::Id h = t.add_bias(t.matmul(t.input(x), t.leaf(w)), t.leaf(b));
            Tape::Id l = t.frobenius_sq(t.relu(h), target);
            t.backward(l);
            opt.step(ps);
        }
        return w.value.storage();
    };
    CHECK(run() == run());
}

TEST_CASE("losses at the optimum are zero with zero gradient") {
    Param w(Matrix(2, 3, 0.25));
    const Matrix target(2, 3, 0.25);
    w.zero_grad();
    Tape t;
    Tape::Id l = t.frobenius_sq(t.leaf(w), target);
    CHECK(t.value(l)(0, 0) == 0.0);
    t.backward(l);
    for (double g : w.grad.storage()) CHECK(g == 0.0);
}

TEST_CASE("frobenius_sq pinned example") {
    Tape t;
    Matrix pred(1, 2);
    pred(0, 0) = 1.0;
    const Matrix target(1, 2);
    CHECK(t.value(t.frobenius_sq(t.input(pred), target))(0, 0) == 1.0);
}

TEST_CASE("glorot initialization respects the fan bound") {
    Rng rng(9);
    Matrix w(30, 20);
    glorot_uniform(w, rng);
    const double limit = std::sqrt(6.0 / 50.0);
    for (double v : w.storage()) {
        CHECK(std::abs(v) <= limit);
    }
}
