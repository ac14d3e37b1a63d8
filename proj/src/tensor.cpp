#include "gode/tensor.hpp"

#include <cassert>
#include <cmath>

#include "gode/error.hpp"

namespace gode {

namespace {
constexpr double kBceClamp = 1e-7;

double clamp_prob(double p) {
    if (p < kBceClamp) return kBceClamp;
    if (p > 1.0 - kBceClamp) return 1.0 - kBceClamp;
    return p;
}
}  // namespace

void glorot_uniform(Matrix& w, Rng& rng) {
    const double limit = std::sqrt(6.0 / double(w.rows() + w.cols()));
    for (auto& v : w.storage()) v = rng.uniform(-limit, limit);
}

void Adam::step(std::span<Param* const> params) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++step_count_;
    const double bc1 = 1.0 - std::pow(b1, double(step_count_));
    const double bc2 = 1.0 - std::pow(b2, double(step_count_));
    for (Param* p : params) {
        if (!p->m.same_shape(p->value)) {
            p->m = Matrix(p->value.rows(), p->value.cols());
            p->v = Matrix(p->value.rows(), p->value.cols());
        }
        auto& w = p->value.storage();
        auto& g = p->grad.storage();
        auto& m = p->m.storage();
        auto& v = p->v.storage();
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (weight_decay_ != 0.0) w[i] -= lr_ * weight_decay_ * w[i];
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            w[i] -= lr_ * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
        }
    }
}

Tape::Id Tape::push(Matrix value, bool needs_grad, std::function<void(Tape&, Node&)> back) {
    auto n = std::make_unique<Node>();
    n->value = std::move(value);
    n->needs_grad = needs_grad;
    n->back = std::move(back);
    nodes_.push_back(std::move(n));
    return Id(nodes_.size() - 1);
}

void Tape::ensure_grad(Id id) {
    Node& n = node(id);
    if (!n.grad.same_shape(n.value)) {
        n.grad = Matrix(n.value.rows(), n.value.cols());
    }
}

void Tape::accumulate(Id id, const Matrix& g) {
    Node& n = node(id);
    if (!n.needs_grad) return;
    ensure_grad(id);
    assert(n.grad.same_shape(g));
    auto& dst = n.grad.storage();
    const auto& src = g.storage();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

Tape::Id Tape::input(Matrix value) { return push(std::move(value), false, nullptr); }

Tape::Id Tape::input_ref(const Matrix& value) {
    Id id = push(Matrix(), false, nullptr);
    node(id).ref = &value;
    return id;
}

Tape::Id Tape::leaf(Param& p) {
    Matrix v = p.value;  // snapshot: later in-place optimizer steps cannot alias
    Id id = push(std::move(v), true, [&p](Tape& t, Node& self) {
        if (!p.grad.same_shape(p.value)) p.zero_grad();
        auto& dst = p.grad.storage();
        const auto& src = self.grad.storage();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
        (void)t;
    });
    return id;
}

Tape::Id Tape::matmul(Id a, Id b) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    if (av.cols() != bv.rows()) throw ValidationError("matmul inner dimension mismatch");
    Matrix out = gode::matmul(av, bv);
    const bool ng = node(a).needs_grad || node(b).needs_grad;
    return push(std::move(out), ng, [a, b](Tape& t, Node& self) {
        t.accumulate(a, gode::matmul_nt(self.grad, t.value(b)));
        t.accumulate(b, gode::matmul_tn(t.value(a), self.grad));
    });
}

Tape::Id Tape::matmul_nt(Id a, Id b) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    if (av.cols() != bv.cols()) throw ValidationError("matmul_nt inner dimension mismatch");
    Matrix out = gode::matmul_nt(av, bv);
    const bool ng = node(a).needs_grad || node(b).needs_grad;
    return push(std::move(out), ng, [a, b](Tape& t, Node& self) {
        t.accumulate(a, gode::matmul(self.grad, t.value(b)));
        t.accumulate(b, gode::matmul_tn(self.grad, t.value(a)));
    });
}

Tape::Id Tape::spmm(const SparseMatrix& s, Id x) {
    const Matrix& xv = value(x);
    if (s.cols != xv.rows()) throw ValidationError("spmm dimension mismatch");
    Matrix out = s.multiply(xv);
    return push(std::move(out), node(x).needs_grad, [&s, x](Tape& t, Node& self) {
        t.accumulate(x, s.multiply_transposed(self.grad));
    });
}

Tape::Id Tape::add(Id a, Id b) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    if (!av.same_shape(bv)) throw ValidationError("add shape mismatch");
    Matrix out = av;
    for (std::size_t i = 0; i < out.size(); ++i) out.storage()[i] += bv.storage()[i];
    const bool ng = node(a).needs_grad || node(b).needs_grad;
    return push(std::move(out), ng, [a, b](Tape& t, Node& self) {
        t.accumulate(a, self.grad);
        t.accumulate(b, self.grad);
    });
}

Tape::Id Tape::sub(Id a, Id b) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    if (!av.same_shape(bv)) throw ValidationError("sub shape mismatch");
    Matrix out = av;
    for (std::size_t i = 0; i < out.size(); ++i) out.storage()[i] -= bv.storage()[i];
    const bool ng = node(a).needs_grad || node(b).needs_grad;
    return push(std::move(out), ng, [a, b](Tape& t, Node& self) {
        t.accumulate(a, self.grad);
        Matrix neg = self.grad;
        for (auto& v : neg.storage()) v = -v;
        t.accumulate(b, neg);
    });
}

Tape::Id Tape::hadamard(Id a, Id b) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    if (!av.same_shape(bv)) throw ValidationError("hadamard shape mismatch");
    Matrix out = av;
    for (std::size_t i = 0; i < out.size(); ++i) out.storage()[i] *= bv.storage()[i];
    const bool ng = node(a).needs_grad || node(b).needs_grad;
    return push(std::move(out), ng, [a, b](Tape& t, Node& self) {
        Matrix ga = self.grad;
        for (std::size_t i = 0; i < ga.size(); ++i) ga.storage()[i] *= t.value(b).storage()[i];
        t.accumulate(a, ga);
        Matrix gb = self.grad;
        for (std::size_t i = 0; i < gb.size(); ++i) gb.storage()[i] *= t.value(a).storage()[i];
        t.accumulate(b, gb);
    });
}

Tape::Id Tape::scale(Id a, double c) {
    Matrix out = value(a);
    for (auto& v : out.storage()) v *= c;
    return push(std::move(out), node(a).needs_grad, [a, c](Tape& t, Node& self) {
        Matrix g = self.grad;
        for (auto& v : g.storage()) v *= c;
        t.accumulate(a, g);
    });
}

Tape::Id Tape::add_bias(Id a, Id bias) {
    const Matrix& av = value(a);
    const Matrix& bv = value(bias);
    if (bv.rows() != 1 || bv.cols() != av.cols()) {
        throw ValidationError("bias must be 1 x cols");
    }
    Matrix out = av;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        for (std::size_t c = 0; c < out.cols(); ++c) row[c] += bv(0, c);
    }
    const bool ng = node(a).needs_grad || node(bias).needs_grad;
    return push(std::move(out), ng, [a, bias](Tape& t, Node& self) {
        t.accumulate(a, self.grad);
        Matrix gb(1, self.grad.cols());
        for (std::size_t r = 0; r < self.grad.rows(); ++r) {
            auto row = self.grad.row(r);
            for (std::size_t c = 0; c < self.grad.cols(); ++c) gb(0, c) += row[c];
        }
        t.accumulate(bias, gb);
    });
}

Tape::Id Tape::relu(Id a) {
    Matrix out = value(a);
    for (auto& v : out.storage()) v = v > 0.0 ? v : 0.0;
    return push(std::move(out), node(a).needs_grad, [a](Tape& t, Node& self) {
        Matrix g = self.grad;
        const auto& out = self.value.storage();
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (out[i] <= 0.0) g.storage()[i] = 0.0;
        }
        t.accumulate(a, g);
    });
}

Tape::Id Tape::leaky_relu(Id a, double slope) {
    Matrix out = value(a);
    for (auto& v : out.storage()) v = v > 0.0 ? v : slope * v;
    return push(std::move(out), node(a).needs_grad, [a, slope](Tape& t, Node& self) {
        Matrix g = self.grad;
        const auto& out = self.value.storage();
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (out[i] <= 0.0) g.storage()[i] *= slope;
        }
        t.accumulate(a, g);
    });
}

Tape::Id Tape::sigmoid(Id a) {
    Matrix out = value(a);
    for (auto& v : out.storage()) v = 1.0 / (1.0 + std::exp(-v));
    return push(std::move(out), node(a).needs_grad, [a](Tape& t, Node& self) {
        Matrix g = self.grad;
        const auto& out = self.value.storage();
        for (std::size_t i = 0; i < g.size(); ++i) {
            g.storage()[i] *= out[i] * (1.0 - out[i]);
        }
        t.accumulate(a, g);
    });
}

Tape::Id Tape::tanh(Id a) {
    Matrix out = value(a);
    for (auto& v : out.storage()) v = std::tanh(v);
    return push(std::move(out), node(a).needs_grad, [a](Tape& t, Node& self) {
        Matrix g = self.grad;
        const auto& out = self.value.storage();
        for (std::size_t i = 0; i < g.size(); ++i) {
            g.storage()[i] *= 1.0 - out[i] * out[i];
        }
        t.accumulate(a, g);
    });
}

Tape::Id Tape::dropout(Id a, double p, bool training, Rng& rng) {
    if (p < 0.0 || p >= 1.0) throw ValidationError("dropout needs p in [0, 1)");
    if (!training || p == 0.0) return a;
    const double keep_scale = 1.0 / (1.0 - p);
    auto mask = std::make_shared<std::vector<double>>(value(a).size());
    Matrix out = value(a);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double m = rng.uniform() < p ? 0.0 : keep_scale;
        (*mask)[i] = m;
        out.storage()[i] *= m;
    }
    return push(std::move(out), node(a).needs_grad, [a, mask](Tape& t, Node& self) {
        Matrix g = self.grad;
        for (std::size_t i = 0; i < g.size(); ++i) g.storage()[i] *= (*mask)[i];
        t.accumulate(a, g);
    });
}

Tape::Id Tape::pair_dot(Id a, Id b, std::span<const Edge> pairs) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    if (av.cols() != bv.cols()) throw ValidationError("pair_dot dimension mismatch");
    Matrix out(pairs.size(), 1);
    for (std::size_t e = 0; e < pairs.size(); ++e) {
        auto ru = av.row(pairs[e].first);
        auto rv = bv.row(pairs[e].second);
        double s = 0.0;
        for (std::size_t c = 0; c < ru.size(); ++c) s += ru[c] * rv[c];
        out(e, 0) = s;
    }
    auto saved = std::make_shared<std::vector<Edge>>(pairs.begin(), pairs.end());
    const bool ng = node(a).needs_grad || node(b).needs_grad;
    return push(std::move(out), ng, [a, b, saved](Tape& t, Node& self) {
        const Matrix& av = t.value(a);
        const Matrix& bv = t.value(b);
        Matrix ga(av.rows(), av.cols());
        Matrix gb(bv.rows(), bv.cols());
        for (std::size_t e = 0; e < saved->size(); ++e) {
            const double g = self.grad(e, 0);
            const auto [u, v] = (*saved)[e];
            auto grow = ga.row(u);
            auto bvr = bv.row(v);
            for (std::size_t c = 0; c < grow.size(); ++c) grow[c] += g * bvr[c];
            auto grow2 = gb.row(v);
            auto avr = av.row(u);
            for (std::size_t c = 0; c < grow2.size(); ++c) grow2[c] += g * avr[c];
        }
        t.accumulate(a, ga);
        t.accumulate(b, gb);
    });
}

Tape::Id Tape::attention_aggregate(Id x, Id src, Id dst, const AttributedGraph& g,
                                   double slope) {
    const Matrix& xv = value(x);
    const Matrix& sv = value(src);
    const Matrix& dv = value(dst);
    const std::size_t n = g.num_nodes();
    if (xv.rows() != n || sv.rows() != n || dv.rows() != n || sv.cols() != 1 ||
        dv.cols() != 1) {
        throw ValidationError("attention_aggregate shape mismatch");
    }

    // Flattened closed neighborhoods: self entry first, then neighbors.
    auto alpha = std::make_shared<std::vector<double>>();
    auto raw = std::make_shared<std::vector<double>>();
    Matrix out(n, xv.cols());
    for (NodeId i = 0; i < n; ++i) {
        const auto nb = g.neighbors(i);
        const std::size_t deg = nb.size();
        std::vector<double> e(deg + 1);
        e[0] = sv(i, 0) + dv(i, 0);
        for (std::size_t k = 0; k < deg; ++k) e[k + 1] = sv(i, 0) + dv(nb[k], 0);
        double mx = e[0];
        for (double v : e) mx = std::max(mx, v);
        for (auto& v : e) {
            raw->push_back(v);
            v = std::exp((v > 0.0 ? v : slope * v) - (mx > 0.0 ? mx : slope * mx));
        }
        double z = 0.0;
        for (double v : e) z += v;
        auto orow = out.row(i);
        for (std::size_t k = 0; k <= deg; ++k) {
            const double a = e[k] / z;
            alpha->push_back(a);
            const NodeId j = k == 0 ? i : nb[k - 1];
            auto xr = xv.row(j);
            for (std::size_t c = 0; c < orow.size(); ++c) orow[c] += a * xr[c];
        }
    }

    const bool ng = node(x).needs_grad || node(src).needs_grad || node(dst).needs_grad;
    const AttributedGraph* gp = &g;
    return push(std::move(out), ng, [x, src, dst, gp, alpha, raw, slope](Tape& t, Node& self) {
        const Matrix& xv = t.value(x);
        const std::size_t n = gp->num_nodes();
        const std::size_t h = xv.cols();
        Matrix gx(n, h);
        Matrix gsrc(n, 1);
        Matrix gdst(n, 1);
        std::size_t base = 0;
        for (NodeId i = 0; i < n; ++i) {
            const auto nb = gp->neighbors(i);
            const std::size_t cnt = nb.size() + 1;
            auto grow = self.grad.row(i);
            // d_alpha and softmax jacobian
            std::vector<double> dal(cnt);
            double dot_ad = 0.0;
            for (std::size_t k = 0; k < cnt; ++k) {
                const NodeId j = k == 0 ? i : nb[k - 1];
                auto xr = xv.row(j);
                double s = 0.0;
                for (std::size_t c = 0; c < h; ++c) s += grow[c] * xr[c];
                dal[k] = s;
                dot_ad += (*alpha)[base + k] * s;
                auto gxr = gx.row(j);
                const double a = (*alpha)[base + k];
                for (std::size_t c = 0; c < h; ++c) gxr[c] += a * grow[c];
            }
            for (std::size_t k = 0; k < cnt; ++k) {
                const double a = (*alpha)[base + k];
                const double de = a * (dal[k] - dot_ad);
                const double dr = (*raw)[base + k] > 0.0 ? de : slope * de;
                gsrc(i, 0) += dr;
                const NodeId j = k == 0 ? i : nb[k - 1];
                gdst(j, 0) += dr;
            }
            base += cnt;
        }
        t.accumulate(x, gx);
        t.accumulate(src, gsrc);
        t.accumulate(dst, gdst);
    });
}

Tape::Id Tape::frobenius_sq(Id pred, const Matrix& target) {
    const Matrix& pv = value(pred);
    if (!pv.same_shape(target)) throw ValidationError("frobenius_sq shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < pv.size(); ++i) {
        const double d = pv.storage()[i] - target.storage()[i];
        s += d * d;
    }
    const Matrix* tp = &target;
    return push(Matrix(1, 1, s), node(pred).needs_grad, [pred, tp](Tape& t, Node& self) {
        const double g = 2.0 * self.grad(0, 0);
        const Matrix& pv = t.value(pred);
        Matrix gp(pv.rows(), pv.cols());
        for (std::size_t i = 0; i < pv.size(); ++i) {
            gp.storage()[i] = g * (pv.storage()[i] - tp->storage()[i]);
        }
        t.accumulate(pred, gp);
    });
}

Tape::Id Tape::weighted_sq(Id pred, const Matrix& target, const Matrix& weight) {
    const Matrix& pv = value(pred);
    if (!pv.same_shape(target) || !pv.same_shape(weight)) {
        throw ValidationError("weighted_sq shape mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < pv.size(); ++i) {
        const double d = pv.storage()[i] - target.storage()[i];
        s += weight.storage()[i] * d * d;
    }
    const Matrix* tp = &target;
    const Matrix* wp = &weight;
    return push(Matrix(1, 1, s), node(pred).needs_grad, [pred, tp, wp](Tape& t, Node& self) {
        const double g = 2.0 * self.grad(0, 0);
        const Matrix& pv = t.value(pred);
        Matrix gp(pv.rows(), pv.cols());
        for (std::size_t i = 0; i < pv.size(); ++i) {
            gp.storage()[i] =
                g * wp->storage()[i] * (pv.storage()[i] - tp->storage()[i]);
        }
        t.accumulate(pred, gp);
    });
}

Tape::Id Tape::row_weighted_sq(Id pred, const Matrix& target, std::span<const double> row_w) {
    const Matrix& pv = value(pred);
    if (!pv.same_shape(target) || row_w.size() != pv.rows()) {
        throw ValidationError("row_weighted_sq shape mismatch");
    }
    double s = 0.0;
    for (std::size_t r = 0; r < pv.rows(); ++r) {
        double rs = 0.0;
        auto pr = pv.row(r);
        auto tr = target.row(r);
        for (std::size_t c = 0; c < pv.cols(); ++c) {
            const double d = pr[c] - tr[c];
            rs += d * d;
        }
        s += row_w[r] * rs;
    }
    const Matrix* tp = &target;
    auto w = std::make_shared<std::vector<double>>(row_w.begin(), row_w.end());
    return push(Matrix(1, 1, s), node(pred).needs_grad, [pred, tp, w](Tape& t, Node& self) {
        const double g = 2.0 * self.grad(0, 0);
        const Matrix& pv = t.value(pred);
        Matrix gp(pv.rows(), pv.cols());
        for (std::size_t r = 0; r < pv.rows(); ++r) {
            auto pr = pv.row(r);
            auto tr = tp->row(r);
            auto gr = gp.row(r);
            const double wr = g * (*w)[r];
            for (std::size_t c = 0; c < pv.cols(); ++c) gr[c] = wr * (pr[c] - tr[c]);
        }
        t.accumulate(pred, gp);
    });
}

Tape::Id Tape::row_weighted_sqdiff(Id a, Id b, std::span<const double> row_w) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    if (!av.same_shape(bv) || row_w.size() != av.rows()) {
        throw ValidationError("row_weighted_sqdiff shape mismatch");
    }
    double s = 0.0;
    for (std::size_t r = 0; r < av.rows(); ++r) {
        double rs = 0.0;
        auto ar = av.row(r);
        auto br = bv.row(r);
        for (std::size_t c = 0; c < av.cols(); ++c) {
            const double d = ar[c] - br[c];
            rs += d * d;
        }
        s += row_w[r] * rs;
    }
    auto w = std::make_shared<std::vector<double>>(row_w.begin(), row_w.end());
    const bool ng = node(a).needs_grad || node(b).needs_grad;
    return push(Matrix(1, 1, s), ng, [a, b, w](Tape& t, Node& self) {
        const double g = 2.0 * self.grad(0, 0);
        const Matrix& av = t.value(a);
        const Matrix& bv = t.value(b);
        Matrix ga(av.rows(), av.cols());
        for (std::size_t r = 0; r < av.rows(); ++r) {
            auto ar = av.row(r);
            auto br = bv.row(r);
            auto gr = ga.row(r);
            const double wr = g * (*w)[r];
            for (std::size_t c = 0; c < av.cols(); ++c) gr[c] = wr * (ar[c] - br[c]);
        }
        t.accumulate(a, ga);
        for (auto& v : ga.storage()) v = -v;
        t.accumulate(b, ga);
    });
}

Tape::Id Tape::bce(Id probs, Matrix targets, std::span<const double> row_w) {
    const Matrix& pv = value(probs);
    if (!pv.same_shape(targets)) throw ValidationError("bce shape mismatch");
    if (!row_w.empty() && row_w.size() != pv.rows()) {
        throw ValidationError("bce row weight length mismatch");
    }
    double s = 0.0;
    for (std::size_t r = 0; r < pv.rows(); ++r) {
        const double wr = row_w.empty() ? 1.0 : row_w[r];
        auto pr = pv.row(r);
        auto tr = targets.row(r);
        for (std::size_t c = 0; c < pv.cols(); ++c) {
            const double p = clamp_prob(pr[c]);
            s -= wr * (tr[c] * std::log(p) + (1.0 - tr[c]) * std::log(1.0 - p));
        }
    }
    auto tp = std::make_shared<Matrix>(std::move(targets));
    auto w = std::make_shared<std::vector<double>>(row_w.begin(), row_w.end());
    return push(Matrix(1, 1, s), node(probs).needs_grad, [probs, tp, w](Tape& t, Node& self) {
        const double g = self.grad(0, 0);
        const Matrix& pv = t.value(probs);
        Matrix gp(pv.rows(), pv.cols());
        for (std::size_t r = 0; r < pv.rows(); ++r) {
            const double wr = w->empty() ? 1.0 : (*w)[r];
            auto pr = pv.row(r);
            auto tr = tp->row(r);
            auto gr = gp.row(r);
            for (std::size_t c = 0; c < pv.cols(); ++c) {
                const double raw = pr[c];
                if (raw < kBceClamp || raw > 1.0 - kBceClamp) {
                    gr[c] = 0.0;  // clamped region is flat
                } else {
                    gr[c] = g * wr * (raw - tr[c]) / (raw * (1.0 - raw));
                }
            }
        }
        t.accumulate(probs, gp);
    });
}

Tape::Id Tape::neighbor_sqdiff(Id h, const AttributedGraph& g, std::span<const double> row_w) {
    const Matrix& hv = value(h);
    if (hv.rows() != g.num_nodes() || row_w.size() != hv.rows()) {
        throw ValidationError("neighbor_sqdiff shape mismatch");
    }
    double s = 0.0;
    for (NodeId i = 0; i < g.num_nodes(); ++i) {
        auto hi = hv.row(i);
        double rs = 0.0;
        for (NodeId j : g.neighbors(i)) {
            auto hj = hv.row(j);
            for (std::size_t c = 0; c < hi.size(); ++c) {
                const double d = hi[c] - hj[c];
                rs += d * d;
            }
        }
        s += row_w[i] * rs;
    }
    const AttributedGraph* gp = &g;
    auto w = std::make_shared<std::vector<double>>(row_w.begin(), row_w.end());
    return push(Matrix(1, 1, s), node(h).needs_grad, [h, gp, w](Tape& t, Node& self) {
        const double g2 = 2.0 * self.grad(0, 0);
        const Matrix& hv = t.value(h);
        Matrix gh(hv.rows(), hv.cols());
        for (NodeId i = 0; i < gp->num_nodes(); ++i) {
            auto hi = hv.row(i);
            auto gi = gh.row(i);
            for (NodeId j : gp->neighbors(i)) {
                auto hj = hv.row(j);
                const double wij = g2 * ((*w)[i] + (*w)[j]);
                for (std::size_t c = 0; c < hi.size(); ++c) {
                    gi[c] += wij * (hi[c] - hj[c]);
                }
            }
        }
        t.accumulate(h, gh);
    });
}

Tape::Id Tape::contrastive_margin(Id a, Id b, std::span<const std::uint8_t> perturbed,
                                  double margin) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    if (!av.same_shape(bv) || perturbed.size() != av.rows()) {
        throw ValidationError("contrastive_margin shape mismatch");
    }
    auto dist = std::make_shared<std::vector<double>>(av.rows());
    double s = 0.0;
    for (std::size_t r = 0; r < av.rows(); ++r) {
        auto ar = av.row(r);
        auto br = bv.row(r);
        double d2 = 0.0;
        for (std::size_t c = 0; c < av.cols(); ++c) {
            const double d = ar[c] - br[c];
            d2 += d * d;
        }
        const double d = std::sqrt(d2);
        (*dist)[r] = d;
        if (perturbed[r]) {
            const double m = margin - d;
            if (m > 0.0) s += m * m;
        } else {
            s += d2;
        }
    }
    auto mask = std::make_shared<std::vector<std::uint8_t>>(perturbed.begin(), perturbed.end());
    const bool ng = node(a).needs_grad || node(b).needs_grad;
    return push(Matrix(1, 1, s), ng, [a, b, mask, dist, margin](Tape& t, Node& self) {
        const double g = self.grad(0, 0);
        const Matrix& av = t.value(a);
        const Matrix& bv = t.value(b);
        Matrix ga(av.rows(), av.cols());
        for (std::size_t r = 0; r < av.rows(); ++r) {
            auto ar = av.row(r);
            auto br = bv.row(r);
            auto gr = ga.row(r);
            double coeff;
            if ((*mask)[r]) {
                const double d = (*dist)[r];
                if (d >= margin || d == 0.0) continue;
                coeff = -2.0 * g * (margin - d) / d;
            } else {
                coeff = 2.0 * g;
            }
            for (std::size_t c = 0; c < av.cols(); ++c) gr[c] = coeff * (ar[c] - br[c]);
        }
        t.accumulate(a, ga);
        for (auto& v : ga.storage()) v = -v;
        t.accumulate(b, ga);
    });
}

Tape::Id Tape::sigmoid_dot_recon(Id z, const Matrix& target, const Matrix* weight) {
    const Matrix& zv = value(z);
    const std::size_t n = zv.rows();
    if (target.rows() != n || target.cols() != n) {
        throw ValidationError("sigmoid_dot_recon target must be n x n");
    }
    if (weight && !weight->same_shape(target)) {
        throw ValidationError("sigmoid_dot_recon weight shape mismatch");
    }
    auto s = std::make_shared<Matrix>(gode::matmul_nt(zv, zv));
    double loss = 0.0;
    for (std::size_t i = 0; i < s->size(); ++i) {
        double& v = s->storage()[i];
        v = 1.0 / (1.0 + std::exp(-v));
        const double d = v - target.storage()[i];
        loss += (weight ? weight->storage()[i] : 1.0) * d * d;
    }
    const Matrix* tp = &target;
    return push(Matrix(1, 1, loss), node(z).needs_grad,
                [z, tp, weight, s](Tape& t, Node& self) {
                    const double g = 2.0 * self.grad(0, 0);
                    const std::size_t n = s->rows();
                    Matrix tmat(n, n);
                    for (std::size_t i = 0; i < tmat.size(); ++i) {
                        const double sv = s->storage()[i];
                        const double w = weight ? weight->storage()[i] : 1.0;
                        tmat.storage()[i] =
                            g * w * (sv - tp->storage()[i]) * sv * (1.0 - sv);
                    }
                    const Matrix& zv = t.value(z);
                    Matrix gz = gode::matmul(tmat, zv);
                    Matrix gz2 = gode::matmul_tn(tmat, zv);
                    for (std::size_t i = 0; i < gz.size(); ++i) {
                        gz.storage()[i] += gz2.storage()[i];
                    }
                    t.accumulate(z, gz);
                });
}

Tape::Id Tape::sum(Id a) {
    double s = 0.0;
    for (double v : value(a).storage()) s += v;
    return push(Matrix(1, 1, s), node(a).needs_grad, [a](Tape& t, Node& self) {
        const Matrix& av = t.value(a);
        Matrix g(av.rows(), av.cols(), self.grad(0, 0));
        t.accumulate(a, g);
    });
}

Tape::Id Tape::axpby(double c1, Id a, double c2, Id b) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    if (!av.same_shape(bv)) throw ValidationError("axpby shape mismatch");
    Matrix out(av.rows(), av.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.storage()[i] = c1 * av.storage()[i] + c2 * bv.storage()[i];
    }
    const bool ng = node(a).needs_grad || node(b).needs_grad;
    return push(std::move(out), ng, [a, b, c1, c2](Tape& t, Node& self) {
        Matrix g = self.grad;
        for (auto& v : g.storage()) v *= c1;
        t.accumulate(a, g);
        g = self.grad;
        for (auto& v : g.storage()) v *= c2;
        t.accumulate(b, g);
    });
}

void Tape::backward(Id loss) {
    Node& ln = node(loss);
    if (ln.value.rows() != 1 || ln.value.cols() != 1) {
        throw ValidationError("backward starts from a scalar node");
    }
    ensure_grad(loss);
    ln.grad(0, 0) = 1.0;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        Node& n = *nodes_[i];
        if (!n.back || !n.needs_grad) continue;
        if (!n.grad.same_shape(n.value)) continue;  // no gradient reached this node
        n.back(*this, n);
    }
}

void Tape::clear() { nodes_.clear(); }

std::vector<double> row_errors(const Matrix& pred, const Matrix& target) {
    auto out = row_sq_errors(pred, target);
    for (auto& v : out) v = std::sqrt(v);
    return out;
}

std::vector<double> row_sq_errors(const Matrix& pred, const Matrix& target) {
    std::vector<double> out(pred.rows());
    for (std::size_t r = 0; r < pred.rows(); ++r) {
        auto pr = pred.row(r);
        auto tr = target.row(r);
        double s = 0.0;
        for (std::size_t c = 0; c < pred.cols(); ++c) {
            const double d = pr[c] - tr[c];
            s += d * d;
        }
        out[r] = s;
    }
    return out;
}

}  // namespace gode
