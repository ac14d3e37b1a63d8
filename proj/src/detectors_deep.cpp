#include "gode/detectors_deep.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gode/error.hpp"
#include "gode/rng.hpp"
#include "gode/tensor.hpp"

namespace gode {
namespace deep {

namespace {

double keyed_uniform(std::uint64_t seed, std::uint64_t key, std::uint64_t counter) {
    const std::uint64_t h = hash_combine(hash_combine(seed, key), counter);
    return (double(mix64(h) >> 11) + 0.5) * 0x1.0p-53;
}

NodeId canon_id(const DeepCommonParams& p, NodeId v) {
    return p.canonical_order ? (*p.canonical_order)[v] : v;
}

void check_finite_loss(double loss, std::size_t epoch, const char* detector) {
    if (!std::isfinite(loss)) {
        throw DivergenceError(std::string(detector) + " loss went non-finite at epoch " +
                              std::to_string(epoch));
    }
}

double stddev(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= double(v.size());
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / double(v.size()));
}

// Bias init is uniform within +-1/sqrt(fan_in); zero biases would pin
// pre-activations of all-zero input rows exactly onto the relu kink.
void init_bias(Matrix& b, std::size_t fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(double(std::max<std::size_t>(fan_in, 1)));
    for (auto& v : b.storage()) v = rng.uniform(-bound, bound);
}

struct Linear {
    Param w, b;

    Linear() = default;
    Linear(std::size_t in, std::size_t out, Rng& rng)
        : w(Matrix(in, out)), b(Matrix(1, out)) {
        glorot_uniform(w.value, rng);
        init_bias(b.value, in, rng);
    }

    Tape::Id apply(Tape& t, Tape::Id x) {
        return t.add_bias(t.matmul(x, t.leaf(w)), t.leaf(b));
    }
    void collect(std::vector<Param*>& out) {
        out.push_back(&w);
        out.push_back(&b);
    }
};

// Linear layer whose input rows (or output columns) are node-indexed: those
// weights are keyed by canonical node id so node permutations permute the
// model identically. Non-node-indexed biases draw from the model rng.
Linear node_keyed_linear_rows(std::size_t n, std::size_t out, std::uint64_t seed,
                              std::uint64_t tag, const DeepCommonParams& p, Rng& rng) {
    Linear l;
    l.w = Param(Matrix(n, out));
    l.b = Param(Matrix(1, out));
    const std::uint64_t stream = hash_combine(seed, tag);
    const double limit = std::sqrt(6.0 / double(n + out));
    for (NodeId v = 0; v < n; ++v) {
        for (std::size_t j = 0; j < out; ++j) {
            l.w.value(v, j) = limit * (2.0 * keyed_uniform(stream, canon_id(p, v), j) - 1.0);
        }
    }
    init_bias(l.b.value, n, rng);
    return l;
}

Linear node_keyed_linear_cols(std::size_t in, std::size_t n, std::uint64_t seed,
                              std::uint64_t tag, const DeepCommonParams& p) {
    Linear l;
    l.w = Param(Matrix(in, n));
    l.b = Param(Matrix(1, n));
    const std::uint64_t stream = hash_combine(seed, tag);
    const double limit = std::sqrt(6.0 / double(in + n));
    const double bias_bound = 1.0 / std::sqrt(double(in));
    for (std::size_t i = 0; i < in; ++i) {
        for (NodeId v = 0; v < n; ++v) {
            l.w.value(i, v) = limit * (2.0 * keyed_uniform(stream, canon_id(p, v), i) - 1.0);
        }
    }
    for (NodeId v = 0; v < n; ++v) {
        l.b.value(0, v) =
            bias_bound * (2.0 * keyed_uniform(stream, canon_id(p, v), in) - 1.0);
    }
    return l;
}

struct GcnLayer {
    Param w, b;

    GcnLayer() = default;
    GcnLayer(std::size_t in, std::size_t out, Rng& rng)
        : w(Matrix(in, out)), b(Matrix(1, out)) {
        glorot_uniform(w.value, rng);
        init_bias(b.value, in, rng);
    }

    Tape::Id apply(Tape& t, const SparseMatrix& ahat, Tape::Id x) {
        return t.add_bias(t.spmm(ahat, t.matmul(x, t.leaf(w))), t.leaf(b));
    }
    void collect(std::vector<Param*>& out) {
        out.push_back(&w);
        out.push_back(&b);
    }
};


// ---------------------------------------------------------------------------
// MLPAE / GCNAE
// ---------------------------------------------------------------------------

struct MlpaeModel {
    const AttributedGraph& g;
    DeepCommonParams p;
    Rng rng;
    Linear enc1, enc2, dec1, dec2;

    MlpaeModel(const AttributedGraph& g_, const DeepCommonParams& p_, std::uint64_t seed)
        : g(g_), p(p_), rng(seed) {
        const std::size_t d = g.num_features();
        enc1 = Linear(d, p.hid_dim, rng);
        enc2 = Linear(p.hid_dim, p.hid_dim, rng);
        dec1 = Linear(p.hid_dim, p.hid_dim, rng);
        dec2 = Linear(p.hid_dim, d, rng);
    }

    std::vector<Param*> params() {
        std::vector<Param*> out;
        for (auto* l : {&enc1, &enc2, &dec1, &dec2}) l->collect(out);
        return out;
    }

    Tape::Id reconstruct(Tape& t, bool training) {
        Tape::Id x = t.input_ref(g.features());
        Tape::Id h = t.relu(enc1.apply(t, x));
        h = t.dropout(h, p.dropout, training, rng);
        h = t.relu(enc2.apply(t, h));
        Tape::Id o = t.relu(dec1.apply(t, h));
        o = t.dropout(o, p.dropout, training, rng);
        return dec2.apply(t, o);
    }

    Tape::Id loss(Tape& t, bool training) {
        return t.frobenius_sq(reconstruct(t, training), g.features());
    }

    ScoreVector score() {
        Tape t;
        Tape::Id xh = reconstruct(t, false);
        return row_errors(t.value(xh), g.features());
    }
};

struct GcnaeModel {
    const AttributedGraph& g;
    DeepCommonParams p;
    Rng rng;
    SparseMatrix ahat;
    GcnLayer enc1, enc2, dec1, dec2;

    GcnaeModel(const AttributedGraph& g_, const DeepCommonParams& p_, std::uint64_t seed)
        : g(g_), p(p_), rng(seed), ahat(normalized_adjacency(symmetrized(g_))) {
        const std::size_t d = g.num_features();
        enc1 = GcnLayer(d, p.hid_dim, rng);
        enc2 = GcnLayer(p.hid_dim, p.hid_dim, rng);
        dec1 = GcnLayer(p.hid_dim, p.hid_dim, rng);
        dec2 = GcnLayer(p.hid_dim, d, rng);
    }

    std::vector<Param*> params() {
        std::vector<Param*> out;
        for (auto* l : {&enc1, &enc2, &dec1, &dec2}) l->collect(out);
        return out;
    }

    Tape::Id reconstruct(Tape& t, bool training) {
        Tape::Id x = t.input_ref(g.features());
        Tape::Id h = t.relu(enc1.apply(t, ahat, x));
        h = t.dropout(h, p.dropout, training, rng);
        h = t.relu(enc2.apply(t, ahat, h));
        Tape::Id o = t.relu(dec1.apply(t, ahat, h));
        o = t.dropout(o, p.dropout, training, rng);
        return dec2.apply(t, ahat, o);
    }

    Tape::Id loss(Tape& t, bool training) {
        return t.frobenius_sq(reconstruct(t, training), g.features());
    }

    ScoreVector score() {
        Tape t;
        Tape::Id xh = reconstruct(t, false);
        return row_errors(t.value(xh), g.features());
    }
};

template <typename Model>
ScoreVector train_recon_model(Model& model, const DeepCommonParams& p, const char* name) {
    auto params = model.params();
    Adam opt(p.lr, p.weight_decay);
    for (std::size_t epoch = 0; epoch < p.epochs; ++epoch) {
        for (Param* q : params) q->zero_grad();
        Tape t;
        Tape::Id l = model.loss(t, true);
        check_finite_loss(t.value(l)(0, 0), epoch, name);
        t.backward(l);
        opt.step(params);
    }
    return model.score();
}

// ---------------------------------------------------------------------------
// DOMINANT (also the CONAD backbone)
// ---------------------------------------------------------------------------

struct DominantModel {
    const AttributedGraph& g;
    DeepCommonParams p;
    Rng rng;
    SparseMatrix ahat;
    Matrix adj;
    GcnLayer enc1, enc2, adec1, adec2, sdec;
    double alpha;

    DominantModel(const AttributedGraph& g_, const DeepCommonParams& p_, std::uint64_t seed)
        : g(g_), p(p_), rng(seed), ahat(normalized_adjacency(symmetrized(g_))),
          adj(dense_adjacency(symmetrized(g_))) {
        const std::size_t d = g.num_features();
        enc1 = GcnLayer(d, p.hid_dim, rng);
        enc2 = GcnLayer(p.hid_dim, p.hid_dim, rng);
        adec1 = GcnLayer(p.hid_dim, p.hid_dim, rng);
        adec2 = GcnLayer(p.hid_dim, d, rng);
        sdec = GcnLayer(p.hid_dim, p.hid_dim, rng);
        alpha = p.alpha == kAutoAlpha ? 0.5 : p.alpha;
    }

    std::vector<Param*> params() {
        std::vector<Param*> out;
        for (auto* l : {&enc1, &enc2, &adec1, &adec2, &sdec}) l->collect(out);
        return out;
    }

    struct Forward {
        Tape::Id xhat;
        Tape::Id z;
    };

    Forward forward(Tape& t, bool training) {
        Tape::Id x = t.input_ref(g.features());
        Tape::Id h = t.relu(enc1.apply(t, ahat, x));
        h = t.dropout(h, p.dropout, training, rng);
        h = t.relu(enc2.apply(t, ahat, h));
        Tape::Id o = t.relu(adec1.apply(t, ahat, h));
        o = t.dropout(o, p.dropout, training, rng);
        Tape::Id xhat = adec2.apply(t, ahat, o);
        Tape::Id z = sdec.apply(t, ahat, h);
        return {xhat, z};
    }

    Tape::Id loss(Tape& t, bool training) {
        Forward f = forward(t, training);
        Tape::Id attr = t.frobenius_sq(f.xhat, g.features());
        Tape::Id stru = t.sigmoid_dot_recon(f.z, adj);
        return t.axpby(alpha, attr, 1.0 - alpha, stru);
    }

    // Per-node attribute / structure errors in eval mode.
    struct Errors {
        ScoreVector attr;
        ScoreVector stru;
    };
    Errors errors() {
        Tape t;
        Forward f = forward(t, false);
        Errors e;
        e.attr = row_errors(t.value(f.xhat), g.features());
        e.stru.resize(g.num_nodes());
        const Matrix& z = t.value(f.z);
        // Stream sigmoid(z z^T) rows against dense adjacency rows.
        for (std::size_t i = 0; i < g.num_nodes(); ++i) {
            auto zi = z.row(i);
            double s = 0.0;
            for (std::size_t j = 0; j < g.num_nodes(); ++j) {
                auto zj = z.row(j);
                double dot = 0.0;
                for (std::size_t c = 0; c < zi.size(); ++c) dot += zi[c] * zj[c];
                const double rec = 1.0 / (1.0 + std::exp(-dot));
                const double d = rec - adj(i, j);
                s += d * d;
            }
            e.stru[i] = std::sqrt(s);
        }
        return e;
    }

    void resolve_after_warmup() {
        if (p.alpha != kAutoAlpha) return;
        Errors e = errors();
        alpha = resolve_alpha(kAutoAlpha, e.attr, e.stru);
    }

    ScoreVector score() {
        Errors e = errors();
        ScoreVector out(g.num_nodes());
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = alpha * e.attr[i] + (1.0 - alpha) * e.stru[i];
        }
        return out;
    }
};

ScoreVector train_dominant_like(DominantModel& model, const DeepCommonParams& p,
                                const char* name) {
    auto params = model.params();
    Adam opt(p.lr, p.weight_decay);
    for (std::size_t epoch = 0; epoch < p.epochs; ++epoch) {
        for (Param* q : params) q->zero_grad();
        Tape t;
        Tape::Id l = model.loss(t, true);
        check_finite_loss(t.value(l)(0, 0), epoch, name);
        t.backward(l);
        opt.step(params);
        if (epoch == 0) model.resolve_after_warmup();
    }
    return model.score();
}

// ---------------------------------------------------------------------------
// DONE / AdONE
// ---------------------------------------------------------------------------

struct DoneModel {
    const AttributedGraph& g;
    AttributedGraph sym;
    DeepCommonParams p;
    Rng rng;
    Matrix adj;
    Linear s_enc1, s_enc2, s_dec1, s_dec2;
    Linear a_enc1, a_enc2, a_dec1, a_dec2;
    // log(1/o) node weights per component group; recomputed each epoch.
    std::vector<double> w_struct, w_attr, w_comb;
    std::vector<double> o_struct, o_attr, o_comb;

    DoneModel(const AttributedGraph& g_, const DeepCommonParams& p_, std::uint64_t seed)
        : g(g_), sym(symmetrized(g_)), p(p_), rng(seed),
          adj(dense_adjacency(sym)) {
        const std::size_t n = g.num_nodes();
        const std::size_t d = g.num_features();
        s_enc1 = node_keyed_linear_rows(n, p.hid_dim, seed, 1, p, rng);
        s_enc2 = Linear(p.hid_dim, p.hid_dim, rng);
        s_dec1 = Linear(p.hid_dim, p.hid_dim, rng);
        s_dec2 = node_keyed_linear_cols(p.hid_dim, n, seed, 2, p);
        a_enc1 = Linear(d, p.hid_dim, rng);
        a_enc2 = Linear(p.hid_dim, p.hid_dim, rng);
        a_dec1 = Linear(p.hid_dim, p.hid_dim, rng);
        a_dec2 = Linear(p.hid_dim, d, rng);
        const double u = 1.0 / double(n);
        o_struct.assign(n, u);
        o_attr.assign(n, u);
        o_comb.assign(n, u);
        refresh_weights();
    }

    void refresh_weights() {
        auto to_w = [](const std::vector<double>& o, std::vector<double>& w) {
            w.resize(o.size());
            for (std::size_t i = 0; i < o.size(); ++i) w[i] = std::log(1.0 / o[i]);
        };
        to_w(o_struct, w_struct);
        to_w(o_attr, w_attr);
        to_w(o_comb, w_comb);
    }

    std::vector<Param*> params() {
        std::vector<Param*> out;
        for (auto* l : {&s_enc1, &s_enc2, &s_dec1, &s_dec2, &a_enc1, &a_enc2, &a_dec1,
                        &a_dec2}) {
            l->collect(out);
        }
        return out;
    }

    struct Forward {
        Tape::Id hs, ha, arec, xrec;
    };

    struct Embeddings {
        Tape::Id hs, ha;
    };

    Embeddings encode(Tape& t, bool training) {
        Tape::Id a = t.input_ref(adj);
        Tape::Id hs = t.relu(s_enc1.apply(t, a));
        hs = t.dropout(hs, p.dropout, training, rng);
        hs = t.relu(s_enc2.apply(t, hs));

        Tape::Id x = t.input_ref(g.features());
        Tape::Id ha = t.relu(a_enc1.apply(t, x));
        ha = t.dropout(ha, p.dropout, training, rng);
        ha = t.relu(a_enc2.apply(t, ha));
        return {hs, ha};
    }

    Forward forward(Tape& t, bool training) {
        Embeddings e = encode(t, training);
        Tape::Id so = t.relu(s_dec1.apply(t, e.hs));
        Tape::Id arec = s_dec2.apply(t, so);
        Tape::Id ao = t.relu(a_dec1.apply(t, e.ha));
        Tape::Id xrec = a_dec2.apply(t, ao);
        return {e.hs, e.ha, arec, xrec};
    }

    void update_component_scores(const Forward& f, Tape& t) {
        auto normalize = [](std::vector<double> err, std::vector<double>& o) {
            double sum = 0.0;
            for (auto& e : err) {
                e += 1e-12;
                sum += e;
            }
            o.resize(err.size());
            for (std::size_t i = 0; i < err.size(); ++i) o[i] = err[i] / sum;
        };
        normalize(row_sq_errors(t.value(f.arec), adj), o_struct);
        normalize(row_sq_errors(t.value(f.xrec), g.features()), o_attr);
        normalize(row_sq_errors(t.value(f.hs), t.value(f.ha)), o_comb);
        refresh_weights();
    }

    ScoreVector score() const {
        ScoreVector out(g.num_nodes());
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = (o_struct[i] + o_attr[i] + o_comb[i]) / 3.0;
        }
        return out;
    }
};

// The five DONE loss components on top of a forward pass.
Tape::Id done_loss(DoneModel& m, Tape& t, const DoneModel::Forward& f) {
    Tape::Id l = t.row_weighted_sq(f.arec, m.adj, m.w_struct);
    l = t.axpby(1.0, l, 1.0, t.neighbor_sqdiff(f.hs, m.sym, m.w_struct));
    l = t.axpby(1.0, l, 1.0, t.row_weighted_sq(f.xrec, m.g.features(), m.w_attr));
    l = t.axpby(1.0, l, 1.0, t.neighbor_sqdiff(f.ha, m.sym, m.w_attr));
    l = t.axpby(1.0, l, 1.0, t.row_weighted_sqdiff(f.hs, f.ha, m.w_comb));
    return l;
}

ScoreVector train_done(DoneModel& model, const DeepCommonParams& p) {
    auto params = model.params();
    Adam opt(p.lr, p.weight_decay);
    for (std::size_t epoch = 0; epoch < p.epochs; ++epoch) {
        for (Param* q : params) q->zero_grad();
        Tape t;
        auto f = model.forward(t, true);
        Tape::Id l = done_loss(model, t, f);
        check_finite_loss(t.value(l)(0, 0), epoch, "done");
        t.backward(l);
        // o for the next epoch comes from this epoch's errors; without
        // dropout the training forward doubles as the eval forward
        if (p.dropout == 0.0) {
            model.update_component_scores(f, t);
        } else {
            Tape te;
            auto fe = model.forward(te, false);
            model.update_component_scores(fe, te);
        }
        opt.step(params);
    }
    // final scores reflect the fully trained model
    Tape te;
    auto fe = model.forward(te, false);
    model.update_component_scores(fe, te);
    return model.score();
}

struct AdoneModel : DoneModel {
    Linear disc1, disc2;

    AdoneModel(const AttributedGraph& g_, const DeepCommonParams& p_, std::uint64_t seed)
        : DoneModel(g_, p_, seed) {
        disc1 = Linear(p.hid_dim, p.hid_dim, rng);
        disc2 = Linear(p.hid_dim, 1, rng);
    }

    std::vector<Param*> disc_params() {
        std::vector<Param*> out;
        disc1.collect(out);
        disc2.collect(out);
        return out;
    }

    Tape::Id discriminate(Tape& t, Tape::Id h) {
        return t.sigmoid(disc2.apply(t, t.relu(disc1.apply(t, h))));
    }

    // Encoder-side adversarial term: flip the origin labels.
    Tape::Id fool_loss(Tape& t, const Forward& f) {
        Tape::Id ps = discriminate(t, f.hs);
        Tape::Id pa = discriminate(t, f.ha);
        const std::size_t n = g.num_nodes();
        Tape::Id ls = t.bce(ps, Matrix(n, 1, 1.0), w_comb);
        Tape::Id la = t.bce(pa, Matrix(n, 1, 0.0), w_comb);
        return t.axpby(1.0, ls, 1.0, la);
    }

    void update_comb_from_disc(const Forward& f, Tape& t) {
        // Per-node fool error replaces the alignment error.
        Tape::Id ps = discriminate(t, f.hs);
        Tape::Id pa = discriminate(t, f.ha);
        const Matrix& psv = t.value(ps);
        const Matrix& pav = t.value(pa);
        std::vector<double> err(g.num_nodes());
        for (std::size_t i = 0; i < err.size(); ++i) {
            const double s = std::clamp(psv(i, 0), 1e-7, 1.0 - 1e-7);
            const double a = std::clamp(pav(i, 0), 1e-7, 1.0 - 1e-7);
            err[i] = -std::log(s) - std::log(1.0 - a);
        }
        double sum = 0.0;
        for (auto& e : err) {
            e += 1e-12;
            sum += e;
        }
        for (std::size_t i = 0; i < err.size(); ++i) o_comb[i] = err[i] / sum;
    }
};

void adone_refresh_scores(AdoneModel& model, const DeepCommonParams& p) {
    Tape te;
    auto fe = model.forward(te, false);
    model.update_component_scores(fe, te);
    model.update_comb_from_disc(fe, te);
    model.refresh_weights();
    (void)p;
}

ScoreVector train_adone(AdoneModel& model, const DeepCommonParams& p) {
    auto ae_params = model.params();
    auto d_params = model.disc_params();
    Adam ae_opt(p.lr, p.weight_decay);
    Adam d_opt(p.lr, p.weight_decay);
    const std::size_t n = model.g.num_nodes();
    for (std::size_t epoch = 0; epoch < p.epochs; ++epoch) {
        // Discriminator on detached embeddings: origin labels 0 (struct) / 1 (attr).
        {
            for (Param* q : d_params) q->zero_grad();
            Tape t;
            auto e = model.encode(t, false);
            Tape::Id hs = t.input(t.value(e.hs));
            Tape::Id ha = t.input(t.value(e.ha));
            Tape::Id ls = t.bce(model.discriminate(t, hs), Matrix(n, 1, 0.0));
            Tape::Id la = t.bce(model.discriminate(t, ha), Matrix(n, 1, 1.0));
            Tape::Id l = t.axpby(1.0, ls, 1.0, la);
            check_finite_loss(t.value(l)(0, 0), epoch, "adone");
            t.backward(l);
            d_opt.step(d_params);
        }
        // Autoencoders: DONE terms minus alignment, plus the fooling term.
        {
            for (Param* q : ae_params) q->zero_grad();
            for (Param* q : d_params) q->zero_grad();
            Tape t;
            auto f = model.forward(t, true);
            Tape::Id l = t.row_weighted_sq(f.arec, model.adj, model.w_struct);
            l = t.axpby(1.0, l, 1.0, t.neighbor_sqdiff(f.hs, model.sym, model.w_struct));
            l = t.axpby(1.0, l, 1.0,
                        t.row_weighted_sq(f.xrec, model.g.features(), model.w_attr));
            l = t.axpby(1.0, l, 1.0, t.neighbor_sqdiff(f.ha, model.sym, model.w_attr));
            l = t.axpby(1.0, l, 1.0, model.fool_loss(t, f));
            check_finite_loss(t.value(l)(0, 0), epoch, "adone");
            t.backward(l);
            // o for the next epoch from this epoch's pre-step forward
            if (p.dropout == 0.0) {
                model.update_component_scores(f, t);
                model.update_comb_from_disc(f, t);
                model.refresh_weights();
            }
            ae_opt.step(ae_params);  // discriminator grads discarded
        }
        if (p.dropout != 0.0) {
            adone_refresh_scores(model, p);
        }
    }
    adone_refresh_scores(model, p);
    return model.score();
}

// ---------------------------------------------------------------------------
// AnomalyDAE
// ---------------------------------------------------------------------------

struct AnomalyDaeModel {
    const AttributedGraph& g;
    AttributedGraph sym;
    AnomalyDaeParams p;
    Rng rng;
    Matrix adj;
    Matrix xt;           // transposed features (d x n)
    Matrix theta_sq;     // emphasis weights, squared
    Matrix eta_sq;
    Linear transform;    // feature transform before attention
    Param attn_src, attn_dst;
    Linear a_enc1, a_enc2;  // attribute encoder on X^T
    double alpha;

    AnomalyDaeModel(const AttributedGraph& g_, const AnomalyDaeParams& p_,
                    std::uint64_t seed)
        : g(g_), sym(symmetrized(g_)), p(p_), rng(seed), adj(dense_adjacency(sym)) {
        const std::size_t n = g.num_nodes();
        const std::size_t d = g.num_features();
        xt = Matrix(d, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < d; ++j) xt(j, i) = g.features()(i, j);
        }
        theta_sq = Matrix(n, n, 1.0);
        for (std::size_t i = 0; i < adj.size(); ++i) {
            if (adj.storage()[i] != 0.0) theta_sq.storage()[i] = p.theta * p.theta;
        }
        eta_sq = Matrix(n, d, 1.0);
        for (std::size_t i = 0; i < eta_sq.size(); ++i) {
            if (g.features().storage()[i] != 0.0) eta_sq.storage()[i] = p.eta * p.eta;
        }
        transform = Linear(d, p.common.hid_dim, rng);
        attn_src = Param(Matrix(p.common.hid_dim, 1));
        attn_dst = Param(Matrix(p.common.hid_dim, 1));
        glorot_uniform(attn_src.value, rng);
        glorot_uniform(attn_dst.value, rng);
        a_enc1 = node_keyed_linear_rows(n, p.common.hid_dim, seed, 3, p.common, rng);
        a_enc2 = Linear(p.common.hid_dim, p.common.hid_dim, rng);
        alpha = p.common.alpha == kAutoAlpha ? 0.5 : p.common.alpha;
    }

    std::vector<Param*> params() {
        std::vector<Param*> out;
        transform.collect(out);
        out.push_back(&attn_src);
        out.push_back(&attn_dst);
        a_enc1.collect(out);
        a_enc2.collect(out);
        return out;
    }

    struct Forward {
        Tape::Id zv, za, xhat;
    };

    Forward forward(Tape& t, bool training) {
        Tape::Id x = t.input_ref(g.features());
        Tape::Id xw = t.relu(transform.apply(t, x));
        xw = t.dropout(xw, p.common.dropout, training, rng);
        Tape::Id src = t.matmul(xw, t.leaf(attn_src));
        Tape::Id dst = t.matmul(xw, t.leaf(attn_dst));
        Tape::Id zv = t.attention_aggregate(xw, src, dst, sym);

        Tape::Id xti = t.input_ref(xt);
        Tape::Id ha = t.relu(a_enc1.apply(t, xti));
        ha = t.dropout(ha, p.common.dropout, training, rng);
        Tape::Id za = a_enc2.apply(t, ha);
        Tape::Id xhat = t.matmul_nt(zv, za);  // (n x h) (d x h)^T
        return {zv, za, xhat};
    }

    Tape::Id loss(Tape& t, bool training) {
        Forward f = forward(t, training);
        Tape::Id stru = t.sigmoid_dot_recon(f.zv, adj, &theta_sq);
        Tape::Id attr = t.weighted_sq(f.xhat, g.features(), eta_sq);
        return t.axpby(1.0, stru, 1.0, attr);
    }

    struct Errors {
        ScoreVector attr, stru;
    };
    Errors errors() {
        Tape t;
        Forward f = forward(t, false);
        const std::size_t n = g.num_nodes();
        Errors e;
        e.attr.resize(n);
        e.stru.resize(n);
        const Matrix& xhat = t.value(f.xhat);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < xhat.cols(); ++j) {
                const double d = xhat(i, j) - g.features()(i, j);
                s += eta_sq(i, j) * d * d;
            }
            e.attr[i] = std::sqrt(s);
        }
        const Matrix& zv = t.value(f.zv);
        for (std::size_t i = 0; i < n; ++i) {
            auto zi = zv.row(i);
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                auto zj = zv.row(j);
                double dot = 0.0;
                for (std::size_t c = 0; c < zi.size(); ++c) dot += zi[c] * zj[c];
                const double rec = 1.0 / (1.0 + std::exp(-dot));
                const double d = rec - adj(i, j);
                s += theta_sq(i, j) * d * d;
            }
            e.stru[i] = std::sqrt(s);
        }
        return e;
    }

    void resolve_after_warmup() {
        if (p.common.alpha != kAutoAlpha) return;
        Errors e = errors();
        alpha = resolve_alpha(kAutoAlpha, e.attr, e.stru);
    }

    ScoreVector score() {
        Errors e = errors();
        ScoreVector out(g.num_nodes());
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = alpha * e.attr[i] + (1.0 - alpha) * e.stru[i];
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// GAAN
// ---------------------------------------------------------------------------

struct GaanModel {
    const AttributedGraph& g;
    AttributedGraph sym;
    GaanParams p;
    Rng rng;
    std::vector<Edge> edges;  // undirected pairs, each once
    Linear gen1, gen2, enc1, enc2, dec1, dec2;
    double alpha;
    std::uint64_t seed;

    GaanModel(const AttributedGraph& g_, const GaanParams& p_, std::uint64_t seed_)
        : g(g_), sym(symmetrized(g_)), p(p_), rng(seed_), seed(seed_) {
        edges = sym.edge_list();
        const std::size_t d = g.num_features();
        const std::size_t h = p.common.hid_dim;
        gen1 = Linear(p.noise_dim, h, rng);
        gen2 = Linear(h, d, rng);
        enc1 = Linear(d, h, rng);
        enc2 = Linear(h, h, rng);
        dec1 = Linear(h, h, rng);
        dec2 = Linear(h, d, rng);
        alpha = p.common.alpha == kAutoAlpha ? 0.5 : p.common.alpha;
    }

    std::vector<Param*> gen_params() {
        std::vector<Param*> out;
        gen1.collect(out);
        gen2.collect(out);
        return out;
    }
    std::vector<Param*> disc_params() {
        std::vector<Param*> out;
        for (auto* l : {&enc1, &enc2, &dec1, &dec2}) l->collect(out);
        return out;
    }

    Matrix sample_noise(std::size_t epoch) {
        Matrix z(g.num_nodes(), p.noise_dim);
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
            for (std::size_t c = 0; c < p.noise_dim; ++c) {
                z(v, c) = keyed_gaussian(seed, canon_id(p.common, v),
                                         epoch * p.noise_dim + c);
            }
        }
        return z;
    }

    Tape::Id generate(Tape& t, Tape::Id noise) {
        return gen2.apply(t, t.relu(gen1.apply(t, noise)));
    }

    Tape::Id encode(Tape& t, Tape::Id x, bool training) {
        Tape::Id h = t.relu(enc1.apply(t, x));
        h = t.dropout(h, p.common.dropout, training, rng);
        return enc2.apply(t, h);
    }

    Tape::Id decode(Tape& t, Tape::Id z) {
        return dec2.apply(t, t.relu(dec1.apply(t, z)));
    }

    Tape::Id edge_probs(Tape& t, Tape::Id z) {
        return t.sigmoid(t.pair_dot(z, z, edges));
    }

    struct EvalOut {
        ScoreVector recon;
        ScoreVector struct_err;
    };
    EvalOut evaluate() {
        Tape t;
        Tape::Id z = encode(t, t.input_ref(g.features()), false);
        Tape::Id xhat = decode(t, z);
        EvalOut out;
        out.recon = row_errors(t.value(xhat), g.features());
        Tape::Id probs = edge_probs(t, z);
        const Matrix& pv = t.value(probs);
        std::vector<double> acc(g.num_nodes(), 0.0);
        std::vector<std::size_t> cnt(g.num_nodes(), 0);
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const auto [u, v] = edges[e];
            acc[u] += 1.0 - pv(e, 0);
            acc[v] += 1.0 - pv(e, 0);
            ++cnt[u];
            ++cnt[v];
        }
        out.struct_err.resize(g.num_nodes());
        for (std::size_t i = 0; i < acc.size(); ++i) {
            // Isolated nodes fall back to the reconstruction error.
            out.struct_err[i] = cnt[i] ? acc[i] / double(cnt[i]) : out.recon[i];
        }
        return out;
    }

    void resolve_after_warmup() {
        if (p.common.alpha != kAutoAlpha) return;
        EvalOut e = evaluate();
        alpha = resolve_alpha(kAutoAlpha, e.recon, e.struct_err);
    }

    ScoreVector score() {
        EvalOut e = evaluate();
        ScoreVector out(g.num_nodes());
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = alpha * e.recon[i] + (1.0 - alpha) * e.struct_err[i];
        }
        return out;
    }
};

ScoreVector train_gaan(GaanModel& model, const GaanParams& p,
                       std::vector<double>* disc_real_trace) {
    auto gp = model.gen_params();
    auto dp = model.disc_params();
    Adam g_opt(p.common.lr, p.common.weight_decay);
    Adam d_opt(p.common.lr, p.common.weight_decay);
    const std::size_t ne = model.edges.size();
    for (std::size_t epoch = 0; epoch < p.common.epochs; ++epoch) {
        Matrix noise = model.sample_noise(epoch);
        // Discriminator/encoder step: real edges -> 1, fake edges -> 0,
        // plus feature reconstruction.
        {
            for (Param* q : dp) q->zero_grad();
            Tape t;
            Tape::Id fake_x;
            {
                // Generator output detached for the discriminator step.
                Tape tg;
                fake_x = t.input(tg.value(model.generate(tg, tg.input_ref(noise))));
            }
            Tape::Id z = model.encode(t, t.input_ref(model.g.features()), true);
            Tape::Id zf = model.encode(t, fake_x, true);
            Tape::Id preal = model.edge_probs(t, z);
            Tape::Id pfake = model.edge_probs(t, zf);
            Tape::Id lreal = t.bce(preal, Matrix(ne, 1, 1.0));
            Tape::Id lfake = t.bce(pfake, Matrix(ne, 1, 0.0));
            Tape::Id lrec = t.frobenius_sq(model.decode(t, z), model.g.features());
            Tape::Id l = t.axpby(1.0, t.axpby(1.0, lreal, 1.0, lfake), 1.0, lrec);
            check_finite_loss(t.value(l)(0, 0), epoch, "gaan");
            if (disc_real_trace) disc_real_trace->push_back(t.value(lreal)(0, 0));
            t.backward(l);
            d_opt.step(dp);
        }
        // Generator step: fool the discriminator on fake edges.
        {
            for (Param* q : gp) q->zero_grad();
            for (Param* q : dp) q->zero_grad();
            Tape t;
            Tape::Id fake_x = model.generate(t, t.input_ref(noise));
            Tape::Id zf = model.encode(t, fake_x, false);
            Tape::Id pfake = model.edge_probs(t, zf);
            Tape::Id l = t.bce(pfake, Matrix(ne, 1, 1.0));
            check_finite_loss(t.value(l)(0, 0), epoch, "gaan");
            t.backward(l);
            g_opt.step(gp);  // encoder grads discarded
        }
        if (epoch == 0) model.resolve_after_warmup();
    }
    return model.score();
}

// ---------------------------------------------------------------------------
// GUIDE
// ---------------------------------------------------------------------------

struct GuideModel {
    const AttributedGraph& g;
    GuideParams p;
    Rng rng;
    Matrix motifs;
    Linear a_enc1, a_enc2, a_dec1, a_dec2;
    Linear s_enc1, s_enc2, s_dec1, s_dec2;
    double alpha;

    GuideModel(const AttributedGraph& g_, const GuideParams& p_, std::uint64_t seed)
        : g(g_), p(p_), rng(seed), motifs(motif_degree_matrix(g_, p_.motifs)) {
        if (p.motifs.empty()) throw ValidationError("guide needs a nonempty motif set");
        const std::size_t d = g.num_features();
        const std::size_t h = p.common.hid_dim;
        const std::size_t k = p.motifs.size();
        const std::size_t s = p.struct_hid;
        a_enc1 = Linear(d, h, rng);
        a_enc2 = Linear(h, h, rng);
        a_dec1 = Linear(h, h, rng);
        a_dec2 = Linear(h, d, rng);
        s_enc1 = Linear(k, s, rng);
        s_enc2 = Linear(s, s, rng);
        s_dec1 = Linear(s, s, rng);
        s_dec2 = Linear(s, k, rng);
        alpha = p.common.alpha == kAutoAlpha ? 0.5 : p.common.alpha;
    }

    std::vector<Param*> params() {
        std::vector<Param*> out;
        for (auto* l : {&a_enc1, &a_enc2, &a_dec1, &a_dec2, &s_enc1, &s_enc2, &s_dec1,
                        &s_dec2}) {
            l->collect(out);
        }
        return out;
    }

    struct Forward {
        Tape::Id xhat, mhat;
    };
    Forward forward(Tape& t, bool training) {
        Tape::Id x = t.input_ref(g.features());
        Tape::Id ha = t.relu(a_enc1.apply(t, x));
        ha = t.dropout(ha, p.common.dropout, training, rng);
        ha = t.relu(a_enc2.apply(t, ha));
        Tape::Id xhat = a_dec2.apply(t, t.relu(a_dec1.apply(t, ha)));

        Tape::Id m = t.input_ref(motifs);
        Tape::Id hs = t.relu(s_enc1.apply(t, m));
        hs = t.relu(s_enc2.apply(t, hs));
        Tape::Id mhat = s_dec2.apply(t, t.relu(s_dec1.apply(t, hs)));
        return {xhat, mhat};
    }

    Tape::Id loss(Tape& t, bool training) {
        Forward f = forward(t, training);
        Tape::Id attr = t.frobenius_sq(f.xhat, g.features());
        Tape::Id stru = t.frobenius_sq(f.mhat, motifs);
        return t.axpby(alpha, attr, 1.0 - alpha, stru);
    }

    struct Errors {
        ScoreVector attr, stru;
    };
    Errors errors() {
        Tape t;
        Forward f = forward(t, false);
        return {row_errors(t.value(f.xhat), g.features()),
                row_errors(t.value(f.mhat), motifs)};
    }

    void resolve_after_warmup() {
        if (p.common.alpha != kAutoAlpha) return;
        Errors e = errors();
        alpha = resolve_alpha(kAutoAlpha, e.attr, e.stru);
    }

    ScoreVector score() {
        Errors e = errors();
        ScoreVector out(g.num_nodes());
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = alpha * e.attr[i] + (1.0 - alpha) * e.stru[i];
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// CONAD
// ---------------------------------------------------------------------------

struct ConadModel {
    const AttributedGraph& g;
    ConadParams p;
    Rng rng;
    SparseMatrix ahat;
    Matrix adj;
    AttributedGraph aug;
    SparseMatrix aug_ahat;
    std::vector<std::uint8_t> perturbed;
    GcnLayer enc1, enc2, adec1, adec2, sdec;
    double alpha;
    std::uint64_t seed;

    ConadModel(const AttributedGraph& g_, const ConadParams& p_, std::uint64_t seed_)
        : g(g_), p(p_), rng(seed_), seed(seed_) {
        AttributedGraph sym = symmetrized(g_);
        ahat = normalized_adjacency(sym);
        adj = dense_adjacency(sym);
        build_augmented(sym);
        const std::size_t d = g.num_features();
        const std::size_t h = p.common.hid_dim;
        enc1 = GcnLayer(d, h, rng);
        enc2 = GcnLayer(h, h, rng);
        adec1 = GcnLayer(h, h, rng);
        adec2 = GcnLayer(h, d, rng);
        sdec = GcnLayer(h, h, rng);
        alpha = p.common.alpha == kAutoAlpha ? 0.5 : p.common.alpha;
    }

    // Known-outlier augmentation: micro-cliques for half of the selected
    // nodes, far-feature swaps for the other half. Selection is keyed by
    // canonical node id so permutations permute the augmentation.
    void build_augmented(const AttributedGraph& sym) {
        const std::size_t n = g.num_nodes();
        perturbed.assign(n, 0);
        const std::size_t count = std::size_t(p.perturb_rate * double(n));
        std::vector<NodeId> ranked(n);
        for (NodeId v = 0; v < n; ++v) ranked[v] = v;
        std::sort(ranked.begin(), ranked.end(), [&](NodeId a, NodeId b) {
            return hash_combine(seed, canon_id(p.common, a)) <
                   hash_combine(seed, canon_id(p.common, b));
        });
        ranked.resize(count);

        auto edges = sym.edge_list();
        Matrix features = g.features();
        const std::size_t half = count / 2;
        // Structural half: consecutive groups of clique_m.
        for (std::size_t start = 0; start + 1 < half; start += p.clique_m) {
            const std::size_t end = std::min(start + p.clique_m, half);
            if (end - start < 2) break;
            for (std::size_t i = start; i < end; ++i) {
                perturbed[ranked[i]] = 1;
                for (std::size_t j = i + 1; j < end; ++j) {
                    edges.emplace_back(ranked[i], ranked[j]);
                }
            }
        }
        // Contextual half: far-feature swap over a keyed candidate pool. The
        // pool is drawn in canonical id space and mapped back so permuted
        // graphs perturb the same nodes.
        std::vector<NodeId> from_canonical(n);
        for (NodeId v = 0; v < n; ++v) from_canonical[canon_id(p.common, v)] = v;
        for (std::size_t i = half; i < count; ++i) {
            const NodeId target = ranked[i];
            perturbed[target] = 1;
            double best_d = -1.0;
            NodeId best = target;
            for (std::size_t c = 0; c < p.clique_m; ++c) {
                std::size_t cand_canon =
                    hash_combine(hash_combine(seed, 0x515u),
                                 canon_id(p.common, target) * 131 + c) %
                    n;
                if (cand_canon == canon_id(p.common, target)) {
                    cand_canon = (cand_canon + 1) % n;
                }
                const NodeId cand = from_canonical[cand_canon];
                double d = 0.0;
                auto xi = g.feature_row(target);
                auto xj = g.feature_row(cand);
                for (std::size_t k = 0; k < xi.size(); ++k) {
                    const double diff = xi[k] - xj[k];
                    d += diff * diff;
                }
                if (d > best_d) {
                    best_d = d;
                    best = cand;
                }
            }
            auto src = g.feature_row(best);
            std::copy(src.begin(), src.end(), features.row(target).begin());
        }
        aug = build_graph(edges, std::move(features), false);
        aug_ahat = normalized_adjacency(aug);
    }

    std::vector<Param*> params() {
        std::vector<Param*> out;
        for (auto* l : {&enc1, &enc2, &adec1, &adec2, &sdec}) l->collect(out);
        return out;
    }

    Tape::Id encode(Tape& t, const SparseMatrix& a, const Matrix& x, bool training) {
        Tape::Id h = t.relu(enc1.apply(t, a, t.input_ref(x)));
        h = t.dropout(h, p.common.dropout, training, rng);
        return t.relu(enc2.apply(t, a, h));
    }

    struct Forward {
        Tape::Id h, xhat, z;
    };
    Forward forward(Tape& t, bool training) {
        Tape::Id h = encode(t, ahat, g.features(), training);
        Tape::Id o = t.relu(adec1.apply(t, ahat, h));
        o = t.dropout(o, p.common.dropout, training, rng);
        Tape::Id xhat = adec2.apply(t, ahat, o);
        Tape::Id z = sdec.apply(t, ahat, h);
        return {h, xhat, z};
    }

    struct Losses {
        Tape::Id total;
        Tape::Id margin;
    };
    Losses loss(Tape& t, bool training) {
        Forward f = forward(t, training);
        Tape::Id attr = t.frobenius_sq(f.xhat, g.features());
        Tape::Id stru = t.sigmoid_dot_recon(f.z, adj);
        Tape::Id recon = t.axpby(alpha, attr, 1.0 - alpha, stru);
        if (std::none_of(perturbed.begin(), perturbed.end(),
                         [](std::uint8_t x) { return x != 0; })) {
            return {recon, Tape::Id(-1)};
        }
        Tape::Id h2 = encode(t, aug_ahat, aug.features(), training);
        Tape::Id margin = t.contrastive_margin(f.h, h2, perturbed, p.margin);
        return {t.axpby(1.0, recon, 1.0, margin), margin};
    }

    struct Errors {
        ScoreVector attr, stru;
    };
    Errors errors() {
        Tape t;
        Forward f = forward(t, false);
        Errors e;
        e.attr = row_errors(t.value(f.xhat), g.features());
        const Matrix& z = t.value(f.z);
        const std::size_t n = g.num_nodes();
        e.stru.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto zi = z.row(i);
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                auto zj = z.row(j);
                double dot = 0.0;
                for (std::size_t c = 0; c < zi.size(); ++c) dot += zi[c] * zj[c];
                const double rec = 1.0 / (1.0 + std::exp(-dot));
                const double d = rec - adj(i, j);
                s += d * d;
            }
            e.stru[i] = std::sqrt(s);
        }
        return e;
    }

    void resolve_after_warmup() {
        if (p.common.alpha != kAutoAlpha) return;
        Errors e = errors();
        alpha = resolve_alpha(kAutoAlpha, e.attr, e.stru);
    }

    ScoreVector score() {
        Errors e = errors();
        ScoreVector out(g.num_nodes());
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = alpha * e.attr[i] + (1.0 - alpha) * e.stru[i];
        }
        return out;
    }
};

ScoreVector train_conad(ConadModel& model, const ConadParams& p,
                        std::vector<double>* margin_trace) {
    auto params = model.params();
    Adam opt(p.common.lr, p.common.weight_decay);
    for (std::size_t epoch = 0; epoch < p.common.epochs; ++epoch) {
        for (Param* q : params) q->zero_grad();
        Tape t;
        auto l = model.loss(t, true);
        check_finite_loss(t.value(l.total)(0, 0), epoch, "conad");
        if (margin_trace && l.margin >= 0) {
            margin_trace->push_back(t.value(l.margin)(0, 0));
        }
        t.backward(l.total);
        opt.step(params);
        if (epoch == 0) model.resolve_after_warmup();
    }
    return model.score();
}

}  // namespace

double resolve_alpha(double auto_or_value, std::span<const double> attr_errors,
                     std::span<const double> struct_errors) {
    if (auto_or_value != kAutoAlpha) return auto_or_value;
    const double sa = stddev(attr_errors);
    const double ss = stddev(struct_errors);
    if (sa + ss == 0.0) return 0.5;
    return ss / (sa + ss);
}

ScoreVector mlpae_fit(const AttributedGraph& g, const DeepCommonParams& p,
                      std::uint64_t seed) {
    MlpaeModel model(g, p, seed);
    return train_recon_model(model, p, "mlpae");
}

ScoreVector gcnae_fit(const AttributedGraph& g, const DeepCommonParams& p,
                      std::uint64_t seed) {
    GcnaeModel model(g, p, seed);
    return train_recon_model(model, p, "gcnae");
}

ScoreVector dominant_fit(const AttributedGraph& g, const DeepCommonParams& p,
                         std::uint64_t seed) {
    DominantModel model(g, p, seed);
    return train_dominant_like(model, p, "dominant");
}

ScoreVector done_fit(const AttributedGraph& g, const DeepCommonParams& p,
                     std::uint64_t seed) {
    DoneModel model(g, p, seed);
    return train_done(model, p);
}

ScoreVector adone_fit(const AttributedGraph& g, const DeepCommonParams& p,
                      std::uint64_t seed) {
    AdoneModel model(g, p, seed);
    return train_adone(model, p);
}

ScoreVector anomalydae_fit(const AttributedGraph& g, const AnomalyDaeParams& p,
                           std::uint64_t seed) {
    AnomalyDaeModel model(g, p, seed);
    auto params = model.params();
    Adam opt(p.common.lr, p.common.weight_decay);
    for (std::size_t epoch = 0; epoch < p.common.epochs; ++epoch) {
        for (Param* q : params) q->zero_grad();
        Tape t;
        Tape::Id l = model.loss(t, true);
        check_finite_loss(t.value(l)(0, 0), epoch, "anomalydae");
        t.backward(l);
        opt.step(params);
        if (epoch == 0) model.resolve_after_warmup();
    }
    return model.score();
}

ScoreVector gaan_fit(const AttributedGraph& g, const GaanParams& p, std::uint64_t seed) {
    GaanModel model(g, p, seed);
    return train_gaan(model, p, nullptr);
}

ScoreVector guide_fit(const AttributedGraph& g, const GuideParams& p, std::uint64_t seed) {
    GuideModel model(g, p, seed);
    auto params = model.params();
    Adam opt(p.common.lr, p.common.weight_decay);
    for (std::size_t epoch = 0; epoch < p.common.epochs; ++epoch) {
        for (Param* q : params) q->zero_grad();
        Tape t;
        Tape::Id l = model.loss(t, true);
        check_finite_loss(t.value(l)(0, 0), epoch, "guide");
        t.backward(l);
        opt.step(params);
        if (epoch == 0) model.resolve_after_warmup();
    }
    return model.score();
}

ScoreVector conad_fit(const AttributedGraph& g, const ConadParams& p, std::uint64_t seed) {
    ConadModel model(g, p, seed);
    return train_conad(model, p, nullptr);
}

Matrix anomalydae_theta_mask(const AttributedGraph& g, double theta) {
    Matrix adj = dense_adjacency(symmetrized(g));
    Matrix mask(adj.rows(), adj.cols(), 1.0);
    for (std::size_t i = 0; i < adj.size(); ++i) {
        if (adj.storage()[i] != 0.0) mask.storage()[i] = theta;
    }
    return mask;
}

double adone_initial_disc_accuracy(const AttributedGraph& g, const DeepCommonParams& p,
                                   std::uint64_t seed) {
    AdoneModel model(g, p, seed);
    Tape t;
    auto f = model.forward(t, false);
    Tape::Id ps = model.discriminate(t, f.hs);
    Tape::Id pa = model.discriminate(t, f.ha);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
        correct += t.value(ps)(i, 0) < 0.5;  // struct label 0
        correct += t.value(pa)(i, 0) >= 0.5;  // attr label 1
    }
    return double(correct) / double(2 * g.num_nodes());
}

std::vector<double> gaan_disc_real_loss_trace(const AttributedGraph& g,
                                              const GaanParams& p, std::uint64_t seed) {
    GaanModel model(g, p, seed);
    std::vector<double> trace;
    train_gaan(model, p, &trace);
    return trace;
}

DoneScores done_component_scores(const AttributedGraph& g, const DeepCommonParams& p,
                                 std::uint64_t seed) {
    DoneModel model(g, p, seed);
    train_done(model, p);
    return {model.o_struct, model.o_attr, model.o_comb};
}

std::vector<double> conad_margin_loss_trace(const AttributedGraph& g, const ConadParams& p,
                                            std::uint64_t seed) {
    ConadModel model(g, p, seed);
    std::vector<double> trace;
    train_conad(model, p, &trace);
    return trace;
}

// ---------------------------------------------------------------------------
// Gradient-check probes
// ---------------------------------------------------------------------------

namespace {

template <typename State, typename BuildLoss>
LossProbe make_probe(std::shared_ptr<State> state, std::vector<Param*> params,
                     BuildLoss build) {
    LossProbe probe;
    probe.state = state;
    probe.params = std::move(params);
    auto params_copy = probe.params;
    probe.loss = [state, params_copy, build](bool with_grad) {
        if (with_grad) {
            for (Param* q : params_copy) q->zero_grad();
        }
        Tape t;
        Tape::Id l = build(*state, t);
        const double v = t.value(l)(0, 0);
        if (with_grad) t.backward(l);
        return v;
    };
    return probe;
}

}  // namespace

LossProbe make_loss_probe(std::string_view detector, const AttributedGraph& g,
                          std::uint64_t seed) {
    DeepCommonParams common;
    common.hid_dim = 6;
    common.dropout = 0.0;
    common.alpha = 0.5;

    if (detector == "mlpae") {
        auto m = std::make_shared<MlpaeModel>(g, common, seed);
        return make_probe(m, m->params(),
                          [](MlpaeModel& m, Tape& t) { return m.loss(t, false); });
    }
    if (detector == "gcnae") {
        auto m = std::make_shared<GcnaeModel>(g, common, seed);
        return make_probe(m, m->params(),
                          [](GcnaeModel& m, Tape& t) { return m.loss(t, false); });
    }
    if (detector == "dominant") {
        auto m = std::make_shared<DominantModel>(g, common, seed);
        return make_probe(m, m->params(),
                          [](DominantModel& m, Tape& t) { return m.loss(t, false); });
    }
    if (detector == "done") {
        auto m = std::make_shared<DoneModel>(g, common, seed);
        return make_probe(m, m->params(), [](DoneModel& m, Tape& t) {
            auto f = m.forward(t, false);
            return done_loss(m, t, f);
        });
    }
    if (detector == "adone") {
        auto m = std::make_shared<AdoneModel>(g, common, seed);
        auto params = m->params();
        for (Param* q : m->disc_params()) params.push_back(q);
        return make_probe(m, std::move(params), [](AdoneModel& m, Tape& t) {
            auto f = m.forward(t, false);
            Tape::Id l = t.row_weighted_sq(f.arec, m.adj, m.w_struct);
            l = t.axpby(1.0, l, 1.0, t.neighbor_sqdiff(f.hs, m.sym, m.w_struct));
            l = t.axpby(1.0, l, 1.0, t.row_weighted_sq(f.xrec, m.g.features(), m.w_attr));
            l = t.axpby(1.0, l, 1.0, t.neighbor_sqdiff(f.ha, m.sym, m.w_attr));
            return t.axpby(1.0, l, 1.0, m.fool_loss(t, f));
        });
    }
    if (detector == "anomalydae") {
        AnomalyDaeParams p;
        p.common = common;
        p.theta = 3.0;
        p.eta = 2.0;
        auto m = std::make_shared<AnomalyDaeModel>(g, p, seed);
        return make_probe(m, m->params(),
                          [](AnomalyDaeModel& m, Tape& t) { return m.loss(t, false); });
    }
    if (detector == "gaan") {
        GaanParams p;
        p.common = common;
        p.noise_dim = 4;
        auto m = std::make_shared<GaanModel>(g, p, seed);
        auto params = m->gen_params();
        for (Param* q : m->disc_params()) params.push_back(q);
        return make_probe(m, std::move(params), [](GaanModel& m, Tape& t) {
            // One coherent graph touching generator, encoder and decoder.
            Matrix noise = m.sample_noise(0);
            Tape::Id fake_x = m.generate(t, t.input(noise));
            Tape::Id z = m.encode(t, t.input_ref(m.g.features()), false);
            Tape::Id zf = m.encode(t, fake_x, false);
            const std::size_t ne = m.edges.size();
            Tape::Id lreal = t.bce(m.edge_probs(t, z), Matrix(ne, 1, 1.0));
            Tape::Id lfake = t.bce(m.edge_probs(t, zf), Matrix(ne, 1, 0.0));
            Tape::Id lrec = t.frobenius_sq(m.decode(t, z), m.g.features());
            return t.axpby(1.0, t.axpby(1.0, lreal, 1.0, lfake), 1.0, lrec);
        });
    }
    if (detector == "guide") {
        GuideParams p;
        p.common = common;
        p.struct_hid = 3;
        auto m = std::make_shared<GuideModel>(g, p, seed);
        return make_probe(m, m->params(),
                          [](GuideModel& m, Tape& t) { return m.loss(t, false); });
    }
    if (detector == "conad") {
        ConadParams p;
        p.common = common;
        p.perturb_rate = 0.3;
        p.clique_m = 3;
        auto m = std::make_shared<ConadModel>(g, p, seed);
        return make_probe(m, m->params(),
                          [](ConadModel& m, Tape& t) { return m.loss(t, false).total; });
    }
    throw ValidationError("unknown deep detector: " + std::string(detector));
}

std::vector<std::string_view> deep_detector_names() {
    return {"mlpae", "gcnae", "dominant", "done", "adone",
            "anomalydae", "gaan", "guide", "conad"};
}

}  // namespace deep
}  // namespace gode
