#include "gode/detectors.hpp"

#include <algorithm>

#include "gode/detectors_classic.hpp"
#include "gode/detectors_deep.hpp"
#include "gode/error.hpp"

namespace gode {

namespace {

deep::DeepCommonParams common_from(const ParamMap& p) {
    deep::DeepCommonParams c;
    c.hid_dim = p.get_count("hid_dim", c.hid_dim);
    c.lr = p.get_double("lr", c.lr);
    c.dropout = p.get_double("dropout", c.dropout);
    c.weight_decay = p.get_double("weight_decay", c.weight_decay);
    c.epochs = p.get_count("epochs", c.epochs);
    const std::string alpha = p.get_string("alpha", "auto");
    c.alpha = alpha == "auto" ? deep::kAutoAlpha : p.get_double("alpha", 0.5);
    return c;
}

ScoreVector fit_lof(const AttributedGraph& g, const ParamMap& p, std::uint64_t) {
    classic::LofParams lp;
    lp.k_neighbors = p.get_count("k", lp.k_neighbors);
    return classic::lof_fit(g, lp);
}

ScoreVector fit_iforest(const AttributedGraph& g, const ParamMap& p, std::uint64_t seed) {
    classic::IForestParams ip;
    ip.num_trees = p.get_count("num_trees", ip.num_trees);
    ip.subsample = p.get_count("subsample", ip.subsample);
    ip.seed = seed;
    return classic::iforest_fit(g, ip);
}

ScoreVector fit_scan(const AttributedGraph& g, const ParamMap& p, std::uint64_t) {
    classic::ScanParams sp;
    sp.eps = p.get_double("eps", sp.eps);
    sp.mu = p.get_count("mu", sp.mu);
    return classic::scan_fit(g, sp);
}

classic::ResidualParams residual_from(const ParamMap& p) {
    classic::ResidualParams rp;
    rp.alpha_w = p.get_double("alpha_w", rp.alpha_w);
    rp.beta_r = p.get_double("beta_r", rp.beta_r);
    rp.gamma_l = p.get_double("gamma_l", rp.gamma_l);
    rp.lr = p.get_double("lr", rp.lr);
    rp.epochs = p.get_count("epochs", rp.epochs);
    return rp;
}

ScoreVector fit_radar(const AttributedGraph& g, const ParamMap& p, std::uint64_t seed) {
    return classic::radar_fit(g, residual_from(p), seed);
}

ScoreVector fit_anomalous(const AttributedGraph& g, const ParamMap& p, std::uint64_t seed) {
    return classic::anomalous_fit(g, residual_from(p), seed);
}

ScoreVector fit_mlpae(const AttributedGraph& g, const ParamMap& p, std::uint64_t seed) {
    return deep::mlpae_fit(g, common_from(p), seed);
}

ScoreVector fit_gcnae(const AttributedGraph& g, const ParamMap& p, std::uint64_t seed) {
    return deep::gcnae_fit(g, common_from(p), seed);
}

ScoreVector fit_dominant(const AttributedGraph& g, const ParamMap& p, std::uint64_t seed) {
    return deep::dominant_fit(g, common_from(p), seed);
}

ScoreVector fit_done(const AttributedGraph& g, const ParamMap& p, std::uint64_t seed) {
    return deep::done_fit(g, common_from(p), seed);
}

ScoreVector fit_adone(const AttributedGraph& g, const ParamMap& p, std::uint64_t seed) {
    return deep::adone_fit(g, common_from(p), seed);
}

ScoreVector fit_anomalydae(const AttributedGraph& g, const ParamMap& p, std::uint64_t seed) {
    deep::AnomalyDaeParams ap;
    ap.common = common_from(p);
    ap.theta = p.get_double("theta", ap.theta);
    ap.eta = p.get_double("eta", ap.eta);
    return deep::anomalydae_fit(g, ap, seed);
}

ScoreVector fit_gaan(const AttributedGraph& g, const ParamMap& p, std::uint64_t seed) {
    deep::GaanParams gp;
    gp.common = common_from(p);
    gp.noise_dim = p.get_count("noise_dim", gp.noise_dim);
    return deep::gaan_fit(g, gp, seed);
}

ScoreVector fit_guide(const AttributedGraph& g, const ParamMap& p, std::uint64_t seed) {
    deep::GuideParams gp;
    gp.common = common_from(p);
    gp.struct_hid = p.get_count("struct_hid", gp.struct_hid);
    const std::string motifs = p.get_string("motifs", "degree,wedge,triangle,four_clique");
    gp.motifs.clear();
    std::size_t pos = 0;
    while (pos < motifs.size()) {
        std::size_t end = motifs.find(',', pos);
        if (end == std::string::npos) end = motifs.size();
        const std::string m = motifs.substr(pos, end - pos);
        pos = end + 1;
        if (m == "degree") gp.motifs.push_back(deep::Motif::degree);
        else if (m == "wedge") gp.motifs.push_back(deep::Motif::wedge);
        else if (m == "triangle") gp.motifs.push_back(deep::Motif::triangle);
        else if (m == "four_clique") gp.motifs.push_back(deep::Motif::four_clique);
        else if (!m.empty()) throw ValidationError("unknown motif: " + m);
    }
    return deep::guide_fit(g, gp, seed);
}

ScoreVector fit_conad(const AttributedGraph& g, const ParamMap& p, std::uint64_t seed) {
    deep::ConadParams cp;
    cp.common = common_from(p);
    cp.perturb_rate = p.get_double("perturb_rate", cp.perturb_rate);
    cp.clique_m = p.get_count("clique_m", cp.clique_m);
    cp.margin = p.get_double("margin", cp.margin);
    return deep::conad_fit(g, cp, seed);
}

const std::vector<std::string> kCommonDeepKeys = {"hid_dim", "lr", "dropout",
                                                  "weight_decay", "epochs", "alpha"};

std::vector<std::string> with_common(std::initializer_list<std::string> extra) {
    std::vector<std::string> keys = kCommonDeepKeys;
    keys.insert(keys.end(), extra.begin(), extra.end());
    return keys;
}

}  // namespace

const std::vector<DetectorInfo>& detector_registry() {
    static const std::vector<DetectorInfo> registry = {
        {"lof", false, {}, fit_lof},
        {"iforest", false, {}, fit_iforest},
        {"mlpae", true, with_common({}), fit_mlpae},
        {"scan", false, {"eps", "mu"}, fit_scan},
        {"radar", false, {"lr", "epochs"}, fit_radar},
        {"anomalous", false, {"lr", "epochs"}, fit_anomalous},
        {"gcnae", true, with_common({}), fit_gcnae},
        {"dominant", true, with_common({}), fit_dominant},
        {"done", true, with_common({}), fit_done},
        {"adone", true, with_common({}), fit_adone},
        {"anomalydae", true, with_common({"theta", "eta"}), fit_anomalydae},
        {"gaan", true, with_common({"noise_dim"}), fit_gaan},
        {"guide", true, with_common({"struct_hid"}), fit_guide},
        {"conad", true, with_common({}), fit_conad},
    };
    return registry;
}

const DetectorInfo* find_detector(std::string_view name) {
    for (const auto& d : detector_registry()) {
        if (d.name == name) return &d;
    }
    return nullptr;
}

std::vector<std::string> detector_names() {
    std::vector<std::string> out;
    for (const auto& d : detector_registry()) out.push_back(d.name);
    return out;
}

std::vector<std::string> parse_algo_list(const std::string& csv) {
    if (csv == "all") return detector_names();
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        std::size_t end = csv.find(',', pos);
        if (end == std::string::npos) end = csv.size();
        const std::string name = csv.substr(pos, end - pos);
        pos = end + 1;
        if (name.empty()) {
            if (pos > csv.size()) break;
            continue;
        }
        if (!find_detector(name)) {
            throw ValidationError("unknown detector: " + name);
        }
        out.push_back(name);
        if (end == csv.size()) break;
    }
    if (out.empty()) throw ValidationError("empty detector list");
    return out;
}

}  // namespace gode
