#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include "gode/graph.hpp"
#include "gode/matrix.hpp"
#include "gode/tensor.hpp"

namespace gode {
namespace deep {

// alpha == kAutoAlpha balances the two score terms by their standard
// deviations after a warm-up epoch.
inline constexpr double kAutoAlpha = -1.0;

struct DeepCommonParams {
    std::size_t hid_dim = 64;
    double lr = 0.05;
    double dropout = 0.0;
    double weight_decay = 0.01;
    std::size_t epochs = 300;
    double alpha = kAutoAlpha;
    // Canonical node ids for node-indexed randomness and parameters; identity
    // when null. Lets permutation-equivariance checks align RNG streams.
    const std::vector<NodeId>* canonical_order = nullptr;
};

// AUTO => alpha = sd(struct) / (sd(attr) + sd(struct)) so both weighted terms
// carry equal per-node spread; both spreads zero => 0.5. Explicit values pass
// through.
double resolve_alpha(double auto_or_value, std::span<const double> attr_errors,
                     std::span<const double> struct_errors);

// MLP autoencoder on features; score = per-node reconstruction error.
ScoreVector mlpae_fit(const AttributedGraph& g, const DeepCommonParams& p,
                      std::uint64_t seed);

// GCN autoencoder reconstructing features through A_hat propagation.
ScoreVector gcnae_fit(const AttributedGraph& g, const DeepCommonParams& p,
                      std::uint64_t seed);

// Shared GCN encoder with attribute GCN decoder and dot-product structure
// decoder; score blends both reconstruction errors with alpha.
ScoreVector dominant_fit(const AttributedGraph& g, const DeepCommonParams& p,
                         std::uint64_t seed);

// Dual MLP autoencoders (adjacency rows + features) with homophily and
// alignment terms, node-weighted by log(1/o); score = mean of the three
// normalized component scores.
ScoreVector done_fit(const AttributedGraph& g, const DeepCommonParams& p,
                     std::uint64_t seed);

// DONE with the alignment term replaced by an adversarial discriminator on
// embedding origin.
ScoreVector adone_fit(const AttributedGraph& g, const DeepCommonParams& p,
                      std::uint64_t seed);

struct AnomalyDaeParams {
    DeepCommonParams common;
    double theta = 40.0;  // adjacency reconstruction emphasis on edges
    double eta = 5.0;     // feature reconstruction emphasis on nonzeros
};

// Attention structure encoder + transposed-feature attribute encoder with
// emphasis-weighted reconstruction losses.
ScoreVector anomalydae_fit(const AttributedGraph& g, const AnomalyDaeParams& p,
                           std::uint64_t seed);

struct GaanParams {
    DeepCommonParams common;
    std::size_t noise_dim = 16;
};

// GAN: generator makes fake features, encoder embeddings feed an edge
// discriminator; score blends reconstruction error with mean neighbor
// edge-confidence complement.
ScoreVector gaan_fit(const AttributedGraph& g, const GaanParams& p, std::uint64_t seed);

enum class Motif : std::uint8_t { degree = 0, wedge = 1, triangle = 2, four_clique = 3 };

struct GuideParams {
    DeepCommonParams common;
    std::size_t struct_hid = 5;
    std::vector<Motif> motifs{Motif::degree, Motif::wedge, Motif::triangle,
                              Motif::four_clique};
};

// Attribute AE plus structure AE over per-node motif-degree vectors.
ScoreVector guide_fit(const AttributedGraph& g, const GuideParams& p, std::uint64_t seed);

// Per-node motif participation counts, one column per requested motif.
// Wedges count the node as the center (deg choose 2); triangles and
// 4-cliques count memberships. Sorted-neighbor-list intersection throughout.
Matrix motif_degree_matrix(const AttributedGraph& g, std::span<const Motif> motifs);

struct ConadParams {
    DeepCommonParams common;
    double perturb_rate = 0.1;
    std::size_t clique_m = 5;
    double margin = 0.5;
};

// Siamese GCN on the original and a perturbation-augmented graph with a
// contrastive margin loss, plus dual decoders on the original graph.
ScoreVector conad_fit(const AttributedGraph& g, const ConadParams& p, std::uint64_t seed);

// ---- diagnostics used by tests ----

// Emphasis mask: theta where A_ij != 0, 1 elsewhere.
Matrix anomalydae_theta_mask(const AttributedGraph& g, double theta);

// Discriminator accuracy of a freshly initialized AdONE on embedding origin.
double adone_initial_disc_accuracy(const AttributedGraph& g, const DeepCommonParams& p,
                                   std::uint64_t seed);

// Per-epoch discriminator loss on real edge pairs.
std::vector<double> gaan_disc_real_loss_trace(const AttributedGraph& g,
                                              const GaanParams& p, std::uint64_t seed);

// DONE component score vectors after a full fit (o_struct, o_attr, o_comb).
struct DoneScores {
    std::vector<double> o_struct;
    std::vector<double> o_attr;
    std::vector<double> o_comb;
};
DoneScores done_component_scores(const AttributedGraph& g, const DeepCommonParams& p,
                                 std::uint64_t seed);

// Per-epoch contrastive-loss trace of CONAD's perturbed pairs.
std::vector<double> conad_margin_loss_trace(const AttributedGraph& g, const ConadParams& p,
                                            std::uint64_t seed);

// Gradient-check hook: a detector's one-epoch training loss as a
// deterministic function of its parameters (dropout off, adaptive weights
// frozen), with tape gradients on demand.
struct LossProbe {
    std::shared_ptr<void> state;
    std::vector<Param*> params;
    // Rebuilds the loss at the current parameter values; fills param grads
    // when with_grad is set.
    std::function<double(bool with_grad)> loss;
};
LossProbe make_loss_probe(std::string_view detector, const AttributedGraph& g,
                          std::uint64_t seed);
// Detector names accepted by make_loss_probe.
std::vector<std::string_view> deep_detector_names();

}  // namespace deep
}  // namespace gode
