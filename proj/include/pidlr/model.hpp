#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pidlr/graph.hpp"
#include "pidlr/instance.hpp"
#include "pidlr/linalg.hpp"
#include "pidlr/rng.hpp"

namespace pidlr {

enum class SelectionMode : uint8_t { WeightedSample, TopK };

struct TrainConfig {
    int d = 64;              // embedding dimension
    int d_cos = 0;           // 0 -> d
    int d_att = 0;           // 0 -> d
    float learning_rate = 0.001f;
    int batch_size = 256;
    int collab_n = 2;        // N collaborative users
    float alpha_u = 0.10f;
    float alpha_v = 0.60f;
    int slot_u = 16;         // S_u
    int slot_v = 8;          // S_v
    int candidate_size = 2;  // |V|: 2 pairwise, 20 listwise
    SelectionMode selection = SelectionMode::WeightedSample;
    uint64_t seed = 42;
    int max_epochs = 30;
    int patience = 5;
    int mlp_hidden = 128;

    int cos_dim() const { return d_cos > 0 ? d_cos : d; }
    int att_dim() const { return d_att > 0 ? d_att : d; }

    void validate() const;
    // Canonical one-line-per-field text form, echoed into checkpoints and
    // run manifests.
    std::string canonical_text() const;
    static TrainConfig from_canonical_text(const std::string& text);
    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Softmax-normalized credibility scores p(k|(u,V)) over a tuple pool,
// sorted by descending probability with ascending-tuple-index tie-break.
struct CredibilityDistribution {
    std::vector<std::pair<int32_t, double>> entries;  // (tuple index, probability)
};

struct SelectedHint {
    int32_t tuple = -1;
    double credibility = 0.0;  // original softmax probability
};

struct HintModel {
    TrainConfig cfg;
    size_t num_users = 0;
    size_t num_items = 0;  // real items, excluding pad
    size_t num_tuples = 0;

    Mat user_emb;   // |U| x d
    Mat item_emb;   // (|V|+1) x d, row 0 is the pad item and never used
    Mat tuple_emb;  // |K| x d
    Mat w_c, w_cp;  // cos_dim x 3d
    Mat w_u;        // att_dim x (|V_cand| * d)
    Mat w_up;       // att_dim x d
    Mat w_v;        // att_dim x 3d
    Mat w_vp;       // att_dim x d
    Mat mlp_w1;     // hidden x ((S_u + S_v) * d)
    Mat mlp_b1;     // hidden x 1
    Mat mlp_w2;     // 1 x hidden
    Mat mlp_b2;     // 1 x 1

    // Adam state, one (m, v) per parameter tensor, in tensors() order.
    std::vector<Mat> adam_m;
    std::vector<Mat> adam_v;
    int64_t adam_step = 0;

    std::vector<Mat*> tensors();
    std::vector<const Mat*> tensors() const;
    static const std::vector<std::string>& tensor_names();

    bool finite() const;
    bool operator==(const HintModel& o) const;
};

// Uniform(-1/sqrt(d), 1/sqrt(d)) init for embeddings and weights, zero biases.
HintModel init_model(const TrainConfig& cfg, size_t num_users, size_t num_items,
                     size_t num_tuples, Rng& rng);

// --- Eq. 2: subgraph representation -----------------------------------------

// E_u over an explicit (already windowed) history; empty means give zero
// blocks. Result has length 3d.
Vec subgraph_representation(const HintModel& m, const KnowledgeGraph& g, int32_t user,
                            const std::vector<int32_t>& history_items);

// E_u from the user's train-split items (last-10 window applied).
Vec user_representation(const HintModel& m, const KnowledgeGraph& g, const InteractionLog& log,
                        int32_t user);

// --- Eq. 3: collaborative users ----------------------------------------------

// dot/(|a||b|); 0 if either norm is 0.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

// Top-N pool users by cosine(W_c E_u, W'_c E_u'), ties broken by ascending
// user id. pool_reps[i] is E_{pool[i]}; the target must not be in the pool.
std::vector<int32_t> collaborative_users(const HintModel& m, const Vec& target_rep,
                                         const std::vector<int32_t>& pool,
                                         const std::vector<Vec>& pool_reps, int n,
                                         bool parallel = false);

// --- Eq. 4/5: dual credibility ----------------------------------------------

// E_V: concatenation over candidates of mean ego-tuple embeddings (|V|*d).
Vec candidate_attribute_representation(const HintModel& m, const KnowledgeGraph& g,
                                       const std::vector<int32_t>& candidates);

// Softmax over pool of (W_u E_V)·(W'_u e_k). Pool must be non-empty.
CredibilityDistribution user_credibility(const HintModel& m,
                                         const std::vector<AttributeTuple>& pool,
                                         const Vec& candidate_rep);

// Softmax over pool of (W_v E_u)·(W'_v e_k). Pool must be non-empty.
CredibilityDistribution item_credibility(const HintModel& m,
                                         const std::vector<AttributeTuple>& pool,
                                         const Vec& user_rep);

// --- Hard selection ----------------------------------------------------------

// Target count m = min(S, max(1, round(alpha*|pool|))) when alpha > 0, else 0.
// TopK: m highest-probability tuples. WeightedSample: m draws without
// replacement proportional to remaining mass. Result is credibility-descending.
std::vector<SelectedHint> select_hints(const CredibilityDistribution& dist, float alpha, int cap,
                                       SelectionMode mode, Rng& rng);

size_t selection_count(float alpha, int cap, size_t pool_size);

// --- Eq. 6/7: scoring and loss ----------------------------------------------

// MLP over zero-padded hint slots. When training is true each slot embedding
// is scaled by its credibility (straight-through weighting).
double predict_score(const HintModel& m, const std::vector<SelectedHint>& user_hints,
                     const std::vector<SelectedHint>& item_hints, bool training);

// Sum over negatives of -ln(sigmoid(pos - neg)).
double bpr_loss(double positive_score, const std::vector<double>& negative_scores);

// --- Training ----------------------------------------------------------------

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double valid_hit_ratio = 0.0;
    double wall_seconds = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    std::vector<double> first_epoch_batch_losses;  // per-batch mean loss, epoch 0
    int best_epoch = -1;
    double best_valid_hit_ratio = 0.0;
    std::string to_text() const;
};

// Mini-batch Adam on the BPR objective over train instances; per-epoch
// validation HitRatio@1 of the MLP head on valid instances with early
// stopping; returns the best checkpoint. Single-threaded, deterministic.
HintModel train(const KnowledgeGraph& g, const InteractionLog& log,
                const std::vector<Instance>& train_instances,
                const std::vector<Instance>& valid_instances, const TrainConfig& cfg,
                TrainReport* report = nullptr);

// --- Checkpointing -----------------------------------------------------------

void save_checkpoint(const HintModel& m, const std::string& path);
HintModel load_checkpoint(const std::string& path);
// Throws CheckpointError if the stored config echo differs from cfg.
HintModel load_checkpoint(const std::string& path, const TrainConfig& cfg);

}  // namespace pidlr
