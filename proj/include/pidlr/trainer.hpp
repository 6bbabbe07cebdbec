#pragma once

#include <optional>
#include <vector>

#include "pidlr/model.hpp"

namespace pidlr {

// Per-tensor gradients, aligned with HintModel::tensors() order.
struct Grads {
    std::vector<Mat> g;

    explicit Grads(const HintModel& m) {
        for (const Mat* t : m.tensors()) g.emplace_back(t->rows, t->cols);
    }
    void zero() {
        for (Mat& t : g) t.zero();
    }
};

// Everything the per-instance loss needs besides the model: the windowed
// history, the candidates, and the user-side preference pool (already
// augmented with collaborative users' tuples where applicable).
struct InstancePlan {
    int32_t user = -1;
    std::vector<int32_t> history;  // non-pad, windowed
    std::vector<int32_t> candidates;
    int32_t gt_index = -1;
    std::vector<AttributeTuple> user_pool;  // Gamma-hat_u; may be empty
};

// Selection held fixed (pool positions, credibility-descending). Used by the
// gradient check, and to replay a sampled selection through the backward pass.
struct FixedSelection {
    std::vector<size_t> user_sel;
    std::vector<std::vector<size_t>> item_sel;  // per candidate
};

struct InstanceResult {
    double loss = 0.0;
    std::vector<double> scores;  // per candidate
    FixedSelection selection;    // the selection actually used
};

// Computes per-candidate scores and the BPR loss for one instance. When
// `fixed` is null the selection is drawn here (training: cfg.selection mode;
// inference: top-k). When `grads` is non-null, accumulates analytic gradients
// through the straight-through weighted path, selection held fixed.
InstanceResult instance_forward(const HintModel& m, const KnowledgeGraph& g,
                                const InstancePlan& plan, bool training,
                                const FixedSelection* fixed, Rng* rng, Grads* grads);

// Adam step with beta1=0.9, beta2=0.999, eps=1e-8. Gradients are consumed
// as-is; the caller scales by 1/batch beforehand.
void adam_step(HintModel& m, const Grads& grads);

// Builds the training-side plan for an instance: last-10 history window and
// the user pool from own history plus collaborative users' subgraphs.
InstancePlan make_plan(const KnowledgeGraph& g, const Instance& inst,
                       const std::vector<std::vector<AttributeTuple>>& collab_subgraphs);

}  // namespace pidlr
