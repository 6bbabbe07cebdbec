#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "pidlr/errors.hpp"
#include "pidlr/trainer.hpp"

namespace pidlr {

namespace {

// Tensor slots in HintModel::tensors() order.
enum TensorId {
    kUserEmb = 0,
    kItemEmb,
    kTupleEmb,
    kWc,
    kWcp,
    kWu,
    kWup,
    kWv,
    kWvp,
    kMlpW1,
    kMlpB1,
    kMlpW2,
    kMlpB2,
};

std::vector<double> raw_credibility(const Mat& w_left, const Mat& w_right, const Mat& tuple_emb,
                                    const std::vector<AttributeTuple>& pool, const Vec& rep) {
    Vec a(w_left.rows, 0.0f);
    matvec(w_left, rep, a);
    std::vector<double> logits(pool.size());
    Vec b(w_right.rows, 0.0f);
    for (size_t i = 0; i < pool.size(); ++i) {
        matvec(w_right, {tuple_emb.row(static_cast<size_t>(pool[i].index)), tuple_emb.cols}, b);
        logits[i] = dot(a, b);
    }
    double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double& l : logits) {
        l = std::exp(l - mx);
        z += l;
    }
    for (double& l : logits) l /= z;
    return logits;
}

// Pool positions of the selected hints, credibility-descending with
// ascending-tuple tie-break. Mirrors select_hints over raw pool order.
std::vector<size_t> select_positions(const std::vector<AttributeTuple>& pool,
                                     const std::vector<double>& probs, float alpha, int cap,
                                     SelectionMode mode, Rng* rng) {
    const size_t m = selection_count(alpha, cap, pool.size());
    std::vector<size_t> sel;
    if (m == 0) return sel;

    auto better = [&](size_t a, size_t b) {
        if (probs[a] != probs[b]) return probs[a] > probs[b];
        return pool[a].index < pool[b].index;
    };

    if (mode == SelectionMode::TopK) {
        std::vector<size_t> order(pool.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), better);
        sel.assign(order.begin(), order.begin() + static_cast<long>(m));
    } else {
        std::vector<size_t> remaining(pool.size());
        for (size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;
        double mass = 1.0;
        for (size_t k = 0; k < m; ++k) {
            double u = rng->next_double() * mass;
            size_t pick = remaining.size() - 1;
            double acc = 0.0;
            for (size_t i = 0; i < remaining.size(); ++i) {
                acc += probs[remaining[i]];
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
            sel.push_back(remaining[pick]);
            mass -= probs[remaining[pick]];
            remaining.erase(remaining.begin() + static_cast<long>(pick));
        }
    }
    std::sort(sel.begin(), sel.end(), better);
    return sel;
}

struct SlotBlock {
    // Slot inputs for one side: slot i holds weight_i * e_{pool[sel[i]]}.
    Vec z;                        // cap * d
    std::vector<double> weights;  // per selected slot (credibility or 1)
};

SlotBlock fill_slots(const HintModel& m, const std::vector<AttributeTuple>& pool,
                     const std::vector<double>& probs, const std::vector<size_t>& sel, int cap,
                     bool training) {
    const size_t d = static_cast<size_t>(m.cfg.d);
    SlotBlock blk;
    blk.z.assign(static_cast<size_t>(cap) * d, 0.0f);
    for (size_t i = 0; i < sel.size() && i < static_cast<size_t>(cap); ++i) {
        double w = training ? probs[sel[i]] : 1.0;
        blk.weights.push_back(w);
        const float* e = m.tuple_emb.row(static_cast<size_t>(pool[sel[i]].index));
        for (size_t j = 0; j < d; ++j) blk.z[i * d + j] = static_cast<float>(w) * e[j];
    }
    return blk;
}

// Backward through softmax(p) given dL/dp over the pool, then through the
// bilinear logits (w_left*rep)·(w_right*e_k). Accumulates into grads and
// returns dL/drep contribution via da accumulation done by the caller.
void credibility_backward(const HintModel& m, const Mat& w_left, const Mat& w_right,
                          int left_id, int right_id, const std::vector<AttributeTuple>& pool,
                          const std::vector<double>& probs, const std::vector<double>& dprobs,
                          const Vec& rep, Vec& drep, Grads& grads) {
    double dot_pd = 0.0;
    for (size_t i = 0; i < pool.size(); ++i) dot_pd += probs[i] * dprobs[i];
    std::vector<double> dlogit(pool.size());
    for (size_t i = 0; i < pool.size(); ++i) dlogit[i] = probs[i] * (dprobs[i] - dot_pd);

    Vec a(w_left.rows, 0.0f);
    matvec(w_left, rep, a);

    const size_t d = static_cast<size_t>(m.cfg.d);
    Vec da(w_left.rows, 0.0f);
    Vec b(w_right.rows, 0.0f);
    Vec db(w_right.rows, 0.0f);
    for (size_t i = 0; i < pool.size(); ++i) {
        if (dlogit[i] == 0.0) continue;
        const float* ek = m.tuple_emb.row(static_cast<size_t>(pool[i].index));
        matvec(w_right, {ek, d}, b);
        float gl = static_cast<float>(dlogit[i]);
        // da += gl * b ; db = gl * a
        for (size_t j = 0; j < b.size(); ++j) {
            da[j] += gl * b[j];
            db[j] = gl * a[j];
        }
        outer_add(grads.g[static_cast<size_t>(right_id)], db, {ek, d});
        matvec_t_add(w_right, db, {grads.g[kTupleEmb].row(static_cast<size_t>(pool[i].index)), d});
    }
    outer_add(grads.g[static_cast<size_t>(left_id)], da, rep);
    matvec_t_add(w_left, da, drep);
}

}  // namespace

InstancePlan make_plan(const KnowledgeGraph& g, const Instance& inst,
                       const std::vector<std::vector<AttributeTuple>>& collab_subgraphs) {
    InstancePlan plan;
    plan.user = inst.user;
    auto windowed = truncate_and_pad_history(inst.history);
    for (int32_t v : windowed)
        if (v != kPadItem) plan.history.push_back(v);
    plan.candidates = inst.candidates;
    plan.gt_index = inst.gt_index;

    std::map<int32_t, AttributeTuple> pool;
    for (const auto& t : items_subgraph(g, plan.history)) pool.emplace(t.index, t);
    for (const auto& sub : collab_subgraphs)
        for (const auto& t : sub) pool.emplace(t.index, t);
    plan.user_pool.reserve(pool.size());
    for (const auto& [idx, t] : pool) plan.user_pool.push_back(t);
    return plan;
}

InstanceResult instance_forward(const HintModel& m, const KnowledgeGraph& g,
                                const InstancePlan& plan, bool training,
                                const FixedSelection* fixed, Rng* rng, Grads* grads) {
    const size_t d = static_cast<size_t>(m.cfg.d);
    const size_t n_cand = plan.candidates.size();
    if (n_cand != static_cast<size_t>(m.cfg.candidate_size))
        throw ShapeError("instance candidate count mismatch");

    // --- forward ---
    Vec e_u = subgraph_representation(m, g, plan.user, plan.history);
    Vec e_V = candidate_attribute_representation(m, g, plan.candidates);

    InstanceResult res;
    SelectionMode mode = training ? m.cfg.selection : SelectionMode::TopK;

    std::vector<double> user_probs;
    if (!plan.user_pool.empty())
        user_probs = raw_credibility(m.w_u, m.w_up, m.tuple_emb, plan.user_pool, e_V);
    if (fixed)
        res.selection.user_sel = fixed->user_sel;
    else if (!plan.user_pool.empty())
        res.selection.user_sel =
            select_positions(plan.user_pool, user_probs, m.cfg.alpha_u, m.cfg.slot_u, mode, rng);
    SlotBlock user_blk =
        fill_slots(m, plan.user_pool, user_probs, res.selection.user_sel, m.cfg.slot_u, training);

    std::vector<std::vector<double>> item_probs(n_cand);
    res.selection.item_sel.resize(n_cand);
    std::vector<SlotBlock> item_blks(n_cand);
    for (size_t c = 0; c < n_cand; ++c) {
        const auto& ego = item_ego_network(g, plan.candidates[c]);
        if (!ego.empty()) item_probs[c] = raw_credibility(m.w_v, m.w_vp, m.tuple_emb, ego, e_u);
        if (fixed)
            res.selection.item_sel[c] = fixed->item_sel[c];
        else if (!ego.empty())
            res.selection.item_sel[c] =
                select_positions(ego, item_probs[c], m.cfg.alpha_v, m.cfg.slot_v, mode, rng);
        item_blks[c] =
            fill_slots(m, ego, item_probs[c], res.selection.item_sel[c], m.cfg.slot_v, training);
    }

    const size_t zu_len = static_cast<size_t>(m.cfg.slot_u) * d;
    const size_t zv_len = static_cast<size_t>(m.cfg.slot_v) * d;
    std::vector<Vec> z(n_cand), h(n_cand);
    res.scores.resize(n_cand);
    for (size_t c = 0; c < n_cand; ++c) {
        z[c].reserve(zu_len + zv_len);
        z[c].insert(z[c].end(), user_blk.z.begin(), user_blk.z.end());
        z[c].insert(z[c].end(), item_blks[c].z.begin(), item_blks[c].z.end());
        if (m.cfg.mlp_hidden > 0) {
            h[c].assign(m.mlp_w1.rows, 0.0f);
            matvec(m.mlp_w1, z[c], h[c]);
            for (size_t i = 0; i < h[c].size(); ++i)
                h[c][i] = std::max(0.0f, h[c][i] + m.mlp_b1.at(i, 0));
            res.scores[c] = dot({m.mlp_w2.row(0), m.mlp_w2.cols}, h[c]) + m.mlp_b2.at(0, 0);
        } else {
            res.scores[c] = dot({m.mlp_w2.row(0), m.mlp_w2.cols}, z[c]) + m.mlp_b2.at(0, 0);
        }
    }

    std::vector<double> negatives;
    for (size_t c = 0; c < n_cand; ++c)
        if (static_cast<int32_t>(c) != plan.gt_index) negatives.push_back(res.scores[c]);
    res.loss = bpr_loss(res.scores[static_cast<size_t>(plan.gt_index)], negatives);

    if (!grads) return res;

    // --- backward ---
    std::vector<double> dy(n_cand, 0.0);
    for (size_t c = 0; c < n_cand; ++c) {
        if (static_cast<int32_t>(c) == plan.gt_index) continue;
        double s = res.scores[static_cast<size_t>(plan.gt_index)] - res.scores[c];
        double sig = 1.0 / (1.0 + std::exp(-s));
        dy[static_cast<size_t>(plan.gt_index)] += sig - 1.0;
        dy[c] += 1.0 - sig;
    }

    Vec dzu_total(zu_len, 0.0f);
    std::vector<Vec> dzv(n_cand);
    for (size_t c = 0; c < n_cand; ++c) {
        Vec dz(zu_len + zv_len, 0.0f);
        float g_y = static_cast<float>(dy[c]);
        if (g_y != 0.0f) {
            if (m.cfg.mlp_hidden > 0) {
                Vec dh(m.mlp_w1.rows, 0.0f);
                for (size_t i = 0; i < dh.size(); ++i) dh[i] = g_y * m.mlp_w2.at(0, i);
                axpy(g_y, h[c], {grads->g[kMlpW2].row(0), grads->g[kMlpW2].cols});
                grads->g[kMlpB2].at(0, 0) += g_y;
                for (size_t i = 0; i < dh.size(); ++i)
                    if (h[c][i] <= 0.0f) dh[i] = 0.0f;
                for (size_t i = 0; i < dh.size(); ++i) grads->g[kMlpB1].at(i, 0) += dh[i];
                outer_add(grads->g[kMlpW1], dh, z[c]);
                matvec_t_add(m.mlp_w1, dh, dz);
            } else {
                axpy(g_y, z[c], {grads->g[kMlpW2].row(0), grads->g[kMlpW2].cols});
                grads->g[kMlpB2].at(0, 0) += g_y;
                for (size_t i = 0; i < dz.size(); ++i) dz[i] = g_y * m.mlp_w2.at(0, i);
            }
        }
        for (size_t i = 0; i < zu_len; ++i) dzu_total[i] += dz[i];
        dzv[c].assign(dz.begin() + static_cast<long>(zu_len), dz.end());
    }

    Vec de_u(3 * d, 0.0f);
    Vec de_V(e_V.size(), 0.0f);

    // User-side slots -> tuple embeddings + credibility probabilities.
    if (!res.selection.user_sel.empty()) {
        std::vector<double> dprobs(plan.user_pool.size(), 0.0);
        for (size_t i = 0; i < res.selection.user_sel.size(); ++i) {
            size_t pos = res.selection.user_sel[i];
            const float* ek = m.tuple_emb.row(static_cast<size_t>(plan.user_pool[pos].index));
            std::span<const float> dslot(dzu_total.data() + i * d, d);
            double w = user_blk.weights[i];
            axpy(static_cast<float>(w), dslot,
                 {grads->g[kTupleEmb].row(static_cast<size_t>(plan.user_pool[pos].index)), d});
            if (training) dprobs[pos] += dot({ek, d}, dslot);
        }
        if (training)
            credibility_backward(m, m.w_u, m.w_up, kWu, kWup, plan.user_pool, user_probs, dprobs,
                                 e_V, de_V, *grads);
    }

    // Item-side slots per candidate.
    for (size_t c = 0; c < n_cand; ++c) {
        const auto& ego = item_ego_network(g, plan.candidates[c]);
        if (res.selection.item_sel[c].empty()) continue;
        std::vector<double> dprobs(ego.size(), 0.0);
        for (size_t i = 0; i < res.selection.item_sel[c].size(); ++i) {
            size_t pos = res.selection.item_sel[c][i];
            const float* ek = m.tuple_emb.row(static_cast<size_t>(ego[pos].index));
            std::span<const float> dslot(dzv[c].data() + i * d, d);
            double w = item_blks[c].weights[i];
            axpy(static_cast<float>(w), dslot,
                 {grads->g[kTupleEmb].row(static_cast<size_t>(ego[pos].index)), d});
            if (training) dprobs[pos] += dot({ek, d}, dslot);
        }
        if (training)
            credibility_backward(m, m.w_v, m.w_vp, kWv, kWvp, ego, item_probs[c], dprobs, e_u,
                                 de_u, *grads);
    }

    // de_V -> candidate ego means.
    for (size_t c = 0; c < n_cand; ++c) {
        const auto& ego = item_ego_network(g, plan.candidates[c]);
        if (ego.empty()) continue;
        std::span<const float> dblock(de_V.data() + c * d, d);
        float inv = 1.0f / static_cast<float>(ego.size());
        for (const auto& t : ego)
            axpy(inv, dblock, {grads->g[kTupleEmb].row(static_cast<size_t>(t.index)), d});
    }

    // de_u -> user embedding, history item mean, history tuple mean.
    axpy(1.0f, {de_u.data(), d}, {grads->g[kUserEmb].row(static_cast<size_t>(plan.user)), d});
    if (!plan.history.empty()) {
        float inv = 1.0f / static_cast<float>(plan.history.size());
        for (int32_t v : plan.history)
            axpy(inv, {de_u.data() + d, d}, {grads->g[kItemEmb].row(static_cast<size_t>(v)), d});
    }
    auto hist_tuples = items_subgraph(g, plan.history);
    if (!hist_tuples.empty()) {
        float inv = 1.0f / static_cast<float>(hist_tuples.size());
        for (const auto& t : hist_tuples)
            axpy(inv, {de_u.data() + 2 * d, d},
                 {grads->g[kTupleEmb].row(static_cast<size_t>(t.index)), d});
    }

    return res;
}

void adam_step(HintModel& m, const Grads& grads) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    m.adam_step += 1;
    const double t = static_cast<double>(m.adam_step);
    const double bc1 = 1.0 - std::pow(beta1, t);
    const double bc2 = 1.0 - std::pow(beta2, t);
    const double lr = static_cast<double>(m.cfg.learning_rate);

    auto params = m.tensors();
    for (size_t i = 0; i < params.size(); ++i) {
        Mat& p = *params[i];
        Mat& mm = m.adam_m[i];
        Mat& vv = m.adam_v[i];
        const Mat& gr = grads.g[i];
        for (size_t j = 0; j < p.size(); ++j) {
            double gj = gr.a[j];
            double mj = beta1 * mm.a[j] + (1.0 - beta1) * gj;
            double vj = beta2 * vv.a[j] + (1.0 - beta2) * gj * gj;
            mm.a[j] = static_cast<float>(mj);
            vv.a[j] = static_cast<float>(vj);
            p.a[j] -= static_cast<float>(lr * (mj / bc1) / (std::sqrt(vj / bc2) + eps));
        }
    }
}

std::string TrainReport::to_text() const {
    std::ostringstream os;
    for (const auto& e : epochs)
        os << "epoch\t" << e.epoch << "\ttrain_loss\t" << e.train_loss << "\tvalid_hit_ratio\t"
           << e.valid_hit_ratio << "\twall_s\t" << e.wall_seconds << "\n";
    os << "best_epoch\t" << best_epoch << "\tbest_valid_hit_ratio\t" << best_valid_hit_ratio
       << "\n";
    return os.str();
}

namespace {

// All-user collaborative pool reps with the current parameters.
void all_user_reps(const HintModel& m, const KnowledgeGraph& g, const InteractionLog& log,
                   std::vector<int32_t>& pool, std::vector<Vec>& reps) {
    pool.clear();
    reps.clear();
    pool.reserve(log.num_users());
    reps.reserve(log.num_users());
    for (int32_t u = 0; u < static_cast<int32_t>(log.num_users()); ++u) {
        pool.push_back(u);
        reps.push_back(user_representation(m, g, log, u));
    }
}

}  // namespace

HintModel train(const KnowledgeGraph& g, const InteractionLog& log,
                const std::vector<Instance>& train_instances,
                const std::vector<Instance>& valid_instances, const TrainConfig& cfg,
                TrainReport* report) {
    cfg.validate();
    Rng init_rng(cfg.seed);
    HintModel model = init_model(cfg, log.num_users(), g.num_items(), g.num_tuples(), init_rng);
    if (cfg.max_epochs == 0 || train_instances.empty()) {
        if (report) *report = TrainReport{};
        return model;
    }

    // Pre-windowed user subgraphs (train split) reused for collaborative
    // pools; the tuple content does not depend on parameters.
    std::vector<std::vector<AttributeTuple>> user_subs(log.num_users());
    for (int32_t u = 0; u < static_cast<int32_t>(log.num_users()); ++u) {
        auto windowed = truncate_and_pad_history(log.train_items(u));
        user_subs[static_cast<size_t>(u)] = items_subgraph(g, windowed);
    }

    HintModel best = model;
    TrainReport rep;
    double best_valid = -1.0;
    int best_epoch = -1;
    int since_best = 0;

    std::vector<size_t> order(train_instances.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    Grads grads(model);

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        Rng shuffle_rng = Rng::derive(cfg.seed, 0x500000ULL + static_cast<uint64_t>(epoch));
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        size_t batch_id = 0;
        for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch_size)) {
            size_t end = std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
            const size_t bsz = end - start;

            // Same-batch collaborative pool: representations of all batch
            // users with the current parameters.
            std::vector<int32_t> batch_users;
            std::vector<Vec> batch_reps;
            batch_users.reserve(bsz);
            for (size_t i = start; i < end; ++i) {
                const Instance& inst = train_instances[order[i]];
                auto windowed = truncate_and_pad_history(inst.history);
                std::vector<int32_t> hist;
                for (int32_t v : windowed)
                    if (v != kPadItem) hist.push_back(v);
                batch_users.push_back(inst.user);
                batch_reps.push_back(subgraph_representation(model, g, inst.user, hist));
            }

            grads.zero();
            double batch_loss = 0.0;
            for (size_t i = start; i < end; ++i) {
                const Instance& inst = train_instances[order[i]];
                std::vector<int32_t> pool;
                std::vector<Vec> reps;
                for (size_t j = 0; j < batch_users.size(); ++j) {
                    if (batch_users[j] == inst.user) continue;
                    pool.push_back(batch_users[j]);
                    reps.push_back(batch_reps[j]);
                }
                Vec target_rep = batch_reps[i - start];
                auto collab = collaborative_users(model, target_rep, pool, reps, cfg.collab_n);
                std::vector<std::vector<AttributeTuple>> subs;
                subs.reserve(collab.size());
                for (int32_t u : collab) subs.push_back(user_subs[static_cast<size_t>(u)]);

                InstancePlan plan = make_plan(g, inst, subs);
                Rng inst_rng = Rng::derive(
                    cfg.seed, (static_cast<uint64_t>(epoch) << 40) ^
                                  (static_cast<uint64_t>(train_instances[order[i]].id) + 1));
                InstanceResult r =
                    instance_forward(model, g, plan, /*training=*/true, nullptr, &inst_rng, &grads);
                batch_loss += r.loss;
            }

            if (!std::isfinite(batch_loss)) {
                std::ostringstream os;
                os << "NaN/Inf loss in epoch " << epoch << " batch " << batch_id
                   << "; parameter norms:";
                auto params = model.tensors();
                for (size_t t = 0; t < params.size(); ++t) {
                    double n2 = 0.0;
                    for (float v : params[t]->a) n2 += static_cast<double>(v) * v;
                    os << " " << HintModel::tensor_names()[t] << "=" << std::sqrt(n2);
                }
                throw std::runtime_error(os.str());
            }

            // Mean gradient over the batch.
            float inv = 1.0f / static_cast<float>(bsz);
            for (Mat& t : grads.g)
                for (float& v : t.a) v *= inv;
            adam_step(model, grads);
            if (!model.finite())
                throw std::runtime_error("non-finite parameter after optimizer step (epoch " +
                                         std::to_string(epoch) + " batch " +
                                         std::to_string(batch_id) + ")");

            epoch_loss += batch_loss;
            if (epoch == 0 && report) rep.first_epoch_batch_losses.push_back(batch_loss / bsz);
            ++batch_id;
        }

        // Validation: deterministic top-k inference, all-train-users pool.
        std::vector<int32_t> pool;
        std::vector<Vec> reps;
        all_user_reps(model, g, log, pool, reps);
        std::vector<std::vector<AttributeTuple>>& subs_all = user_subs;
        size_t hits = 0;
        for (const Instance& inst : valid_instances) {
            std::vector<int32_t> cpool;
            std::vector<Vec> creps;
            for (size_t i = 0; i < pool.size(); ++i) {
                if (pool[i] == inst.user) continue;
                cpool.push_back(pool[i]);
                creps.push_back(reps[i]);
            }
            auto windowed = truncate_and_pad_history(inst.history);
            std::vector<int32_t> hist;
            for (int32_t v : windowed)
                if (v != kPadItem) hist.push_back(v);
            Vec e_u = subgraph_representation(model, g, inst.user, hist);
            auto collab = collaborative_users(model, e_u, cpool, creps, cfg.collab_n);
            std::vector<std::vector<AttributeTuple>> subs;
            for (int32_t u : collab) subs.push_back(subs_all[static_cast<size_t>(u)]);
            InstancePlan plan = make_plan(g, inst, subs);
            InstanceResult r =
                instance_forward(model, g, plan, /*training=*/false, nullptr, nullptr, nullptr);
            int am = static_cast<int>(std::max_element(r.scores.begin(), r.scores.end()) -
                                      r.scores.begin());
            if (am == inst.gt_index) ++hits;
        }
        double valid_hit =
            valid_instances.empty() ? 0.0 : static_cast<double>(hits) / valid_instances.size();

        auto t1 = std::chrono::steady_clock::now();
        EpochStats es;
        es.epoch = epoch;
        es.train_loss = epoch_loss / static_cast<double>(train_instances.size());
        es.valid_hit_ratio = valid_hit;
        es.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
        rep.epochs.push_back(es);

        if (valid_hit > best_valid) {
            best_valid = valid_hit;
            best_epoch = epoch;
            best = model;
            since_best = 0;
        } else if (++since_best > cfg.patience) {
            break;
        }
    }

    rep.best_epoch = best_epoch;
    rep.best_valid_hit_ratio = best_valid < 0.0 ? 0.0 : best_valid;
    if (report) *report = std::move(rep);
    return best;
}

}  // namespace pidlr
