#include "pidlr/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pidlr/errors.hpp"
#include "pidlr/kernels.hpp"

namespace pidlr {

void TrainConfig::validate() const {
    if (d < 1) throw ConfigError("d must be >= 1");
    if (alpha_u < 0.0f || alpha_u > 1.0f) throw ConfigError("alpha_u must be in [0,1]");
    if (alpha_v < 0.0f || alpha_v > 1.0f) throw ConfigError("alpha_v must be in [0,1]");
    if (slot_u < 1 || slot_v < 1) throw ConfigError("slot caps must be >= 1");
    if (candidate_size < 2) throw ConfigError("candidate_size must be >= 2");
    if (collab_n < 0) throw ConfigError("collab_n must be >= 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (max_epochs < 0) throw ConfigError("max_epochs must be >= 0");
    if (mlp_hidden < 0) throw ConfigError("mlp_hidden must be >= 0");
    if (learning_rate <= 0.0f) throw ConfigError("learning_rate must be > 0");
}

std::string TrainConfig::canonical_text() const {
    std::ostringstream os;
    os << "d=" << d << "\n"
       << "d_cos=" << d_cos << "\n"
       << "d_att=" << d_att << "\n"
       << "learning_rate=" << learning_rate << "\n"
       << "batch_size=" << batch_size << "\n"
       << "collab_n=" << collab_n << "\n"
       << "alpha_u=" << alpha_u << "\n"
       << "alpha_v=" << alpha_v << "\n"
       << "slot_u=" << slot_u << "\n"
       << "slot_v=" << slot_v << "\n"
       << "candidate_size=" << candidate_size << "\n"
       << "selection=" << (selection == SelectionMode::WeightedSample ? "weighted-sample" : "top-k")
       << "\n"
       << "seed=" << seed << "\n"
       << "max_epochs=" << max_epochs << "\n"
       << "patience=" << patience << "\n"
       << "mlp_hidden=" << mlp_hidden << "\n";
    return os.str();
}

TrainConfig TrainConfig::from_canonical_text(const std::string& text) {
    TrainConfig cfg;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("bad config line: " + line);
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        if (key == "d") cfg.d = std::stoi(val);
        else if (key == "d_cos") cfg.d_cos = std::stoi(val);
        else if (key == "d_att") cfg.d_att = std::stoi(val);
        else if (key == "learning_rate") cfg.learning_rate = std::stof(val);
        else if (key == "batch_size") cfg.batch_size = std::stoi(val);
        else if (key == "collab_n") cfg.collab_n = std::stoi(val);
        else if (key == "alpha_u") cfg.alpha_u = std::stof(val);
        else if (key == "alpha_v") cfg.alpha_v = std::stof(val);
        else if (key == "slot_u") cfg.slot_u = std::stoi(val);
        else if (key == "slot_v") cfg.slot_v = std::stoi(val);
        else if (key == "candidate_size") cfg.candidate_size = std::stoi(val);
        else if (key == "selection")
            cfg.selection = val == "top-k" ? SelectionMode::TopK : SelectionMode::WeightedSample;
        else if (key == "seed") cfg.seed = std::stoull(val);
        else if (key == "max_epochs") cfg.max_epochs = std::stoi(val);
        else if (key == "patience") cfg.patience = std::stoi(val);
        else if (key == "mlp_hidden") cfg.mlp_hidden = std::stoi(val);
        else throw ConfigError("unknown config key: " + key);
    }
    return cfg;
}

std::vector<Mat*> HintModel::tensors() {
    return {&user_emb, &item_emb, &tuple_emb, &w_c, &w_cp, &w_u, &w_up,
            &w_v,      &w_vp,     &mlp_w1,    &mlp_b1, &mlp_w2, &mlp_b2};
}

std::vector<const Mat*> HintModel::tensors() const {
    return {&user_emb, &item_emb, &tuple_emb, &w_c, &w_cp, &w_u, &w_up,
            &w_v,      &w_vp,     &mlp_w1,    &mlp_b1, &mlp_w2, &mlp_b2};
}

const std::vector<std::string>& HintModel::tensor_names() {
    static const std::vector<std::string> names = {
        "user_emb", "item_emb", "tuple_emb", "w_c", "w_cp", "w_u", "w_up",
        "w_v",      "w_vp",     "mlp_w1",    "mlp_b1", "mlp_w2", "mlp_b2"};
    return names;
}

bool HintModel::finite() const {
    for (const Mat* t : tensors())
        if (!all_finite(*t)) return false;
    return true;
}

bool HintModel::operator==(const HintModel& o) const {
    if (cfg != o.cfg || num_users != o.num_users || num_items != o.num_items ||
        num_tuples != o.num_tuples || adam_step != o.adam_step)
        return false;
    auto a = tensors();
    auto b = o.tensors();
    for (size_t i = 0; i < a.size(); ++i)
        if (!(*a[i] == *b[i])) return false;
    return adam_m == o.adam_m && adam_v == o.adam_v;
}

namespace {

void fill_uniform(Mat& m, float lo, float hi, Rng& rng) {
    for (float& v : m.a) v = rng.next_uniform(lo, hi);
}

}  // namespace

HintModel init_model(const TrainConfig& cfg, size_t num_users, size_t num_items,
                     size_t num_tuples, Rng& rng) {
    cfg.validate();
    HintModel m;
    m.cfg = cfg;
    m.num_users = num_users;
    m.num_items = num_items;
    m.num_tuples = num_tuples;

    const size_t d = static_cast<size_t>(cfg.d);
    const size_t dc = static_cast<size_t>(cfg.cos_dim());
    const size_t da = static_cast<size_t>(cfg.att_dim());
    const size_t slots = static_cast<size_t>(cfg.slot_u + cfg.slot_v) * d;
    const size_t hidden = static_cast<size_t>(cfg.mlp_hidden);

    m.user_emb = Mat(num_users, d);
    m.item_emb = Mat(num_items + 1, d);
    m.tuple_emb = Mat(num_tuples, d);
    m.w_c = Mat(dc, 3 * d);
    m.w_cp = Mat(dc, 3 * d);
    m.w_u = Mat(da, static_cast<size_t>(cfg.candidate_size) * d);
    m.w_up = Mat(da, d);
    m.w_v = Mat(da, 3 * d);
    m.w_vp = Mat(da, d);
    if (hidden > 0) {
        m.mlp_w1 = Mat(hidden, slots);
        m.mlp_b1 = Mat(hidden, 1);
        m.mlp_w2 = Mat(1, hidden);
    } else {
        // Degenerate single-linear-layer head, used by unit oracles.
        m.mlp_w1 = Mat(0, 0);
        m.mlp_b1 = Mat(0, 0);
        m.mlp_w2 = Mat(1, slots);
    }
    m.mlp_b2 = Mat(1, 1);

    const float bound = 1.0f / std::sqrt(static_cast<float>(d));
    fill_uniform(m.user_emb, -bound, bound, rng);
    fill_uniform(m.item_emb, -bound, bound, rng);
    fill_uniform(m.tuple_emb, -bound, bound, rng);
    fill_uniform(m.w_c, -bound, bound, rng);
    // The collaborative projections receive no gradient (top-N selection is
    // non-differentiable), so an independent random W'_c would destroy the
    // similarity structure Eq. 3 relies on. Tie them at init instead.
    m.w_cp = m.w_c;
    fill_uniform(m.w_u, -bound, bound, rng);
    fill_uniform(m.w_up, -bound, bound, rng);
    fill_uniform(m.w_v, -bound, bound, rng);
    fill_uniform(m.w_vp, -bound, bound, rng);
    fill_uniform(m.mlp_w1, -bound, bound, rng);
    fill_uniform(m.mlp_w2, -bound, bound, rng);
    // Biases stay zero.

    for (Mat* t : m.tensors()) {
        m.adam_m.emplace_back(t->rows, t->cols);
        m.adam_v.emplace_back(t->rows, t->cols);
    }
    return m;
}

Vec subgraph_representation(const HintModel& m, const KnowledgeGraph& g, int32_t user,
                            const std::vector<int32_t>& history_items) {
    if (user < 0 || user >= static_cast<int32_t>(m.num_users))
        throw LookupError("unknown user index " + std::to_string(user));
    const size_t d = static_cast<size_t>(m.cfg.d);
    Vec out(3 * d, 0.0f);
    const float* eu = m.user_emb.row(static_cast<size_t>(user));
    std::copy(eu, eu + d, out.begin());

    size_t n_items = 0;
    for (int32_t v : history_items) {
        if (v == kPadItem) continue;
        axpy(1.0f, {m.item_emb.row(static_cast<size_t>(v)), d}, {out.data() + d, d});
        ++n_items;
    }
    if (n_items > 0)
        for (size_t i = 0; i < d; ++i) out[d + i] /= static_cast<float>(n_items);

    auto tuples = items_subgraph(g, history_items);
    for (const auto& t : tuples)
        axpy(1.0f, {m.tuple_emb.row(static_cast<size_t>(t.index)), d}, {out.data() + 2 * d, d});
    if (!tuples.empty())
        for (size_t i = 0; i < d; ++i) out[2 * d + i] /= static_cast<float>(tuples.size());
    return out;
}

Vec user_representation(const HintModel& m, const KnowledgeGraph& g, const InteractionLog& log,
                        int32_t user) {
    auto items = log.train_items(user);
    auto windowed = truncate_and_pad_history(items);
    return subgraph_representation(m, g, user, windowed);
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size())
        throw ShapeError("cosine_similarity: length mismatch " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
    double na = norm(a);
    double nb = norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

std::vector<int32_t> collaborative_users(const HintModel& m, const Vec& target_rep,
                                         const std::vector<int32_t>& pool,
                                         const std::vector<Vec>& pool_reps, int n, bool parallel) {
    if (pool.size() != pool_reps.size())
        throw ShapeError("collaborative_users: pool/rep size mismatch");
    if (n <= 0 || pool.empty()) return {};
    std::vector<double> sims;
    if (parallel)
        projected_similarities_parallel(m.w_c, m.w_cp, target_rep, pool_reps, sims);
    else
        projected_similarities_serial(m.w_c, m.w_cp, target_rep, pool_reps, sims);

    std::vector<size_t> order(pool.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (sims[a] != sims[b]) return sims[a] > sims[b];
        return pool[a] < pool[b];
    });
    size_t take = std::min(static_cast<size_t>(n), pool.size());
    std::vector<int32_t> out(take);
    for (size_t i = 0; i < take; ++i) out[i] = pool[order[i]];
    return out;
}

Vec candidate_attribute_representation(const HintModel& m, const KnowledgeGraph& g,
                                       const std::vector<int32_t>& candidates) {
    if (candidates.size() != static_cast<size_t>(m.cfg.candidate_size))
        throw ShapeError("candidate set size " + std::to_string(candidates.size()) +
                         " != configured " + std::to_string(m.cfg.candidate_size));
    const size_t d = static_cast<size_t>(m.cfg.d);
    Vec out(candidates.size() * d, 0.0f);
    for (size_t c = 0; c < candidates.size(); ++c) {
        const auto& ego = item_ego_network(g, candidates[c]);
        if (ego.empty()) continue;
        std::span<float> block(out.data() + c * d, d);
        for (const auto& t : ego)
            axpy(1.0f, {m.tuple_emb.row(static_cast<size_t>(t.index)), d}, block);
        for (float& v : block) v /= static_cast<float>(ego.size());
    }
    return out;
}

namespace {

// Softmax of bilinear logits (W_left rep)·(W_right e_k) over a tuple pool.
// Raw probabilities are returned aligned with the pool order.
std::vector<double> credibility_probs(const Mat& w_left, const Mat& w_right, const Mat& tuple_emb,
                                      const std::vector<AttributeTuple>& pool, const Vec& rep) {
    if (rep.size() != w_left.cols)
        throw ShapeError("credibility: representation length " + std::to_string(rep.size()) +
                         " != " + std::to_string(w_left.cols));
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

CredibilityDistribution sorted_distribution(const std::vector<AttributeTuple>& pool,
                                            const std::vector<double>& probs) {
    CredibilityDistribution dist;
    dist.entries.reserve(pool.size());
    for (size_t i = 0; i < pool.size(); ++i) dist.entries.emplace_back(pool[i].index, probs[i]);
    std::sort(dist.entries.begin(), dist.entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return dist;
}

}  // namespace

CredibilityDistribution user_credibility(const HintModel& m,
                                         const std::vector<AttributeTuple>& pool,
                                         const Vec& candidate_rep) {
    if (pool.empty()) throw IntegrityError("user_credibility: empty preference pool");
    return sorted_distribution(pool,
                               credibility_probs(m.w_u, m.w_up, m.tuple_emb, pool, candidate_rep));
}

CredibilityDistribution item_credibility(const HintModel& m,
                                         const std::vector<AttributeTuple>& pool,
                                         const Vec& user_rep) {
    if (pool.empty()) throw IntegrityError("item_credibility: empty attribute pool");
    return sorted_distribution(pool,
                               credibility_probs(m.w_v, m.w_vp, m.tuple_emb, pool, user_rep));
}

size_t selection_count(float alpha, int cap, size_t pool_size) {
    if (alpha <= 0.0f || pool_size == 0) return 0;
    long target = std::lround(static_cast<double>(alpha) * static_cast<double>(pool_size));
    target = std::max(1L, target);
    return std::min({static_cast<size_t>(target), static_cast<size_t>(cap), pool_size});
}

std::vector<SelectedHint> select_hints(const CredibilityDistribution& dist, float alpha, int cap,
                                       SelectionMode mode, Rng& rng) {
    const size_t m = selection_count(alpha, cap, dist.entries.size());
    std::vector<SelectedHint> out;
    if (m == 0) return out;
    out.reserve(m);

    if (mode == SelectionMode::TopK) {
        // Re-sort defensively: callers usually pass entries already
        // probability-descending, but the tie-break contract must hold
        // regardless of input order.
        std::vector<std::pair<int32_t, double>> sorted = dist.entries;
        std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        for (size_t i = 0; i < m; ++i) out.push_back({sorted[i].first, sorted[i].second});
        return out;
    }

    // Weighted sampling without replacement, proportional to remaining mass.
    std::vector<std::pair<int32_t, double>> pool = dist.entries;
    double mass = 0.0;
    for (const auto& e : pool) mass += e.second;
    for (size_t k = 0; k < m; ++k) {
        double u = rng.next_double() * mass;
        size_t pick = pool.size() - 1;
        double acc = 0.0;
        for (size_t i = 0; i < pool.size(); ++i) {
            acc += pool[i].second;
            if (u < acc) {
                pick = i;
                break;
            }
        }
        out.push_back({pool[pick].first, pool[pick].second});
        mass -= pool[pick].second;
        pool.erase(pool.begin() + static_cast<long>(pick));
    }
    std::sort(out.begin(), out.end(), [](const SelectedHint& a, const SelectedHint& b) {
        if (a.credibility != b.credibility) return a.credibility > b.credibility;
        return a.tuple < b.tuple;
    });
    return out;
}

namespace {

// Hint slots: selected embeddings in credibility-descending order, optionally
// scaled by credibility, zero-padded to cap slots of width d.
Vec fill_slots(const Mat& tuple_emb, const std::vector<SelectedHint>& hints, int cap, size_t d,
               bool training) {
    Vec out(static_cast<size_t>(cap) * d, 0.0f);
    size_t n = std::min(hints.size(), static_cast<size_t>(cap));
    for (size_t i = 0; i < n; ++i) {
        const float* e = tuple_emb.row(static_cast<size_t>(hints[i].tuple));
        float w = training ? static_cast<float>(hints[i].credibility) : 1.0f;
        for (size_t j = 0; j < d; ++j) out[i * d + j] = w * e[j];
    }
    return out;
}

}  // namespace

double predict_score(const HintModel& m, const std::vector<SelectedHint>& user_hints,
                     const std::vector<SelectedHint>& item_hints, bool training) {
    const size_t d = static_cast<size_t>(m.cfg.d);
    Vec zu = fill_slots(m.tuple_emb, user_hints, m.cfg.slot_u, d, training);
    Vec zv = fill_slots(m.tuple_emb, item_hints, m.cfg.slot_v, d, training);
    Vec z;
    z.reserve(zu.size() + zv.size());
    z.insert(z.end(), zu.begin(), zu.end());
    z.insert(z.end(), zv.begin(), zv.end());

    if (m.cfg.mlp_hidden == 0) return dot({m.mlp_w2.row(0), m.mlp_w2.cols}, z) + m.mlp_b2.at(0, 0);

    Vec h(m.mlp_w1.rows, 0.0f);
    matvec(m.mlp_w1, z, h);
    for (size_t i = 0; i < h.size(); ++i) h[i] = std::max(0.0f, h[i] + m.mlp_b1.at(i, 0));
    return dot({m.mlp_w2.row(0), m.mlp_w2.cols}, h) + m.mlp_b2.at(0, 0);
}

double bpr_loss(double positive_score, const std::vector<double>& negative_scores) {
    if (negative_scores.empty()) throw IntegrityError("bpr_loss: needs at least one negative");
    double loss = 0.0;
    for (double neg : negative_scores) {
        double s = positive_score - neg;
        // -ln(sigmoid(s)) = softplus(-s), computed stably.
        loss += s > 0.0 ? std::log1p(std::exp(-s)) : -s + std::log1p(std::exp(s));
    }
    return loss;
}

}  // namespace pidlr
