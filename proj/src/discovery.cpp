#include "pidlr/discovery.hpp"

#include <algorithm>

#include <json.hpp>

#include "pidlr/errors.hpp"

namespace pidlr {

const char* mode_name(DiscoveryMode m) {
    switch (m) {
        case DiscoveryMode::Normal: return "normal";
        case DiscoveryMode::NoIpd: return "no_ipd";
        case DiscoveryMode::NoCie: return "no_cie";
        case DiscoveryMode::Random: return "random";
        case DiscoveryMode::All: return "all";
    }
    return "?";
}

DiscoveryMode mode_from_name(const std::string& name) {
    if (name == "normal") return DiscoveryMode::Normal;
    if (name == "no_ipd") return DiscoveryMode::NoIpd;
    if (name == "no_cie") return DiscoveryMode::NoCie;
    if (name == "random") return DiscoveryMode::Random;
    if (name == "all") return DiscoveryMode::All;
    throw ConfigError("unknown discovery mode: " + name);
}

std::string HintSet::to_record(const KnowledgeGraph& g) const {
    nlohmann::ordered_json j;
    j["instance_id"] = instance_id;
    j["mode"] = mode_name(mode);
    j["empty_user_pool"] = empty_user_pool;
    auto& uh = j["user_hints"] = nlohmann::ordered_json::array();
    for (const auto& h : user_hints) {
        nlohmann::ordered_json e;
        e["relation"] = g.relation_names[static_cast<size_t>(h.tuple.relation)];
        e["tail"] = g.entity_names[static_cast<size_t>(h.tuple.tail)];
        e["tuple"] = h.tuple.index;
        e["credibility"] = h.credibility;
        e["source"] = h.source == HintSource::OwnHistory ? "own-history" : "collaborative";
        if (h.source == HintSource::Collaborative) e["source_user"] = h.source_user;
        uh.push_back(std::move(e));
    }
    auto& ih = j["item_hints"] = nlohmann::ordered_json::object();
    for (const auto& [item, hints] : item_hints) {
        auto& arr = ih[g.item_title(item)] = nlohmann::ordered_json::array();
        for (const auto& h : hints) {
            nlohmann::ordered_json e;
            e["relation"] = g.relation_names[static_cast<size_t>(h.tuple.relation)];
            e["tail"] = g.entity_names[static_cast<size_t>(h.tuple.tail)];
            e["tuple"] = h.tuple.index;
            e["credibility"] = h.credibility;
            arr.push_back(std::move(e));
        }
    }
    return j.dump();
}

namespace {

// Pool with provenance from an explicit own-history item list plus
// collaborative subgraphs; own-history wins duplicates.
std::vector<TupleWithProvenance> pool_with_provenance(
    const KnowledgeGraph& g, const std::vector<int32_t>& own_items,
    const std::vector<int32_t>& collab_users,
    const std::vector<std::vector<AttributeTuple>>& collab_subs) {
    std::map<int32_t, TupleWithProvenance> pool;
    for (const auto& t : items_subgraph(g, own_items))
        pool.emplace(t.index, TupleWithProvenance{t, HintSource::OwnHistory, -1});
    for (size_t i = 0; i < collab_users.size(); ++i)
        for (const auto& t : collab_subs[i])
            pool.emplace(t.index, TupleWithProvenance{t, HintSource::Collaborative, collab_users[i]});
    std::vector<TupleWithProvenance> out;
    out.reserve(pool.size());
    for (const auto& [idx, t] : pool) out.push_back(t);
    return out;
}

std::vector<int32_t> windowed_history(const std::vector<int32_t>& history) {
    std::vector<int32_t> out;
    for (int32_t v : truncate_and_pad_history(history))
        if (v != kPadItem) out.push_back(v);
    return out;
}

// Uniform draw of `count` distinct positions from [0, n).
std::vector<size_t> uniform_positions(size_t n, size_t count, Rng& rng) {
    std::vector<size_t> all(n);
    for (size_t i = 0; i < n; ++i) all[i] = i;
    rng.shuffle(all);
    all.resize(count);
    std::sort(all.begin(), all.end());
    return all;
}

}  // namespace

std::vector<TupleWithProvenance> comprehensive_preferences(const HintModel& m,
                                                           const KnowledgeGraph& g,
                                                           const InteractionLog& log, int32_t user,
                                                           int n) {
    auto own = log.train_items(user);
    std::vector<int32_t> collab;
    std::vector<std::vector<AttributeTuple>> subs;
    if (n > 0) {
        std::vector<int32_t> pool;
        std::vector<Vec> reps;
        for (int32_t u = 0; u < static_cast<int32_t>(log.num_users()); ++u) {
            if (u == user) continue;
            pool.push_back(u);
            reps.push_back(user_representation(m, g, log, u));
        }
        Vec target = user_representation(m, g, log, user);
        collab = collaborative_users(m, target, pool, reps, n);
        for (int32_t u : collab) subs.push_back(user_subgraph(g, log, u));
    }
    return pool_with_provenance(g, own, collab, subs);
}

DiscoveryContext build_discovery_context(const HintModel& m, const KnowledgeGraph& g,
                                         const InteractionLog& log, bool parallel) {
    DiscoveryContext ctx;
    const int32_t n = static_cast<int32_t>(log.num_users());
    ctx.users.resize(static_cast<size_t>(n));
    ctx.reps.resize(static_cast<size_t>(n));
    ctx.subgraphs.resize(static_cast<size_t>(n));
#pragma omp parallel for schedule(static) if (parallel)
    for (int32_t u = 0; u < n; ++u) {
        ctx.users[static_cast<size_t>(u)] = u;
        auto windowed = windowed_history(log.train_items(u));
        ctx.reps[static_cast<size_t>(u)] = subgraph_representation(m, g, u, windowed);
        ctx.subgraphs[static_cast<size_t>(u)] = items_subgraph(g, windowed);
    }
    return ctx;
}

HintSet discover_instance_hints(const HintModel& m, const KnowledgeGraph& g,
                                const InteractionLog& log, const DiscoveryContext& ctx,
                                const Instance& inst, DiscoveryMode mode, uint64_t seed) {
    (void)log;
    HintSet hs;
    hs.instance_id = inst.id;
    hs.mode = mode;

    if (mode == DiscoveryMode::NoIpd) {
        for (int32_t c : inst.candidates) hs.item_hints[c] = {};
        return hs;
    }

    auto hist = windowed_history(inst.history);
    Vec e_u = subgraph_representation(m, g, inst.user, hist);

    // Collaborative augmentation of the user pool (not in NO_CIE).
    std::vector<int32_t> collab;
    std::vector<std::vector<AttributeTuple>> collab_subs;
    if (mode != DiscoveryMode::NoCie && m.cfg.collab_n > 0) {
        std::vector<int32_t> pool;
        std::vector<Vec> reps;
        pool.reserve(ctx.users.size());
        for (size_t i = 0; i < ctx.users.size(); ++i) {
            if (ctx.users[i] == inst.user) continue;
            pool.push_back(ctx.users[i]);
            reps.push_back(ctx.reps[i]);
        }
        collab = collaborative_users(m, e_u, pool, reps, m.cfg.collab_n);
        for (int32_t u : collab) collab_subs.push_back(ctx.subgraphs[static_cast<size_t>(u)]);
    }
    auto pool = pool_with_provenance(g, hist, collab, collab_subs);

    Rng rng = Rng::derive(seed, static_cast<uint64_t>(inst.id) + 0x415F4D4FULL);

    // --- user side ---
    if (pool.empty()) {
        hs.empty_user_pool = true;
    } else if (mode == DiscoveryMode::All) {
        double p = 1.0 / static_cast<double>(pool.size());
        for (const auto& t : pool)
            hs.user_hints.push_back({t.tuple, p, t.source, t.source_user});
    } else {
        std::vector<AttributeTuple> tuples;
        tuples.reserve(pool.size());
        for (const auto& t : pool) tuples.push_back(t.tuple);
        auto provenance_of = [&](int32_t tuple_index) -> const TupleWithProvenance& {
            auto it = std::lower_bound(pool.begin(), pool.end(), tuple_index,
                                       [](const TupleWithProvenance& a, int32_t idx) {
                                           return a.tuple.index < idx;
                                       });
            return *it;
        };
        if (mode == DiscoveryMode::Random) {
            size_t count = selection_count(m.cfg.alpha_u, m.cfg.slot_u, pool.size());
            double p = 1.0 / static_cast<double>(pool.size());
            for (size_t pos : uniform_positions(pool.size(), count, rng))
                hs.user_hints.push_back(
                    {pool[pos].tuple, p, pool[pos].source, pool[pos].source_user});
        } else {
            auto dist = user_credibility(m, tuples, candidate_attribute_representation(
                                                        m, g, inst.candidates));
            auto sel = select_hints(dist, m.cfg.alpha_u, m.cfg.slot_u, SelectionMode::TopK, rng);
            for (const auto& h : sel) {
                const auto& prov = provenance_of(h.tuple);
                hs.user_hints.push_back({prov.tuple, h.credibility, prov.source, prov.source_user});
            }
        }
    }

    // --- item side ---
    for (int32_t c : inst.candidates) {
        const auto& ego = item_ego_network(g, c);
        auto& out = hs.item_hints[c];
        if (ego.empty()) continue;
        if (mode == DiscoveryMode::All) {
            double p = 1.0 / static_cast<double>(ego.size());
            for (const auto& t : ego) out.push_back({t, p});
        } else if (mode == DiscoveryMode::Random) {
            size_t count = selection_count(m.cfg.alpha_v, m.cfg.slot_v, ego.size());
            double p = 1.0 / static_cast<double>(ego.size());
            for (size_t pos : uniform_positions(ego.size(), count, rng))
                out.push_back({ego[pos], p});
        } else {
            auto dist = item_credibility(m, ego, e_u);
            auto sel = select_hints(dist, m.cfg.alpha_v, m.cfg.slot_v, SelectionMode::TopK, rng);
            auto tuple_of = [&](int32_t idx) {
                auto it = std::lower_bound(
                    ego.begin(), ego.end(), idx,
                    [](const AttributeTuple& a, int32_t i) { return a.index < i; });
                return *it;
            };
            for (const auto& h : sel) out.push_back({tuple_of(h.tuple), h.credibility});
        }
    }
    return hs;
}

std::vector<HintSet> discover_all(const HintModel& m, const KnowledgeGraph& g,
                                  const InteractionLog& log, const DiscoveryContext& ctx,
                                  const std::vector<Instance>& instances, DiscoveryMode mode,
                                  uint64_t seed, bool parallel) {
    std::vector<HintSet> out(instances.size());
    const int64_t n = static_cast<int64_t>(instances.size());
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
    for (int64_t i = 0; i < n; ++i)
        out[static_cast<size_t>(i)] =
            discover_instance_hints(m, g, log, ctx, instances[static_cast<size_t>(i)], mode, seed);
    return out;
}

}  // namespace pidlr
