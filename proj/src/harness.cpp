#include "pidlr/harness.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>
#include "pidlr/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pidlr {
namespace {

using json = nlohmann::ordered_json;

// Items the user never interacted with, in ascending item index order.
std::vector<int32_t> never_interacted(const InteractionLog& log, const KnowledgeGraph& g,
                                      int32_t user) {
    std::unordered_set<int32_t> seen;
    for (const auto& it : log.users[user]) seen.insert(it.item);
    std::vector<int32_t> out;
    out.reserve(g.num_items());
    for (int32_t v = 1; v <= static_cast<int32_t>(g.num_items()); ++v)
        if (!seen.count(v)) out.push_back(v);
    return out;
}

// History positions to target over for a split: for train every train
// interaction is a target; for valid/test the single leave-one-out target.
std::vector<size_t> target_positions(const std::vector<Interaction>& hist, Split split) {
    std::vector<size_t> out;
    for (size_t i = 0; i < hist.size(); ++i)
        if (hist[i].split == split) out.push_back(i);
    return out;
}

Instance make_instance(const InteractionLog& log, int32_t user, size_t pos,
                       std::vector<int32_t> candidates, int32_t gt_index, TaskKind kind,
                       Split split) {
    Instance inst;
    inst.user = user;
    inst.candidates = std::move(candidates);
    inst.gt_index = gt_index;
    inst.kind = kind;
    inst.split = split;
    inst.history.reserve(pos);
    for (size_t i = 0; i < pos; ++i) inst.history.push_back(log.users[user][i].item);
    return inst;
}

InstanceBuild build_impl(const InteractionLog& log, const KnowledgeGraph& g, TaskKind kind,
                         Split split, Rng& rng) {
    const size_t negatives = candidate_count(kind) - 1;
    InstanceBuild out;
    for (int32_t u = 0; u < static_cast<int32_t>(log.num_users()); ++u) {
        auto pool = never_interacted(log, g, u);
        if (pool.size() < negatives) {
            out.skipped.push_back({u, "not enough never-interacted items"});
            continue;
        }
        for (size_t pos : target_positions(log.users[u], split)) {
            // Distinct negatives: partial Fisher-Yates over a scratch copy.
            std::vector<int32_t> scratch = pool;
            std::vector<int32_t> cands;
            cands.reserve(negatives + 1);
            for (size_t k = 0; k < negatives; ++k) {
                size_t j = k + static_cast<size_t>(rng.next_below(scratch.size() - k));
                std::swap(scratch[k], scratch[j]);
                cands.push_back(scratch[k]);
            }
            size_t gt_pos = static_cast<size_t>(rng.next_below(negatives + 1));
            cands.insert(cands.begin() + static_cast<ptrdiff_t>(gt_pos), log.users[u][pos].item);
            Instance inst = make_instance(log, u, pos, std::move(cands),
                                          static_cast<int32_t>(gt_pos), kind, split);
            inst.id = static_cast<int64_t>(out.instances.size());
            out.instances.push_back(std::move(inst));
        }
    }
    return out;
}

}  // namespace

InstanceBuild build_pairwise_instances(const InteractionLog& log, const KnowledgeGraph& g,
                                       Split split, Rng& rng) {
    return build_impl(log, g, TaskKind::Pairwise, split, rng);
}

InstanceBuild build_listwise_instances(const InteractionLog& log, const KnowledgeGraph& g,
                                       Split split, Rng& rng) {
    return build_impl(log, g, TaskKind::Listwise, split, rng);
}

InstanceBuild build_instances(const InteractionLog& log, const KnowledgeGraph& g, TaskKind kind,
                              Split split, Rng& rng) {
    return build_impl(log, g, kind, split, rng);
}

std::vector<Instance> few_shot_subsample(const std::vector<Instance>& instances, size_t num,
                                         Rng& rng) {
    if (num > instances.size())
        throw ConfigError("few-shot sample size " + std::to_string(num) + " exceeds " +
                          std::to_string(instances.size()) + " instances");
    // Sample indices without replacement, then restore original order.
    std::vector<size_t> idx(instances.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (size_t k = 0; k < num; ++k) {
        size_t j = k + static_cast<size_t>(rng.next_below(idx.size() - k));
        std::swap(idx[k], idx[j]);
    }
    idx.resize(num);
    std::sort(idx.begin(), idx.end());
    std::vector<Instance> out;
    out.reserve(num);
    for (size_t i : idx) out.push_back(instances[i]);
    return out;
}

std::string instance_record(const KnowledgeGraph& g, const InteractionLog& log,
                            const Instance& inst, uint64_t seed) {
    json rec;
    rec["id"] = inst.id;
    rec["task"] = task_name(inst.kind);
    rec["split"] = inst.split == Split::Train ? "train" : inst.split == Split::Valid ? "valid" : "test";
    rec["seed"] = seed;
    rec["user"] = log.user_ext_ids[static_cast<size_t>(inst.user)];
    json cands = json::array();
    for (int32_t v : inst.candidates) cands.push_back(g.item_title(v));
    rec["candidates"] = cands;
    rec["gt_index"] = inst.gt_index;
    json hist = json::array();
    for (int32_t v : inst.history) hist.push_back(g.item_title(v));
    rec["history"] = hist;
    return rec.dump();
}

std::string EvalReport::to_text() const {
    std::ostringstream os;
    os << "task " << task << " mode " << mode << " backend " << backend << "\n"
       << "instances " << instances << " correct " << correct << " valid " << valid
       << " transport_errors " << transport_errors << "\n"
       << "hit_ratio " << hit_ratio << " valid_ratio " << valid_ratio << "\n"
       << "wall_seconds " << wall_seconds << "\n";
    return os.str();
}

std::string EvalReport::summary_record() const {
    json rec;
    rec["task"] = task;
    rec["mode"] = mode;
    rec["backend"] = backend;
    rec["instances"] = instances;
    rec["correct"] = correct;
    rec["valid"] = valid;
    rec["transport_errors"] = transport_errors;
    rec["hit_ratio"] = hit_ratio;
    rec["valid_ratio"] = valid_ratio;
    return rec.dump();
}

namespace {

struct Outcome {
    bool correct = false;
    bool valid = false;
    bool transport_error = false;
    TranscriptEntry entry;
};

Outcome run_one(Backend& backend, const KnowledgeGraph& g, const Instance& inst,
                const HintSet& hints) {
    PromptBundle bundle = build_bundle(g, inst, hints);
    std::vector<std::string> titles;
    titles.reserve(inst.candidates.size());
    for (int32_t v : inst.candidates) titles.push_back(g.item_title(v));

    Outcome o;
    o.entry.request_id = inst.id;
    o.entry.instance_id = inst.id;
    o.entry.prompt_hash = fnv1a(bundle.instruction);

    CompletionRequest req;
    req.instruction = bundle.instruction;
    req.request_id = inst.id;
    std::string response;
    try {
        response = backend.complete(req);
    } catch (const TransportError&) {
        o.transport_error = true;
        o.entry.parse_rule = "none";
        return o;
    }
    ChoiceParse parse = parse_choice(response, titles);
    o.valid = parse.valid;
    o.correct = parse.valid && parse.matched_index == inst.gt_index;
    o.entry.response = response;
    o.entry.parse_rule = parse.rule;
    o.entry.matched_index = parse.matched_index;
    o.entry.valid = parse.valid;
    return o;
}

EvalReport tally(const std::vector<Outcome>& outcomes, const std::vector<Instance>& instances,
                 const std::string& backend_name, DiscoveryMode mode,
                 const std::string& transcript_path, double wall) {
    EvalReport r;
    r.mode = mode_name(mode);
    r.task = instances.empty() ? "pairwise" : task_name(instances.front().kind);
    r.backend = backend_name;
    r.instances = instances.size();
    for (const auto& o : outcomes) {
        if (o.transport_error) ++r.transport_errors;
        if (o.valid) ++r.valid;
        if (o.correct) ++r.correct;
    }
    if (r.instances > 0) {
        r.hit_ratio = static_cast<double>(r.correct) / static_cast<double>(r.instances);
        r.valid_ratio = static_cast<double>(r.valid) / static_cast<double>(r.instances);
    }
    r.wall_seconds = wall;
    if (!transcript_path.empty()) {
        std::ofstream os(transcript_path);
        if (!os) throw ConfigError("cannot open transcript path " + transcript_path);
        for (const auto& o : outcomes) os << transcript_record(o.entry) << "\n";
    }
    return r;
}

}  // namespace

EvalReport evaluate(Backend& backend, const HintModel& model, const KnowledgeGraph& g,
                    const InteractionLog& log, const DiscoveryContext& ctx,
                    const std::vector<Instance>& instances, const EvalOptions& opts) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<HintSet> hints =
        discover_all(model, g, log, ctx, instances, opts.mode, opts.seed, opts.parallel);
    std::vector<Outcome> outcomes(instances.size());
    const bool remote = backend.name() == "remote";
    // Remote calls stay serial (one connection, honest backoff); everything
    // mock-side is pure and fans out.
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 4) if (opts.parallel && !remote)
#endif
    for (int64_t i = 0; i < static_cast<int64_t>(instances.size()); ++i)
        outcomes[static_cast<size_t>(i)] =
            run_one(backend, g, instances[static_cast<size_t>(i)], hints[static_cast<size_t>(i)]);
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return tally(outcomes, instances, backend.name(), opts.mode, opts.transcript_path, wall);
}

EvalReport evaluate_mock(const HintModel& model, const KnowledgeGraph& g,
                         const InteractionLog& log, const DiscoveryContext& ctx,
                         const std::vector<Instance>& instances, const EvalOptions& opts) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<HintSet> hints =
        discover_all(model, g, log, ctx, instances, opts.mode, opts.seed, opts.parallel);
    std::vector<Outcome> outcomes(instances.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 4) if (opts.parallel)
#endif
    for (int64_t i = 0; i < static_cast<int64_t>(instances.size()); ++i) {
        const auto& inst = instances[static_cast<size_t>(i)];
        const auto& hs = hints[static_cast<size_t>(i)];
        MockBackend backend([&](const CompletionRequest&) {
            return mock_oracle_recommend(g, hs, inst.candidates);
        });
        outcomes[static_cast<size_t>(i)] = run_one(backend, g, inst, hs);
    }
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return tally(outcomes, instances, "mock", opts.mode, opts.transcript_path, wall);
}

}  // namespace pidlr
