#pragma once

#include <string>
#include <vector>

#include "pidlr/bridge.hpp"
#include "pidlr/discovery.hpp"
#include "pidlr/instance.hpp"
#include "pidlr/model.hpp"
#include "pidlr/prompt.hpp"

namespace pidlr {

struct SkipEntry {
    int32_t user;
    std::string reason;
};

struct InstanceBuild {
    std::vector<Instance> instances;
    std::vector<SkipEntry> skipped;
};

// Pairwise: per target, V = {ground truth, one uniformly sampled item absent
// from the user's entire history}; gold position uniform. For the train
// split one instance is built per train interaction (history = everything
// before it); valid/test use the leave-one-out target.
InstanceBuild build_pairwise_instances(const InteractionLog& log, const KnowledgeGraph& g,
                                       Split split, Rng& rng);

// Listwise: 19 distinct never-interacted negatives plus the ground truth,
// shuffled. Users without enough negatives are skipped.
InstanceBuild build_listwise_instances(const InteractionLog& log, const KnowledgeGraph& g,
                                       Split split, Rng& rng);

InstanceBuild build_instances(const InteractionLog& log, const KnowledgeGraph& g, TaskKind kind,
                              Split split, Rng& rng);

// Uniform seeded subsample of size num, original order preserved.
std::vector<Instance> few_shot_subsample(const std::vector<Instance>& instances, size_t num,
                                         Rng& rng);

// One structured record per instance (jsonl line).
std::string instance_record(const KnowledgeGraph& g, const InteractionLog& log,
                            const Instance& inst, uint64_t seed);

struct EvalReport {
    std::string mode;
    std::string task;
    std::string backend;
    size_t instances = 0;
    size_t correct = 0;
    size_t valid = 0;
    size_t transport_errors = 0;  // counted separately, never folded into invalid
    double hit_ratio = 0.0;       // correct / total
    double valid_ratio = 0.0;     // valid / total
    double wall_seconds = 0.0;

    std::string to_text() const;
    // Machine-readable summary; excludes wall time so reruns are bit-identical.
    std::string summary_record() const;
};

struct EvalOptions {
    DiscoveryMode mode = DiscoveryMode::Normal;
    uint64_t seed = 42;
    bool parallel = true;
    std::string transcript_path;  // empty -> no transcript
};

// Per instance: discover -> assemble -> complete -> parse -> tally.
EvalReport evaluate(Backend& backend, const HintModel& model, const KnowledgeGraph& g,
                    const InteractionLog& log, const DiscoveryContext& ctx,
                    const std::vector<Instance>& instances, const EvalOptions& opts);

// Mock backend wired to mock_oracle_recommend over the instance's own
// discovered hints.
EvalReport evaluate_mock(const HintModel& model, const KnowledgeGraph& g,
                         const InteractionLog& log, const DiscoveryContext& ctx,
                         const std::vector<Instance>& instances, const EvalOptions& opts);

}  // namespace pidlr
