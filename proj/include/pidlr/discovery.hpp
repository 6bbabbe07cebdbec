#pragma once

#include <map>
#include <string>
#include <vector>

#include "pidlr/instance.hpp"
#include "pidlr/model.hpp"

namespace pidlr {

enum class DiscoveryMode : uint8_t { Normal, NoIpd, NoCie, Random, All };

const char* mode_name(DiscoveryMode m);
DiscoveryMode mode_from_name(const std::string& name);

enum class HintSource : uint8_t { OwnHistory, Collaborative };

struct UserHint {
    AttributeTuple tuple;
    double credibility = 0.0;
    HintSource source = HintSource::OwnHistory;
    int32_t source_user = -1;  // collaborative source, -1 for own history
};

struct ItemHint {
    AttributeTuple tuple;
    double credibility = 0.0;
};

// Per-instance selected hints: user-side and per-candidate item-side, each
// credibility-descending.
struct HintSet {
    int64_t instance_id = 0;
    DiscoveryMode mode = DiscoveryMode::Normal;
    std::vector<UserHint> user_hints;
    std::map<int32_t, std::vector<ItemHint>> item_hints;  // candidate item -> hints
    bool empty_user_pool = false;  // NORMAL/NO_CIE degraded to no user hints

    // One structured text record, for inspection and regression diffs.
    std::string to_record(const KnowledgeGraph& g) const;
};

struct TupleWithProvenance {
    AttributeTuple tuple;
    HintSource source = HintSource::OwnHistory;
    int32_t source_user = -1;
};

// Gamma-hat_u: own train subgraph united with the subgraphs of the top-N
// collaborative users drawn from the full train-user pool. Own-history
// provenance wins on duplicates. Sorted by tuple index.
std::vector<TupleWithProvenance> comprehensive_preferences(const HintModel& m,
                                                           const KnowledgeGraph& g,
                                                           const InteractionLog& log, int32_t user,
                                                           int n);

// Precomputed all-user context so per-instance discovery stays cheap and the
// epoch-level work is shared. Read-only once built.
struct DiscoveryContext {
    std::vector<int32_t> users;           // all train users
    std::vector<Vec> reps;                // E_u per user (windowed train history)
    std::vector<std::vector<AttributeTuple>> subgraphs;  // windowed train subgraph per user
};

DiscoveryContext build_discovery_context(const HintModel& m, const KnowledgeGraph& g,
                                         const InteractionLog& log, bool parallel = true);

// Instance-level discovery in the given mode. Deterministic given
// (checkpoint, mode, seed): per-instance rng streams derive from
// (seed, instance id). Selection is top-k in NORMAL/NO_CIE.
HintSet discover_instance_hints(const HintModel& m, const KnowledgeGraph& g,
                                const InteractionLog& log, const DiscoveryContext& ctx,
                                const Instance& inst, DiscoveryMode mode, uint64_t seed);

// Batch discovery; the OpenMP path fans instances out and matches the serial
// path exactly (per-instance seeding).
std::vector<HintSet> discover_all(const HintModel& m, const KnowledgeGraph& g,
                                  const InteractionLog& log, const DiscoveryContext& ctx,
                                  const std::vector<Instance>& instances, DiscoveryMode mode,
                                  uint64_t seed, bool parallel);

}  // namespace pidlr
