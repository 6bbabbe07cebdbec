#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pidlr/graph.hpp"

namespace pidlr {

enum class TaskKind : uint8_t { Pairwise, Listwise };

inline size_t candidate_count(TaskKind k) { return k == TaskKind::Pairwise ? 2 : 20; }

inline const char* task_name(TaskKind k) { return k == TaskKind::Pairwise ? "pairwise" : "listwise"; }

// One recommendation instance: a user, an ordered candidate set, and the
// ground-truth position. History is everything the user interacted with
// strictly before the target, chronological and uncapped; representation and
// prompt code apply the last-10 window.
struct Instance {
    int64_t id = 0;
    int32_t user = -1;
    std::vector<int32_t> candidates;
    int32_t gt_index = -1;
    TaskKind kind = TaskKind::Pairwise;
    Split split = Split::Test;
    std::vector<int32_t> history;

    int32_t gt_item() const { return candidates[gt_index]; }
};

}  // namespace pidlr
