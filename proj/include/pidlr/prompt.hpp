#pragma once

#include <string>
#include <vector>

#include "pidlr/discovery.hpp"
#include "pidlr/graph.hpp"
#include "pidlr/instance.hpp"

namespace pidlr {

// Byte-exact system prompt; versioned here, echoed into run manifests.
inline constexpr const char* kSystemPromptTemplate =
    "You are a recommendation assistant. Given the user's interaction history, "
    "preferences, and candidate items, answer with exactly one candidate title "
    "and nothing else.";

struct SegmentStats {
    size_t chars = 0;
    size_t whitespace_tokens = 0;
};

struct PromptBundle {
    std::string p_system;               // P_I
    std::string p_history;              // P_b
    std::string p_user_hint;            // P_c
    std::vector<std::string> p_items;   // P_v per candidate, instance order
    std::string instruction;            // x
    std::string response;               // y, gold title verbatim
    SegmentStats system_stats, history_stats, user_hint_stats;
    std::vector<SegmentStats> item_stats;
};

SegmentStats segment_stats(const std::string& s);

// Titles containing commas or braces are double-quoted with doubled-quote
// escaping so prompt lists stay unambiguous.
std::string quote_title(const std::string& title);

// P_c: comma-joined "relation: tail" pairs, credibility-descending.
std::string render_user_hint_prompt(const std::vector<UserHint>& hints, const KnowledgeGraph& g);

// P_b: comma-joined titles of the non-pad items, chronological.
std::string render_history_prompt(const std::vector<int32_t>& padded_history,
                                  const KnowledgeGraph& g);

// P_v: "(Title: <title>, Attributes: {<r>: <t>, ...})".
std::string render_item_hint_prompt(int32_t item, const std::vector<ItemHint>& hints,
                                    const KnowledgeGraph& g);

// Baseline triple-per-line rendering, head repeated in every clause.
std::string render_naive_triples(const std::vector<ItemHint>& hints, const std::string& head_name,
                                 const KnowledgeGraph& g);

// x = ||(P_I, P_b, P_c, {P_v}) with section labels; the user-preference
// section is omitted when P_c is empty. Throws IntegrityError if the gold
// title is not among the candidates.
PromptBundle assemble_prompt(const std::string& p_system, const std::string& p_history,
                             const std::string& p_user_hint,
                             const std::vector<std::string>& p_items,
                             const std::vector<std::string>& candidate_titles,
                             const std::string& gold_title);

// Convenience: render + assemble one instance from its hint set.
PromptBundle build_bundle(const KnowledgeGraph& g, const Instance& inst, const HintSet& hints);

struct DatasetManifest {
    size_t records = 0;
    double mean_instruction_chars = 0.0;
    double mean_response_chars = 0.0;
    double mean_history_chars = 0.0;
    double mean_user_hint_chars = 0.0;
    double mean_item_chars = 0.0;
    std::string to_text() const;
};

// Newline-delimited records {"instruction": x, "response": y}, UTF-8, stable
// field order.
DatasetManifest export_instruction_dataset(const std::vector<PromptBundle>& bundles,
                                           const std::string& path);

// Parses one exported line back to (instruction, response).
std::pair<std::string, std::string> parse_dataset_record(const std::string& line);

}  // namespace pidlr
