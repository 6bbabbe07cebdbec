#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace pidlr {

// One (relation, tail) pair attached to an item, plus its dense index in the
// global tuple vocabulary. Tuple indices are assigned in ascending
// (relation id, tail id) order so runs over identical files agree.
struct AttributeTuple {
    int32_t relation = -1;
    int32_t tail = -1;
    int32_t index = -1;

    friend bool operator==(const AttributeTuple&, const AttributeTuple&) = default;
};

struct Triple {
    int32_t head;
    int32_t relation;
    int32_t tail;
};

// Item index 0 is the reserved "[PAD]" item; real items start at 1.
constexpr int32_t kPadItem = 0;

class KnowledgeGraph {
  public:
    // Entities, dense ids in file order.
    std::vector<std::string> entity_ext_ids;
    std::vector<std::string> entity_names;
    std::vector<std::string> entity_types;
    std::unordered_map<std::string, int32_t> entity_by_ext;

    // Relations, dense ids in file order.
    std::vector<std::string> relation_ext_ids;
    std::vector<std::string> relation_names;
    std::unordered_map<std::string, int32_t> relation_by_ext;

    std::vector<Triple> triples;

    // Items: dense 1-based ids assigned in ascending entity-id order;
    // index 0 is the pad item.
    std::vector<int32_t> item_entity;            // item index -> entity id (entry 0 = -1)
    std::vector<int32_t> item_index_of_entity;   // entity id -> item index, or 0

    // item index -> attribute tuples, sorted by tuple index.
    std::vector<std::vector<AttributeTuple>> ego_index;

    // Tuple vocabulary over distinct (relation, tail) pairs.
    std::vector<std::pair<int32_t, int32_t>> tuple_pairs;  // tuple index -> (r, t)
    std::map<std::pair<int32_t, int32_t>, int32_t> tuple_index_of;

    size_t num_items() const { return item_entity.size() - 1; }
    size_t num_tuples() const { return tuple_pairs.size(); }

    bool is_item_index(int32_t v) const {
        return v > 0 && v < static_cast<int32_t>(item_entity.size());
    }

    const std::string& item_title(int32_t item) const;
};

enum class Split : uint8_t { Train, Valid, Test };

struct Interaction {
    int32_t item;  // item index into KnowledgeGraph
    int64_t timestamp;
    Split split;
};

class InteractionLog {
  public:
    std::vector<std::string> user_ext_ids;  // dense ids in ascending external-id order
    std::unordered_map<std::string, int32_t> user_by_ext;
    std::vector<std::vector<Interaction>> users;  // chronological per user
    std::vector<std::string> skipped_users;       // < 3 interactions, excluded

    size_t num_users() const { return users.size(); }
    size_t num_interactions() const;

    // Items of u's train split, chronological.
    std::vector<int32_t> train_items(int32_t user) const;
};

struct LoadReport {
    size_t entities = 0;
    size_t relations = 0;
    size_t triples = 0;
    size_t duplicate_triples = 0;
    size_t items = 0;
    size_t tuples = 0;
    size_t users = 0;
    size_t skipped_users = 0;
    size_t interactions = 0;
    double avg_degree_all = 0.0;
    double avg_degree_item = 0.0;

    std::string to_text() const;
};

// entities.tsv: id \t name \t type \t is_item(0|1)
// relations.tsv: id \t name
// kg_triples.tsv: head \t relation \t tail
KnowledgeGraph load_knowledge_graph(const std::string& triples_path,
                                    const std::string& entities_path,
                                    const std::string& relations_path,
                                    LoadReport* report = nullptr);

// interactions.tsv: user \t item \t timestamp. Leave-one-out split: per user
// the chronologically last interaction is test, second-to-last valid, rest
// train. Users with fewer than 3 interactions are skipped.
InteractionLog load_interactions(const std::string& path, const KnowledgeGraph& g,
                                 LoadReport* report = nullptr);

// Gamma_v: first-order attribute subgraph of item v.
const std::vector<AttributeTuple>& item_ego_network(const KnowledgeGraph& g, int32_t item);

// Gamma_u: union of ego networks over u's train-split items, deduplicated,
// sorted by tuple index.
std::vector<AttributeTuple> user_subgraph(const KnowledgeGraph& g, const InteractionLog& log,
                                          int32_t user);

// Union of ego networks over an explicit item list (pad items ignored).
std::vector<AttributeTuple> items_subgraph(const KnowledgeGraph& g,
                                           const std::vector<int32_t>& items);

// Dense (relation, tail) -> tuple index mapping in ascending (r, t) order.
std::map<std::pair<int32_t, int32_t>, int32_t> build_tuple_vocabulary(const KnowledgeGraph& g);

// Last min(|seq|, L) items, left-padded with kPadItem to exactly L.
std::vector<int32_t> truncate_and_pad_history(const std::vector<int32_t>& seq, size_t L = 10);

}  // namespace pidlr
