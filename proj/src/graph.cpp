#include "pidlr/graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "pidlr/errors.hpp"

namespace pidlr {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    for (;;) {
        size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

// Reads non-empty lines, strips trailing \r.
std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

[[noreturn]] void bad_columns(const std::string& path, size_t lineno, size_t want, size_t got) {
    throw ParseError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(want) +
                     " tab-separated columns, got " + std::to_string(got));
}

}  // namespace

const std::string& KnowledgeGraph::item_title(int32_t item) const {
    if (!is_item_index(item)) throw LookupError("unknown item index " + std::to_string(item));
    return entity_names[item_entity[item]];
}

size_t InteractionLog::num_interactions() const {
    size_t n = 0;
    for (const auto& u : users) n += u.size();
    return n;
}

std::vector<int32_t> InteractionLog::train_items(int32_t user) const {
    if (user < 0 || user >= static_cast<int32_t>(users.size()))
        throw LookupError("unknown user index " + std::to_string(user));
    std::vector<int32_t> out;
    for (const auto& it : users[user])
        if (it.split == Split::Train) out.push_back(it.item);
    return out;
}

std::string LoadReport::to_text() const {
    std::ostringstream os;
    os << "entities\t" << entities << "\n"
       << "relations\t" << relations << "\n"
       << "triples\t" << triples << "\n"
       << "duplicate_triples\t" << duplicate_triples << "\n"
       << "items\t" << items << "\n"
       << "tuples\t" << tuples << "\n"
       << "users\t" << users << "\n"
       << "skipped_users\t" << skipped_users << "\n"
       << "interactions\t" << interactions << "\n"
       << "avg_degree_all\t" << avg_degree_all << "\n"
       << "avg_degree_item\t" << avg_degree_item << "\n";
    return os.str();
}

KnowledgeGraph load_knowledge_graph(const std::string& triples_path,
                                    const std::string& entities_path,
                                    const std::string& relations_path, LoadReport* report) {
    KnowledgeGraph g;

    const auto entity_lines = read_lines(entities_path);
    for (size_t i = 0; i < entity_lines.size(); ++i) {
        auto cols = split_tabs(entity_lines[i]);
        if (cols.size() != 4) bad_columns(entities_path, i + 1, 4, cols.size());
        if (g.entity_by_ext.count(cols[0]))
            throw IntegrityError(entities_path + ": duplicate entity id " + cols[0]);
        g.entity_by_ext.emplace(cols[0], static_cast<int32_t>(g.entity_ext_ids.size()));
        g.entity_ext_ids.push_back(cols[0]);
        g.entity_names.push_back(cols[1]);
        g.entity_types.push_back(cols[2]);
        if (cols[3] != "0" && cols[3] != "1")
            throw ParseError(entities_path + ":" + std::to_string(i + 1) +
                             ": is_item must be 0 or 1, got " + cols[3]);
    }

    const auto relation_lines = read_lines(relations_path);
    for (size_t i = 0; i < relation_lines.size(); ++i) {
        auto cols = split_tabs(relation_lines[i]);
        if (cols.size() != 2) bad_columns(relations_path, i + 1, 2, cols.size());
        if (g.relation_by_ext.count(cols[0]))
            throw IntegrityError(relations_path + ": duplicate relation id " + cols[0]);
        g.relation_by_ext.emplace(cols[0], static_cast<int32_t>(g.relation_ext_ids.size()));
        g.relation_ext_ids.push_back(cols[0]);
        g.relation_names.push_back(cols[1]);
    }

    // Items: dense 1-based index in ascending entity-id order, 0 = pad.
    g.item_index_of_entity.assign(g.entity_ext_ids.size(), 0);
    g.item_entity.push_back(-1);
    for (size_t i = 0; i < entity_lines.size(); ++i) {
        auto cols = split_tabs(entity_lines[i]);
        if (cols[3] == "1") {
            g.item_index_of_entity[i] = static_cast<int32_t>(g.item_entity.size());
            g.item_entity.push_back(static_cast<int32_t>(i));
        }
    }

    const auto triple_lines = read_lines(triples_path);
    if (triple_lines.empty()) throw IntegrityError(triples_path + ": empty triple file");
    std::set<std::tuple<int32_t, int32_t, int32_t>> seen;
    size_t duplicates = 0;
    for (size_t i = 0; i < triple_lines.size(); ++i) {
        auto cols = split_tabs(triple_lines[i]);
        if (cols.size() != 3) bad_columns(triples_path, i + 1, 3, cols.size());
        auto h = g.entity_by_ext.find(cols[0]);
        auto r = g.relation_by_ext.find(cols[1]);
        auto t = g.entity_by_ext.find(cols[2]);
        if (h == g.entity_by_ext.end())
            throw IntegrityError(triples_path + ":" + std::to_string(i + 1) +
                                 ": unknown head entity " + cols[0]);
        if (r == g.relation_by_ext.end())
            throw IntegrityError(triples_path + ":" + std::to_string(i + 1) +
                                 ": unknown relation " + cols[1]);
        if (t == g.entity_by_ext.end())
            throw IntegrityError(triples_path + ":" + std::to_string(i + 1) +
                                 ": unknown tail entity " + cols[2]);
        if (!seen.emplace(h->second, r->second, t->second).second) {
            ++duplicates;
            continue;
        }
        g.triples.push_back({h->second, r->second, t->second});
    }

    // Tuple vocabulary: ascending (relation, tail).
    g.tuple_index_of = build_tuple_vocabulary(g);
    g.tuple_pairs.resize(g.tuple_index_of.size());
    for (const auto& [pair, idx] : g.tuple_index_of) g.tuple_pairs[idx] = pair;

    g.ego_index.assign(g.item_entity.size(), {});
    for (const auto& tr : g.triples) {
        int32_t item = g.item_index_of_entity[tr.head];
        if (item == kPadItem) continue;
        auto key = std::make_pair(tr.relation, tr.tail);
        g.ego_index[item].push_back({tr.relation, tr.tail, g.tuple_index_of.at(key)});
    }
    for (auto& ego : g.ego_index)
        std::sort(ego.begin(), ego.end(),
                  [](const AttributeTuple& a, const AttributeTuple& b) { return a.index < b.index; });

    if (report) {
        report->entities = g.entity_ext_ids.size();
        report->relations = g.relation_ext_ids.size();
        report->triples = g.triples.size();
        report->duplicate_triples = duplicates;
        report->items = g.num_items();
        report->tuples = g.num_tuples();
        std::vector<size_t> degree(g.entity_ext_ids.size(), 0);
        for (const auto& tr : g.triples) {
            ++degree[tr.head];
            ++degree[tr.tail];
        }
        size_t total = 0, item_total = 0;
        for (size_t e = 0; e < degree.size(); ++e) {
            total += degree[e];
            if (g.item_index_of_entity[e] != kPadItem) item_total += degree[e];
        }
        report->avg_degree_all = g.entity_ext_ids.empty()
                                     ? 0.0
                                     : static_cast<double>(total) / g.entity_ext_ids.size();
        report->avg_degree_item =
            g.num_items() == 0 ? 0.0 : static_cast<double>(item_total) / g.num_items();
    }
    return g;
}

InteractionLog load_interactions(const std::string& path, const KnowledgeGraph& g,
                                 LoadReport* report) {
    struct Row {
        int32_t item;
        int64_t timestamp;
        size_t file_order;  // stable tie-break for equal timestamps
    };
    std::map<std::string, std::vector<Row>> per_user;  // ordered -> dense ids sorted by ext id

    const auto lines = read_lines(path);
    for (size_t i = 0; i < lines.size(); ++i) {
        auto cols = split_tabs(lines[i]);
        if (cols.size() != 3) bad_columns(path, i + 1, 3, cols.size());
        auto e = g.entity_by_ext.find(cols[1]);
        if (e == g.entity_by_ext.end() || g.item_index_of_entity[e->second] == kPadItem)
            throw IntegrityError(path + ":" + std::to_string(i + 1) + ": unknown item id " +
                                 cols[1]);
        int64_t ts;
        try {
            ts = std::stoll(cols[2]);
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(i + 1) + ": bad timestamp " + cols[2]);
        }
        per_user[cols[0]].push_back({g.item_index_of_entity[e->second], ts, i});
    }

    InteractionLog log;
    for (auto& [ext_id, rows] : per_user) {
        if (rows.size() < 3) {
            log.skipped_users.push_back(ext_id);
            continue;
        }
        std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
            return std::tie(a.timestamp, a.file_order) < std::tie(b.timestamp, b.file_order);
        });
        std::vector<Interaction> seq;
        seq.reserve(rows.size());
        for (size_t i = 0; i < rows.size(); ++i) {
            Split split = Split::Train;
            if (i == rows.size() - 1)
                split = Split::Test;
            else if (i == rows.size() - 2)
                split = Split::Valid;
            seq.push_back({rows[i].item, rows[i].timestamp, split});
        }
        log.user_by_ext.emplace(ext_id, static_cast<int32_t>(log.user_ext_ids.size()));
        log.user_ext_ids.push_back(ext_id);
        log.users.push_back(std::move(seq));
    }

    if (report) {
        report->users = log.num_users();
        report->skipped_users = log.skipped_users.size();
        report->interactions = log.num_interactions();
    }
    return log;
}

const std::vector<AttributeTuple>& item_ego_network(const KnowledgeGraph& g, int32_t item) {
    if (!g.is_item_index(item)) throw LookupError("unknown item index " + std::to_string(item));
    return g.ego_index[item];
}

std::vector<AttributeTuple> items_subgraph(const KnowledgeGraph& g,
                                           const std::vector<int32_t>& items) {
    std::map<int32_t, AttributeTuple> by_index;
    for (int32_t v : items) {
        if (v == kPadItem) continue;
        for (const auto& t : item_ego_network(g, v)) by_index.emplace(t.index, t);
    }
    std::vector<AttributeTuple> out;
    out.reserve(by_index.size());
    for (const auto& [idx, t] : by_index) out.push_back(t);
    return out;
}

std::vector<AttributeTuple> user_subgraph(const KnowledgeGraph& g, const InteractionLog& log,
                                          int32_t user) {
    return items_subgraph(g, log.train_items(user));
}

std::map<std::pair<int32_t, int32_t>, int32_t> build_tuple_vocabulary(const KnowledgeGraph& g) {
    std::set<std::pair<int32_t, int32_t>> pairs;
    for (const auto& tr : g.triples) pairs.emplace(tr.relation, tr.tail);
    std::map<std::pair<int32_t, int32_t>, int32_t> out;
    int32_t next = 0;
    for (const auto& p : pairs) out.emplace(p, next++);
    return out;
}

std::vector<int32_t> truncate_and_pad_history(const std::vector<int32_t>& seq, size_t L) {
    std::vector<int32_t> out(L, kPadItem);
    size_t keep = std::min(seq.size(), L);
    for (size_t i = 0; i < keep; ++i) out[L - keep + i] = seq[seq.size() - keep + i];
    return out;
}

}  // namespace pidlr
