#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "pidlr/errors.hpp"
#include "pidlr/graph.hpp"
#include "pidlr/rng.hpp"

using namespace pidlr;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("pidlr_graph_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name, const std::string& content) const {
        auto p = path / name;
        std::ofstream os(p, std::ios::binary);
        os << content;
        return p.string();
    }
};

struct RawGraph {
    std::vector<std::string> item_ids, attr_ids, rel_ids;
    // external-id triples (head item, relation, tail attr)
    std::vector<std::array<std::string, 3>> triples;
};

// Random graph in external-id space, with the brute-force source of truth.
RawGraph random_graph(Rng& rng, size_t max_triples) {
    RawGraph r;
    size_t items = 2 + rng.next_below(8);
    size_t attrs = 2 + rng.next_below(10);
    size_t rels = 1 + rng.next_below(4);
    for (size_t i = 0; i < items; ++i) r.item_ids.push_back("i" + std::to_string(i));
    for (size_t i = 0; i < attrs; ++i) r.attr_ids.push_back("a" + std::to_string(i));
    for (size_t i = 0; i < rels; ++i) r.rel_ids.push_back("r" + std::to_string(i));
    size_t n = 1 + rng.next_below(max_triples);
    for (size_t i = 0; i < n; ++i)
        r.triples.push_back({r.item_ids[rng.next_below(items)], r.rel_ids[rng.next_below(rels)],
                             r.attr_ids[rng.next_below(attrs)]});
    return r;
}

KnowledgeGraph load_raw(const RawGraph& r, const TempDir& dir, LoadReport* rep = nullptr) {
    std::string ents, rels, tris;
    for (const auto& id : r.item_ids) ents += id + "\tTitle of " + id + "\titem\t1\n";
    for (const auto& id : r.attr_ids) ents += id + "\tValue " + id + "\tattribute\t0\n";
    for (const auto& id : r.rel_ids) rels += id + "\trelation " + id + "\n";
    for (const auto& t : r.triples) tris += t[0] + "\t" + t[1] + "\t" + t[2] + "\n";
    return load_knowledge_graph(dir.file("kg_triples.tsv", tris), dir.file("entities.tsv", ents),
                                dir.file("relations.tsv", rels), rep);
}

}  // namespace

TEST_CASE("ego networks and user subgraphs match brute-force scans on random graphs") {
    Rng rng(1234);
    for (int trial = 0; trial < 60; ++trial) {
        TempDir dir;
        RawGraph raw = random_graph(rng, 120);
        KnowledgeGraph g = load_raw(raw, dir);

        // brute force: distinct (relation, tail) per head, in dense-id space
        std::map<std::string, std::set<std::pair<int32_t, int32_t>>> expect;
        for (const auto& t : raw.triples) {
            int32_t rel = g.relation_by_ext.at(t[1]);
            int32_t tail = g.entity_by_ext.at(t[2]);
            expect[t[0]].insert({rel, tail});
        }
        for (const auto& ext : raw.item_ids) {
            int32_t item = g.item_index_of_entity[static_cast<size_t>(g.entity_by_ext.at(ext))];
            const auto& ego = item_ego_network(g, item);
            std::set<std::pair<int32_t, int32_t>> got;
            for (const auto& t : ego) got.insert({t.relation, t.tail});
            CHECK(got == expect[ext]);
            // sorted by tuple index, no duplicates
            for (size_t i = 1; i < ego.size(); ++i) CHECK(ego[i - 1].index < ego[i].index);
        }

        // user subgraph = union of ego networks over train items
        std::string inter;
        size_t rows = 0;
        for (size_t u = 0; u < 3; ++u) {
            size_t n = 3 + rng.next_below(4);
            for (size_t k = 0; k < n; ++k)
                inter += "u" + std::to_string(u) + "\t" +
                         raw.item_ids[rng.next_below(raw.item_ids.size())] + "\t" +
                         std::to_string(1000 + rows++) + "\n";
        }
        InteractionLog log = load_interactions(dir.file("interactions.tsv", inter), g);
        for (int32_t u = 0; u < static_cast<int32_t>(log.num_users()); ++u) {
            std::set<std::pair<int32_t, int32_t>> expect_u;
            for (int32_t item : log.train_items(u))
                for (const auto& t : item_ego_network(g, item)) expect_u.insert({t.relation, t.tail});
            auto got = user_subgraph(g, log, u);
            std::set<std::pair<int32_t, int32_t>> got_set;
            for (const auto& t : got) got_set.insert({t.relation, t.tail});
            CHECK(got_set == expect_u);
            CHECK(got_set.size() == got.size());  // deduplicated
            for (size_t i = 1; i < got.size(); ++i) CHECK(got[i - 1].index < got[i].index);
        }
    }
}

TEST_CASE("duplicate triples are dropped and counted") {
    TempDir dir;
    RawGraph raw;
    raw.item_ids = {"i0"};
    raw.attr_ids = {"a0"};
    raw.rel_ids = {"r0"};
    raw.triples = {{"i0", "r0", "a0"}, {"i0", "r0", "a0"}, {"i0", "r0", "a0"}};
    LoadReport rep;
    KnowledgeGraph g = load_raw(raw, dir, &rep);
    CHECK(g.triples.size() == 1);
    CHECK(rep.duplicate_triples == 2);
    CHECK(item_ego_network(g, 1).size() == 1);
}

TEST_CASE("dangling references and malformed rows are rejected with positions") {
    TempDir dir;
    std::string ents = "i0\tA Film\titem\t1\na0\tcomedy\tattribute\t0\n";
    std::string rels = "r0\tgenre\n";
    auto ep = dir.file("entities.tsv", ents);
    auto rp = dir.file("relations.tsv", rels);

    CHECK_THROWS_AS(load_knowledge_graph(dir.file("t1.tsv", "i0\tr0\tmissing\n"), ep, rp),
                    IntegrityError);
    CHECK_THROWS_AS(load_knowledge_graph(dir.file("t2.tsv", "i0\tmissing\ta0\n"), ep, rp),
                    IntegrityError);
    CHECK_THROWS_AS(load_knowledge_graph(dir.file("t3.tsv", ""), ep, rp), IntegrityError);
    CHECK_THROWS_AS(load_knowledge_graph(dir.file("t4.tsv", "i0\tr0\n"), ep, rp), ParseError);

    try {
        load_knowledge_graph(dir.file("t5.tsv", "i0\tr0\ta0\ni0\tr0\tmissing\n"), ep, rp);
        FAIL("expected IntegrityError");
    } catch (const IntegrityError& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);  // line number
    }
}

TEST_CASE("tuple vocabulary is dense and ascending in (relation, tail)") {
    Rng rng(99);
    TempDir dir;
    RawGraph raw = random_graph(rng, 200);
    KnowledgeGraph g = load_raw(raw, dir);
    REQUIRE(g.tuple_pairs.size() == g.tuple_index_of.size());
    for (size_t i = 1; i < g.tuple_pairs.size(); ++i) CHECK(g.tuple_pairs[i - 1] < g.tuple_pairs[i]);
    for (size_t i = 0; i < g.tuple_pairs.size(); ++i)
        CHECK(g.tuple_index_of.at(g.tuple_pairs[i]) == static_cast<int32_t>(i));
    auto vocab = build_tuple_vocabulary(g);
    CHECK(vocab == g.tuple_index_of);
}

TEST_CASE("leave-one-out split: last is test, second-to-last valid, short users skipped") {
    TempDir dir;
    RawGraph raw;
    raw.item_ids = {"i0", "i1", "i2", "i3"};
    raw.attr_ids = {"a0"};
    raw.rel_ids = {"r0"};
    raw.triples = {{"i0", "r0", "a0"}, {"i1", "r0", "a0"}, {"i2", "r0", "a0"}, {"i3", "r0", "a0"}};
    KnowledgeGraph g = load_raw(raw, dir);

    // u1 exercises out-of-order timestamps; u2 has only 2 interactions
    std::string inter =
        "u0\ti0\t10\nu0\ti1\t20\nu0\ti2\t30\nu0\ti3\t40\n"
        "u1\ti3\t5\nu1\ti0\t9\nu1\ti1\t7\n"
        "u2\ti0\t1\nu2\ti1\t2\n";
    LoadReport rep;
    InteractionLog log = load_interactions(dir.file("interactions.tsv", inter), g, &rep);
    REQUIRE(log.num_users() == 2);
    CHECK(rep.skipped_users == 1);
    CHECK(log.skipped_users == std::vector<std::string>{"u2"});

    const auto& u0 = log.users[log.user_by_ext.at("u0")];
    REQUIRE(u0.size() == 4);
    CHECK(u0[0].split == Split::Train);
    CHECK(u0[1].split == Split::Train);
    CHECK(u0[2].split == Split::Valid);
    CHECK(u0[3].split == Split::Test);

    // chronological ordering by timestamp
    const auto& u1 = log.users[log.user_by_ext.at("u1")];
    REQUIRE(u1.size() == 3);
    CHECK(u1[0].timestamp == 5);
    CHECK(u1[1].timestamp == 7);
    CHECK(u1[2].timestamp == 9);
    CHECK(u1[0].split == Split::Train);
    CHECK(u1[2].split == Split::Test);
}

TEST_CASE("timestamp ties keep file order (stable sort)") {
    TempDir dir;
    RawGraph raw;
    raw.item_ids = {"i0", "i1", "i2"};
    raw.attr_ids = {"a0"};
    raw.rel_ids = {"r0"};
    raw.triples = {{"i0", "r0", "a0"}, {"i1", "r0", "a0"}, {"i2", "r0", "a0"}};
    KnowledgeGraph g = load_raw(raw, dir);
    InteractionLog log =
        load_interactions(dir.file("interactions.tsv", "u0\ti2\t7\nu0\ti0\t7\nu0\ti1\t7\n"), g);
    const auto& u0 = log.users[0];
    CHECK(g.item_title(u0[0].item) == "Title of i2");
    CHECK(g.item_title(u0[1].item) == "Title of i0");
    CHECK(g.item_title(u0[2].item) == "Title of i1");
}

TEST_CASE("history truncation keeps the last 10 and left-pads with the pad item") {
    std::vector<int32_t> seq;
    for (int32_t i = 1; i <= 14; ++i) seq.push_back(i);
    auto full = truncate_and_pad_history(seq);
    REQUIRE(full.size() == 10);
    CHECK(full.front() == 5);
    CHECK(full.back() == 14);

    auto padded = truncate_and_pad_history({7, 8, 9});
    REQUIRE(padded.size() == 10);
    for (size_t i = 0; i < 7; ++i) CHECK(padded[i] == kPadItem);
    CHECK(padded[7] == 7);
    CHECK(padded[9] == 9);

    CHECK(truncate_and_pad_history({}).size() == 10);
}

TEST_CASE("loading the same files twice is deterministic") {
    Rng rng(5);
    TempDir dir;
    RawGraph raw = random_graph(rng, 100);
    KnowledgeGraph a = load_raw(raw, dir);
    KnowledgeGraph b = load_raw(raw, dir);
    CHECK(a.entity_ext_ids == b.entity_ext_ids);
    CHECK(a.tuple_pairs == b.tuple_pairs);
    REQUIRE(a.ego_index.size() == b.ego_index.size());
    for (size_t i = 0; i < a.ego_index.size(); ++i) CHECK(a.ego_index[i] == b.ego_index[i]);
}
