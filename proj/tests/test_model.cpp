#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "pidlr/errors.hpp"
#include "pidlr/model.hpp"
#include "pidlr/trainer.hpp"

using namespace pidlr;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int c = 0;
        path = fs::temp_directory_path() / ("pidlr_model_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(c++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name, const std::string& content) const {
        auto p = path / name;
        std::ofstream os(p, std::ios::binary);
        os << content;
        return p.string();
    }
};

// Small random graph + interactions for forward/backward tests.
struct Fixture {
    TempDir dir;
    KnowledgeGraph g;
    InteractionLog log;

    explicit Fixture(Rng& rng, size_t items = 8, size_t attrs = 6, size_t rels = 2,
                     size_t users = 4) {
        std::string ents, rels_s, tris, inter;
        for (size_t i = 0; i < items; ++i)
            ents += "i" + std::to_string(i) + "\tFilm " + std::to_string(i) + "\titem\t1\n";
        for (size_t a = 0; a < attrs; ++a)
            ents += "a" + std::to_string(a) + "\tvalue " + std::to_string(a) + "\tattribute\t0\n";
        for (size_t r = 0; r < rels; ++r) rels_s += "r" + std::to_string(r) + "\trel\n";
        std::map<std::string, bool> seen;
        for (size_t i = 0; i < items; ++i) {
            size_t n = 1 + rng.next_below(3);
            for (size_t k = 0; k < n; ++k) {
                std::string t = "i" + std::to_string(i) + "\tr" + std::to_string(rng.next_below(rels)) +
                                "\ta" + std::to_string(rng.next_below(attrs));
                if (!seen[t]) tris += t + "\n";
                seen[t] = true;
            }
        }
        for (size_t u = 0; u < users; ++u) {
            size_t n = 3 + rng.next_below(3);
            for (size_t k = 0; k < n; ++k)
                inter += "u" + std::to_string(u) + "\ti" + std::to_string(rng.next_below(items)) +
                         "\t" + std::to_string(10 + k) + "\n";
        }
        g = load_knowledge_graph(dir.file("kg_triples.tsv", tris), dir.file("entities.tsv", ents),
                                 dir.file("relations.tsv", rels_s));
        log = load_interactions(dir.file("interactions.tsv", inter), g);
    }
};

}  // namespace

TEST_CASE("cosine similarity: known values, zero vectors, shape errors") {
    Vec a = {1.0f, 0.0f};
    Vec b = {1.0f, 1.0f};
    CHECK(cosine_similarity(a, b) == doctest::Approx(0.70710678).epsilon(1e-7));
    CHECK(cosine_similarity(a, a) == doctest::Approx(1.0));
    Vec neg = {-1.0f, 0.0f};
    CHECK(cosine_similarity(a, neg) == doctest::Approx(-1.0));
    Vec zero = {0.0f, 0.0f};
    CHECK(cosine_similarity(a, zero) == 0.0);
    Vec three = {1.0f, 2.0f, 3.0f};
    CHECK_THROWS_AS(cosine_similarity(a, three), ShapeError);
}

TEST_CASE("credibility softmax matches the scalar oracle") {
    // d = 1 so logits are directly controllable: logit_k = rep * e_k.
    TrainConfig cfg;
    cfg.d = 1;
    cfg.candidate_size = 2;
    Rng rng(3);
    HintModel m = init_model(cfg, 1, 1, 2, rng);
    m.w_u = Mat(1, 2);
    m.w_u.at(0, 0) = 1.0f;
    m.w_u.at(0, 1) = 0.0f;
    m.w_up = Mat(1, 1);
    m.w_up.at(0, 0) = 1.0f;
    m.tuple_emb.at(0, 0) = 1.0f;
    m.tuple_emb.at(1, 0) = 0.0f;

    std::vector<AttributeTuple> pool = {{0, 0, 0}, {0, 1, 1}};
    Vec rep = {1.0f, 0.0f};
    auto dist = user_credibility(m, pool, rep);
    REQUIRE(dist.entries.size() == 2);
    // logits (1, 0) -> (0.7311, 0.2689), descending order
    CHECK(dist.entries[0].first == 0);
    CHECK(dist.entries[0].second == doctest::Approx(0.73105857863).epsilon(1e-6));
    CHECK(dist.entries[1].second == doctest::Approx(0.26894142137).epsilon(1e-6));

    // random configurations against an independent scalar softmax
    for (int trial = 0; trial < 20; ++trial) {
        TrainConfig c2;
        c2.d = 3;
        c2.candidate_size = 2;
        Rng r2(100 + trial);
        HintModel m2 = init_model(c2, 2, 3, 5, r2);
        std::vector<AttributeTuple> p2;
        for (int32_t k = 0; k < 5; ++k) p2.push_back({0, k, k});
        Vec rep2(6);
        for (auto& x : rep2) x = r2.next_uniform(-1.0f, 1.0f);
        auto got = user_credibility(m2, p2, rep2);

        // oracle: explicit projections and scalar softmax in double
        std::vector<double> logits(5);
        Vec proj(static_cast<size_t>(c2.att_dim()), 0.0f);
        matvec(m2.w_u, rep2, proj);
        for (size_t k = 0; k < 5; ++k) {
            Vec pk(static_cast<size_t>(c2.att_dim()), 0.0f);
            matvec(m2.w_up, Vec(m2.tuple_emb.row(k), m2.tuple_emb.row(k) + 3), pk);
            logits[k] = dot(proj, pk);
        }
        double mx = *std::max_element(logits.begin(), logits.end());
        double z = 0.0;
        for (double& l : logits) z += std::exp(l - mx);
        std::map<int32_t, double> oracle;
        for (size_t k = 0; k < 5; ++k) oracle[static_cast<int32_t>(k)] = std::exp(logits[k] - mx) / z;
        double total = 0.0;
        for (const auto& [tuple, p] : got.entries) {
            CHECK(p == doctest::Approx(oracle.at(tuple)).epsilon(1e-6));
            total += p;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        for (size_t i = 1; i < got.entries.size(); ++i)
            CHECK(got.entries[i - 1].second >= got.entries[i].second);
    }
}

TEST_CASE("selection count formula and top-k behaviour") {
    CHECK(selection_count(0.0f, 16, 100) == 0);
    CHECK(selection_count(0.1f, 16, 100) == 10);
    CHECK(selection_count(0.1f, 16, 4) == 1);   // max(1, round(0.4))
    CHECK(selection_count(0.1f, 16, 240) == 16);  // capped at S
    CHECK(selection_count(0.6f, 8, 5) == 3);
    CHECK(selection_count(1.0f, 100, 7) == 7);

    CredibilityDistribution dist;
    dist.entries = {{2, 0.5}, {0, 0.3}, {1, 0.2}};
    Rng rng(1);
    auto top = select_hints(dist, 0.67f, 10, SelectionMode::TopK, rng);
    REQUIRE(top.size() == 2);
    CHECK(top[0].tuple == 2);
    CHECK(top[1].tuple == 0);
    CHECK(top[0].credibility == doctest::Approx(0.5));

    // tie on probability -> ascending tuple index
    CredibilityDistribution tie;
    tie.entries = {{5, 0.25}, {1, 0.25}, {9, 0.25}, {3, 0.25}};
    auto picked = select_hints(tie, 0.5f, 10, SelectionMode::TopK, rng);
    REQUIRE(picked.size() == 2);
    CHECK(picked[0].tuple == 1);
    CHECK(picked[1].tuple == 3);
}

TEST_CASE("weighted sampling without replacement matches the distribution in TV") {
    CredibilityDistribution dist;
    dist.entries = {{0, 0.6}, {1, 0.3}, {2, 0.1}};
    Rng rng(777);
    std::map<int32_t, int> counts;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        auto s = select_hints(dist, 0.34f, 10, SelectionMode::WeightedSample, rng);  // m = 1
        REQUIRE(s.size() == 1);
        counts[s[0].tuple]++;
    }
    double tv = 0.0;
    for (const auto& [tuple, p] : dist.entries)
        tv += std::abs(static_cast<double>(counts[tuple]) / draws - p);
    CHECK(tv / 2.0 < 0.01);

    // m = 2 of 3: no duplicates, result credibility-descending
    for (int i = 0; i < 200; ++i) {
        auto s = select_hints(dist, 0.67f, 10, SelectionMode::WeightedSample, rng);
        REQUIRE(s.size() == 2);
        CHECK(s[0].tuple != s[1].tuple);
        CHECK(s[0].credibility >= s[1].credibility);
    }
}

TEST_CASE("BPR loss exact values and shape") {
    CHECK(bpr_loss(0.37, {0.37}) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    CHECK(bpr_loss(1.0, {0.0}) == doctest::Approx(0.313262).epsilon(1e-6));
    CHECK(bpr_loss(5.0, {0.0, 0.0}) == doctest::Approx(2.0 * std::log1p(std::exp(-5.0))));
    CHECK(bpr_loss(100.0, {0.0}) > 0.0);   // never exactly zero
    CHECK(bpr_loss(-100.0, {0.0}) == doctest::Approx(100.0).epsilon(1e-6));
    // decreasing in the margin
    CHECK(bpr_loss(2.0, {0.0}) < bpr_loss(1.0, {0.0}));
}

TEST_CASE("initialization: uniform bounds, zero biases, tied cosine projections") {
    TrainConfig cfg;
    Rng rng(42);
    HintModel m = init_model(cfg, 10, 20, 30, rng);
    const float bound = 1.0f / std::sqrt(static_cast<float>(cfg.d));
    for (const Mat* t : {&m.user_emb, &m.item_emb, &m.tuple_emb, &m.w_u, &m.mlp_w1})
        for (float v : t->a) {
            CHECK(v >= -bound);
            CHECK(v <= bound);
        }
    for (float v : m.mlp_b1.a) CHECK(v == 0.0f);
    for (float v : m.mlp_b2.a) CHECK(v == 0.0f);
    CHECK(m.w_c == m.w_cp);  // untrained projections must agree for Eq.3 to rank
    CHECK(m.finite());

    Rng rng2(42);
    HintModel m2 = init_model(cfg, 10, 20, 30, rng2);
    CHECK(m == m2);
}

TEST_CASE("analytic gradients match central finite differences") {
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        Rng rng(9000 + trial);
        Fixture fx(rng);
        TrainConfig cfg;
        cfg.d = 8;
        cfg.slot_u = 2;
        cfg.slot_v = 2;
        cfg.alpha_u = 0.5f;
        cfg.alpha_v = 0.5f;
        cfg.mlp_hidden = trial % 4 == 0 ? 0 : 5;  // exercise the linear head too
        cfg.candidate_size = 2;
        HintModel m = init_model(cfg, fx.log.num_users(), fx.g.num_items(), fx.g.num_tuples(), rng);

        InstancePlan plan;
        plan.user = 0;
        plan.history = fx.log.train_items(0);
        plan.candidates = {1, 2};
        plan.gt_index = 0;
        plan.user_pool = user_subgraph(fx.g, fx.log, 0);

        // freeze one sampled selection, then differentiate through it
        Rng sel_rng(55);
        auto probe = instance_forward(m, fx.g, plan, true, nullptr, &sel_rng, nullptr);
        FixedSelection sel = probe.selection;

        Grads grads(m);
        auto base = instance_forward(m, fx.g, plan, true, &sel, nullptr, &grads);

        // Central differences are invalid within a step of a ReLU kink, so a
        // coordinate only counts when two step sizes agree on the estimate;
        // near-kink coordinates are excluded (bounded below).
        auto fd_at = [&](Mat* t, size_t idx, float h) {
            float orig = t->a[idx];
            t->a[idx] = orig + h;
            float xp = t->a[idx];
            double lp = instance_forward(m, fx.g, plan, true, &sel, nullptr, nullptr).loss;
            t->a[idx] = orig - h;
            float xm = t->a[idx];
            double lm = instance_forward(m, fx.g, plan, true, &sel, nullptr, nullptr).loss;
            t->a[idx] = orig;
            return (lp - lm) / (static_cast<double>(xp) - static_cast<double>(xm));
        };
        auto tensors = m.tensors();
        double num2 = 0.0, den2 = 0.0;
        size_t used = 0, skipped = 0;
        for (size_t ti = 0; ti < tensors.size(); ++ti) {
            Mat* t = tensors[ti];
            if (t->a.empty()) continue;
            size_t samples = std::min<size_t>(t->a.size(), 12);
            for (size_t s = 0; s < samples; ++s) {
                size_t idx = (s * 7919) % t->a.size();
                float h = 1e-2f * std::max(1.0f, std::abs(t->a[idx]));
                double fd1 = fd_at(t, idx, h);
                double fd2 = fd_at(t, idx, h / 8.0f);
                if (std::abs(fd1 - fd2) > 1e-3 * std::max({std::abs(fd1), std::abs(fd2), 1e-3})) {
                    ++skipped;  // FD does not self-agree: kink in [x-h, x+h]
                    continue;
                }
                double an = grads.g[ti].a[idx];
                num2 += (an - fd1) * (an - fd1);
                den2 += an * an;
                ++used;
            }
        }
        REQUIRE(den2 > 0.0);
        CHECK(skipped * 5 <= used);  // kink neighbourhoods must stay rare
        double rel = std::sqrt(num2 / den2);
        worst = std::max(worst, rel);
        CHECK(rel < 1e-4);
        CHECK(base.loss == doctest::Approx(probe.loss));
    }
    MESSAGE("worst relative gradient error: " << worst);
}

TEST_CASE("checkpoint round-trip is bit identical; corruption and mismatch are rejected") {
    TempDir dir;
    TrainConfig cfg;
    cfg.d = 6;
    Rng rng(4242);
    HintModel m = init_model(cfg, 5, 7, 9, rng);
    m.adam_step = 3;
    for (Mat& t : m.adam_m) for (float& v : t.a) v = rng.next_uniform(-1, 1);

    auto path = (dir.path / "ckpt.bin").string();
    save_checkpoint(m, path);
    HintModel back = load_checkpoint(path);
    CHECK(back == m);

    // save(load(x)) is byte-identical
    auto path2 = (dir.path / "ckpt2.bin").string();
    save_checkpoint(back, path2);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(b1 == b2);

    // truncation at any of a few byte offsets must throw, never crash
    for (size_t cut : {size_t(4), b1.size() / 2, b1.size() - 3}) {
        auto bad = dir.file("trunc.bin", b1.substr(0, cut));
        CHECK_THROWS_AS(load_checkpoint(bad), CheckpointError);
    }
    auto garbage = dir.file("garbage.bin", "not a checkpoint at all");
    CHECK_THROWS_AS(load_checkpoint(garbage), CheckpointError);

    // trailing bytes rejected
    auto padded = dir.file("padded.bin", b1 + "xx");
    CHECK_THROWS_AS(load_checkpoint(padded), CheckpointError);

    // config-echo mismatch
    TrainConfig other = cfg;
    other.alpha_u = 0.2f;
    CHECK_THROWS_AS(load_checkpoint(path, other), CheckpointError);
    CHECK(load_checkpoint(path, cfg) == m);
}

TEST_CASE("train with zero epochs returns the seeded initialization") {
    Rng rng(31);
    Fixture fx(rng);
    TrainConfig cfg;
    cfg.d = 4;
    cfg.max_epochs = 0;
    cfg.seed = 7;
    HintModel trained = train(fx.g, fx.log, {}, {}, cfg);
    Rng init_rng(7);
    HintModel expect = init_model(cfg, fx.log.num_users(), fx.g.num_items(), fx.g.num_tuples(),
                                  init_rng);
    CHECK(trained == expect);
}

TEST_CASE("training twice with the same seed gives identical models") {
    Rng rng(66);
    Fixture fx(rng, 10, 8, 2, 5);
    TrainConfig cfg;
    cfg.d = 4;
    cfg.max_epochs = 2;
    cfg.batch_size = 4;
    cfg.slot_u = 4;
    cfg.slot_v = 4;
    cfg.mlp_hidden = 8;
    cfg.seed = 11;

    std::vector<Instance> train_insts, valid_insts;
    for (int32_t u = 0; u < static_cast<int32_t>(fx.log.num_users()); ++u) {
        Instance inst;
        inst.id = u;
        inst.user = u;
        const auto& hist = fx.log.users[u];
        inst.candidates = {hist.back().item, hist.front().item == hist.back().item
                                                 ? 1
                                                 : hist.front().item};
        inst.gt_index = 0;
        for (size_t i = 0; i + 1 < hist.size(); ++i) inst.history.push_back(hist[i].item);
        train_insts.push_back(inst);
        valid_insts.push_back(inst);
    }
    TrainReport r1, r2;
    HintModel a = train(fx.g, fx.log, train_insts, valid_insts, cfg, &r1);
    HintModel b = train(fx.g, fx.log, train_insts, valid_insts, cfg, &r2);
    CHECK(a == b);
    REQUIRE(r1.epochs.size() == r2.epochs.size());
    for (size_t i = 0; i < r1.epochs.size(); ++i)
        CHECK(r1.epochs[i].train_loss == r2.epochs[i].train_loss);
    CHECK(a.finite());
}

TEST_CASE("config canonical text round-trips") {
    TrainConfig cfg;
    cfg.d = 12;
    cfg.alpha_u = 0.15f;
    cfg.selection = SelectionMode::TopK;
    cfg.seed = 123456789012345ULL;
    TrainConfig back = TrainConfig::from_canonical_text(cfg.canonical_text());
    CHECK(back == cfg);
    CHECK_THROWS_AS(TrainConfig::from_canonical_text("nonsense=1\n"), ConfigError);
}
