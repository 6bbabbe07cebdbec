// Serial vs OpenMP inference kernels: projected similarity search and batch
// hint discovery. Checks outputs match bitwise, then reports timings.
#include <chrono>
#include <filesystem>
#include <cstdio>

#include "pidlr/discovery.hpp"
#include "pidlr/harness.hpp"
#include "pidlr/kernels.hpp"
#include "pidlr/synth.hpp"

using namespace pidlr;
using Clock = std::chrono::steady_clock;

static double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int main() {
    SynthConfig scfg;
    scfg.users = 400;
    scfg.items = 250;
    std::string dir = "bench_data";
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    generate_synthetic_dataset(scfg, dir);
    KnowledgeGraph g = load_knowledge_graph(dir + "/kg_triples.tsv", dir + "/entities.tsv",
                                            dir + "/relations.tsv");
    InteractionLog log = load_interactions(dir + "/interactions.tsv", g);

    TrainConfig cfg;
    cfg.max_epochs = 0;
    Rng rng(7);
    HintModel m = init_model(cfg, log.num_users(), g.num_items(), g.num_tuples(), rng);

    // --- projected similarities ---
    std::vector<Vec> reps(log.num_users());
    for (int32_t u = 0; u < static_cast<int32_t>(log.num_users()); ++u)
        reps[static_cast<size_t>(u)] = user_representation(m, g, log, u);
    const Vec& target = reps[0];

    auto t0 = Clock::now();
    std::vector<double> serial;
    for (int rep = 0; rep < 50; ++rep) projected_similarities_serial(m.w_c, m.w_cp, target, reps, serial);
    double ts = seconds_since(t0);

    t0 = Clock::now();
    std::vector<double> parallel;
    for (int rep = 0; rep < 50; ++rep)
        projected_similarities_parallel(m.w_c, m.w_cp, target, reps, parallel);
    double tp = seconds_since(t0);

    bool sim_match = serial == parallel;
    std::printf("projected_similarities: serial %.4fs parallel %.4fs speedup %.2fx match %s\n", ts,
                tp, ts / tp, sim_match ? "yes" : "NO");

    // --- batch discovery ---
    DiscoveryContext ctx = build_discovery_context(m, g, log, true);
    Rng irng(11);
    auto built = build_pairwise_instances(log, g, Split::Test, irng);

    t0 = Clock::now();
    auto hs = discover_all(m, g, log, ctx, built.instances, DiscoveryMode::Normal, 42, false);
    double ds = seconds_since(t0);

    t0 = Clock::now();
    auto hp = discover_all(m, g, log, ctx, built.instances, DiscoveryMode::Normal, 42, true);
    double dp = seconds_since(t0);

    bool disc_match = hs.size() == hp.size();
    for (size_t i = 0; disc_match && i < hs.size(); ++i)
        disc_match = hs[i].to_record(g) == hp[i].to_record(g);
    std::printf("discover_all (%zu instances): serial %.4fs parallel %.4fs speedup %.2fx match %s\n",
                built.instances.size(), ds, dp, ds / dp, disc_match ? "yes" : "NO");

    return (sim_match && disc_match) ? 0 : 1;
}
