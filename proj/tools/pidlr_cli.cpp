#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "pidlr/errors.hpp"
#include "pidlr/harness.hpp"
#include "pidlr/runconfig.hpp"
#include "pidlr/synth.hpp"

namespace fs = std::filesystem;
using namespace pidlr;

namespace {

struct Loaded {
    KnowledgeGraph g;
    InteractionLog log;
    LoadReport report;
    std::vector<std::string> files;
};

Loaded load_data(const std::string& dir) {
    Loaded d;
    d.files = {dir + "/kg_triples.tsv", dir + "/entities.tsv", dir + "/relations.tsv",
               dir + "/interactions.tsv"};
    d.g = load_knowledge_graph(d.files[0], d.files[1], d.files[2], &d.report);
    d.log = load_interactions(d.files[3], d.g, &d.report);
    return d;
}

void write_text(const std::string& path, const std::string& text) {
    fs::create_directories(fs::path(path).parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path);
    os << text;
}

// Fixed stream ids so instance sets are reproducible per (seed, split, task).
uint64_t instance_stream(Split split, TaskKind task) {
    return 0x1A57000ULL + static_cast<uint64_t>(split) * 2 + static_cast<uint64_t>(task);
}

InstanceBuild build_split(const Loaded& d, const RunConfig& cfg, Split split) {
    Rng rng = Rng::derive(cfg.seed, instance_stream(split, cfg.task));
    return build_instances(d.log, d.g, cfg.task, split, rng);
}

void dump_instances(const Loaded& d, const RunConfig& cfg, const std::vector<Instance>& v,
                    const std::string& path) {
    std::ostringstream os;
    for (const auto& inst : v) os << instance_record(d.g, d.log, inst, cfg.seed) << "\n";
    write_text(path, os.str());
}

HintModel train_run(const Loaded& d, RunConfig& cfg, const std::vector<Instance>& train_insts,
                    TrainReport* report) {
    auto valid = build_split(d, cfg, Split::Valid);
    cfg.train.seed = cfg.seed;
    cfg.train.candidate_size = static_cast<int>(candidate_count(cfg.task));
    return train(d.g, d.log, train_insts, valid.instances, cfg.train, report);
}

EvalReport eval_run(const Loaded& d, const RunConfig& cfg, const HintModel& model,
                    const DiscoveryContext& ctx, const std::vector<Instance>& insts,
                    DiscoveryMode mode, const std::string& transcript_path) {
    EvalOptions opts;
    opts.mode = mode;
    opts.seed = cfg.seed;
    opts.transcript_path = transcript_path;
    if (cfg.backend == "mock") return evaluate_mock(model, d.g, d.log, ctx, insts, opts);
    RemoteBackend backend(remote_config_from_env());
    return evaluate(backend, model, d.g, d.log, ctx, insts, opts);
}

std::vector<PromptBundle> make_bundles(const Loaded& d, const RunConfig& cfg, const HintModel& model,
                                       const DiscoveryContext& ctx,
                                       const std::vector<Instance>& insts) {
    auto hints = discover_all(model, d.g, d.log, ctx, insts, cfg.mode, cfg.seed, true);
    std::vector<PromptBundle> bundles;
    bundles.reserve(insts.size());
    for (size_t i = 0; i < insts.size(); ++i)
        bundles.push_back(build_bundle(d.g, insts[i], hints[i]));
    return bundles;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PIDLR pipeline: preference hints over a knowledge graph for LLM recommendation"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir, data_dir, mode_str, backend_str, task_str, ckpt_path;
    uint64_t seed = 0;
    bool seed_set = false;
    app.add_option("--config", config_path, "run config file (key=value lines)");
    app.add_option("--seed", seed, "override the run seed")->each([&](const std::string&) { seed_set = true; });
    app.add_option("--out", out_dir, "run output directory");
    app.add_option("--data", data_dir, "dataset directory");
    app.add_option("--mode", mode_str, "discovery mode: normal|no_ipd|no_cie|random|all");
    app.add_option("--backend", backend_str, "backend")->check(CLI::IsMember({"mock", "remote"}));
    app.add_option("--task", task_str, "task")->check(CLI::IsMember({"pairwise", "listwise"}));
    app.add_option("--ckpt", ckpt_path, "checkpoint path (default <out>/checkpoint.bin)");

    auto* c_ingest = app.add_subcommand("ingest", "load and validate a dataset, write a report");
    auto* c_stats = app.add_subcommand("stats", "print dataset statistics");
    auto* c_synth = app.add_subcommand("synth", "generate the planted-preference dataset");
    auto* c_train = app.add_subcommand("train", "train the dual-attention hint model");
    auto* c_discover = app.add_subcommand("discover", "dump per-instance hint sets");
    auto* c_export = app.add_subcommand("export-prompts", "export the instruction dataset");
    auto* c_eval = app.add_subcommand("evaluate", "run the evaluation harness");
    auto* c_ablate = app.add_subcommand("ablate", "evaluate several discovery modes");
    auto* c_sweep = app.add_subcommand("sweep", "grid over N, alpha_u, alpha_v");
    auto* c_fewshot = app.add_subcommand("few-shot", "train on a subsample of instances");

    SynthConfig synth_cfg;
    c_synth->add_option("--users", synth_cfg.users);
    c_synth->add_option("--items", synth_cfg.items);
    c_synth->add_option("--attrs-per-item", synth_cfg.attrs_per_item);
    c_synth->add_option("--vocab", synth_cfg.vocab_size);
    c_synth->add_option("--identity-tuples", synth_cfg.identity_tuples);
    c_synth->add_option("--latent-per-user", synth_cfg.latent_per_user);
    c_synth->add_option("--groups", synth_cfg.groups);
    c_synth->add_option("--min-history", synth_cfg.min_history);
    c_synth->add_option("--max-history", synth_cfg.max_history);
    c_synth->add_option("--noise", synth_cfg.noise);

    int epochs_override = -1;
    c_train->add_option("--epochs", epochs_override, "override max epochs");
    std::string modes_csv = "normal,no_ipd,no_cie,random";
    c_ablate->add_option("--modes", modes_csv, "comma-separated discovery modes");
    size_t few_num = 64;
    c_fewshot->add_option("--num", few_num, "training subsample size");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = RunConfig::from_file(config_path);
        if (!data_dir.empty()) cfg.data_dir = data_dir;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (seed_set) cfg.seed = seed;
        if (!mode_str.empty()) cfg.mode = mode_from_name(mode_str);
        if (!backend_str.empty()) cfg.backend = backend_str;
        if (!task_str.empty()) {
            cfg.task = task_str == "listwise" ? TaskKind::Listwise : TaskKind::Pairwise;
            cfg.train.candidate_size = static_cast<int>(candidate_count(cfg.task));
        }
        cfg.train.seed = cfg.seed;
        if (ckpt_path.empty() && !cfg.out_dir.empty())
            ckpt_path = (fs::path(cfg.out_dir) / "checkpoint.bin").string();

        if (*c_synth) {
            if (cfg.out_dir.empty()) throw ConfigError("synth needs --out");
            synth_cfg.seed = cfg.seed;
            fs::create_directories(cfg.out_dir);
            auto res = generate_synthetic_dataset(synth_cfg, cfg.out_dir);
            std::cout << res.manifest_text;
            return 0;
        }

        cfg.validate(true);
        auto d = load_data(cfg.data_dir);

        if (*c_ingest || *c_stats) {
            std::cout << d.report.to_text();
            if (*c_ingest && !cfg.out_dir.empty()) {
                write_run_manifest(cfg, "ingest", d.files);
                write_text((fs::path(cfg.out_dir) / "ingest_report.txt").string(),
                           d.report.to_text());
            }
            return 0;
        }

        if (cfg.out_dir.empty()) throw ConfigError("this subcommand needs --out");

        if (*c_train) {
            if (epochs_override >= 0) cfg.train.max_epochs = epochs_override;
            write_run_manifest(cfg, "train", d.files);
            auto tr = build_split(d, cfg, Split::Train);
            dump_instances(d, cfg, tr.instances, (fs::path(cfg.out_dir) / "train_instances.jsonl").string());
            TrainReport report;
            HintModel model = train_run(d, cfg, tr.instances, &report);
            save_checkpoint(model, ckpt_path);
            write_text((fs::path(cfg.out_dir) / "train_report.txt").string(), report.to_text());
            std::cout << report.to_text();
            return 0;
        }

        if (*c_fewshot) {
            write_run_manifest(cfg, "few-shot", d.files);
            auto tr = build_split(d, cfg, Split::Train);
            Rng rng = Rng::derive(cfg.seed, 0xFE105ULL);
            auto sub = few_shot_subsample(tr.instances, few_num, rng);
            dump_instances(d, cfg, sub, (fs::path(cfg.out_dir) / "few_shot_instances.jsonl").string());
            TrainReport report;
            HintModel model2 = train_run(d, cfg, sub, &report);
            save_checkpoint(model2, (fs::path(cfg.out_dir) / "checkpoint.bin").string());
            DiscoveryContext ctx2 = build_discovery_context(model2, d.g, d.log, true);
            auto te = build_split(d, cfg, Split::Test);
            auto r = eval_run(d, cfg, model2, ctx2, te.instances, cfg.mode, "");
            write_text((fs::path(cfg.out_dir) / "eval_report.json").string(),
                       r.summary_record() + "\n");
            std::cout << report.to_text() << r.to_text();
            return 0;
        }

        // everything below consumes a checkpoint
        HintModel model = load_checkpoint(ckpt_path);
        DiscoveryContext ctx = build_discovery_context(model, d.g, d.log, true);

        if (*c_discover) {
            write_run_manifest(cfg, "discover", d.files);
            auto te = build_split(d, cfg, Split::Test);
            dump_instances(d, cfg, te.instances, (fs::path(cfg.out_dir) / "instances.jsonl").string());
            auto hints = discover_all(model, d.g, d.log, ctx, te.instances, cfg.mode, cfg.seed, true);
            std::ostringstream os;
            for (const auto& h : hints) os << h.to_record(d.g) << "\n";
            write_text((fs::path(cfg.out_dir) / "hints.jsonl").string(), os.str());
            std::cout << "instances " << te.instances.size() << " skipped " << te.skipped.size()
                      << "\n";
            return 0;
        }

        if (*c_export) {
            write_run_manifest(cfg, "export-prompts", d.files);
            auto te = build_split(d, cfg, Split::Test);
            auto bundles = make_bundles(d, cfg, model, ctx, te.instances);
            auto man = export_instruction_dataset(bundles,
                                                  (fs::path(cfg.out_dir) / "dataset.jsonl").string());
            write_text((fs::path(cfg.out_dir) / "dataset_manifest.txt").string(), man.to_text());
            std::cout << man.to_text();
            return 0;
        }

        if (*c_eval) {
            write_run_manifest(cfg, "evaluate", d.files);
            auto te = build_split(d, cfg, Split::Test);
            dump_instances(d, cfg, te.instances, (fs::path(cfg.out_dir) / "instances.jsonl").string());
            auto r = eval_run(d, cfg, model, ctx, te.instances, cfg.mode,
                              (fs::path(cfg.out_dir) / "transcript.jsonl").string());
            write_text((fs::path(cfg.out_dir) / "eval_report.json").string(),
                       r.summary_record() + "\n");
            std::cout << r.to_text();
            return 0;
        }

        if (*c_ablate) {
            write_run_manifest(cfg, "ablate", d.files);
            auto te = build_split(d, cfg, Split::Test);
            std::ostringstream rows;
            std::istringstream ms(modes_csv);
            std::string tok;
            while (std::getline(ms, tok, ',')) {
                DiscoveryMode mode = mode_from_name(tok);
                auto r = eval_run(d, cfg, model, ctx, te.instances, mode, "");
                rows << r.summary_record() << "\n";
                std::cout << r.to_text() << "\n";
            }
            write_text((fs::path(cfg.out_dir) / "ablate_report.jsonl").string(), rows.str());
            return 0;
        }

        if (*c_sweep) {
            write_run_manifest(cfg, "sweep", d.files);
            auto te = build_split(d, cfg, Split::Test);
            std::ostringstream rows;
            rows << "n\talpha_u\talpha_v\thit_ratio\tvalid_ratio\n";
            for (int n = 0; n <= 4; ++n)
                for (float au : {0.0f, 0.05f, 0.10f, 0.15f, 0.20f})
                    for (int avi = 0; avi <= 5; ++avi) {
                        float av = 0.2f * static_cast<float>(avi);
                        HintModel cell = model;
                        cell.cfg.collab_n = n;
                        cell.cfg.alpha_u = au;
                        cell.cfg.alpha_v = av;
                        auto r = eval_run(d, cfg, cell, ctx, te.instances, cfg.mode, "");
                        rows << n << "\t" << au << "\t" << av << "\t" << r.hit_ratio << "\t"
                             << r.valid_ratio << "\n";
                    }
            write_text((fs::path(cfg.out_dir) / "sweep.tsv").string(), rows.str());
            std::cout << "sweep done: 150 cells\n";
            return 0;
        }

    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
