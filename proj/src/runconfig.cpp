#include "pidlr/runconfig.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pidlr/bridge.hpp"
#include "pidlr/errors.hpp"

namespace pidlr {

void RunConfig::validate(bool need_data) const {
    train.validate();
    if (backend != "mock" && backend != "remote")
        throw ConfigError("backend must be mock or remote, got " + backend);
    if (need_data) {
        if (data_dir.empty()) throw ConfigError("data_dir is required");
        for (const char* f : {"entities.tsv", "relations.tsv", "kg_triples.tsv", "interactions.tsv"}) {
            auto p = std::filesystem::path(data_dir) / f;
            if (!std::filesystem::exists(p))
                throw ConfigError("data_dir: missing input file " + p.string());
        }
    }
}

std::string RunConfig::canonical_text() const {
    std::ostringstream os;
    os << "data_dir=" << data_dir << "\n"
       << "out_dir=" << out_dir << "\n"
       << "task=" << task_name(task) << "\n"
       << "mode=" << mode_name(mode) << "\n"
       << "backend=" << backend << "\n"
       << "seed=" << seed << "\n"
       << train.canonical_text();
    return os.str();
}

RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig cfg;
    std::ostringstream train_lines;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("bad config line: " + line);
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        if (key == "data_dir") cfg.data_dir = val;
        else if (key == "out_dir") cfg.out_dir = val;
        else if (key == "task") {
            if (val == "pairwise") cfg.task = TaskKind::Pairwise;
            else if (val == "listwise") cfg.task = TaskKind::Listwise;
            else throw ConfigError("task must be pairwise or listwise, got " + val);
        } else if (key == "mode") cfg.mode = mode_from_name(val);
        else if (key == "backend") cfg.backend = val;
        else if (key == "seed") { cfg.seed = std::stoull(val); train_lines << line << "\n"; }
        else train_lines << line << "\n";  // TrainConfig key, validated below
    }
    cfg.train = TrainConfig::from_canonical_text(train_lines.str());
    cfg.train.candidate_size = static_cast<int>(candidate_count(cfg.task));
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return from_text(buf.str());
}

uint64_t file_digest(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot read " + path + " for digest");
    std::ostringstream buf;
    buf << is.rdbuf();
    return fnv1a(buf.str());
}

void write_run_manifest(const RunConfig& cfg, const std::string& command,
                        const std::vector<std::string>& input_files) {
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream os(std::filesystem::path(cfg.out_dir) / "manifest.txt", std::ios::binary);
    if (!os) throw ConfigError("cannot write manifest under " + cfg.out_dir);
    os << "command=" << command << "\n" << cfg.canonical_text();
    for (const auto& f : input_files) {
        char hex[32];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(file_digest(f)));
        os << "input " << f << " fnv1a=" << hex << "\n";
    }
}

}  // namespace pidlr
