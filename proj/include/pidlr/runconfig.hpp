#pragma once

#include <string>

#include "pidlr/discovery.hpp"
#include "pidlr/instance.hpp"
#include "pidlr/model.hpp"

namespace pidlr {

// Everything one run needs, loadable from a key=value text file with flag
// overrides on top (flags win). Canonical text form is stable; it is echoed
// into run manifests and compared against checkpoint echoes.
struct RunConfig {
    std::string data_dir;   // entities.tsv, relations.tsv, kg_triples.tsv, interactions.tsv
    std::string out_dir;
    TrainConfig train;
    TaskKind task = TaskKind::Pairwise;
    DiscoveryMode mode = DiscoveryMode::Normal;
    std::string backend = "mock";  // mock | remote
    uint64_t seed = 42;

    void validate(bool need_data) const;
    std::string canonical_text() const;
    static RunConfig from_file(const std::string& path);
    static RunConfig from_text(const std::string& text);
};

// FNV-1a digest of a file's bytes, for run manifests.
uint64_t file_digest(const std::string& path);

// manifest.txt: config echo + seed + per-input digests. Enough to
// bit-reproduce the run.
void write_run_manifest(const RunConfig& cfg, const std::string& command,
                        const std::vector<std::string>& input_files);

}  // namespace pidlr
