#pragma once

#include <string>
#include <vector>

#include "pidlr/rng.hpp"

namespace pidlr {

// Planted-preference generator. The tuple vocabulary splits into "identity"
// tuples (carried by items of one taste group) and low-frequency filler
// tuples drawn at random per item. Each user is assigned one taste group;
// their latent tuples are that group's identity tuples, and interaction
// weight is attribute overlap plus uniform noise, so preferences are
// recoverable from history but not trivially. Fillers must outnumber the
// per-item filler slots by a wide margin: near-universal attributes would
// dominate every preference pool and mask the planted signal.
struct SynthConfig {
    size_t users = 500;
    size_t items = 300;
    size_t attrs_per_item = 2;
    size_t vocab_size = 256;       // distinct (relation, tail) pairs
    size_t identity_tuples = 32;  // leading slice of the vocab; rest is filler
    size_t latent_per_user = 2;   // group size = latent tuples per user
    size_t identity_per_item = 1; // identity tuples carried by one item
    size_t groups = 16;            // disjoint identity-tuple combinations
    size_t min_history = 3;       // inclusive; cold users get exactly this
    size_t max_history = 14;      // inclusive; warm users get exactly this
    // Fraction of cold-start users. Cold users interact min_history times, so
    // their own recent window often reveals only one of their latent tuples;
    // recovering the other through similar users is what separates the full
    // discovery mode from the no-collaboration ablation. Warm users interact
    // max_history times and carry most of the training signal.
    double cold_fraction = 0.4;
    double noise = 0.002;         // uniform additive sampling weight
    uint64_t seed = 42;

    void validate() const;  // throws ConfigError on infeasible settings
};

struct SynthResult {
    // planted latent tuples per user, as vocab indices, ascending
    std::vector<std::vector<int32_t>> user_latents;
    // item attribute tuples per item (0-based item order), as vocab indices
    std::vector<std::vector<int32_t>> item_attrs;
    size_t interactions = 0;
    std::string manifest_text;  // generator parameters, reproducibility record
};

// Writes entities.tsv, relations.tsv, kg_triples.tsv, interactions.tsv into
// dir. Byte-identical output for identical (config, seed).
SynthResult generate_synthetic_dataset(const SynthConfig& cfg, const std::string& dir);

}  // namespace pidlr
