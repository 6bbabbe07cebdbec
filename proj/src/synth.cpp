#include "pidlr/synth.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "pidlr/errors.hpp"

namespace pidlr {
namespace {

constexpr std::array<const char*, 4> kRelationNames = {"genre", "director", "style", "era"};

std::string padded(const char* prefix, size_t n, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%0*zu", prefix, width, n);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);  // binary: no platform newline games
    if (!os) throw ConfigError("cannot write " + path);
    return os;
}

// Disjoint identity-tuple combinations, one per taste group: shuffle the
// identity slice and cut it into chunks. Disjointness keeps the planted
// signal unambiguous (no item straddles two groups).
std::vector<std::vector<int32_t>> make_groups(const SynthConfig& cfg, Rng& rng) {
    std::vector<int32_t> ids(cfg.identity_tuples);
    for (size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int32_t>(i);
    rng.shuffle(ids);
    std::vector<std::vector<int32_t>> out(cfg.groups);
    for (size_t gi = 0; gi < cfg.groups; ++gi) {
        out[gi].assign(ids.begin() + static_cast<ptrdiff_t>(gi * cfg.latent_per_user),
                       ids.begin() + static_cast<ptrdiff_t>((gi + 1) * cfg.latent_per_user));
        std::sort(out[gi].begin(), out[gi].end());
    }
    return out;
}

size_t overlap(const std::vector<int32_t>& latent, const std::vector<int32_t>& attrs) {
    size_t n = 0;
    for (int32_t t : latent)
        if (std::find(attrs.begin(), attrs.end(), t) != attrs.end()) ++n;
    return n;
}

}  // namespace

void SynthConfig::validate() const {
    if (users == 0 || items == 0 || vocab_size == 0) throw ConfigError("empty synth dimensions");
    if (identity_tuples > vocab_size)
        throw ConfigError("identity tuples exceed the tuple vocabulary");
    if (latent_per_user > identity_tuples)
        throw ConfigError("more latent attributes per user than identity tuples exist");
    if (identity_per_item == 0 || identity_per_item > latent_per_user)
        throw ConfigError("identity_per_item must be in [1, latent_per_user]");
    if (attrs_per_item < identity_per_item)
        throw ConfigError("items cannot carry their identity tuples");
    if (attrs_per_item - identity_per_item > vocab_size - identity_tuples)
        throw ConfigError("not enough filler tuples to pad item attributes");
    if (attrs_per_item > vocab_size) throw ConfigError("more attributes per item than the vocabulary");
    if (groups == 0 || groups * latent_per_user > identity_tuples)
        throw ConfigError("disjoint taste groups need groups * latent_per_user <= identity tuples");
    if (min_history < 3) throw ConfigError("history below 3 makes every user fail the split minimum");
    if (min_history > max_history) throw ConfigError("min history exceeds max history");
    if (cold_fraction < 0.0 || cold_fraction > 1.0)
        throw ConfigError("cold_fraction must be in [0,1]");
    if (max_history > items) throw ConfigError("history longer than the item set");
    if (noise < 0.0) throw ConfigError("negative sampling noise");
}

SynthResult generate_synthetic_dataset(const SynthConfig& cfg, const std::string& dir) {
    cfg.validate();
    Rng rng(cfg.seed);
    SynthResult res;

    const size_t num_relations = std::min<size_t>(kRelationNames.size(), cfg.vocab_size);
    auto relation_of = [&](int32_t tuple) { return static_cast<size_t>(tuple) % num_relations; };

    auto groups = make_groups(cfg, rng);

    // Items: a subset of their taste group's identity tuples plus filler.
    // Round-robin over groups so every group has candidates; carrying only
    // part of the group signature is what makes collaborative evidence
    // matter (one user's history rarely reveals the whole group).
    res.item_attrs.resize(cfg.items);
    // Fillers are partitioned per group so that users of different groups share
    // almost no attributes; this keeps subgraph representations of same-group
    // users far closer than cross-group ones, which the collaborative
    // retrieval (an untrained projection of those representations) relies on.
    const size_t filler_count = cfg.vocab_size - cfg.identity_tuples;
    const size_t fillers_per_group = filler_count / cfg.groups;
    for (size_t i = 0; i < cfg.items; ++i) {
        const size_t gidx = i % groups.size();
        const auto& group = groups[gidx];
        const size_t filler_base = cfg.identity_tuples + gidx * fillers_per_group;
        const size_t filler_span = fillers_per_group > 0 ? fillers_per_group : filler_count;
        const size_t span_base = fillers_per_group > 0 ? filler_base : cfg.identity_tuples;
        std::vector<int32_t> attrs;
        while (attrs.size() < cfg.identity_per_item) {
            int32_t t = group[rng.next_below(group.size())];
            if (std::find(attrs.begin(), attrs.end(), t) == attrs.end()) attrs.push_back(t);
        }
        size_t guard = 0;
        while (attrs.size() < cfg.attrs_per_item) {
            int32_t t;
            if (attrs.size() - cfg.identity_per_item < filler_span && guard++ < 64 * filler_span) {
                t = static_cast<int32_t>(span_base + rng.next_below(filler_span));
            } else {
                t = static_cast<int32_t>(cfg.identity_tuples + rng.next_below(filler_count));
            }
            if (std::find(attrs.begin(), attrs.end(), t) == attrs.end()) attrs.push_back(t);
        }
        std::sort(attrs.begin(), attrs.end());
        res.item_attrs[i] = std::move(attrs);
    }

    // Users: pick a group, then sample history without replacement with
    // weight overlap + noise. Zero-weight items are never drawn.
    res.user_latents.resize(cfg.users);
    std::vector<std::vector<std::pair<size_t, int64_t>>> histories(cfg.users);
    for (size_t u = 0; u < cfg.users; ++u) {
        size_t gidx = rng.next_below(groups.size());
        res.user_latents[u] = groups[gidx];
        // Cold users stop at min_history; warm users accumulate max_history.
        const size_t cold_count =
            static_cast<size_t>(cfg.cold_fraction * static_cast<double>(cfg.users) + 0.5);
        size_t h = u < cold_count ? cfg.min_history : cfg.max_history;

        std::vector<double> w(cfg.items);
        for (size_t i = 0; i < cfg.items; ++i)
            w[i] = static_cast<double>(overlap(res.user_latents[u], res.item_attrs[i])) + cfg.noise;
        for (size_t t = 0; t < h; ++t) {
            double total = 0.0;
            for (double x : w) total += x;
            if (total <= 0.0) break;
            double r = rng.next_double() * total;
            size_t pick = cfg.items - 1;
            double acc = 0.0;
            for (size_t i = 0; i < cfg.items; ++i) {
                acc += w[i];
                if (r < acc) { pick = i; break; }
            }
            histories[u].push_back({pick, static_cast<int64_t>(100 + t)});
            w[pick] = 0.0;
            ++res.interactions;
        }
    }

    // graph_core file formats; fixed-width ids keep lexicographic == numeric.
    auto entities = open_out(dir + "/entities.tsv");
    for (size_t i = 0; i < cfg.items; ++i)
        entities << padded("i", i, 4) << "\tSynthetic Feature No. " << padded("", i, 4)
                 << "\titem\t1\n";
    for (size_t t = 0; t < cfg.vocab_size; ++t)
        entities << padded("a", t, 3) << "\t" << kRelationNames[relation_of(static_cast<int32_t>(t))]
                 << "_value_" << padded("", t, 3) << "\tattribute\t0\n";
    entities.close();

    auto relations = open_out(dir + "/relations.tsv");
    for (size_t r = 0; r < num_relations; ++r)
        relations << "r" << r << "\t" << kRelationNames[r] << "\n";
    relations.close();

    auto triples = open_out(dir + "/kg_triples.tsv");
    for (size_t i = 0; i < cfg.items; ++i)
        for (int32_t t : res.item_attrs[i])
            triples << padded("i", i, 4) << "\tr" << relation_of(t) << "\t"
                    << padded("a", static_cast<size_t>(t), 3) << "\n";
    triples.close();

    auto interactions = open_out(dir + "/interactions.tsv");
    for (size_t u = 0; u < cfg.users; ++u)
        for (const auto& [item, ts] : histories[u])
            interactions << padded("u", u, 4) << "\t" << padded("i", item, 4) << "\t" << ts << "\n";
    interactions.close();

    std::ostringstream man;
    man << "generator synthetic-planted-preference\n"
        << "users " << cfg.users << "\nitems " << cfg.items << "\nattrs_per_item "
        << cfg.attrs_per_item << "\nvocab_size " << cfg.vocab_size << "\nidentity_tuples "
        << cfg.identity_tuples << "\nlatent_per_user " << cfg.latent_per_user
        << "\nidentity_per_item " << cfg.identity_per_item << "\ngroups "
        << cfg.groups << "\nmin_history " << cfg.min_history << "\nmax_history "
        << cfg.max_history << "\ncold_fraction " << cfg.cold_fraction << "\nnoise "
        << cfg.noise << "\nseed " << cfg.seed
        << "\ninteractions " << res.interactions << "\n";
    res.manifest_text = man.str();
    auto manifest = open_out(dir + "/synth_manifest.txt");
    manifest << res.manifest_text;
    return res;
}

}  // namespace pidlr
