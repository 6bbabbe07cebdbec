#pragma once

#include <cstdint>
#include <vector>

namespace pidlr {

// SplitMix64 generator. Hand-rolled so that streams are bit-stable across
// platforms and standard library versions (std::uniform_*_distribution is
// implementation defined).
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [0, n). n must be > 0. Rejection-free modulo bias is
    // negligible for the pool sizes used here, but do it properly anyway.
    uint64_t next_below(uint64_t n) {
        uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Uniform in [lo, hi).
    float next_uniform(float lo, float hi) {
        return lo + static_cast<float>(next_double()) * (hi - lo);
    }

    // Derive an independent stream, e.g. per (global seed, instance id).
    static Rng derive(uint64_t seed, uint64_t stream) {
        Rng mixer(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
        return Rng(mixer.next_u64());
    }

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    uint64_t state_;
};

}  // namespace pidlr
