#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace dynframe {

// splitmix64: the standard 64-bit mixing step. Used both as a sequential
// stream and as a stateless hash so that noise draws can be keyed by
// (seed, layer, head, atom, edge) independent of thread scheduling.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t hash_mix(uint64_t a, uint64_t b) {
    uint64_t s = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    return splitmix64(s);
}

// Sequential deterministic stream (parameter init, shuffles, generators).
struct Rng {
    uint64_t state;

    explicit Rng(uint64_t seed) : state(seed) {}

    uint64_t next_u64() { return splitmix64(state); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; one value per call, no cached spare (keeps replay trivial)
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    // integer in [0, n)
    uint64_t below(uint64_t n) { return next_u64() % n; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }
};

// Counter-based draws keyed by an arbitrary tuple. Same key -> same value,
// regardless of evaluation order or thread count.
struct KeyedRng {
    uint64_t seed;

    explicit KeyedRng(uint64_t s) : seed(s) {}

    double uniform(uint64_t k1, uint64_t k2 = 0, uint64_t k3 = 0, uint64_t k4 = 0) const {
        uint64_t h = hash_mix(seed, k1);
        h = hash_mix(h, k2);
        h = hash_mix(h, k3);
        h = hash_mix(h, k4);
        return static_cast<double>(h >> 11) * 0x1.0p-53;
    }
};

}  // namespace dynframe
