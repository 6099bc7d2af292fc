#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace omninav {

// splitmix64, used to derive stream seeds and to hash substream labels.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t hash_combine(uint64_t seed, uint64_t value) {
    uint64_t s = seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
    return splitmix64(s);
}

inline uint64_t hash_label(std::string_view label) {
    // FNV-1a
    uint64_t h = 1469598103934665603ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

// xoshiro256++ with a ziggurat normal generator. All streams used by the
// simulator derive from a master seed plus a label, so runs are reproducible
// regardless of call-site ordering between subsystems.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) { reseed(seed); }

    void reseed(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
    }

    static Rng substream(uint64_t master, std::string_view label, uint64_t index = 0) {
        uint64_t s = hash_combine(master, hash_label(label));
        s = hash_combine(s, index);
        return Rng(s);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    uint64_t uniform_index(uint64_t n) { return next_u64() % n; }

    // Standard normal via the 128-layer ziggurat (exact rejection sampler;
    // the transcendental slow path fires on ~2% of draws).
    double normal() {
        const ZigguratTable& zig = ziggurat();
        for (;;) {
            const double u = 2.0 * uniform() - 1.0;
            const unsigned i = static_cast<unsigned>(next_u64() & 0x7F);
            if (std::fabs(u) < zig.ratio[i]) return u * zig.x[i];
            if (i == 0) return normal_tail(zig.r, u < 0.0);
            const double x = u * zig.x[i];
            const double f0 = std::exp(-0.5 * (zig.x[i] * zig.x[i] - x * x));
            const double f1 = std::exp(-0.5 * (zig.x[i + 1] * zig.x[i + 1] - x * x));
            if (f1 + uniform() * (f0 - f1) < 1.0) return x;
        }
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    struct ZigguratTable {
        static constexpr int kLayers = 128;
        double r = 3.442619855899;
        double x[kLayers + 1];
        double ratio[kLayers];

        ZigguratTable() {
            constexpr double v = 9.91256303526217e-3;  // area per layer
            double f = std::exp(-0.5 * r * r);
            x[0] = v / f;
            x[1] = r;
            x[kLayers] = 0.0;
            for (int i = 2; i < kLayers; ++i) {
                x[i] = std::sqrt(-2.0 * std::log(v / x[i - 1] + f));
                f = std::exp(-0.5 * x[i] * x[i]);
            }
            for (int i = 0; i < kLayers; ++i) ratio[i] = x[i + 1] / x[i];
        }
    };

    static const ZigguratTable& ziggurat() {
        static const ZigguratTable table;
        return table;
    }

    double normal_tail(double cutoff, bool negative) {
        double x, y;
        do {
            double u = uniform();
            if (u <= 0.0) u = 0x1.0p-53;
            x = std::log(u) / cutoff;
            y = std::log(std::max(uniform(), 0x1.0p-53));
        } while (-2.0 * y < x * x);
        return negative ? x - cutoff : cutoff - x;
    }

    uint64_t s_[4] = {};
};

}  // namespace omninav
