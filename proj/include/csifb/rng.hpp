// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>

namespace csifb {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive an independent stream seed from a base seed and a list of ids
// (sample index, step, purpose tag, ...). Keeps every random draw in the
// project reproducible from (config, seed) alone.
inline uint64_t substream(uint64_t seed, std::initializer_list<uint64_t> ids) {
    uint64_t h = splitmix64(seed);
    for (uint64_t id : ids) h = splitmix64(h ^ (id + 0x632be59bd9b4e019ULL));
    return h;
}

// Deterministic RNG. Gaussian variates use an explicit Box-Muller transform
// so sequences do not depend on the standard library's distribution
// implementation.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(splitmix64(seed)) {}

    uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1)
    double uniform() { return (double)(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        return lo + (int)(next_u64() % (uint64_t)(hi - lo + 1));
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0;
        while (u1 <= 0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // CN(0,1): unit total variance, i.i.d. real/imag parts.
    std::complex<double> cnormal() {
        return {normal() * M_SQRT1_2, normal() * M_SQRT1_2};
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// FNV-1a over bytes; used for config digests and file digests.
inline uint64_t fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ULL) {
    const unsigned char* p = (const unsigned char*)data;
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline uint64_t fnv1a64_str(const std::string& s) { return fnv1a64(s.data(), s.size()); }

}  // namespace csifb
