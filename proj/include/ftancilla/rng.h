// Copyright 2026 The ftancilla Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FTANCILLA_RNG_H
#define FTANCILLA_RNG_H

#include <cmath>
#include <cstdint>
#include <limits>

namespace ftancilla {

inline uint64_t splitmix64(uint64_t &state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// xoshiro256** generator. Streams for independent trials are derived from
/// (seed, a, b) by hashing, so any trial can be regenerated in isolation.
class Rng {
   public:
    using result_type = uint64_t;

    explicit Rng(uint64_t seed = 0) {
        uint64_t sm = seed;
        for (auto &w : s_) {
            w = splitmix64(sm);
        }
    }

    static Rng for_stream(uint64_t seed, uint64_t a, uint64_t b) {
        uint64_t h = seed;
        uint64_t k = splitmix64(h) ^ a;
        k = splitmix64(k) ^ b;
        return Rng(splitmix64(k));
    }

    static constexpr uint64_t min() {
        return 0;
    }
    static constexpr uint64_t max() {
        return std::numeric_limits<uint64_t>::max();
    }

    uint64_t operator()() {
        uint64_t result = rotl(s_[1] * 5, 7) * 9;
        uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in (0, 1].
    double uniform_open0() {
        return (double((*this)() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n).
    uint64_t below(uint64_t n) {
        // Lemire's multiply-shift; the tiny bias is irrelevant for n <= 15.
        return static_cast<uint64_t>((static_cast<unsigned __int128>((*this)()) * n) >> 64);
    }

   private:
    static uint64_t rotl(uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    uint64_t s_[4];
};

/// Draws the gaps between successes of a Bernoulli(p) sequence, so sparse
/// fault locations are visited without touching every location.
class GeometricSkipper {
   public:
    explicit GeometricSkipper(double p) : p_(p) {
        log_q_ = (p > 0 && p < 1) ? std::log1p(-p) : 0;
    }

    /// Number of failures before the next success; huge when p == 0.
    uint64_t gap(Rng &rng) const {
        if (p_ <= 0) {
            return std::numeric_limits<uint64_t>::max() / 4;
        }
        if (p_ >= 1) {
            return 0;
        }
        double g = std::floor(std::log(rng.uniform_open0()) / log_q_);
        return g >= 1e18 ? std::numeric_limits<uint64_t>::max() / 4 : static_cast<uint64_t>(g);
    }

    double p() const {
        return p_;
    }

   private:
    double p_;
    double log_q_;
};

}  // namespace ftancilla

#endif
