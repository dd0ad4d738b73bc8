#pragma once

#include <cmath>
#include <cstdint>

namespace tcqkd {

// Counter-free mixing step (splitmix64). Used to expand a user seed into
// well-separated engine states for independent streams.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ with hand-rolled samplers. The standard <random>
// distributions are implementation-defined, which would break byte-identical
// outputs across toolchains; the engine and every sampler here are pinned.
class Rng {
public:
    Rng() : Rng(0, 0) {}

    Rng(uint64_t seed, uint64_t stream_id) {
        // Stream derivation rule (documented in the README): the four words
        // of state come from iterating splitmix64 on seed ^ mix(stream_id).
        uint64_t tmp = stream_id;
        uint64_t s = seed ^ splitmix64(tmp);
        for (auto& w : state_) w = splitmix64(s);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform on [0,1) with 53 random bits
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    bool bernoulli(double p) { return uniform01() < p; }

    // Box-Muller; both uniforms drawn every call so the stream layout does
    // not depend on call history.
    double normal(double mean, double sigma) {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 == 0.0) u1 = uniform01();
        return mean + sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Knuth product-of-uniforms, split into chunks so exp(-lambda) cannot
    // underflow. O(lambda) per draw, fine at the event rates used here. The
    // exp(-lambda) threshold is cached across calls with the same lambda,
    // which is the hot path (one draw per clock at constant mean).
    int64_t poisson(double lambda) {
        int64_t total = 0;
        while (lambda > 500.0) {
            total += poisson_small(500.0);
            lambda -= 500.0;
        }
        return total + poisson_small(lambda);
    }

private:
    static constexpr uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    int64_t poisson_small(double lambda) {
        if (lambda <= 0.0) return 0;
        if (lambda != poisson_lambda_) {
            poisson_lambda_ = lambda;
            poisson_limit_ = std::exp(-lambda);
        }
        const double limit = poisson_limit_;
        int64_t k = 0;
        double prod = uniform01();
        while (prod > limit) {
            ++k;
            prod *= uniform01();
        }
        return k;
    }

    uint64_t state_[4];
    double poisson_lambda_ = -1.0;
    double poisson_limit_ = 0.0;
};

}  // namespace tcqkd
