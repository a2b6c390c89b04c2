#pragma once

#include <cstdint>
#include <random>

namespace aoi {

// Seedable, splittable pseudorandom stream. Child streams are derived by
// mixing (seed, index) through splitmix64, so replications are reproducible
// and independent of execution order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

    Rng child(std::uint64_t index) const {
        return Rng(mix(seed_ ^ mix(index + 0x9e3779b97f4a7c15ULL)));
    }

    std::uint64_t seed() const { return seed_; }

    double uniform() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
    }

    // Samples an index from an unnormalized nonnegative weight vector.
    template <typename Vec>
    int categorical(const Vec& weights) {
        double total = 0.0;
        for (int i = 0; i < static_cast<int>(weights.size()); ++i) total += weights[i];
        double u = uniform() * total;
        double acc = 0.0;
        for (int i = 0; i < static_cast<int>(weights.size()); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return static_cast<int>(weights.size()) - 1;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace aoi
