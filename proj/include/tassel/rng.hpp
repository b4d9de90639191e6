#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace tassel {

/// Derives an independent 64-bit seed for one consumer of randomness.
///
/// Every random stream in the project is keyed by (run seed, stream name,
/// index). Stream names in use: "init" (parameter initialization),
/// "dropout", "shuffle" (index = epoch), "split", "kmeans:<object id>",
/// "synth" (index = object ordinal). The key is hashed with FNV-1a and the
/// result is mixed with the seed through splitmix64, so streams never share
/// state and adding a consumer never perturbs the others.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

std::uint64_t splitmix64(std::uint64_t x);

/// Seedable generator with portable conversions (the std distributions are
/// implementation-defined, these are not).
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; one draw per call, no cached pair.
    double normal();

    /// Uniform integer in [0, n) without modulo bias.
    std::uint64_t below(std::uint64_t n);

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace tassel
