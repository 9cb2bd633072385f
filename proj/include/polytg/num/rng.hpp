#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "polytg/num/special.hpp"

namespace polytg::num {

/// Finalizer of splitmix64.  Bijective on 64-bit words.
constexpr uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// Combine two keys into one; order-sensitive.
constexpr uint64_t mix_keys(uint64_t a, uint64_t b) {
    return mix64(a + kGolden * (b + 1));
}

/// FNV-1a over bytes; used to derive RNG keys from identifiers.
constexpr uint64_t hash_string(std::string_view s) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<uint8_t>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Counter-based generator: the i-th output is a pure function of
/// (key, i), so streams keyed by (polymer, cup, seed) reproduce
/// bit-identically regardless of evaluation order or platform.
class CounterRng {
  public:
    explicit CounterRng(uint64_t key) : key_(key) {}
    CounterRng(uint64_t a, uint64_t b) : key_(mix_keys(a, b)) {}
    CounterRng(uint64_t a, uint64_t b, uint64_t c) : key_(mix_keys(mix_keys(a, b), c)) {}

    uint64_t next_u64() { return mix64(key_ + kGolden * ++counter_); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n); Lemire multiply-shift (n > 0).
    uint64_t next_below(uint64_t n) {
        return static_cast<uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    bool next_bernoulli(double p) { return next_double() < p; }

    /// Standard normal via inverse-CDF; deterministic given the stream.
    double next_normal() {
        double u = next_double();
        if (u <= 0.0) u = 0x1.0p-53;
        return normal_quantile(u);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    uint64_t key_;
    uint64_t counter_ = 0;
};

}  // namespace polytg::num
