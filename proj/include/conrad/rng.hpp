#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace conrad {

// Wrapper around mt19937_64 with hand-rolled bounded draws and shuffling.
// std::uniform_int_distribution and std::shuffle are implementation-defined,
// which would break byte-identical reproducibility across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, n) via rejection sampling.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return v % n;
    }

    // Uniform double in [0, 1) with 53 bits.
    double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    bool chance(double p) { return unit() < p; }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(below(v.size()))];
    }

    // Weighted index draw; weights need not be normalized.
    std::size_t weighted(const std::vector<double>& weights) {
        double total = 0;
        for (double w : weights) total += w;
        double r = unit() * total;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            r -= weights[i];
            if (r < 0) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

    // Fisher-Yates, fully specified.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace conrad
