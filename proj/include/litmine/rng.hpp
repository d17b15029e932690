#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace litmine {

/// Seeded generator with platform-stable draws. std::mt19937_64's output
/// sequence is fixed by the standard; the distributions in <random> are not,
/// so bounded draws are done here by rejection.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

    /// Uniform double in [0, 1).
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// k distinct elements chosen uniformly, in draw order (partial Fisher-Yates).
    template<class T>
    std::vector<T> sample(std::span<const T> items, std::size_t k)
    {
        std::vector<T> pool(items.begin(), items.end());
        k = std::min(k, pool.size());
        for (std::size_t i = 0; i < k; ++i) {
            auto j = i + static_cast<std::size_t>(below(pool.size() - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        return pool;
    }

    template<class T>
    void shuffle(std::vector<T>& items)
    {
        for (std::size_t i = items.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// Per-stage sub-seed: stable hash of (seed, stage name).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage);

} // namespace litmine
