#include "litmine/rng.hpp"

#include <stdexcept>

#include "litmine/digest.hpp"

namespace litmine {

std::uint64_t Rng::below(std::uint64_t n)
{
    if (n == 0) {
        throw std::invalid_argument("Rng::below(0)");
    }
    // Reject the biased tail so every residue is equally likely.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t x = next();
    while (x >= limit) {
        x = next();
    }
    return x % n;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage)
{
    // splitmix64 finalizer over seed xor stage hash
    std::uint64_t z = seed ^ fnv1a64(stage);
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace litmine
