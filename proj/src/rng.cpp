#include "gode/rng.hpp"

#include <cmath>
#include <numbers>
#include <unordered_map>
#include <vector>

namespace gode {

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
    // Sparse Fisher-Yates: O(k) memory, no O(n) shuffle.
    std::unordered_map<std::size_t, std::size_t> swapped;
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + index(n - i);
        auto ji = swapped.find(j);
        std::size_t value = ji == swapped.end() ? j : ji->second;
        auto ii = swapped.find(i);
        swapped[j] = ii == swapped.end() ? i : ii->second;
        out.push_back(value);
    }
    return out;
}

double keyed_gaussian(std::uint64_t seed, std::uint64_t key, std::uint64_t counter) {
    const std::uint64_t base = hash_combine(hash_combine(seed, key), counter);
    // Box-Muller on two mixed uniforms.
    const double u1 = (double(mix64(base) >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = (double(mix64(base + 1) >> 11) + 0.5) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace gode
