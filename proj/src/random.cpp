#include "bnps/random.hpp"

namespace bnps {

int sample_categorical(std::span<const double> probs, Engine& engine) {
    const double u = uniform01(engine);
    double cumulative = 0.0;
    const int last = static_cast<int>(probs.size()) - 1;
    for (int k = 0; k < last; ++k) {
        cumulative += probs[k];
        if (u < cumulative) return k;
    }
    return last;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t master, std::initializer_list<std::uint64_t> parts) {
    std::uint64_t state = splitmix64(master);
    for (const auto part : parts) state = splitmix64(state ^ part);
    return state;
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace bnps
