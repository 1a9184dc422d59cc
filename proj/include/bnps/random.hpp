#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>

namespace bnps {

// All sampling goes through mt19937_64, whose output sequence is fixed by the
// C++ standard. Uniforms are built from the top 53 bits of one draw, so no
// library-specific distribution object is involved.
using Engine = std::mt19937_64;

inline constexpr std::string_view kGeneratorFamily = "mt19937_64";

inline double uniform01(Engine& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(double p, Engine& engine) {
    return uniform01(engine) < p;
}

// Inverse-CDF draw over `probs` in index order: returns the first k with
// u < p_0 + ... + p_k. Rounding residue falls to the last index.
int sample_categorical(std::span<const double> probs, Engine& engine);

// SplitMix64 finalizer (Steele, Lea & Flood).
std::uint64_t splitmix64(std::uint64_t x);

// Folds each part into the state with splitmix64: s = splitmix64(s ^ part).
std::uint64_t mix_seed(std::uint64_t master, std::initializer_list<std::uint64_t> parts);

// 64-bit FNV-1a, used to turn identifiers into seed material.
std::uint64_t fnv1a64(std::string_view text);

}  // namespace bnps
