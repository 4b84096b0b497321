#pragma once

#include <cstdint>

namespace har {

// Kernels with an OpenMP path keep a serial path as the reference they are
// tested against. Both produce bit-identical results.
enum class Execution { Parallel, Serial };

// Sets the OpenMP worker cap; 0 leaves the runtime default.
void set_thread_count(int threads);
int thread_count();

// SplitMix64 finalizer; derives independent stream seeds from (seed, index...).
constexpr std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    return mix_seed(mix_seed(mix_seed(mix_seed(seed) ^ a) ^ b) ^ c);
}

}  // namespace har
