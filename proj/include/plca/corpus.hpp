#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace plca {

// One observed draw from the generative process.
struct CorpusPair {
    std::size_t event = 0;
    std::size_t group = 0;

    friend bool operator==(const CorpusPair&, const CorpusPair&) = default;
};

// A sequence of (event, group) observations plus the seed that produced it.
// The latent class is not recorded; observations carry only the visible pair.
struct SampleCorpus {
    std::vector<CorpusPair> pairs;
    std::uint64_t seed = 0;
};

}  // namespace plca
