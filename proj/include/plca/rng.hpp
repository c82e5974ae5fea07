#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

#include "plca/matrix.hpp"

namespace plca {

// Seeded random source with a fully specified output sequence.
//
// The raw stream is std::mt19937_64 (its sequence is pinned by the C++
// standard), and every derived draw below uses explicit arithmetic instead of
// std::*_distribution, whose output is implementation-defined. Given a seed,
// all draws are identical across platforms and compilers.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : gen_(seed) {}

    // Uniform double strictly inside (0, 1): top 53 bits of one 64-bit word,
    // offset by half a lattice step.
    double uniform01() {
        const std::uint64_t bits = gen_() >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1p-53;
    }

    // Exponential(1) via inverse CDF; strictly positive.
    double exponential() { return -std::log(uniform01()); }

    // Symmetric Dirichlet with concentration 1 over out.size() categories:
    // normalized exponential draws, one per category in index order.
    void dirichlet1(std::span<double> out) {
        double total = 0.0;
        for (double& x : out) {
            x = exponential();
            total += x;
        }
        for (double& x : out) {
            x /= total;
        }
    }

    // Inverse-CDF categorical draw over probs, one uniform01 per call.
    // The cumulative sum runs in index-ascending order; the draw is the first
    // index whose cumulative mass strictly exceeds the uniform variate. If
    // rounding leaves the variate above the final cumulative sum, the last
    // positive-probability index is returned.
    std::size_t categorical(std::span<const double> probs) {
        return categorical_impl(probs.size(), [&](std::size_t i) { return probs[i]; });
    }

    // Same draw over a matrix column.
    std::size_t categorical_column(const Matrix& m, std::size_t col) {
        return categorical_impl(m.rows(), [&](std::size_t i) { return m(i, col); });
    }

private:
    template <typename Get>
    std::size_t categorical_impl(std::size_t n, Get get) {
        const double u = uniform01();
        double cum = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double p = get(i);
            if (p > 0.0) {
                last_positive = i;
            }
            cum += p;
            if (u < cum) {
                return i;
            }
        }
        return last_positive;
    }

    std::mt19937_64 gen_;
};

}  // namespace plca
