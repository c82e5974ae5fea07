#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "plca/corpus.hpp"
#include "plca/error.hpp"
#include "plca/matrix.hpp"
#include "plca/model.hpp"
#include "plca/rng.hpp"

namespace plca {

// One draw with the latent class exposed. Corpora store only (event, group);
// the class index exists so tests can probe the generative assumptions.
struct SampleDraw {
    std::size_t event = 0;
    std::size_t group = 0;
    std::size_t latent = 0;
};

// One pass of the generative process: group from P(g), class from P(z|g),
// event from P(e|z). Consumes exactly three uniform variates in that order.
inline SampleDraw sample_pair(const PlcaModel& model, SeededRng& rng) {
    SampleDraw draw;
    draw.group = rng.categorical(model.group_prior());
    draw.latent = rng.categorical_column(model.mixture(), draw.group);
    draw.event = rng.categorical_column(model.components(), draw.latent);
    return draw;
}

// n independent draws from a generator seeded with seed; reproducible given
// (model, n, seed).
inline SampleCorpus sample_corpus(const PlcaModel& model, std::size_t n, std::uint64_t seed) {
    if (n == 0) {
        throw DomainError("sample_corpus: sample count must be positive");
    }
    SampleCorpus corpus;
    corpus.seed = seed;
    corpus.pairs.reserve(n);
    SeededRng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const SampleDraw draw = sample_pair(model, rng);
        corpus.pairs.push_back({draw.event, draw.group});
    }
    return corpus;
}

// Tally of corpus pairs into an events x groups count table.
inline Matrix corpus_to_counts(const SampleCorpus& corpus, std::size_t events,
                               std::size_t groups) {
    Matrix counts(events, groups, 0.0);
    for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
        const CorpusPair& pair = corpus.pairs[i];
        if (pair.event >= events || pair.group >= groups) {
            throw ValidationError("corpus_to_counts: pair " + std::to_string(i) + " = (" +
                                  std::to_string(pair.event) + ", " +
                                  std::to_string(pair.group) + ") outside " +
                                  std::to_string(events) + "x" + std::to_string(groups));
        }
        counts(pair.event, pair.group) += 1.0;
    }
    return counts;
}

}  // namespace plca
