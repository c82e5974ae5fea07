#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "plca/corpus.hpp"
#include "plca/empirical.hpp"
#include "plca/error.hpp"
#include "plca/matrix.hpp"
#include "plca/model.hpp"

namespace plca {

namespace detail {

inline void check_same_dims(const EmpiricalDistribution& pi, const PlcaModel& model) {
    if (pi.events() != model.events() || pi.groups() != model.groups()) {
        throw ShapeError("empirical table is " + std::to_string(pi.events()) + "x" +
                         std::to_string(pi.groups()) + " but model is " +
                         std::to_string(model.events()) + "x" +
                         std::to_string(model.groups()));
    }
}

}  // namespace detail

// Divergence of the model joint from the empirical table:
//   sum_{e,g} pi(e,g) log(pi(e,g) / P(e,g))
// with 0 log(0/x) = 0. Returns +infinity when the model assigns zero mass to
// an observed cell; support mismatches are reported as a value, not an
// exception, so solver traces can record them. Accumulation is g-major with
// compensation.
inline double kld(const EmpiricalDistribution& pi, const PlcaModel& model) {
    detail::check_same_dims(pi, model);
    const Matrix& table = pi.table();
    KahanSum acc;
    for (std::size_t g = 0; g < pi.groups(); ++g) {
        for (std::size_t e = 0; e < pi.events(); ++e) {
            const double w = table(e, g);
            if (w <= 0.0) {
                continue;
            }
            const double p = joint_prob(model, e, g);
            if (p <= 0.0) {
                return std::numeric_limits<double>::infinity();
            }
            acc.add(w * std::log(w / p));
        }
    }
    return acc.value();
}

// The minimized objective:
//   -sum_{e,g} pi(e,g) log(sum_z P(e|z) P(z|g))
// with 0 log(.) = 0 and +infinity on support mismatch. Differs from the
// divergence only by terms that do not depend on mixture or components once
// P(g) = pi(g).
inline double fobj(const EmpiricalDistribution& pi, const PlcaModel& model) {
    detail::check_same_dims(pi, model);
    const Matrix& table = pi.table();
    KahanSum acc;
    for (std::size_t g = 0; g < pi.groups(); ++g) {
        for (std::size_t e = 0; e < pi.events(); ++e) {
            const double w = table(e, g);
            if (w <= 0.0) {
                continue;
            }
            const double s = conditional_e_given_g(model, e, g);
            if (s <= 0.0) {
                return std::numeric_limits<double>::infinity();
            }
            acc.add(-w * std::log(s));
        }
    }
    return acc.value();
}

// Average log-probability of observed pairs under the conditional model:
//   (1/n) sum_i log(sum_z P(e_i|z) P(z|g_i))
// Returns -infinity if any observation has zero conditional probability.
inline double sample_loglik(const SampleCorpus& corpus, const PlcaModel& model) {
    if (corpus.pairs.empty()) {
        throw DomainError("sample_loglik: empty corpus");
    }
    KahanSum acc;
    for (const CorpusPair& pair : corpus.pairs) {
        const double s = conditional_e_given_g(model, pair.event, pair.group);
        if (s <= 0.0) {
            return -std::numeric_limits<double>::infinity();
        }
        acc.add(std::log(s));
    }
    return acc.value() / static_cast<double>(corpus.pairs.size());
}

// Expected complete-data log-likelihood under the given responsibilities:
//   sum_{e,g} pi(e,g) sum_z post(z|e,g) log(P(e|z) P(z|g))
// with 0 log(.) = 0 applied when the responsibility is zero. Cells with zero
// empirical mass contribute nothing. Returns -infinity when a positive
// responsibility meets a zero parameter product.
inline double q_function(const EmpiricalDistribution& pi, const PosteriorTable& post,
                         const PlcaModel& model) {
    detail::check_same_dims(pi, model);
    if (post.classes() != model.classes() || post.events() != model.events() ||
        post.groups() != model.groups()) {
        throw ShapeError("posterior table is " + std::to_string(post.classes()) + "x" +
                         std::to_string(post.events()) + "x" + std::to_string(post.groups()) +
                         " but model wants " + std::to_string(model.classes()) + "x" +
                         std::to_string(model.events()) + "x" +
                         std::to_string(model.groups()));
    }
    const Matrix& table = pi.table();
    const Matrix& comp = model.components();
    const Matrix& mix = model.mixture();
    KahanSum acc;
    for (std::size_t g = 0; g < pi.groups(); ++g) {
        for (std::size_t e = 0; e < pi.events(); ++e) {
            const double w = table(e, g);
            if (w <= 0.0) {
                continue;
            }
            double inner = 0.0;
            for (std::size_t z = 0; z < model.classes(); ++z) {
                const double r = post.at(z, e, g);
                if (r <= 0.0) {
                    continue;
                }
                const double v = comp(e, z) * mix(z, g);
                if (v <= 0.0) {
                    return -std::numeric_limits<double>::infinity();
                }
                inner += r * std::log(v);
            }
            acc.add(w * inner);
        }
    }
    return acc.value();
}

}  // namespace plca
