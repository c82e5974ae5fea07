#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plca/empirical.hpp"
#include "plca/error.hpp"
#include "plca/matrix.hpp"
#include "plca/model.hpp"
#include "plca/objective.hpp"
#include "plca/rng.hpp"

namespace plca {

enum class InitKind {
    random_dirichlet,  // seeded Dirichlet(1) columns
    provided_model,    // mixture/components taken from FitConfig::initial_model
};

// Solver controls. The group prior is never a free parameter: it is fixed to
// the empirical group marginal at initialization and left untouched.
struct FitConfig {
    std::size_t k = 1;
    std::size_t max_iters = 500;
    double rel_tol = 1e-8;
    std::uint64_t seed = 0;
    InitKind init = InitKind::random_dirichlet;
    std::optional<PlcaModel> initial_model;
    bool record_trace = true;
};

enum class Termination {
    converged,
    max_iters,
    degenerate,
};

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::converged: return "converged";
        case Termination::max_iters: return "max-iters";
        case Termination::degenerate: return "degenerate";
    }
    return "unknown";
}

struct IterationRecord {
    std::size_t iter = 0;  // 1-based step count
    double fobj = 0.0;
    double kld = 0.0;
    double max_param_delta = 0.0;
    double wall_ms = 0.0;
};

// A latent class whose total responsibility mass vanished at some step; its
// profile was reset to uniform and its mixture weights zeroed.
struct DeadClassEvent {
    std::size_t iter = 0;
    std::size_t latent = 0;
};

struct FitTrace {
    std::vector<IterationRecord> records;
    Termination termination = Termination::max_iters;
    std::vector<DeadClassEvent> dead_classes;
};

struct FitResult {
    PlcaModel model;
    FitTrace trace;
};

namespace detail {

inline void validate_config(const FitConfig& cfg) {
    if (cfg.k == 0) {
        throw ValidationError("FitConfig: k must be at least 1");
    }
    if (cfg.max_iters == 0) {
        throw ValidationError("FitConfig: max_iters must be at least 1");
    }
    if (!(cfg.rel_tol > 0.0)) {
        throw ValidationError("FitConfig: rel_tol must be positive");
    }
    if (cfg.init == InitKind::provided_model && !cfg.initial_model.has_value()) {
        throw ValidationError("FitConfig: provided_model initialization without a model");
    }
}

struct EmStepInfo {
    std::vector<std::size_t> dead_classes;
    bool all_dead = false;
};

// One E+M pass, streamed cell by cell so the K x M x N responsibility table
// is never materialized. Accumulation order is fixed (g outer, e inner, z
// innermost), keeping iterates reproducible across runs.
inline PlcaModel em_step_impl(const EmpiricalDistribution& pi, const PlcaModel& model,
                              EmStepInfo* info) {
    check_same_dims(pi, model);
    const std::size_t m = model.events();
    const std::size_t n = model.groups();
    const std::size_t k = model.classes();
    const Matrix& table = pi.table();
    const Matrix& comp = model.components();
    const Matrix& mix = model.mixture();
    const double uniform_resp = 1.0 / static_cast<double>(k);

    Matrix comp_num(m, k, 0.0);   // sum_g pi(e,g) P(z|e,g)
    Matrix mix_new(k, n, 0.0);
    std::vector<double> cell_resp(k, 0.0);
    std::vector<double> mix_num(k, 0.0);

    for (std::size_t g = 0; g < n; ++g) {
        for (std::size_t z = 0; z < k; ++z) {
            mix_num[z] = 0.0;
        }
        for (std::size_t e = 0; e < m; ++e) {
            const double w = table(e, g);
            if (w <= 0.0) {
                continue;
            }
            double den = 0.0;
            for (std::size_t z = 0; z < k; ++z) {
                const double v = comp(e, z) * mix(z, g);
                cell_resp[z] = v;
                den += v;
            }
            if (den > 0.0) {
                for (std::size_t z = 0; z < k; ++z) {
                    cell_resp[z] /= den;
                }
            } else {
                for (std::size_t z = 0; z < k; ++z) {
                    cell_resp[z] = uniform_resp;
                }
            }
            for (std::size_t z = 0; z < k; ++z) {
                const double r = w * cell_resp[z];
                comp_num(e, z) += r;
                mix_num[z] += r;
            }
        }
        double group_mass = 0.0;
        for (std::size_t z = 0; z < k; ++z) {
            group_mass += mix_num[z];
        }
        if (group_mass > 0.0) {
            for (std::size_t z = 0; z < k; ++z) {
                mix_new(z, g) = mix_num[z] / group_mass;
            }
        } else {
            // Zero-mass group: the update is 0/0, so the column keeps its
            // current value and contributes nothing to the objective.
            for (std::size_t z = 0; z < k; ++z) {
                mix_new(z, g) = mix(z, g);
            }
        }
    }

    Matrix comp_new(m, k, 0.0);
    std::vector<std::uint8_t> dead(k, 0);
    std::size_t dead_count = 0;
    for (std::size_t z = 0; z < k; ++z) {
        double class_mass = 0.0;
        for (std::size_t e = 0; e < m; ++e) {
            class_mass += comp_num(e, z);
        }
        if (class_mass > 0.0) {
            for (std::size_t e = 0; e < m; ++e) {
                comp_new(e, z) = comp_num(e, z) / class_mass;
            }
        } else {
            dead[z] = 1;
            ++dead_count;
            const double uniform = 1.0 / static_cast<double>(m);
            for (std::size_t e = 0; e < m; ++e) {
                comp_new(e, z) = uniform;
            }
            if (info != nullptr) {
                info->dead_classes.push_back(z);
            }
        }
    }

    if (dead_count == k) {
        // No class received any responsibility mass; there is nothing to
        // re-estimate. The caller stops with a degenerate termination.
        if (info != nullptr) {
            info->all_dead = true;
        }
        return model;
    }

    if (dead_count > 0) {
        // Dead classes are removed from every mixture column; the survivors
        // are rescaled (uniformly redistributed if the column had no mass on
        // any survivor).
        for (std::size_t g = 0; g < n; ++g) {
            double alive_mass = 0.0;
            for (std::size_t z = 0; z < k; ++z) {
                if (dead[z]) {
                    mix_new(z, g) = 0.0;
                } else {
                    alive_mass += mix_new(z, g);
                }
            }
            if (alive_mass > 0.0) {
                for (std::size_t z = 0; z < k; ++z) {
                    if (!dead[z]) {
                        mix_new(z, g) /= alive_mass;
                    }
                }
            } else {
                const double uniform = 1.0 / static_cast<double>(k - dead_count);
                for (std::size_t z = 0; z < k; ++z) {
                    if (!dead[z]) {
                        mix_new(z, g) = uniform;
                    }
                }
            }
        }
    }

    return PlcaModel(model.group_prior(), std::move(mix_new), std::move(comp_new));
}

inline double max_param_delta(const PlcaModel& a, const PlcaModel& b) {
    double delta = 0.0;
    const auto da = a.mixture().data();
    const auto db = b.mixture().data();
    for (std::size_t i = 0; i < da.size(); ++i) {
        delta = std::max(delta, std::abs(da[i] - db[i]));
    }
    const auto ca = a.components().data();
    const auto cb = b.components().data();
    for (std::size_t i = 0; i < ca.size(); ++i) {
        delta = std::max(delta, std::abs(ca[i] - cb[i]));
    }
    return delta;
}

}  // namespace detail

// Starting point for the solver: the group prior is the empirical group
// marginal (taken verbatim; it is already normalized), and every mixture and
// components column is an independent Dirichlet(1) draw. Draw order is fixed
// and documented: mixture columns g = 0..N-1 first, then components columns
// z = 0..K-1, each consuming one exponential variate per entry, so a seed
// pins the entire model.
inline PlcaModel init_model(const EmpiricalDistribution& pi, const FitConfig& cfg) {
    detail::validate_config(cfg);
    const std::size_t m = pi.events();
    const std::size_t n = pi.groups();
    const std::size_t k = cfg.k;

    SeededRng rng(cfg.seed);
    Matrix mixture(k, n);
    std::vector<double> column(k);
    for (std::size_t g = 0; g < n; ++g) {
        rng.dirichlet1(column);
        for (std::size_t z = 0; z < k; ++z) {
            mixture(z, g) = column[z];
        }
    }
    Matrix components(m, k);
    std::vector<double> event_column(m);
    for (std::size_t z = 0; z < k; ++z) {
        rng.dirichlet1(event_column);
        for (std::size_t e = 0; e < m; ++e) {
            components(e, z) = event_column[e];
        }
    }
    return PlcaModel(pi.group_marginal(), std::move(mixture), std::move(components));
}

// One EM update: responsibilities from the current parameters, then the
// closed-form re-estimation
//   P(e|z) <- sum_g pi(e,g) P(z|e,g) / sum_{e',g} pi(e',g) P(z|e',g)
//   P(z|g) <- sum_e pi(e,g) P(z|e,g) / sum_{z',e} pi(e,g) P(z'|e,g)
// The group prior is untouched. Guarantees fobj does not increase.
inline PlcaModel em_step(const EmpiricalDistribution& pi, const PlcaModel& model) {
    return detail::em_step_impl(pi, model, nullptr);
}

// Runs EM from the configured start until the relative objective improvement
// drops below rel_tol or max_iters is reached. The trace records fobj, kld,
// the largest parameter change and wall time for every step taken.
inline FitResult fit(const EmpiricalDistribution& pi, const FitConfig& cfg) {
    detail::validate_config(cfg);

    PlcaModel model = [&]() -> PlcaModel {
        if (cfg.init == InitKind::provided_model) {
            const PlcaModel& given = *cfg.initial_model;
            if (given.events() != pi.events() || given.groups() != pi.groups()) {
                throw ShapeError("initial model is " + std::to_string(given.events()) + "x" +
                                 std::to_string(given.groups()) + " but data is " +
                                 std::to_string(pi.events()) + "x" +
                                 std::to_string(pi.groups()));
            }
            if (given.classes() != cfg.k) {
                throw ShapeError("initial model has " + std::to_string(given.classes()) +
                                 " classes but the configuration asks for " +
                                 std::to_string(cfg.k));
            }
            // The prior is not part of the optimization problem; it is pinned
            // to the empirical marginal even for a provided start.
            return PlcaModel(pi.group_marginal(), given.mixture(), given.components());
        }
        return init_model(pi, cfg);
    }();

    FitTrace trace;
    double prev_fobj = fobj(pi, model);

    for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
        const auto start = std::chrono::steady_clock::now();
        detail::EmStepInfo info;
        PlcaModel next = detail::em_step_impl(pi, model, &info);
        const double f = fobj(pi, next);
        const double d = kld(pi, next);
        const double delta = detail::max_param_delta(model, next);
        const auto stop = std::chrono::steady_clock::now();
        const double wall_ms =
            std::chrono::duration<double, std::milli>(stop - start).count();

        for (std::size_t z : info.dead_classes) {
            trace.dead_classes.push_back({iter, z});
        }
        if (cfg.record_trace) {
            trace.records.push_back({iter, f, d, delta, wall_ms});
        }

        if (info.all_dead) {
            trace.termination = Termination::degenerate;
            return {std::move(next), std::move(trace)};
        }

        model = std::move(next);
        if (std::abs(f - prev_fobj) <= cfg.rel_tol * std::max(1.0, std::abs(prev_fobj))) {
            trace.termination = Termination::converged;
            return {std::move(model), std::move(trace)};
        }
        prev_fobj = f;
    }

    trace.termination = Termination::max_iters;
    return {std::move(model), std::move(trace)};
}

}  // namespace plca
