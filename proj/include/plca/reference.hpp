#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "plca/empirical.hpp"
#include "plca/error.hpp"
#include "plca/matrix.hpp"
#include "plca/model.hpp"
#include "plca/objective.hpp"

// Brute-force oracles. These exist to check the solver and the objective from
// an independent direction at desk scale; the CLI exposes them behind
// `eval --oracle`.
namespace plca::reference {

namespace detail {

inline std::string format_count(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// All lattice points of the (dim-1)-simplex with steps of 1/resolution, in
// lexicographic order of the underlying integer compositions.
inline std::vector<std::vector<double>> simplex_lattice(std::size_t dim,
                                                        std::size_t resolution) {
    std::vector<std::vector<double>> points;
    std::vector<std::size_t> parts(dim, 0);
    const double step = 1.0 / static_cast<double>(resolution);

    auto emit = [&]() {
        std::vector<double> p(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            p[i] = static_cast<double>(parts[i]) * step;
        }
        points.push_back(std::move(p));
    };

    // Iterative composition enumeration: position i takes 0..remaining, the
    // final position absorbs the rest.
    std::vector<std::size_t> stack;
    std::size_t pos = 0;
    std::size_t remaining = resolution;
    while (true) {
        if (pos + 1 == dim) {
            parts[pos] = remaining;
            emit();
            // backtrack to the last position that can still grow
            while (pos > 0) {
                --pos;
                remaining += parts[pos];
                if (parts[pos] < remaining) {
                    ++parts[pos];
                    remaining -= parts[pos];
                    ++pos;
                    break;
                }
                parts[pos] = 0;
            }
            if (pos == 0) {
                break;
            }
        } else {
            parts[pos] = 0;
            ++pos;
        }
    }
    return points;
}

inline double lattice_size(std::size_t dim, std::size_t resolution) {
    // C(resolution + dim - 1, dim - 1) in floating point; the limit check
    // only needs magnitude.
    double c = 1.0;
    for (std::size_t i = 1; i < dim; ++i) {
        c *= static_cast<double>(resolution + i) / static_cast<double>(i);
    }
    return c;
}

}  // namespace detail

struct GridSearchResult {
    PlcaModel model;
    double fobj = 0.0;
};

inline constexpr double kGridPointLimit = 1e7;

// Exhaustive minimization of the objective over simplex lattices: every
// components column ranges over the M-simplex lattice and every mixture
// column over the K-simplex lattice, both with steps of 1/resolution.
//
// For a fixed components configuration the objective is a sum of independent
// per-group terms, so each group's mixture column is minimized on its own
// lattice sweep; the minimum found equals the minimum over the full product
// grid. The enumerated space is therefore
//     points = |M-lattice|^K * |K-lattice|
// and requests with points > 1e7 are rejected. Ties keep the first candidate
// in lexicographic lattice order, making the result deterministic.
inline GridSearchResult grid_search_fobj(const EmpiricalDistribution& pi, std::size_t k,
                                         std::size_t resolution) {
    if (k == 0) {
        throw ValidationError("grid_search_fobj: k must be at least 1");
    }
    if (resolution == 0) {
        throw ValidationError("grid_search_fobj: resolution must be at least 1");
    }
    const std::size_t m = pi.events();
    const std::size_t n = pi.groups();
    const double comp_lattice_size = detail::lattice_size(m, resolution);
    const double mix_lattice_size = detail::lattice_size(k, resolution);
    const double points = std::pow(comp_lattice_size, static_cast<double>(k)) *
                          mix_lattice_size;
    if (!(points <= kGridPointLimit)) {
        throw SearchSpaceError("grid_search_fobj: search space has " +
                               detail::format_count(points) +
                               " lattice points (components^k x mixture column), limit " +
                               detail::format_count(kGridPointLimit));
    }

    const auto comp_lattice = detail::simplex_lattice(m, resolution);
    const auto mix_lattice = detail::simplex_lattice(k, resolution);
    const double inf = std::numeric_limits<double>::infinity();
    const Matrix& table = pi.table();

    std::vector<std::size_t> comp_idx(k, 0);
    std::vector<std::size_t> mix_choice(n, 0);
    std::vector<std::size_t> best_comp_idx(k, 0);
    std::vector<std::size_t> best_mix_choice(n, 0);
    double best_total = inf;
    bool found = false;
    std::vector<const std::vector<double>*> cols(k);

    while (true) {
        for (std::size_t z = 0; z < k; ++z) {
            cols[z] = &comp_lattice[comp_idx[z]];
        }
        double total = 0.0;
        for (std::size_t g = 0; g < n; ++g) {
            double best_g = inf;
            std::size_t best_m = 0;
            for (std::size_t mi = 0; mi < mix_lattice.size(); ++mi) {
                const std::vector<double>& mp = mix_lattice[mi];
                double cost = 0.0;
                for (std::size_t e = 0; e < m; ++e) {
                    const double w = table(e, g);
                    if (w <= 0.0) {
                        continue;
                    }
                    double s = 0.0;
                    for (std::size_t z = 0; z < k; ++z) {
                        s += (*cols[z])[e] * mp[z];
                    }
                    if (s <= 0.0) {
                        cost = inf;
                        break;
                    }
                    cost -= w * std::log(s);
                }
                if (cost < best_g) {
                    best_g = cost;
                    best_m = mi;
                }
            }
            mix_choice[g] = best_m;
            total += best_g;
        }
        if (!found || total < best_total) {
            found = true;
            best_total = total;
            best_comp_idx = comp_idx;
            best_mix_choice = mix_choice;
        }

        // odometer over components configurations, last column fastest
        bool exhausted = false;
        std::size_t pos = k;
        while (true) {
            if (pos == 0) {
                exhausted = true;
                break;
            }
            --pos;
            if (++comp_idx[pos] < comp_lattice.size()) {
                break;
            }
            comp_idx[pos] = 0;
        }
        if (exhausted) {
            break;
        }
    }

    Matrix components(m, k);
    for (std::size_t z = 0; z < k; ++z) {
        const std::vector<double>& col = comp_lattice[best_comp_idx[z]];
        for (std::size_t e = 0; e < m; ++e) {
            components(e, z) = col[e];
        }
    }
    Matrix mixture(k, n);
    for (std::size_t g = 0; g < n; ++g) {
        const std::vector<double>& col = mix_lattice[best_mix_choice[g]];
        for (std::size_t z = 0; z < k; ++z) {
            mixture(z, g) = col[z];
        }
    }
    PlcaModel model(pi.group_marginal(), std::move(mixture), std::move(components));
    // Report the official objective of the winning model so the value is
    // consistent with plca::fobj to the last bit.
    const double value = fobj(pi, model);
    return {std::move(model), value};
}

// Plain triple-loop objective with naive summation; deliberately a separate
// code path from plca::fobj.
inline double naive_fobj(const EmpiricalDistribution& pi, const PlcaModel& model) {
    plca::detail::check_same_dims(pi, model);
    const Matrix& table = pi.table();
    const Matrix& comp = model.components();
    const Matrix& mix = model.mixture();
    double total = 0.0;
    for (std::size_t e = 0; e < pi.events(); ++e) {
        for (std::size_t g = 0; g < pi.groups(); ++g) {
            const double w = table(e, g);
            if (w <= 0.0) {
                continue;
            }
            double s = 0.0;
            for (std::size_t z = 0; z < model.classes(); ++z) {
                s += comp(e, z) * mix(z, g);
            }
            if (s <= 0.0) {
                return std::numeric_limits<double>::infinity();
            }
            total -= w * std::log(s);
        }
    }
    return total;
}

}  // namespace plca::reference
