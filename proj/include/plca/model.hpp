#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "plca/error.hpp"
#include "plca/matrix.hpp"

namespace plca {

namespace detail {

// Shared column validation for stochastic parameters. Accepts columns whose
// sum is within `tol` of 1, clamps negative round-off (>= -tol) to zero, and
// rescales by the exact column sum. Columns already normalized to 1e-13 are
// kept bit-for-bit, so freshly renormalized or deserialized parameters pass
// through unchanged.
inline constexpr double kStochasticTol = 1e-9;
inline constexpr double kRenormSkipTol = 1e-13;

template <typename Get, typename Set>
void normalize_distribution(std::size_t n, Get get, Set set, const std::string& what) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double v = get(i);
        if (!std::isfinite(v)) {
            throw ValidationError(what + ": non-finite entry at index " + std::to_string(i));
        }
        if (v < 0.0) {
            if (v < -kStochasticTol) {
                throw ValidationError(what + ": negative entry " + std::to_string(v) +
                                      " at index " + std::to_string(i));
            }
            v = 0.0;
            set(i, v);
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > kStochasticTol) {
        throw ValidationError(what + ": entries sum to " + std::to_string(sum) +
                              ", expected 1");
    }
    if (std::abs(sum - 1.0) > kRenormSkipTol) {
        for (std::size_t i = 0; i < n; ++i) {
            set(i, get(i) / sum);
        }
    }
}

inline void normalize_vector(std::vector<double>& v, const std::string& what) {
    normalize_distribution(
        v.size(), [&](std::size_t i) { return v[i]; },
        [&](std::size_t i, double x) { v[i] = x; }, what);
}

inline void normalize_columns(Matrix& m, const std::string& what) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
        normalize_distribution(
            m.rows(), [&](std::size_t r) { return m(r, c); },
            [&](std::size_t r, double x) { m(r, c) = x; },
            what + " column " + std::to_string(c));
    }
}

}  // namespace detail

// The latent-class factorization parameters:
//   group_prior  P(g)   length N
//   mixture      P(z|g) K x N, every column a distribution over classes
//   components   P(e|z) M x K, every column a distribution over events
//
// Construction validates the stochastic constraints (tolerance 1e-9) and
// renormalizes, after which the object is immutable; concurrent reads are
// safe.
class PlcaModel {
public:
    PlcaModel(std::vector<double> group_prior, Matrix mixture, Matrix components)
        : group_prior_(std::move(group_prior)),
          mixture_(std::move(mixture)),
          components_(std::move(components)) {
        const std::size_t n = group_prior_.size();
        const std::size_t k = mixture_.rows();
        const std::size_t m = components_.rows();
        if (m == 0 || n == 0 || k == 0) {
            throw ValidationError("PlcaModel: dimensions must be positive");
        }
        if (mixture_.cols() != n) {
            throw ShapeError("PlcaModel: mixture has " + std::to_string(mixture_.cols()) +
                             " columns, group_prior has " + std::to_string(n) + " entries");
        }
        if (components_.cols() != k) {
            throw ShapeError("PlcaModel: components has " +
                             std::to_string(components_.cols()) + " columns, mixture has " +
                             std::to_string(k) + " rows");
        }
        detail::normalize_vector(group_prior_, "group_prior");
        detail::normalize_columns(mixture_, "mixture");
        detail::normalize_columns(components_, "components");
    }

    const std::vector<double>& group_prior() const { return group_prior_; }
    const Matrix& mixture() const { return mixture_; }
    const Matrix& components() const { return components_; }

    std::size_t events() const { return components_.rows(); }
    std::size_t groups() const { return group_prior_.size(); }
    std::size_t classes() const { return mixture_.rows(); }

private:
    std::vector<double> group_prior_;
    Matrix mixture_;
    Matrix components_;
};

// Per-cell responsibilities: at(z, e, g) holds the posterior probability of
// class z given the pair (e, g). Cells whose mixture mass vanishes entirely
// carry a uniform 1/K posterior and are flagged degenerate.
class PosteriorTable {
public:
    PosteriorTable(std::size_t classes, std::size_t events, std::size_t groups)
        : classes_(classes),
          events_(events),
          groups_(groups),
          values_(classes * events * groups, 0.0),
          degenerate_(events * groups, 0) {}

    double at(std::size_t z, std::size_t e, std::size_t g) const {
        return values_[(e * groups_ + g) * classes_ + z];
    }
    double& at(std::size_t z, std::size_t e, std::size_t g) {
        return values_[(e * groups_ + g) * classes_ + z];
    }

    bool degenerate(std::size_t e, std::size_t g) const {
        return degenerate_[e * groups_ + g] != 0;
    }
    void mark_degenerate(std::size_t e, std::size_t g) { degenerate_[e * groups_ + g] = 1; }

    bool any_degenerate() const {
        for (auto f : degenerate_) {
            if (f) return true;
        }
        return false;
    }

    std::size_t classes() const { return classes_; }
    std::size_t events() const { return events_; }
    std::size_t groups() const { return groups_; }

private:
    std::size_t classes_;
    std::size_t events_;
    std::size_t groups_;
    std::vector<double> values_;
    std::vector<std::uint8_t> degenerate_;
};

namespace detail {

inline void check_indices(const PlcaModel& model, std::size_t e, std::size_t g) {
    if (e >= model.events()) {
        throw IndexError("event index " + std::to_string(e) + " out of range [0, " +
                         std::to_string(model.events()) + ")");
    }
    if (g >= model.groups()) {
        throw IndexError("group index " + std::to_string(g) + " out of range [0, " +
                         std::to_string(model.groups()) + ")");
    }
}

}  // namespace detail

// P(e|g) = sum_z P(e|z) P(z|g).
inline double conditional_e_given_g(const PlcaModel& model, std::size_t e, std::size_t g) {
    detail::check_indices(model, e, g);
    const Matrix& comp = model.components();
    const Matrix& mix = model.mixture();
    double s = 0.0;
    for (std::size_t z = 0; z < model.classes(); ++z) {
        s += comp(e, z) * mix(z, g);
    }
    return s;
}

// P(e,g) = P(g) P(e|g); written as that exact product so the factorization
// identity holds bit-for-bit.
inline double joint_prob(const PlcaModel& model, std::size_t e, std::size_t g) {
    detail::check_indices(model, e, g);
    return model.group_prior()[g] * conditional_e_given_g(model, e, g);
}

// Responsibilities P(z|e,g) = P(e|z)P(z|g) / sum_z' P(e|z')P(z'|g) for every
// cell. A zero denominator yields the uniform posterior and a degenerate
// flag; such cells can only matter when the empirical mass there is zero, in
// which case they never influence an update.
inline PosteriorTable posterior(const PlcaModel& model) {
    const std::size_t m = model.events();
    const std::size_t n = model.groups();
    const std::size_t k = model.classes();
    const Matrix& comp = model.components();
    const Matrix& mix = model.mixture();

    PosteriorTable table(k, m, n);
    for (std::size_t e = 0; e < m; ++e) {
        for (std::size_t g = 0; g < n; ++g) {
            double den = 0.0;
            for (std::size_t z = 0; z < k; ++z) {
                const double v = comp(e, z) * mix(z, g);
                table.at(z, e, g) = v;
                den += v;
            }
            if (den > 0.0) {
                for (std::size_t z = 0; z < k; ++z) {
                    table.at(z, e, g) /= den;
                }
            } else {
                const double uniform = 1.0 / static_cast<double>(k);
                for (std::size_t z = 0; z < k; ++z) {
                    table.at(z, e, g) = uniform;
                }
                table.mark_degenerate(e, g);
            }
        }
    }
    return table;
}

}  // namespace plca
