#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "plca/error.hpp"
#include "plca/matrix.hpp"

namespace plca {

// Normalized non-negative table pi(e, g) over events x groups, total mass 1,
// with the group marginal pi(g) = sum_e pi(e, g) cached. Built from raw
// observed counts or magnitudes via build_empirical.
class EmpiricalDistribution {
public:
    const Matrix& table() const { return table_; }
    const std::vector<double>& group_marginal() const { return group_marginal_; }

    std::size_t events() const { return table_.rows(); }
    std::size_t groups() const { return table_.cols(); }

    friend EmpiricalDistribution build_empirical(const Matrix& raw);

private:
    EmpiricalDistribution(Matrix table, std::vector<double> group_marginal)
        : table_(std::move(table)), group_marginal_(std::move(group_marginal)) {}

    Matrix table_;
    std::vector<double> group_marginal_;
};

// Normalizes a non-negative matrix to total mass 1. Rejects negative or
// non-finite entries (naming the cell) and the all-zero matrix. The total is
// accumulated in g-major order with compensation, matching the objective
// conventions.
inline EmpiricalDistribution build_empirical(const Matrix& raw) {
    if (raw.rows() == 0 || raw.cols() == 0) {
        throw ValidationError("build_empirical: empty matrix");
    }
    KahanSum total;
    for (std::size_t g = 0; g < raw.cols(); ++g) {
        for (std::size_t e = 0; e < raw.rows(); ++e) {
            const double v = raw(e, g);
            if (!std::isfinite(v)) {
                throw ValidationError("build_empirical: non-finite entry at (" +
                                      std::to_string(e) + ", " + std::to_string(g) + ")");
            }
            if (v < 0.0) {
                throw ValidationError("build_empirical: negative entry " + std::to_string(v) +
                                      " at (" + std::to_string(e) + ", " + std::to_string(g) +
                                      ")");
            }
            total.add(v);
        }
    }
    const double mass = total.value();
    if (mass <= 0.0) {
        throw ValidationError("build_empirical: matrix has zero total mass");
    }

    Matrix table(raw.rows(), raw.cols());
    for (std::size_t e = 0; e < raw.rows(); ++e) {
        for (std::size_t g = 0; g < raw.cols(); ++g) {
            table(e, g) = raw(e, g) / mass;
        }
    }
    std::vector<double> marginal(raw.cols(), 0.0);
    for (std::size_t g = 0; g < raw.cols(); ++g) {
        double s = 0.0;
        for (std::size_t e = 0; e < raw.rows(); ++e) {
            s += table(e, g);
        }
        marginal[g] = s;
    }
    return EmpiricalDistribution(std::move(table), std::move(marginal));
}

}  // namespace plca
