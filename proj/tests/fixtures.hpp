#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "nscreen/core_types.hpp"
#include "nscreen/simgen.hpp"

namespace nscreen::testing {

inline Matrix gaussian_matrix(Index n, Index p, sim::Rng& rng) {
    Matrix m(n, p);
    for (Index j = 0; j < p; ++j) {
        for (Index i = 0; i < n; ++i) m(i, j) = rng.normal();
    }
    return m;
}

inline Vector gaussian_vector(Index n, sim::Rng& rng) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = rng.normal();
    return v;
}

inline double uniform(sim::Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * rng.uniform01();
}

inline Index uniform_int(sim::Rng& rng, Index lo, Index hi) {
    return lo + static_cast<Index>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

inline DesignMatrix random_design(Index n, Index p, sim::Rng& rng) {
    return DesignMatrix::normalize_columns(gaussian_matrix(n, p, rng));
}

/// sqrt(n) * I_n, already normalized.
inline DesignMatrix scaled_identity(Index n) {
    return DesignMatrix::normalize_columns(std::sqrt(static_cast<double>(n)) * Matrix::Identity(n, n));
}

struct Problem {
    DesignMatrix X;
    Vector y;
    Vector beta_true;
};

/// Gaussian design with a T-sparse signal of magnitude in [1, 3] and noise sigma.
inline Problem sparse_problem(Index n, Index p, Index T, double sigma, sim::Rng& rng) {
    DesignMatrix X = random_design(n, p, rng);
    Vector beta = Vector::Zero(p);
    std::vector<Index> idx(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) idx[static_cast<std::size_t>(j)] = j;
    for (Index k = 0; k < T; ++k) {
        const Index pick = uniform_int(rng, k, p - 1);
        std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(pick)]);
        const double mag = uniform(rng, 1.0, 3.0);
        beta[idx[static_cast<std::size_t>(k)]] = rng.coin() ? mag : -mag;
    }
    Vector y = X.values() * beta + sigma * gaussian_vector(n, rng);
    return {std::move(X), std::move(y), std::move(beta)};
}

/// Largest |a_i - b_i|.
inline double max_abs_diff(const Vector& a, const Vector& b) {
    return (a - b).lpNorm<Eigen::Infinity>();
}

}  // namespace nscreen::testing
