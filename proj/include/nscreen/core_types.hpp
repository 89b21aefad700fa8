#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "nscreen/errors.hpp"

namespace nscreen {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Immutable n x p design with every column scaled to Euclidean length sqrt(n).
///
/// column_scales()[j] is the original column norm divided by sqrt(n), so a
/// coefficient fitted on the normalized matrix maps back to the raw design as
/// beta_raw[j] = beta_norm[j] / column_scales()[j].
class DesignMatrix {
public:
    /// Throws Error(ZeroColumn) if some column has norm <= 1e-300 and
    /// Error(InvalidDimensions) on an empty or non-finite matrix.
    static DesignMatrix normalize_columns(const Matrix& raw);

    Index n() const noexcept { return values_.rows(); }
    Index p() const noexcept { return values_.cols(); }
    const Matrix& values() const noexcept { return values_; }
    const Vector& column_scales() const noexcept { return column_scales_; }
    auto col(Index j) const { return values_.col(j); }

    Vector to_raw_scale(const Vector& beta_normalized) const;
    Vector to_normalized_scale(const Vector& beta_raw) const;

private:
    DesignMatrix(Matrix values, Vector scales)
        : values_(std::move(values)), column_scales_(std::move(scales)) {}

    Matrix values_;
    Vector column_scales_;
};

/// Sorted, duplicate-free subset of {0, ..., p-1}.
class WorkingSet {
public:
    WorkingSet() = default;
    /// Throws Error(InvalidDimensions) unless indices are strictly increasing and < p.
    WorkingSet(std::vector<Index> indices, Index p);

    static WorkingSet all(Index p);

    const std::vector<Index>& indices() const noexcept { return indices_; }
    Index p() const noexcept { return p_; }
    Index size() const noexcept { return static_cast<Index>(indices_.size()); }
    bool empty() const noexcept { return indices_.empty(); }
    bool contains(Index j) const;

    /// Indices of {0..p-1} not in the set, ascending.
    std::vector<Index> complement() const;

    friend bool operator==(const WorkingSet& a, const WorkingSet& b) {
        return a.p_ == b.p_ && a.indices_ == b.indices_;
    }

private:
    std::vector<Index> indices_;
    Index p_ = 0;
};

struct PrimalDualState {
    Vector beta;
    Vector d;
    double lambda = 0.0;
    double lambda_bar = 0.0;

    /// Checks len(beta) == len(d), lambda > 0 and 0 <= lambda_bar < lambda.
    void validate() const;
};

/// X^T v / n.
Vector xty_over_n(const DesignMatrix& X, const Vector& v);

/// (X_A^T X_A / n) u evaluated as X_A^T (X_A u) / n.
Vector restricted_gram_apply(const DesignMatrix& X, const WorkingSet& A, const Vector& u);

/// n x |A| copy of the columns listed in A.
Matrix gather_columns(const DesignMatrix& X, const WorkingSet& A);

/// X_A u, length n.
Vector restricted_apply(const DesignMatrix& X, const WorkingSet& A, const Vector& u);

/// Number of entries with |v_i| > threshold.
Index count_nonzero(const Vector& v, double threshold = 0.0);

/// Indices with |v_i| > threshold.
WorkingSet support_of(const Vector& v, double threshold = 0.0);

}  // namespace nscreen
