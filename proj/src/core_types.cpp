#include "nscreen/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nscreen {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::ZeroColumn: return "ZeroColumn";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::NonPositiveLambda: return "NonPositiveLambda";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::SingularSystem: return "SingularSystem";
        case ErrorKind::DegenerateResponse: return "DegenerateResponse";
        case ErrorKind::EmptyPath: return "EmptyPath";
        case ErrorKind::SingularNewtonSystem: return "SingularNewtonSystem";
        case ErrorKind::InvalidRho: return "InvalidRho";
        case ErrorKind::InvalidDimensions: return "InvalidDimensions";
        case ErrorKind::InvalidT: return "InvalidT";
        case ErrorKind::ZeroTruth: return "ZeroTruth";
    }
    return "Unknown";
}

DesignMatrix DesignMatrix::normalize_columns(const Matrix& raw) {
    if (raw.rows() < 1 || raw.cols() < 1) {
        throw Error(ErrorKind::InvalidDimensions, "design matrix must be at least 1x1");
    }
    if (!raw.allFinite()) {
        throw Error(ErrorKind::InvalidDimensions, "design matrix has non-finite entries");
    }
    const double root_n = std::sqrt(static_cast<double>(raw.rows()));
    Matrix values = raw;
    Vector scales(raw.cols());
    for (Index j = 0; j < raw.cols(); ++j) {
        const double norm = raw.col(j).norm();
        if (!(norm > 1e-300)) {
            throw Error(ErrorKind::ZeroColumn, "column " + std::to_string(j) + " has zero norm");
        }
        scales[j] = norm / root_n;
        values.col(j) /= scales[j];
    }
    return DesignMatrix(std::move(values), std::move(scales));
}

Vector DesignMatrix::to_raw_scale(const Vector& beta_normalized) const {
    if (beta_normalized.size() != p()) {
        throw Error(ErrorKind::DimensionMismatch, "coefficient length differs from p");
    }
    return beta_normalized.cwiseQuotient(column_scales_);
}

Vector DesignMatrix::to_normalized_scale(const Vector& beta_raw) const {
    if (beta_raw.size() != p()) {
        throw Error(ErrorKind::DimensionMismatch, "coefficient length differs from p");
    }
    return beta_raw.cwiseProduct(column_scales_);
}

WorkingSet::WorkingSet(std::vector<Index> indices, Index p) : indices_(std::move(indices)), p_(p) {
    for (std::size_t k = 0; k < indices_.size(); ++k) {
        const Index j = indices_[k];
        if (j < 0 || j >= p_ || (k > 0 && indices_[k - 1] >= j)) {
            throw Error(ErrorKind::InvalidDimensions, "working set indices must be sorted, unique and < p");
        }
    }
}

WorkingSet WorkingSet::all(Index p) {
    std::vector<Index> idx(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) idx[static_cast<std::size_t>(j)] = j;
    return WorkingSet(std::move(idx), p);
}

bool WorkingSet::contains(Index j) const {
    return std::binary_search(indices_.begin(), indices_.end(), j);
}

std::vector<Index> WorkingSet::complement() const {
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(p_ - size()));
    auto it = indices_.begin();
    for (Index j = 0; j < p_; ++j) {
        if (it != indices_.end() && *it == j) {
            ++it;
        } else {
            out.push_back(j);
        }
    }
    return out;
}

void PrimalDualState::validate() const {
    if (beta.size() != d.size()) {
        throw Error(ErrorKind::DimensionMismatch, "beta and d lengths differ");
    }
    if (!(lambda > 0.0)) {
        throw Error(ErrorKind::NonPositiveLambda, "lambda must be positive");
    }
    if (!(lambda_bar >= 0.0 && lambda_bar < lambda)) {
        throw Error(ErrorKind::InvalidConfig, "lambda_bar must lie in [0, lambda)");
    }
}

Vector xty_over_n(const DesignMatrix& X, const Vector& v) {
    if (v.size() != X.n()) {
        throw Error(ErrorKind::DimensionMismatch, "vector length differs from n");
    }
    return (X.values().transpose() * v) / static_cast<double>(X.n());
}

Vector restricted_apply(const DesignMatrix& X, const WorkingSet& A, const Vector& u) {
    if (u.size() != A.size()) {
        throw Error(ErrorKind::DimensionMismatch, "vector length differs from |A|");
    }
    Vector out = Vector::Zero(X.n());
    for (Index k = 0; k < A.size(); ++k) {
        out.noalias() += u[k] * X.col(A.indices()[static_cast<std::size_t>(k)]);
    }
    return out;
}

Vector restricted_gram_apply(const DesignMatrix& X, const WorkingSet& A, const Vector& u) {
    const Vector xu = restricted_apply(X, A, u);
    Vector out(A.size());
    const double inv_n = 1.0 / static_cast<double>(X.n());
    for (Index k = 0; k < A.size(); ++k) {
        out[k] = X.col(A.indices()[static_cast<std::size_t>(k)]).dot(xu) * inv_n;
    }
    return out;
}

Matrix gather_columns(const DesignMatrix& X, const WorkingSet& A) {
    Matrix out(X.n(), A.size());
    for (Index k = 0; k < A.size(); ++k) {
        out.col(k) = X.col(A.indices()[static_cast<std::size_t>(k)]);
    }
    return out;
}

Index count_nonzero(const Vector& v, double threshold) {
    return (v.array().abs() > threshold).count();
}

WorkingSet support_of(const Vector& v, double threshold) {
    std::vector<Index> idx;
    for (Index j = 0; j < v.size(); ++j) {
        if (std::abs(v[j]) > threshold) idx.push_back(j);
    }
    return WorkingSet(std::move(idx), v.size());
}

}  // namespace nscreen
