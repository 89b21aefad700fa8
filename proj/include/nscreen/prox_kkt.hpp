#pragma once

#include "nscreen/core_types.hpp"

namespace nscreen {

struct KktReport {
    double residual_inf = 0.0;      // ||beta - soft_threshold(beta + d, lambda)||_inf
    double dual_feasibility = 0.0;  // max(0, max_{beta_i == 0} |d_i| - lambda)
    double objective = 0.0;
};

/// Componentwise shrinkage; |v_i| <= lambda maps to exactly 0.
Vector soft_threshold(const Vector& v, double lambda);

/// (1/2n) ||y - X beta||^2 + lambda ||beta||_1
double lasso_objective(const DesignMatrix& X, const Vector& y, const Vector& beta, double lambda);

/// X^T (y - X beta) / n
Vector dual_variable(const DesignMatrix& X, const Vector& y, const Vector& beta);

KktReport kkt_residual(const DesignMatrix& X, const Vector& y, const Vector& beta, double lambda);

}  // namespace nscreen
