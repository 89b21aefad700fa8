#pragma once

#include <vector>

#include "nscreen/core_types.hpp"
#include "nscreen/prox_kkt.hpp"

namespace nscreen::oracle {

struct FistaResult {
    Vector beta;
    int iterations = 0;
    double residual_inf = 0.0;  // kkt_residual at the returned beta
    bool converged = false;     // false means NonConverged: max_iter hit first
};

/// Accelerated proximal gradient with gradient-based restart, step 1/L where
/// L is the top eigenvalue of X^T X / n from power iteration.
FistaResult fista_solve(const DesignMatrix& X, const Vector& y, double lambda, double tol,
                        int max_iter, const Vector* init = nullptr);

/// Largest eigenvalue of X^T X / n by power iteration; stops when successive
/// estimates agree to `rel_tol`.
double gram_spectral_norm(const DesignMatrix& X, double rel_tol = 1e-10);

/// Re-solves the Lasso stationarity equations on the support and signs of an
/// approximate solution. Returns the exact (beta, d) pair; valid only when the
/// approximate solution already has the right support and signs.
PrimalDualState polish_on_support(const DesignMatrix& X, const Vector& y, const Vector& beta_approx,
                                  double lambda, double zero_tol = 0.0);

/// b_i = 1 if |v_i| > lambda else 0.
Vector newton_derivative_gamma(const Vector& v, double lambda);

/// (beta - soft_threshold(beta + d); n d - X^T (y - X beta)) in natural order.
Vector evaluate_F(const PrimalDualState& state, const DesignMatrix& X, const Vector& y);

/// Generalized Newton system in the block order (d_A, beta_I, beta_A, d_I).
struct NewtonSystem {
    Matrix h;
    Vector rhs;  // -F(z) in the permuted order
    /// permutation[k] = position in natural z = (beta; d) of permuted entry k.
    std::vector<Index> permutation;
    WorkingSet active;
};

NewtonSystem assemble_newton_system(const PrimalDualState& state, const DesignMatrix& X, const Vector& y);

/// z + D with H D = -F(z), mapped back to natural order. Dense 2p x 2p solve.
PrimalDualState generalized_newton_step(const PrimalDualState& state, const DesignMatrix& X,
                                        const Vector& y, double lambda);

}  // namespace nscreen::oracle
