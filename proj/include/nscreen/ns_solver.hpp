#pragma once

#include "nscreen/core_types.hpp"
#include "nscreen/prox_kkt.hpp"

namespace nscreen {

enum class LsMethod { Direct, ConjugateGradient, Auto };

struct NsConfig {
    int max_iter = 50;
    double lambda = 1.0;
    double lambda_bar = 0.0;
    LsMethod ls_method = LsMethod::Auto;
    double cg_tol = 1e-10;
    int cg_max_iter = 0;  // 0 selects max(10|A|, ceil(p / (2 n |A|)))
    Index direct_threshold = 512;
    double ridge_epsilon = 0.0;  // adds ridge_epsilon * I to the restricted Gram when > 0
    /// Support limit for ns_solve; 0 disables. See ns_solve.
    Index max_working_set = 0;

    void validate() const;
};

enum class StopReason { WorkingSetFixedPoint, IterationCap, WorkingSetLimit };

const char* to_string(StopReason reason) noexcept;
const char* to_string(LsMethod method) noexcept;

struct LsSolution {
    Vector u;
    LsMethod method = LsMethod::Direct;  // Direct or ConjugateGradient, never Auto
    int cg_iterations = 0;
    bool cg_stalled = false;  // CG hit its cap before reaching cg_tol
};

/// Solves (X_A^T X_A / n) u = rhs.
///
/// Direct factorizes the explicit Gram submatrix (Cholesky) and throws
/// Error(SingularSystem) when it is numerically rank deficient. ConjugateGradient
/// only touches X through restricted_gram_apply and starts from `warm` when
/// given. Auto picks Direct for |A| <= direct_threshold.
LsSolution restricted_ls_solve(const DesignMatrix& X, const WorkingSet& A, const Vector& rhs,
                               const NsConfig& cfg, const Vector* warm = nullptr);

/// {j : |beta_j + d_j| > lambda}; ties are excluded.
WorkingSet working_set(const Vector& beta, const Vector& d, double lambda);

struct NsStep {
    PrimalDualState state;
    WorkingSet working_set;  // the set the update was computed on
    LsSolution ls;
};

/// One screening-Newton update from `state` at (cfg.lambda, cfg.lambda_bar).
NsStep ns_iterate(const PrimalDualState& state, const DesignMatrix& X, const Vector& y,
                  const NsConfig& cfg);

/// Same as above with X^T y / n supplied by the caller.
NsStep ns_iterate(const PrimalDualState& state, const DesignMatrix& X, const Vector& y,
                  const NsConfig& cfg, const Vector& xty);

struct NsResult {
    PrimalDualState state;
    WorkingSet working_set;
    int iterations = 0;
    StopReason converged_by = StopReason::IterationCap;
    KktReport kkt;
    bool direct_only = true;  // every restricted solve used the Direct method
    bool cg_stalled = false;
    int cg_iterations = 0;
    Index rejected_set_size = 0;  // size of the oversized set on WorkingSetLimit
};

/// Iterates ns_iterate until the working set repeats or cfg.max_iter steps elapse.
/// With cfg.max_working_set set, it also stops (WorkingSetLimit) as soon as an
/// iterate's support exceeds the limit, and refuses to step onto a working set
/// that is both over the limit and larger than n; in that case the previous
/// iterate is kept and rejected_set_size records the refused set.
NsResult ns_solve(const DesignMatrix& X, const Vector& y, const NsConfig& cfg,
                  const PrimalDualState& init);

/// Starting point (0, X^T y / n).
PrimalDualState null_state(const DesignMatrix& X, const Vector& y, double lambda,
                           double lambda_bar = 0.0);

}  // namespace nscreen
