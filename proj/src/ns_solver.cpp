#include "nscreen/ns_solver.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

namespace nscreen {

namespace {

// Below this reciprocal condition estimate the Cholesky solve is not trusted.
constexpr double kSingularRcond = 1e-14;

LsSolution solve_direct(const DesignMatrix& X, const WorkingSet& A, const Vector& rhs,
                        const NsConfig& cfg) {
    const Matrix XA = gather_columns(X, A);
    Matrix gram = Matrix::Zero(A.size(), A.size());
    gram.selfadjointView<Eigen::Lower>().rankUpdate(XA.transpose(), 1.0 / static_cast<double>(X.n()));
    if (cfg.ridge_epsilon > 0.0) gram.diagonal().array() += cfg.ridge_epsilon;

    Eigen::LLT<Matrix, Eigen::Lower> llt(gram);
    if (llt.info() != Eigen::Success || !(llt.rcond() > kSingularRcond)) {
        throw Error(ErrorKind::SingularSystem,
                    "restricted Gram matrix of size " + std::to_string(A.size()) + " is singular");
    }
    LsSolution out;
    out.u = llt.solve(rhs);
    out.method = LsMethod::Direct;
    return out;
}

LsSolution solve_cg(const DesignMatrix& X, const WorkingSet& A, const Vector& rhs,
                    const NsConfig& cfg, const Vector* warm) {
    const Index m = A.size();
    int max_iter = cfg.cg_max_iter;
    if (max_iter <= 0) {
        const double budget = std::ceil(static_cast<double>(X.p()) /
                                        (2.0 * static_cast<double>(X.n()) * static_cast<double>(m)));
        max_iter = static_cast<int>(std::max<double>(10.0 * static_cast<double>(m), budget));
    }
    auto apply = [&](const Vector& v) {
        Vector out = restricted_gram_apply(X, A, v);
        if (cfg.ridge_epsilon > 0.0) out.noalias() += cfg.ridge_epsilon * v;
        return out;
    };

    LsSolution out;
    out.method = LsMethod::ConjugateGradient;
    out.u = (warm != nullptr && warm->size() == m) ? *warm : Vector::Zero(m);
    const double target = cfg.cg_tol * std::max(1.0, rhs.norm());

    Vector r = rhs - apply(out.u);
    Vector dir = r;
    double rr = r.squaredNorm();
    int it = 0;
    while (std::sqrt(rr) > target && it < max_iter) {
        const Vector q = apply(dir);
        const double curvature = dir.dot(q);
        if (!(curvature > 0.0)) break;
        const double step = rr / curvature;
        out.u.noalias() += step * dir;
        r.noalias() -= step * q;
        const double rr_next = r.squaredNorm();
        dir = r + (rr_next / rr) * dir;
        rr = rr_next;
        ++it;
    }
    out.cg_iterations = it;
    out.cg_stalled = std::sqrt(rr) > target;
    return out;
}

}  // namespace

const char* to_string(StopReason reason) noexcept {
    switch (reason) {
        case StopReason::WorkingSetFixedPoint: return "WorkingSetFixedPoint";
        case StopReason::IterationCap: return "IterationCap";
        case StopReason::WorkingSetLimit: return "WorkingSetLimit";
    }
    return "Unknown";
}

const char* to_string(LsMethod method) noexcept {
    switch (method) {
        case LsMethod::Direct: return "direct";
        case LsMethod::ConjugateGradient: return "cg";
        case LsMethod::Auto: return "auto";
    }
    return "unknown";
}

void NsConfig::validate() const {
    if (!(lambda > 0.0)) throw Error(ErrorKind::NonPositiveLambda, "lambda must be positive");
    if (!(lambda_bar >= 0.0 && lambda_bar < lambda)) {
        throw Error(ErrorKind::InvalidConfig, "lambda_bar must lie in [0, lambda)");
    }
    if (max_iter < 1) throw Error(ErrorKind::InvalidConfig, "max_iter must be >= 1");
    if (!(cg_tol > 0.0)) throw Error(ErrorKind::InvalidConfig, "cg_tol must be positive");
    if (direct_threshold < 1) throw Error(ErrorKind::InvalidConfig, "direct_threshold must be >= 1");
    if (!(ridge_epsilon >= 0.0)) throw Error(ErrorKind::InvalidConfig, "ridge_epsilon must be >= 0");
    if (max_working_set < 0) throw Error(ErrorKind::InvalidConfig, "max_working_set must be >= 0");
}

LsSolution restricted_ls_solve(const DesignMatrix& X, const WorkingSet& A, const Vector& rhs,
                               const NsConfig& cfg, const Vector* warm) {
    if (A.empty()) throw Error(ErrorKind::InvalidDimensions, "restricted solve needs |A| >= 1");
    if (rhs.size() != A.size()) {
        throw Error(ErrorKind::DimensionMismatch, "rhs length differs from |A|");
    }
    if (!rhs.allFinite()) throw Error(ErrorKind::InvalidConfig, "rhs has non-finite entries");

    LsMethod method = cfg.ls_method;
    if (method == LsMethod::Auto) {
        method = A.size() <= cfg.direct_threshold ? LsMethod::Direct : LsMethod::ConjugateGradient;
    }
    if (method == LsMethod::Direct) return solve_direct(X, A, rhs, cfg);
    if (A.size() > X.n() && !(cfg.ridge_epsilon > 0.0)) {
        throw Error(ErrorKind::SingularSystem, "working set of size " + std::to_string(A.size()) +
                                                   " exceeds n = " + std::to_string(X.n()));
    }
    return solve_cg(X, A, rhs, cfg, warm);
}

WorkingSet working_set(const Vector& beta, const Vector& d, double lambda) {
    if (beta.size() != d.size()) throw Error(ErrorKind::DimensionMismatch, "beta and d lengths differ");
    if (!(lambda > 0.0)) throw Error(ErrorKind::NonPositiveLambda, "lambda must be positive");
    std::vector<Index> idx;
    for (Index j = 0; j < beta.size(); ++j) {
        if (std::abs(beta[j] + d[j]) > lambda) idx.push_back(j);
    }
    return WorkingSet(std::move(idx), beta.size());
}

NsStep ns_iterate(const PrimalDualState& state, const DesignMatrix& X, const Vector& y,
                  const NsConfig& cfg) {
    if (y.size() != X.n()) throw Error(ErrorKind::DimensionMismatch, "y must have length n");
    return ns_iterate(state, X, y, cfg, xty_over_n(X, y));
}

NsStep ns_iterate(const PrimalDualState& state, const DesignMatrix& X, const Vector& y,
                  const NsConfig& cfg, const Vector& xty) {
    cfg.validate();
    if (state.beta.size() != X.p() || state.d.size() != X.p() || y.size() != X.n() ||
        xty.size() != X.p()) {
        throw Error(ErrorKind::DimensionMismatch, "state, y and X dimensions are inconsistent");
    }

    NsStep step;
    step.working_set = working_set(state.beta, state.d, cfg.lambda);
    const WorkingSet& A = step.working_set;
    PrimalDualState& next = step.state;
    next.lambda = cfg.lambda;
    next.lambda_bar = cfg.lambda_bar;
    next.beta = Vector::Zero(X.p());

    if (A.empty()) {
        next.d = xty;
        return step;
    }

    const double shift = cfg.lambda - cfg.lambda_bar;
    const Index m = A.size();
    Vector d_active(m);
    Vector rhs(m);
    Vector warm(m);
    for (Index k = 0; k < m; ++k) {
        const Index j = A.indices()[static_cast<std::size_t>(k)];
        const double s = state.beta[j] + state.d[j];
        d_active[k] = shift * static_cast<double>((s > 0.0) - (s < 0.0));
        rhs[k] = xty[j] - d_active[k];
        warm[k] = state.beta[j];
    }

    step.ls = restricted_ls_solve(X, A, rhs, cfg, &warm);
    for (Index k = 0; k < m; ++k) {
        next.beta[A.indices()[static_cast<std::size_t>(k)]] = step.ls.u[k];
    }

    const Vector residual = y - restricted_apply(X, A, step.ls.u);
    next.d = xty_over_n(X, residual);
    for (Index k = 0; k < m; ++k) {
        next.d[A.indices()[static_cast<std::size_t>(k)]] = d_active[k];
    }
    return step;
}

NsResult ns_solve(const DesignMatrix& X, const Vector& y, const NsConfig& cfg,
                  const PrimalDualState& init) {
    cfg.validate();
    if (init.beta.size() != X.p() || init.d.size() != X.p()) {
        throw Error(ErrorKind::DimensionMismatch, "initial state length differs from p");
    }
    if (y.size() != X.n()) throw Error(ErrorKind::DimensionMismatch, "y must have length n");

    const Vector xty = xty_over_n(X, y);
    NsResult result;
    PrimalDualState current = init;
    current.lambda = cfg.lambda;
    current.lambda_bar = cfg.lambda_bar;

    for (int k = 0; k < cfg.max_iter; ++k) {
        if (cfg.max_working_set > 0 && !(cfg.ridge_epsilon > 0.0)) {
            const Index next_size = working_set(current.beta, current.d, cfg.lambda).size();
            if (next_size > cfg.max_working_set && next_size > X.n()) {
                result.converged_by = StopReason::WorkingSetLimit;
                result.rejected_set_size = next_size;
                if (k == 0) result.working_set = support_of(current.beta);
                break;
            }
        }
        NsStep step = ns_iterate(current, X, y, cfg, xty);
        ++result.iterations;
        result.direct_only = result.direct_only && (step.working_set.empty() ||
                                                    step.ls.method == LsMethod::Direct);
        result.cg_stalled = result.cg_stalled || step.ls.cg_stalled;
        result.cg_iterations += step.ls.cg_iterations;
        current = std::move(step.state);

        const bool fixed_point = working_set(current.beta, current.d, cfg.lambda) == step.working_set;
        result.working_set = std::move(step.working_set);
        if (fixed_point) {
            result.converged_by = StopReason::WorkingSetFixedPoint;
            break;
        }
        if (cfg.max_working_set > 0 && count_nonzero(current.beta) > cfg.max_working_set) {
            result.converged_by = StopReason::WorkingSetLimit;
            break;
        }
    }

    result.state = std::move(current);
    result.kkt = kkt_residual(X, y, result.state.beta, cfg.lambda);
    return result;
}

PrimalDualState null_state(const DesignMatrix& X, const Vector& y, double lambda, double lambda_bar) {
    PrimalDualState s;
    s.beta = Vector::Zero(X.p());
    s.d = xty_over_n(X, y);
    s.lambda = lambda;
    s.lambda_bar = lambda_bar;
    return s;
}

}  // namespace nscreen
