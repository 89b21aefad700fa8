#include "nscreen/oracle_ref.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace nscreen::oracle {

double gram_spectral_norm(const DesignMatrix& X, double rel_tol) {
    const double n = static_cast<double>(X.n());
    // Deterministic, non-degenerate start vector.
    Vector v(X.p());
    for (Index j = 0; j < X.p(); ++j) v[j] = 1.0 + 0.01 * static_cast<double>(j % 7);
    v.normalize();
    double estimate = 0.0;
    for (int it = 0; it < 10000; ++it) {
        Vector w = X.values().transpose() * (X.values() * v) / n;
        const double next = w.norm();
        if (!(next > 0.0)) return 0.0;
        v = w / next;
        if (std::abs(next - estimate) <= rel_tol * next) return next;
        estimate = next;
    }
    return estimate;
}

FistaResult fista_solve(const DesignMatrix& X, const Vector& y, double lambda, double tol, int max_iter,
                        const Vector* init) {
    if (!(lambda > 0.0)) throw Error(ErrorKind::NonPositiveLambda, "lambda must be positive");
    if (!(tol > 0.0)) throw Error(ErrorKind::InvalidConfig, "tol must be positive");
    if (y.size() != X.n()) throw Error(ErrorKind::DimensionMismatch, "y must have length n");

    const double n = static_cast<double>(X.n());
    const double lipschitz = gram_spectral_norm(X) * (1.0 + 1e-6);
    const double step = 1.0 / lipschitz;
    const Matrix& Xv = X.values();

    FistaResult out;
    Vector x = (init != nullptr && init->size() == X.p()) ? *init : Vector::Zero(X.p());
    Vector z = x;
    Vector x_prev = x;
    double t = 1.0;

    auto certify = [&](const Vector& beta) { return kkt_residual(X, y, beta, lambda).residual_inf; };

    out.residual_inf = certify(x);
    if (out.residual_inf <= tol) {
        out.beta = x;
        out.converged = true;
        return out;
    }
    for (int it = 1; it <= max_iter; ++it) {
        const Vector grad = Xv.transpose() * (Xv * z - y) / n;
        x_prev = x;
        x = soft_threshold(z - step * grad, lambda * step);

        // Restart momentum when the step opposes the last update.
        if ((z - x).dot(x - x_prev) > 0.0) {
            t = 1.0;
            z = x;
        } else {
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            z = x + ((t - 1.0) / t_next) * (x - x_prev);
            t = t_next;
        }
        out.iterations = it;
        if (it % 10 == 0 || it == max_iter) {
            out.residual_inf = certify(x);
            if (out.residual_inf <= tol) {
                out.converged = true;
                break;
            }
        }
    }
    out.beta = x;
    return out;
}

PrimalDualState polish_on_support(const DesignMatrix& X, const Vector& y, const Vector& beta_approx,
                                  double lambda, double zero_tol) {
    const WorkingSet A = support_of(beta_approx, zero_tol);
    PrimalDualState s;
    s.lambda = lambda;
    s.beta = Vector::Zero(X.p());
    if (!A.empty()) {
        const double n = static_cast<double>(X.n());
        const Matrix XA = gather_columns(X, A);
        const Matrix gram = XA.transpose() * XA / n;
        Vector rhs = XA.transpose() * y / n;
        for (Index k = 0; k < A.size(); ++k) {
            const double b = beta_approx[A.indices()[static_cast<std::size_t>(k)]];
            rhs[k] -= lambda * (b > 0.0 ? 1.0 : -1.0);
        }
        const Vector u = gram.fullPivLu().solve(rhs);
        for (Index k = 0; k < A.size(); ++k) s.beta[A.indices()[static_cast<std::size_t>(k)]] = u[k];
    }
    s.d = dual_variable(X, y, s.beta);
    return s;
}

Vector newton_derivative_gamma(const Vector& v, double lambda) {
    if (!(lambda > 0.0)) throw Error(ErrorKind::NonPositiveLambda, "lambda must be positive");
    return (v.array().abs() > lambda).cast<double>().matrix();
}

Vector evaluate_F(const PrimalDualState& state, const DesignMatrix& X, const Vector& y) {
    if (state.beta.size() != X.p() || state.d.size() != X.p() || y.size() != X.n()) {
        throw Error(ErrorKind::DimensionMismatch, "state, y and X dimensions are inconsistent");
    }
    const Index p = X.p();
    const double n = static_cast<double>(X.n());
    Vector F(2 * p);
    F.head(p) = state.beta - soft_threshold(state.beta + state.d, state.lambda);
    F.tail(p) = n * state.d - X.values().transpose() * (y - X.values() * state.beta);
    return F;
}

NewtonSystem assemble_newton_system(const PrimalDualState& state, const DesignMatrix& X, const Vector& y) {
    const Index p = X.p();
    const double n = static_cast<double>(X.n());
    NewtonSystem sys;
    sys.active = WorkingSet(std::vector<Index>{}, p);
    {
        const Vector b = newton_derivative_gamma(state.beta + state.d, state.lambda);
        std::vector<Index> idx;
        for (Index j = 0; j < p; ++j) {
            if (b[j] == 1.0) idx.push_back(j);
        }
        sys.active = WorkingSet(std::move(idx), p);
    }
    const std::vector<Index>& A = sys.active.indices();
    const std::vector<Index> I = sys.active.complement();
    const Index a = static_cast<Index>(A.size());
    const Index i = static_cast<Index>(I.size());

    // Block offsets in the permuted order (d_A, beta_I, beta_A, d_I).
    const Index off_dA = 0;
    const Index off_bI = a;
    const Index off_bA = a + i;
    const Index off_dI = 2 * a + i;

    sys.permutation.resize(static_cast<std::size_t>(2 * p));
    for (Index k = 0; k < a; ++k) {
        sys.permutation[static_cast<std::size_t>(off_dA + k)] = p + A[static_cast<std::size_t>(k)];
        sys.permutation[static_cast<std::size_t>(off_bA + k)] = A[static_cast<std::size_t>(k)];
    }
    for (Index k = 0; k < i; ++k) {
        sys.permutation[static_cast<std::size_t>(off_bI + k)] = I[static_cast<std::size_t>(k)];
        sys.permutation[static_cast<std::size_t>(off_dI + k)] = p + I[static_cast<std::size_t>(k)];
    }

    const Matrix XA = gather_columns(X, sys.active);
    const Matrix XI = gather_columns(X, WorkingSet(I, p));

    Matrix& h = sys.h;
    h = Matrix::Zero(2 * p, 2 * p);
    // Row block 1: F1 on A depends on d_A only.
    h.block(off_dA, off_dA, a, a) = -Matrix::Identity(a, a);
    // Row block 2: F1 on I depends on beta_I only.
    h.block(off_bI, off_bI, i, i) = Matrix::Identity(i, i);
    // Row block 3: F2 on A.
    h.block(off_bA, off_dA, a, a) = n * Matrix::Identity(a, a);
    h.block(off_bA, off_bI, a, i) = XA.transpose() * XI;
    h.block(off_bA, off_bA, a, a) = XA.transpose() * XA;
    // Row block 4: F2 on I.
    h.block(off_dI, off_bI, i, i) = XI.transpose() * XI;
    h.block(off_dI, off_bA, i, a) = XI.transpose() * XA;
    h.block(off_dI, off_dI, i, i) = n * Matrix::Identity(i, i);

    // Rows of F follow the same block order: (F1_A, F1_I, F2_A, F2_I).
    const Vector F = evaluate_F(state, X, y);
    sys.rhs.resize(2 * p);
    for (Index k = 0; k < a; ++k) {
        sys.rhs[off_dA + k] = -F[A[static_cast<std::size_t>(k)]];
        sys.rhs[off_bA + k] = -F[p + A[static_cast<std::size_t>(k)]];
    }
    for (Index k = 0; k < i; ++k) {
        sys.rhs[off_bI + k] = -F[I[static_cast<std::size_t>(k)]];
        sys.rhs[off_dI + k] = -F[p + I[static_cast<std::size_t>(k)]];
    }
    return sys;
}

PrimalDualState generalized_newton_step(const PrimalDualState& state, const DesignMatrix& X, const Vector& y,
                                        double lambda) {
    PrimalDualState z = state;
    z.lambda = lambda;
    z.lambda_bar = 0.0;
    const NewtonSystem sys = assemble_newton_system(z, X, y);

    Eigen::FullPivLU<Matrix> lu(sys.h);
    if (!lu.isInvertible() || !(lu.rcond() > 1e-14)) {
        throw Error(ErrorKind::SingularNewtonSystem, "Newton matrix is singular");
    }
    const Vector D = lu.solve(sys.rhs);

    const Index p = X.p();
    for (Index k = 0; k < 2 * p; ++k) {
        const Index natural = sys.permutation[static_cast<std::size_t>(k)];
        if (natural < p) {
            z.beta[natural] += D[k];
        } else {
            z.d[natural - p] += D[k];
        }
    }
    return z;
}

}  // namespace nscreen::oracle
