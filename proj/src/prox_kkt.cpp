#include "nscreen/prox_kkt.hpp"

#include <algorithm>
#include <cmath>

namespace nscreen {

namespace {

void require_positive(double lambda) {
    if (!(lambda > 0.0)) throw Error(ErrorKind::NonPositiveLambda, "lambda must be positive");
}

void require_shapes(const DesignMatrix& X, const Vector& y, const Vector& beta) {
    if (y.size() != X.n() || beta.size() != X.p()) {
        throw Error(ErrorKind::DimensionMismatch, "y must have length n and beta length p");
    }
}

}  // namespace

Vector soft_threshold(const Vector& v, double lambda) {
    require_positive(lambda);
    Vector out(v.size());
    for (Index i = 0; i < v.size(); ++i) {
        const double x = v[i];
        if (x > lambda) {
            out[i] = x - lambda;
        } else if (x < -lambda) {
            out[i] = x + lambda;
        } else {
            out[i] = 0.0;
        }
    }
    return out;
}

double lasso_objective(const DesignMatrix& X, const Vector& y, const Vector& beta, double lambda) {
    require_positive(lambda);
    require_shapes(X, y, beta);
    const double n = static_cast<double>(X.n());
    return (y - X.values() * beta).squaredNorm() / (2.0 * n) + lambda * beta.lpNorm<1>();
}

Vector dual_variable(const DesignMatrix& X, const Vector& y, const Vector& beta) {
    require_shapes(X, y, beta);
    return xty_over_n(X, y - X.values() * beta);
}

KktReport kkt_residual(const DesignMatrix& X, const Vector& y, const Vector& beta, double lambda) {
    require_positive(lambda);
    require_shapes(X, y, beta);
    const Vector residual = y - X.values() * beta;
    const double n = static_cast<double>(X.n());
    const Vector d = xty_over_n(X, residual);

    KktReport report;
    report.residual_inf = (beta - soft_threshold(beta + d, lambda)).lpNorm<Eigen::Infinity>();
    for (Index i = 0; i < beta.size(); ++i) {
        if (beta[i] == 0.0) {
            report.dual_feasibility = std::max(report.dual_feasibility, std::abs(d[i]) - lambda);
        }
    }
    report.objective = residual.squaredNorm() / (2.0 * n) + lambda * beta.lpNorm<1>();
    return report;
}

}  // namespace nscreen
