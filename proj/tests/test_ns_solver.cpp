#include <gtest/gtest.h>

#include <Eigen/LU>

#include <numeric>

#include "fixtures.hpp"
#include "nscreen/ns_solver.hpp"
#include "nscreen/oracle_ref.hpp"
#include "nscreen/sns_path.hpp"

namespace nscreen {
namespace {

using testing::gaussian_vector;
using testing::max_abs_diff;
using testing::random_design;

NsConfig config(double lambda, double lambda_bar = 0.0) {
    NsConfig cfg;
    cfg.lambda = lambda;
    cfg.lambda_bar = lambda_bar;
    return cfg;
}

TEST(NsConfigValidate, Ranges) {
    NsConfig cfg = config(1.0);
    EXPECT_NO_THROW(cfg.validate());
    cfg.lambda_bar = 1.0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = config(-1.0);
    try {
        cfg.validate();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonPositiveLambda);
    }
    cfg = config(1.0);
    cfg.max_iter = 0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = config(1.0);
    cfg.cg_tol = 0.0;
    EXPECT_THROW(cfg.validate(), Error);
}

TEST(WorkingSetRule, Definition) {
    const double lambda = 0.5;
    const WorkingSet A = working_set(Vector::Zero(3), Vector{{2 * lambda, lambda / 2, -3 * lambda}}, lambda);
    EXPECT_EQ(A.indices(), (std::vector<Index>{0, 2}));
}

TEST(WorkingSetRule, TiesExcluded) {
    const double lambda = 0.75;
    const Vector beta{{0.25, -1.0, 0.0}};
    const Vector d = Vector::Constant(3, lambda) - beta;
    EXPECT_TRUE(working_set(beta, d, lambda).empty());
}

TEST(WorkingSetRule, ConvergedStateMatchesOracleSupport) {
    sim::Rng rng(31);
    const auto prob = testing::sparse_problem(40, 60, 4, 0.3, rng);
    const double lambda = 0.25 * lambda_zero(prob.X, prob.y);
    const auto fista = oracle::fista_solve(prob.X, prob.y, lambda, 1e-11, 200000);
    const PrimalDualState star = oracle::polish_on_support(prob.X, prob.y, fista.beta, lambda);
    EXPECT_EQ(working_set(star.beta, star.d, lambda), support_of(fista.beta));
    EXPECT_THROW(working_set(Vector::Zero(2), Vector::Zero(3), lambda), Error);
}

TEST(RestrictedLsSolve, IdentityGramReturnsRhs) {
    const DesignMatrix X = testing::scaled_identity(6);
    const WorkingSet A({1, 2, 4}, 6);
    const Vector rhs{{0.5, -1.5, 2.0}};
    for (LsMethod m : {LsMethod::Direct, LsMethod::ConjugateGradient, LsMethod::Auto}) {
        NsConfig cfg = config(1.0);
        cfg.ls_method = m;
        const LsSolution sol = restricted_ls_solve(X, A, rhs, cfg);
        EXPECT_LE(max_abs_diff(sol.u, rhs), 1e-14);
        EXPECT_NE(sol.method, LsMethod::Auto);
    }
}

TEST(RestrictedLsSolve, SingleColumn) {
    sim::Rng rng(32);
    const DesignMatrix X = random_design(10, 4, rng);
    const LsSolution sol = restricted_ls_solve(X, WorkingSet({2}, 4), Vector::Constant(1, -0.7), config(1.0));
    EXPECT_NEAR(sol.u[0], -0.7, 1e-14);
}

TEST(RestrictedLsSolve, MatchesDenseSolveBothMethods) {
    sim::Rng rng(33);
    const DesignMatrix X = random_design(60, 30, rng);
    std::vector<Index> idx(15);
    std::iota(idx.begin(), idx.end(), 5);
    const WorkingSet A(idx, 30);
    const Vector rhs = gaussian_vector(15, rng);
    const Matrix XA = gather_columns(X, A);
    const Vector reference = (XA.transpose() * XA / 60.0).fullPivLu().solve(rhs);

    NsConfig cfg = config(1.0);
    cfg.ls_method = LsMethod::Direct;
    EXPECT_LE(max_abs_diff(restricted_ls_solve(X, A, rhs, cfg).u, reference), 1e-10);
    cfg.ls_method = LsMethod::ConjugateGradient;
    const LsSolution cg = restricted_ls_solve(X, A, rhs, cfg);
    EXPECT_FALSE(cg.cg_stalled);
    EXPECT_GT(cg.cg_iterations, 0);
    EXPECT_LE(max_abs_diff(cg.u, reference), 1e-10);
    const Vector residual = (XA.transpose() * XA / 60.0) * cg.u - rhs;
    EXPECT_LE(residual.norm(), cfg.cg_tol * std::max(1.0, rhs.norm()) * 1.0001);

    cfg.ls_method = LsMethod::Auto;
    cfg.direct_threshold = 10;
    EXPECT_EQ(restricted_ls_solve(X, A, rhs, cfg).method, LsMethod::ConjugateGradient);
    cfg.direct_threshold = 15;
    EXPECT_EQ(restricted_ls_solve(X, A, rhs, cfg).method, LsMethod::Direct);
}

TEST(RestrictedLsSolve, WarmStartAtSolutionNeedsNoIterations) {
    sim::Rng rng(34);
    const DesignMatrix X = random_design(40, 10, rng);
    const WorkingSet A = WorkingSet::all(10);
    const Vector rhs = gaussian_vector(10, rng);
    NsConfig cfg = config(1.0);
    cfg.ls_method = LsMethod::Direct;
    const Vector exact = restricted_ls_solve(X, A, rhs, cfg).u;
    cfg.ls_method = LsMethod::ConjugateGradient;
    cfg.cg_tol = 1e-8;
    EXPECT_EQ(restricted_ls_solve(X, A, rhs, cfg, &exact).cg_iterations, 0);
}

TEST(RestrictedLsSolve, CgStallIsFlaggedNotThrown) {
    sim::Rng rng(35);
    const DesignMatrix X = random_design(50, 20, rng);
    NsConfig cfg = config(1.0);
    cfg.ls_method = LsMethod::ConjugateGradient;
    cfg.cg_max_iter = 1;
    cfg.cg_tol = 1e-14;
    const LsSolution sol = restricted_ls_solve(X, WorkingSet::all(20), gaussian_vector(20, rng), cfg);
    EXPECT_TRUE(sol.cg_stalled);
    EXPECT_EQ(sol.cg_iterations, 1);
}

TEST(RestrictedLsSolve, SingularGram) {
    Matrix raw(4, 3);
    raw << 1, 1, 2, 2, 2, 0, 3, 3, 1, 4, 4, 5;  // columns 0 and 1 identical
    const DesignMatrix X = DesignMatrix::normalize_columns(raw);
    NsConfig cfg = config(1.0);
    cfg.ls_method = LsMethod::Direct;
    try {
        restricted_ls_solve(X, WorkingSet({0, 1}, 3), Vector::Ones(2), cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SingularSystem);
    }
    cfg.ridge_epsilon = 1e-6;
    EXPECT_NO_THROW(restricted_ls_solve(X, WorkingSet({0, 1}, 3), Vector::Ones(2), cfg));
}

TEST(RestrictedLsSolve, CgRefusesMoreColumnsThanRows) {
    sim::Rng rng(36);
    const DesignMatrix X = random_design(5, 8, rng);
    NsConfig cfg = config(1.0);
    cfg.ls_method = LsMethod::ConjugateGradient;
    EXPECT_THROW(restricted_ls_solve(X, WorkingSet::all(8), Vector::Ones(8), cfg), Error);
}

TEST(RestrictedLsSolve, InputChecks) {
    sim::Rng rng(37);
    const DesignMatrix X = random_design(6, 3, rng);
    EXPECT_THROW(restricted_ls_solve(X, WorkingSet({}, 3), Vector(0), config(1.0)), Error);
    EXPECT_THROW(restricted_ls_solve(X, WorkingSet({0}, 3), Vector::Ones(2), config(1.0)), Error);
    EXPECT_THROW(restricted_ls_solve(X, WorkingSet({0}, 3), Vector::Constant(1, std::nan("")), config(1.0)),
                 Error);
}

TEST(NsIterate, OrthogonalDesignOneStepSoftThreshold) {
    sim::Rng rng(38);
    const Index n = 9;
    const DesignMatrix X = testing::scaled_identity(n);
    const Vector y = 2.0 * gaussian_vector(n, rng);
    const double lambda = 0.4;
    PrimalDualState s{Vector::Zero(n), y / std::sqrt(static_cast<double>(n)), lambda, 0.0};
    const NsStep step = ns_iterate(s, X, y, config(lambda));
    EXPECT_LE(max_abs_diff(step.state.beta, soft_threshold(y / std::sqrt(static_cast<double>(n)), lambda)), 1e-15);
}

TEST(NsIterate, AboveLambdaZeroIsFixedPoint) {
    sim::Rng rng(39);
    const DesignMatrix X = random_design(12, 20, rng);
    const Vector y = gaussian_vector(12, rng);
    const double lambda = 1.01 * lambda_zero(X, y);
    const NsStep step = ns_iterate(null_state(X, y, lambda), X, y, config(lambda));
    EXPECT_TRUE(step.working_set.empty());
    EXPECT_EQ(step.state.beta, Vector::Zero(20));
    EXPECT_EQ(step.state.d, xty_over_n(X, y));
}

TEST(NsIterate, ScreeningAndDualMagnitudeInvariants) {
    sim::Rng rng(40);
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = testing::uniform_int(rng, 20, 40);
        const Index p = testing::uniform_int(rng, 10, 60);
        const DesignMatrix X = random_design(n, p, rng);
        const Vector y = gaussian_vector(n, rng);
        const double lambda = testing::uniform(rng, 0.3, 1.2);
        const double lambda_bar = testing::uniform(rng, 0.0, 0.9) * lambda;
        PrimalDualState s{0.5 * gaussian_vector(p, rng), gaussian_vector(p, rng), lambda, lambda_bar};
        const WorkingSet A = working_set(s.beta, s.d, lambda);
        if (A.size() > n / 2) continue;
        const NsStep step = ns_iterate(s, X, y, config(lambda, lambda_bar));
        EXPECT_EQ(step.working_set, A);
        for (Index j : A.complement()) EXPECT_EQ(step.state.beta[j], 0.0);
        for (Index j : A.indices()) {
            EXPECT_DOUBLE_EQ(std::abs(step.state.d[j]), lambda - lambda_bar);
            EXPECT_EQ(std::signbit(step.state.d[j]), std::signbit(s.beta[j] + s.d[j]));
        }
        // inactive duals follow the residual of the new fit
        const Vector full = dual_variable(X, y, step.state.beta);
        for (Index j : A.complement()) EXPECT_NEAR(step.state.d[j], full[j], 1e-12);
    }
}

TEST(NsSolve, OrthogonalConvergesWithinTwoIterations) {
    sim::Rng rng(41);
    const DesignMatrix X = testing::scaled_identity(8);
    const Vector y = 2.0 * gaussian_vector(8, rng);
    const double lambda = 0.6;
    const NsResult r = ns_solve(X, y, config(lambda), null_state(X, y, lambda));
    EXPECT_EQ(r.converged_by, StopReason::WorkingSetFixedPoint);
    EXPECT_LE(r.iterations, 2);
    EXPECT_LE(max_abs_diff(r.state.beta, soft_threshold(xty_over_n(X, y), lambda)), 1e-14);
    EXPECT_LE(r.kkt.residual_inf, 1e-12);
}

TEST(NsSolve, AtOrAboveLambdaZeroReturnsZeroInOneIteration) {
    sim::Rng rng(42);
    const DesignMatrix X = random_design(15, 30, rng);
    const Vector y = gaussian_vector(15, rng);
    const double lambda = lambda_zero(X, y);
    const NsResult r = ns_solve(X, y, config(lambda), null_state(X, y, lambda));
    EXPECT_EQ(r.iterations, 1);
    EXPECT_EQ(count_nonzero(r.state.beta), 0);
    EXPECT_EQ(r.converged_by, StopReason::WorkingSetFixedPoint);
}

TEST(NsSolve, MatchesFistaOnRandomInstances) {
    sim::Rng rng(43);
    for (int trial = 0; trial < 30; ++trial) {
        const auto prob = testing::sparse_problem(50, 40, testing::uniform_int(rng, 1, 4), 0.3, rng);
        const double l0 = lambda_zero(prob.X, prob.y);
        PathConfig cfg;
        cfg.lambda_bar_slope = 0.0;
        cfg.lambda_grid = {0.7 * l0, 0.5 * l0, 0.35 * l0};
        cfg.support_cap_override = 40;
        const SolutionPath path = sns_solve_path(prob.X, prob.y, cfg);
        const NsResult& r = path.points.back().result;
        ASSERT_EQ(r.converged_by, StopReason::WorkingSetFixedPoint);
        EXPECT_TRUE(r.direct_only);
        EXPECT_LE(r.kkt.residual_inf, 1e-8);
        const auto fista = oracle::fista_solve(prob.X, prob.y, 0.35 * l0, 1e-10, 200000);
        const double f_ref = lasso_objective(prob.X, prob.y, fista.beta, 0.35 * l0);
        EXPECT_LE(std::abs(r.kkt.objective - f_ref) / f_ref, 1e-8);
        // supp(beta) is inside the final working set
        const WorkingSet support = support_of(r.state.beta);
        for (Index j : support.indices()) EXPECT_TRUE(r.working_set.contains(j));
    }
}

TEST(NsSolve, IterationCapAndLastIterate) {
    sim::Rng rng(44);
    const auto prob = testing::sparse_problem(60, 40, 4, 0.5, rng);
    const double lambda = 0.3 * lambda_zero(prob.X, prob.y);
    NsConfig cfg = config(lambda);
    cfg.max_iter = 1;
    const PrimalDualState init = null_state(prob.X, prob.y, lambda);
    const NsResult r = ns_solve(prob.X, prob.y, cfg, init);
    ASSERT_EQ(r.converged_by, StopReason::IterationCap);
    EXPECT_EQ(r.iterations, 1);
    const NsStep step = ns_iterate(init, prob.X, prob.y, cfg);
    EXPECT_EQ(r.state.beta, step.state.beta);
}

TEST(NsSolve, WorkingSetLimitStopsOnOversizedSupport) {
    sim::Rng rng(45);
    const auto prob = testing::sparse_problem(60, 40, 4, 0.5, rng);
    const double lambda = 0.05 * lambda_zero(prob.X, prob.y);
    NsConfig cfg = config(lambda);
    cfg.max_working_set = 3;
    const NsResult r = ns_solve(prob.X, prob.y, cfg, null_state(prob.X, prob.y, lambda));
    EXPECT_EQ(r.converged_by, StopReason::WorkingSetLimit);
    EXPECT_GT(count_nonzero(r.state.beta), 3);
}

TEST(NsSolve, WorkingSetLimitRefusesUnsolvableSet) {
    sim::Rng rng(46);
    const DesignMatrix X = random_design(10, 40, rng);
    const Vector y = gaussian_vector(10, rng);
    const double lambda = 0.5;
    PrimalDualState init{Vector::Zero(40), Vector::Constant(40, 2.0), lambda, 0.0};
    NsConfig cfg = config(lambda);
    cfg.max_working_set = 5;
    const NsResult r = ns_solve(X, y, cfg, init);
    EXPECT_EQ(r.converged_by, StopReason::WorkingSetLimit);
    EXPECT_EQ(r.iterations, 0);
    EXPECT_EQ(r.rejected_set_size, 40);
    EXPECT_EQ(r.state.beta, init.beta);
}

TEST(NsSolve, PermutationEquivariance) {
    sim::Rng rng(47);
    const auto prob = testing::sparse_problem(30, 25, 3, 0.3, rng);
    const double lambda = 0.3 * lambda_zero(prob.X, prob.y);
    const NsResult base = ns_solve(prob.X, prob.y, config(lambda), null_state(prob.X, prob.y, lambda));

    std::vector<Index> perm(25);
    std::iota(perm.begin(), perm.end(), 0);
    for (Index k = 24; k > 0; --k) std::swap(perm[k], perm[testing::uniform_int(rng, 0, k)]);
    Matrix permuted(30, 25);
    for (Index j = 0; j < 25; ++j) permuted.col(j) = prob.X.values().col(perm[j]);
    const DesignMatrix Xp = DesignMatrix::normalize_columns(permuted);
    const NsResult r = ns_solve(Xp, prob.y, config(lambda), null_state(Xp, prob.y, lambda));
    for (Index j = 0; j < 25; ++j) EXPECT_NEAR(r.state.beta[j], base.state.beta[perm[j]], 1e-10);
}

TEST(NsSolve, DebiasedVariantShrinksLess) {
    sim::Rng rng(48);
    const auto prob = testing::sparse_problem(100, 50, 3, 0.1, rng);
    const double lambda = 0.2 * lambda_zero(prob.X, prob.y);
    const NsResult lasso = ns_solve(prob.X, prob.y, config(lambda), null_state(prob.X, prob.y, lambda));
    const NsResult debiased =
        ns_solve(prob.X, prob.y, config(lambda, 0.9 * lambda), null_state(prob.X, prob.y, lambda));
    const Vector truth = prob.X.to_normalized_scale(prob.beta_true);
    EXPECT_LT(max_abs_diff(debiased.state.beta, truth), max_abs_diff(lasso.state.beta, truth));
}

TEST(NsSolve, DimensionChecks) {
    sim::Rng rng(49);
    const DesignMatrix X = random_design(6, 4, rng);
    const Vector y = gaussian_vector(6, rng);
    PrimalDualState bad{Vector::Zero(3), Vector::Zero(3), 1.0, 0.0};
    EXPECT_THROW(ns_solve(X, y, config(0.1), bad), Error);
    EXPECT_THROW(ns_solve(X, Vector::Zero(5), config(0.1), null_state(X, y, 0.1)), Error);
}

}  // namespace
}  // namespace nscreen
