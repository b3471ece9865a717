#include "erx/error.hpp"
#include "erx/pds.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace erx;

namespace {

// 0.5 ||v - a||^2
ProxFn half_sq_dist(DenseVector a) {
    auto prox = [a](std::span<const double> v, double g, std::span<double> out) {
        for (std::size_t i = 0; i < v.size(); ++i)
            out[i] = (v[i] + g * a[i]) / (1.0 + g);
    };
    auto value = [a](std::span<const double> v) {
        const double d = distance2(v, a);
        return 0.5 * d * d;
    };
    return {"half_sq_dist", prox, value};
}

ProxFn scaled_l1(double mu) {
    auto prox = [mu](std::span<const double> v, double g, std::span<double> out) {
        soft_threshold(v, g * mu, out);
    };
    auto value = [mu](std::span<const double> v) { return mu * norm1(v); };
    return {"scaled_l1", prox, value};
}

SplitProblem simple(std::size_t n, ProxFn g, ProxFn h, LinearOperator f) {
    SplitProblem p;
    p.primal_dim = f.in_dim();
    p.dual_dim = f.out_dim();
    p.g_blocks = {{std::move(g), 0, f.in_dim()}};
    p.h_blocks = {{std::move(h), 0, f.out_dim()}};
    p.f_op = std::move(f);
    (void)n;
    return p;
}

} // namespace

TEST(DefaultSteps, Defaults) {
    const StepSizes s = default_steps(2.0);
    EXPECT_EQ(s.gamma1, 0.01);
    EXPECT_DOUBLE_EQ(s.gamma2, 1.0 / (12.0 * 0.01));
}

TEST(DefaultSteps, SaturatesBound) {
    const StepSizes s = default_steps(100.0);
    EXPECT_EQ(s.gamma1, 0.01);
    EXPECT_DOUBLE_EQ(s.gamma2, 1.0 / (0.01 * 10000.0));
}

TEST(DefaultSteps, TinyNormGuarded) {
    const StepSizes s = default_steps(0.0);
    EXPECT_TRUE(std::isfinite(s.gamma2));
    EXPECT_GT(s.gamma2, 0.0);
}

TEST(PdsSolve, SingletonConvergesImmediately) {
    const DenseVector t{1, -2, 3};
    const SplitProblem p = simple(3, fn::singleton(t), fn::zero(), LinearOperator::identity(3));
    const SolveResult r = pds_solve(p, default_steps(1.0));
    EXPECT_EQ(r.status, SolveStatus::Converged);
    EXPECT_LE(r.trace.iter, 2u);
    EXPECT_EQ(r.primal, t);
}

TEST(PdsSolve, QuadraticMinimizer) {
    const DenseVector a{0.5, -1.0, 2.0, 0.0};
    const SplitProblem p = simple(4, fn::zero(), half_sq_dist(a), LinearOperator::identity(4));
    SolveOptions o;
    o.eps_stop = 1e-12;
    o.max_iter = 200000;
    const SolveResult r = pds_solve(p, StepSizes{0.5, 1.0}, o);
    for (std::size_t i = 0; i < 4; ++i)
        EXPECT_NEAR(r.primal[i], a[i], 1e-6);
}

TEST(PdsSolve, LassoMatchesCoordinateDescent) {
    const std::size_t m = 12, n = 8;
    const DenseMatrix b(m, n, random_normal(m * n, 31));
    const DenseVector y = random_normal(m, 32);
    const double mu = 0.7;

    // coordinate descent oracle
    DenseVector x(n, 0.0), r(y);
    for (int sweep = 0; sweep < 5000; ++sweep)
        for (std::size_t j = 0; j < n; ++j) {
            const auto col = b.col(j);
            const double cc = dot(col, col);
            const double rho = dot(col, r) + cc * x[j];
            const double nx = std::copysign(std::max(std::abs(rho) - mu, 0.0), rho) / cc;
            for (std::size_t i = 0; i < m; ++i)
                r[i] -= col[i] * (nx - x[j]);
            x[j] = nx;
        }
    auto objective = [&](std::span<const double> v) {
        const DenseVector bv = LinearOperator::from_matrix(b)(v);
        const double d = distance2(bv, y);
        return 0.5 * d * d + mu * norm1(v);
    };

    const SplitProblem p = simple(n, scaled_l1(mu), half_sq_dist(y), LinearOperator::from_matrix(b));
    SolveOptions o;
    o.eps_stop = 1e-11;
    o.max_iter = 500000;
    // from x = 0 the thresholded iterates can sit still for two steps
    o.init_primal = DenseVector(n, 1.0);
    const double fn = problem_f_norm(p);
    const SolveResult res = pds_solve(p, StepSizes{0.99 / fn, 0.99 / fn}, o);
    EXPECT_LE(objective(res.primal), objective(x) + 1e-6);
}

TEST(PdsSolve, RejectsStepsAboveBound) {
    const SplitProblem p = simple(2, fn::zero(), fn::zero(), scale(LinearOperator::identity(2), 3.0));
    EXPECT_THROW(pds_solve(p, StepSizes{1.0, 1.0}), ConfigurationError);
    EXPECT_NO_THROW(pds_solve(p, StepSizes{0.3, 0.3}));
}

TEST(PdsSolve, DivergenceCarriesTrace) {
    ProxFn nan_fn = fn::zero();
    nan_fn.prox = [](std::span<const double>, double, std::span<double> out) {
        for (double &v : out)
            v = std::numeric_limits<double>::quiet_NaN();
    };
    const SplitProblem p = simple(2, nan_fn, fn::zero(), LinearOperator::identity(2));
    try {
        pds_solve(p, default_steps(1.0));
        FAIL() << "expected DivergenceError";
    } catch (const DivergenceError &e) {
        EXPECT_LE(e.trace.iter, 1u);
    }
}

TEST(PdsSolve, StructureValidated) {
    SplitProblem p = simple(3, fn::zero(), fn::zero(), LinearOperator::identity(3));
    p.h_blocks[0].length = 2;
    EXPECT_THROW(pds_solve(p, default_steps(1.0)), StructureError);
}

TEST(PdsSolve, DeterministicTraces) {
    const DenseVector a{0.5, -1.0};
    const SplitProblem p = simple(2, fn::l1(), half_sq_dist(a), LinearOperator::identity(2));
    const SolveResult r1 = pds_solve(p, default_steps(1.0));
    const SolveResult r2 = pds_solve(p, default_steps(1.0));
    EXPECT_EQ(r1.primal, r2.primal);
    EXPECT_EQ(r1.trace.primal_residual, r2.trace.primal_residual);
    EXPECT_EQ(r1.trace.objective, r2.trace.objective);
}

TEST(PdsSolve, TraceAndMaxIter) {
    const SplitProblem p = simple(2, fn::zero(), half_sq_dist({1, 1}), LinearOperator::identity(2));
    SolveOptions o;
    o.max_iter = 5;
    o.eps_stop = 1e-30;
    const SolveResult r = pds_solve(p, default_steps(1.0), o);
    EXPECT_EQ(r.status, SolveStatus::MaxIterations);
    EXPECT_EQ(r.trace.iter, 5u);
    EXPECT_EQ(r.trace.primal_residual.size(), 5u);
    EXPECT_EQ(r.trace.objective.size(), 5u);
    std::ostringstream os;
    r.trace.write_csv(os);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "iter,residual,objective,elapsed_ms");
}

TEST(PdsSolve, ResidualBelowStopAtConvergence) {
    const SplitProblem p = simple(3, fn::box(0, 1), half_sq_dist({2, -1, 0.5}), LinearOperator::identity(3));
    SolveOptions o;
    o.eps_stop = 1e-9;
    const SolveResult r = pds_solve(p, default_steps(1.0), o);
    ASSERT_EQ(r.status, SolveStatus::Converged);
    EXPECT_LE(r.trace.primal_residual.back(), 1e-9);
    EXPECT_NEAR(r.primal[0], 1.0, 1e-6);
    EXPECT_NEAR(r.primal[1], 0.0, 1e-6);
    EXPECT_NEAR(r.primal[2], 0.5, 1e-6);
}
