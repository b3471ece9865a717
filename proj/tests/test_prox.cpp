#include "erx/error.hpp"
#include "erx/prox.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace erx;

namespace {

void expect_near(std::span<const double> a, std::span<const double> b, double tol) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_NEAR(a[i], b[i], tol) << "entry " << i;
}

// Minimises gamma f(y) + 0.5 ||x - y||^2 by a shrinking random pattern search.
DenseVector numeric_argmin(const ProxFn &f, std::span<const double> x, double gamma) {
    oracle::Rng rng(5);
    std::normal_distribution<double> nd;
    DenseVector y(x.begin(), x.end());
    auto j = [&](std::span<const double> v) {
        const double d = distance2(v, x);
        return gamma * f.value(v) + 0.5 * d * d;
    };
    double jy = j(y), h = 1.0;
    while (h > 1e-12) {
        bool moved = false;
        for (int t = 0; t < 200 && !moved; ++t) {
            DenseVector c(y);
            for (double &v : c)
                v += h * nd(rng);
            if (const double jc = j(c); jc < jy) {
                y = c;
                jy = jc;
                moved = true;
            }
        }
        if (!moved)
            h *= 0.5;
    }
    return y;
}

} // namespace

TEST(ProxL1, FormulaCases) {
    expect_near(prox_l1(DenseVector{2, -0.5, 0}, 1.0), DenseVector{1, 0, 0}, 0.0);
}

TEST(ProxL1, VanishingGammaIsIdentity) {
    const DenseVector x{0.3, -2.0, 5.0};
    expect_near(prox_l1(x, 1e-14), x, 1e-13);
}

TEST(ProxL1, MatchesNumericArgmin) {
    const DenseVector x{0.7, -1.3};
    expect_near(prox_l1(x, 0.4), numeric_argmin(fn::l1(), x, 0.4), 1e-6);
}

TEST(ProxL2, BoundaryAndInterior) {
    expect_near(prox_l2(DenseVector{3, 4}, 5.0), DenseVector{0, 0}, 0.0);
    expect_near(prox_l2(DenseVector{3, 4}, 1.0), DenseVector{2.4, 3.2}, 1e-15);
    expect_near(prox_l2(DenseVector{0, 0}, 1.0), DenseVector{0, 0}, 0.0);
    expect_near(prox_l2(DenseVector{3, 4}, 1.0), numeric_argmin(fn::l2(), DenseVector{3, 4}, 1.0), 1e-6);
}

TEST(ProxGroupL21, SingleGroupEqualsL2) {
    const DenseVector x{1, -2, 0.5};
    expect_near(prox_group_l21(x, GroupStructure::uniform(1, 3), 0.7), prox_l2(x, 0.7), 0.0);
}

TEST(ProxGroupL21, TwoGroups) {
    expect_near(prox_group_l21(DenseVector{3, 4, 0.1, 0}, GroupStructure::uniform(2, 2), 1.0),
                DenseVector{2.4, 3.2, 0, 0}, 1e-15);
}

TEST(ProxGroupL21, ZeroWeightLeavesGroup) {
    const GroupStructure gs = GroupStructure::from_sizes({2, 1}, {0.0, 1.0});
    expect_near(prox_group_l21(DenseVector{0.1, 0.2, 3}, gs, 1.0), DenseVector{0.1, 0.2, 2}, 1e-15);
}

TEST(ProxGroupL21, WeightScalesThreshold) {
    const GroupStructure gs = GroupStructure::from_sizes({2}, {0.5});
    expect_near(prox_group_l21(DenseVector{3, 4}, gs, 2.0), prox_l2(DenseVector{3, 4}, 1.0), 1e-15);
}

TEST(ProxGroupL21, StructureMismatchThrows) {
    EXPECT_THROW(prox_group_l21(DenseVector{1, 2, 3}, GroupStructure::uniform(2, 2), 1.0),
                 StructureError);
    GroupStructure gaps = GroupStructure::uniform(2, 2);
    gaps.offsets[1] = 3;
    EXPECT_THROW(gaps.validate(5), StructureError);
}

TEST(ProxLinf, SmallInputVanishes) {
    expect_near(prox_linf(DenseVector{0.5, 0.5}, 1.0), DenseVector{0, 0}, 0.0);
    expect_near(prox_linf(DenseVector{0.2, -0.3, 0.1}, 0.6), DenseVector{0, 0, 0}, 0.0);
}

TEST(ProxLinf, MatchesNumericArgmin) {
    expect_near(prox_linf(DenseVector{3, 0}, 1.0), DenseVector{2, 0}, 1e-15);
    expect_near(prox_linf(DenseVector{3, 0}, 1.0), numeric_argmin(fn::linf(), DenseVector{3, 0}, 1.0), 1e-6);
}

TEST(ProjectL2Ball, RadialAndInside) {
    expect_near(project_l2_ball(DenseVector{3, 4}, DenseVector{0, 0}, 1.0), DenseVector{0.6, 0.8}, 1e-15);
    expect_near(project_l2_ball(DenseVector{0.1, 0.2}, DenseVector{0, 0}, 1.0), DenseVector{0.1, 0.2}, 0.0);
    const DenseVector c{1, 1};
    const DenseVector p = project_l2_ball(DenseVector{4, 5}, c, 2.0);
    EXPECT_NEAR(distance2(p, c), 2.0, 1e-14);
}

TEST(ProjectL1Ball, Cases) {
    expect_near(project_l1_ball(DenseVector{0.2, -0.3}, 1.0), DenseVector{0.2, -0.3}, 0.0);
    expect_near(project_l1_ball(DenseVector{2, 0}, 1.0), DenseVector{1, 0}, 1e-15);
    expect_near(project_l1_ball(DenseVector{0.6, 0.6}, 1.0), DenseVector{0.5, 0.5}, 1e-15);
    const DenseVector x{3, -1, 0.5, 2};
    expect_near(project_l1_ball(x, 1.5), oracle::l1_ball_bisect(x, 1.5), 1e-12);
}

TEST(ProxNuclear, DiagonalAndLargeGamma) {
    const DenseMatrix d = DenseMatrix::from_rows({{3, 0}, {0, 1}});
    const DenseMatrix p = prox_nuclear(d, 1.0);
    EXPECT_LE((p - DenseMatrix::from_rows({{2, 0}, {0, 0}})).frobenius_norm(), 1e-14);
    EXPECT_EQ(prox_nuclear(d, 3.0).frobenius_norm(), 0.0);
}

TEST(ProxNuclear, BeatsRandomPerturbations) {
    const DenseMatrix m(4, 3, random_normal(12, 21));
    const double gamma = 0.8;
    const DenseMatrix p = prox_nuclear(m, gamma);
    auto j = [&](const DenseMatrix &y) {
        const double d = (y - m).frobenius_norm();
        return gamma * nuclear_norm(y) + 0.5 * d * d;
    };
    const double jp = j(p);
    for (std::uint64_t k = 0; k < 200; ++k) {
        DenseVector e = random_normal(12, 1000 + k);
        const double s = 1e-3 * static_cast<double>(1 + k % 50);
        DenseMatrix y = p;
        for (std::size_t i = 0; i < 12; ++i)
            y.vec()[i] += s * e[i];
        EXPECT_GE(j(y), jp - 1e-12);
    }
}

TEST(ProjectBox, Cases) {
    expect_near(project_box(DenseVector{-0.2, 0.5, 1.3}, 0.0, 1.0), DenseVector{0, 0.5, 1}, 0.0);
    expect_near(project_box(DenseVector{0.1, 0.9}, 0.0, 1.0), DenseVector{0.1, 0.9}, 0.0);
    EXPECT_THROW(project_box(DenseVector{0.0}, 1.0, 0.0), InvalidInput);
}

TEST(ProjectNonpositive, Cases) {
    expect_near(project_halfspace_nonpos(DenseVector{1, -1}), DenseVector{0, -1}, 0.0);
    expect_near(project_halfspace_nonpos(DenseVector{-2, 0}), DenseVector{-2, 0}, 0.0);
}

TEST(ProjectSingleton, ReturnsTarget) {
    const DenseVector t{1, 2};
    expect_near(project_singleton(DenseVector{5, -3}, t), t, 0.0);
    expect_near(project_singleton(t, t), t, 0.0);
}

TEST(ProxConjugate, MoreauIdentityForL1) {
    const DenseVector x{1.5, -0.2, 0.7, -3.0};
    for (double gamma : {0.1, 1.0, 4.0}) {
        const DenseVector c = prox_conjugate(fn::l1(), x, gamma);
        const DenseVector p = prox_l1(DenseVector{x[0] / gamma, x[1] / gamma, x[2] / gamma, x[3] / gamma}, 1.0 / gamma);
        for (std::size_t i = 0; i < x.size(); ++i)
            EXPECT_NEAR(c[i] + gamma * p[i], x[i], 1e-12);
    }
}

TEST(ProxConjugate, IndicatorOfOriginGivesIdentity) {
    const DenseVector x{0.4, -7.0};
    expect_near(prox_conjugate(fn::singleton(DenseVector{0, 0}), x, 2.5), x, 0.0);
}

TEST(ProxConjugate, L2ConjugateIsBallProjection) {
    const DenseVector x = random_normal(5, 3);
    expect_near(prox_conjugate(fn::l2(), x, 0.3), project_l2_ball(x, DenseVector(5, 0.0), 1.0), 1e-14);
}

TEST(ProxFamily, Nonexpansive) {
    oracle::Rng rng(17);
    for (std::size_t dim = 1; dim <= 6; ++dim)
        for (int rep = 0; rep < 20; ++rep)
            for (const oracle::ProxCase &pc : oracle::prox_catalog(rng, dim)) {
                const DenseVector a = random_normal(dim, rng()), b = random_normal(dim, rng());
                const DenseVector pa = pc.fn.eval(a, 0.7), pb = pc.fn.eval(b, 0.7);
                EXPECT_LE(distance2(pa, pb), distance2(a, b) + 1e-12) << pc.name;
            }
}

TEST(ProxOracle, CatalogPasses) {
    oracle::Rng rng(3);
    for (std::size_t dim = 1; dim <= 4; ++dim)
        for (const oracle::ProxCase &pc : oracle::prox_catalog(rng, dim)) {
            const DenseVector x = random_normal(dim, 70 + dim);
            const oracle::ProxOracleResult r = oracle::prox_argmin_check(pc, x, 0.6, rng);
            EXPECT_LE(r.violation, 1e-8) << pc.name;
            EXPECT_TRUE(r.feasible) << pc.name;
        }
}

TEST(ProxOracle, CatchesSignBugInSoftThreshold) {
    oracle::Rng rng(4);
    oracle::ProxCase pc = oracle::prox_catalog(rng, 3).front();
    ASSERT_EQ(pc.name, "l1");
    pc.fn.prox = [](std::span<const double> x, double g, std::span<double> out) {
        for (std::size_t i = 0; i < x.size(); ++i)
            out[i] = -std::copysign(std::max(std::abs(x[i]) - g, 0.0), x[i]);
    };
    const oracle::ProxOracleResult r = oracle::prox_argmin_check(pc, DenseVector{2.0, -1.5, 0.3}, 0.5, rng);
    EXPECT_GT(r.violation, 1e-8);
}

TEST(ProxFn, IndicatorValues) {
    EXPECT_EQ(fn::box(0, 1).value(DenseVector{0.5}), 0.0);
    EXPECT_TRUE(std::isinf(fn::box(0, 1).value(DenseVector{1.5})));
    EXPECT_TRUE(fn::l1_ball(1.0).indicator);
    EXPECT_FALSE(fn::l1().indicator);
    EXPECT_DOUBLE_EQ(fn::nuclear(2, 2).value(DenseVector{3, 0, 0, 1}), 4.0);
}
