#include "erx/error.hpp"
#include "erx/image.hpp"
#include "erx/rpca.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace erx;

TEST(DftSplit, ImpulseHasFlatSpectrum) {
    const DftSplitOperator t = build_dft_split(4, 1);
    DenseMatrix x(4, 1);
    x(2, 0) = 1.0;
    const DenseMatrix a = amplitude_spectrum(x, t);
    for (std::size_t k = 0; k < 4; ++k)
        EXPECT_NEAR(a(k, 0), 0.5, 1e-15);
}

TEST(DftSplit, ConstantConcentratesAtDc) {
    const DftSplitOperator t = build_dft_split(5, 1);
    const DenseMatrix a = amplitude_spectrum(DenseMatrix(5, 1, 2.0), t);
    EXPECT_NEAR(a(0, 0), 2.0 * std::sqrt(5.0), 1e-13);
    for (std::size_t k = 1; k < 5; ++k)
        EXPECT_NEAR(a(k, 0), 0.0, 1e-13);
}

TEST(DftSplit, InterleavedLayout) {
    const DftSplitOperator t = build_dft_split(4, 2);
    EXPECT_EQ(t.op.in_dim(), 8u);
    EXPECT_EQ(t.op.out_dim(), 16u);
    DenseVector x(8, 0.0);
    x[4 + 1] = 1.0;  // column 1, sample 1
    const DenseVector y = t.op(x);
    // bin k of sample 1: exp(-2 pi j k / 4) / 2
    EXPECT_NEAR(y[8 + 0], 0.5, 1e-15);
    EXPECT_NEAR(y[8 + 1], 0.0, 1e-15);
    EXPECT_NEAR(y[8 + 2], 0.0, 1e-15);
    EXPECT_NEAR(y[8 + 3], -0.5, 1e-15);
    for (std::size_t i = 0; i < 8; ++i)
        EXPECT_EQ(y[i], 0.0);
}

TEST(DftSplit, UnitaryAndAdjoint) {
    for (std::size_t dims : {1u, 2u}) {
        const DftSplitOperator t = build_dft_split(6, 3, dims);
        EXPECT_TRUE(adjoint_check(t.op)) << dims;
        const DenseVector x = random_normal(t.op.in_dim(), 4);
        EXPECT_NEAR(norm2(t.op(x)), norm2(x), 1e-12) << dims;
        // T^T T = I on real input
        const DenseVector back = t.op.adjoint(t.op(x));
        for (std::size_t i = 0; i < x.size(); ++i)
            EXPECT_NEAR(back[i], x[i], 1e-12);
    }
    EXPECT_THROW(build_dft_split(0, 2), InvalidInput);
    EXPECT_THROW(build_dft_split(4, 2, 3), InvalidInput);
}

TEST(DftSplit, TwoDimensionalImpulse) {
    const DftSplitOperator t = build_dft_split(3, 1, 2);
    EXPECT_EQ(t.column_length(), 9u);
    DenseMatrix x(9, 1);
    x(4, 0) = 1.0;
    const DenseMatrix a = amplitude_spectrum(x, t);
    for (std::size_t k = 0; k < 9; ++k)
        EXPECT_NEAR(a(k, 0), 1.0 / 3.0, 1e-15);
}

TEST(Asnn, ShiftInvariance) {
    const std::size_t m = 16;
    const DftSplitOperator t = build_dft_split(m, 1);
    const DenseVector col = random_normal(m, 3);
    const DenseMatrix a0 = amplitude_spectrum(DenseMatrix(m, 1, col), t);
    for (std::size_t k : {1u, 5u, 15u}) {
        const DenseMatrix ak = amplitude_spectrum(DenseMatrix(m, 1, circular_shift(col, k)), t);
        for (std::size_t i = 0; i < m; ++i)
            EXPECT_NEAR(ak(i, 0), a0(i, 0), 1e-12);
    }
    EXPECT_EQ(circular_shift(DenseVector{1, 2, 3}, 1), (DenseVector{3, 1, 2}));
}

TEST(Asnn, ShiftedImpulsesAreRankOne) {
    const std::size_t m = 8;
    DenseMatrix x(m, 2);
    x(0, 0) = 1.0;
    x(1, 1) = 1.0;
    EXPECT_NEAR(nuclear_norm(x), 2.0, 1e-14);
    EXPECT_NEAR(asnn(x, build_dft_split(m, 2)), std::sqrt(2.0), 1e-14);
}

TEST(Generators, ShiftedTarget) {
    const DenseMatrix t = gen_shifted_target(2, 12, 4);
    for (std::size_t j = 0; j < 4; ++j) {
        double s = 0;
        for (std::size_t i = 0; i < 12; ++i)
            s += t(i, j);
        EXPECT_EQ(s, 5.0);
        EXPECT_EQ(t(2 * j, j), 1.0);
        EXPECT_EQ(t(2 * j + 4, j), 1.0);
    }
    EXPECT_NEAR(nuclear_norm(gen_shifted_target(0, 10, 3)), std::sqrt(15.0), 1e-13);
    EXPECT_THROW(gen_shifted_target(2, 10, 4), InvalidInput);
}

TEST(Generators, SparseNoise) {
    const DenseMatrix t = gen_shifted_target(1, 43, 20);
    EXPECT_EQ(norm1(gen_sparse_noise(t, 0.0, 1).vec()), 0.0);
    const DenseMatrix all = gen_sparse_noise(t, 1.0, 1);
    for (std::size_t i = 0; i < t.size(); ++i)
        EXPECT_EQ(all.vec()[i], 1.0 - t.vec()[i]);
    const DenseMatrix s = gen_sparse_noise(t, 0.1, 7);
    const double zeros = static_cast<double>(t.size()) - norm1(t.vec());
    EXPECT_NEAR(norm1(s.vec()) / zeros, 0.1, 0.03);
    EXPECT_EQ(s, gen_sparse_noise(t, 0.1, 7));
    EXPECT_NE(s, gen_sparse_noise(t, 0.1, 8));
    EXPECT_THROW(gen_sparse_noise(t, 1.5, 1), InvalidInput);
}

TEST(FrpcaSolve, ZeroBudgetKeepsInput) {
    DenseMatrix x(6, 4);
    for (std::size_t j = 0; j < 4; ++j)
        for (std::size_t i = 0; i < 6; ++i)
            x(i, j) = (1.0 + static_cast<double>(i)) * (0.5 - static_cast<double>(j));
    for (RpcaMode mode : {RpcaMode::SignalDomain, RpcaMode::FrequencyDomain}) {
        RpcaConfig cfg;
        cfg.mode = mode;
        cfg.l1_eps = 0.0;
        cfg.eps_stop = 1e-9;
        const RpcaResult r = frpca_solve(x, cfg);
        EXPECT_LE((r.low_rank - x).frobenius_norm(), 1e-5);
        EXPECT_LE(r.sparse.frobenius_norm(), 1e-5);
    }
}

TEST(FrpcaSolve, DecompositionSumsToInput) {
    const DenseMatrix t = gen_shifted_target(1, 24, 10);
    DenseMatrix x = t;
    const DenseMatrix s = gen_sparse_noise(t, 0.05, 3);
    for (std::size_t i = 0; i < x.size(); ++i)
        x.vec()[i] += s.vec()[i];
    RpcaConfig cfg;
    cfg.l1_eps = norm1(s.vec());
    const RpcaResult r = frpca_solve(x, cfg);
    EXPECT_EQ(r.classification.cls, ErxClass::ConvexRelaxationOnly);
    DenseMatrix sum = r.low_rank;
    for (std::size_t i = 0; i < sum.size(); ++i)
        sum.vec()[i] += r.sparse.vec()[i];
    EXPECT_LE((sum - x).frobenius_norm(), 1e-4);
    EXPECT_LE(norm1(r.sparse.vec()), cfg.l1_eps * (1 + 1e-4));
}

TEST(FrpcaSolve, UnshiftedTargetRecoveredBySignalDomain) {
    const SweepRow row = run_rpca_cell(0, 0.025, sweep_seed(1, 0, 0));
    EXPECT_GE(row.rpca_psnr, 60.0);
}

TEST(FrpcaSolve, RejectsBadInput) {
    RpcaConfig cfg;
    cfg.l1_eps = -1.0;
    EXPECT_THROW(frpca_solve(DenseMatrix(4, 2), cfg), InvalidInput);
    cfg.l1_eps = 0.0;
    cfg.dims = 2;
    EXPECT_THROW(frpca_solve(DenseMatrix(5, 2), cfg), StructureError);
}

TEST(Sweep, CsvHeaderAndSeeds) {
    EXPECT_NE(sweep_seed(1, 0, 1), sweep_seed(1, 1, 0));
    std::ostringstream os;
    write_sweep_csv(os, {SweepRow{1, 0.05, 7, 20.5, 30.25}});
    EXPECT_EQ(os.str(), "shift,p,seed,rpca_psnr,frpca_psnr\n1,0.05,7,20.5,30.25\n");
}
