#pragma once

#include "erx/layered.hpp"
#include "erx/linalg.hpp"
#include "erx/pds.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace erx {

/// Column-wise normalized DFT with real and imaginary parts interleaved per
/// frequency bin: column n of an (m^dims) x n matrix maps to 2 m^dims
/// entries (re_0, im_0, re_1, im_1, ...). For dims = 2 every column is the
/// column-major vec of an m x m array.
struct DftSplitOperator {
    LinearOperator op;
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t dims = 1;

    /// Samples per column, m^dims.
    std::size_t column_length() const { return dims == 1 ? m : m * m; }
};

DftSplitOperator build_dft_split(std::size_t m, std::size_t n, std::size_t dims = 1);

/// Entrywise DFT magnitudes, as a column_length x n matrix.
DenseMatrix amplitude_spectrum(const DenseMatrix &x, const DftSplitOperator &t);

/// Nuclear norm of the amplitude spectrum.
double asnn(const DenseMatrix &x, const DftSplitOperator &t);

/// Circular shift of a vector by k samples (towards higher indices).
DenseVector circular_shift(std::span<const double> x, std::size_t k);

enum class RpcaMode { SignalDomain, FrequencyDomain };

struct RpcaConfig {
    RpcaMode mode = RpcaMode::FrequencyDomain;
    /// Radius of the l1 ball holding S.
    double l1_eps = 0.0;
    double eps_stop = 1e-5;
    std::size_t max_iter = 50000;
    std::uint64_t seed = 0;
    std::size_t dims = 1;
    std::optional<StepSizes> steps;
    std::size_t objective_every = 0;
};

struct RpcaResult {
    DenseMatrix low_rank;
    DenseMatrix sparse;
    SolveTrace trace;
    SolveStatus status = SolveStatus::MaxIterations;
    Classification classification;
};

/// min ||L||_* (signal domain) or ||T L||_{2,*} relaxed (frequency domain)
/// subject to ||S||_1 <= l1_eps and L + S = X.
RpcaResult frpca_solve(const DenseMatrix &x, const RpcaConfig &cfg);

/// Binary target: [L]_{i,j} = 1 for shift*j <= i < shift*j + 5 (0-based).
DenseMatrix gen_shifted_target(std::size_t shift, std::size_t m, std::size_t n);

/// Ones with probability p wherever the target is zero.
DenseMatrix gen_sparse_noise(const DenseMatrix &target, double p, std::uint64_t seed);

struct SweepRow {
    std::size_t shift;
    double p;
    std::uint64_t seed;
    double rpca_psnr;
    double frpca_psnr;
};

/// Fixed seed of the (shift, p) experiment cell.
std::uint64_t sweep_seed(std::uint64_t base, std::size_t shift, std::size_t p_index);

/// One cell: both modes on the m x n shifted target with oracle l1 radius.
SweepRow run_rpca_cell(std::size_t shift, double p, std::uint64_t seed, std::size_t m = 43,
                       std::size_t n = 20, double eps_stop = 1e-5);

/// The 3 x 3 grid over shift {0, 1, 2} and p {0.025, 0.05, 0.1}.
std::vector<SweepRow> run_rpca_sweep(std::uint64_t base_seed, double eps_stop = 1e-5);

void write_sweep_csv(std::ostream &os, const std::vector<SweepRow> &rows);

} // namespace erx
