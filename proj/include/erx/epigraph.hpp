#pragma once

#include "erx/linalg.hpp"
#include "erx/prox.hpp"

#include <span>

namespace erx {

/// A point (x, xi) of R^N x R.
struct EpiPoint {
    DenseVector x;
    double xi = 0.0;
};

/// Block-wise point: one xi entry per group.
struct BlockEpiPoint {
    DenseVector x;
    DenseVector xi;
};

/// Projection onto {(x, xi) : tau ||x||_2 <= xi}.
EpiPoint epi_project_l2(std::span<const double> x, double xi, double tau = 1.0);

/// Threshold lambda* with ||T_lambda(x)||_1 = xi + lambda. Requires ||x||_1 > xi
/// (InvalidInput otherwise).
double epi_l1_lambda_star(std::span<const double> x, double xi);

/// Projection onto {(x, xi) : ||x||_1 <= xi}.
EpiPoint epi_project_l1(std::span<const double> x, double xi);

/// Projection onto {(x, xi) : ||x||_inf <= xi}.
EpiPoint epi_project_linf(std::span<const double> x, double xi);

enum class SchattenP { One, Two, Inf };

/// Projection onto the epigraph of a Schatten norm, done on the singular
/// values.
std::pair<DenseMatrix, double> epi_project_schatten(const DenseMatrix &m, double xi, SchattenP p);

enum class EpiKind { L2, L1, LInf, Schatten };

/// Which epigraph each group of a block vector is projected onto. For L2 the
/// group weight is the scale tau; Schatten blocks are rows x cols column-major.
struct BlockEpigraph {
    GroupStructure gs;
    EpiKind kind = EpiKind::L2;
    SchattenP p = SchattenP::One;
    std::size_t rows = 0;
    std::size_t cols = 0;

    void validate() const;
};

BlockEpiPoint epi_project_blockwise(std::span<const double> x, std::span<const double> xi,
                                    const BlockEpigraph &be);

/// Same projection on a packed vector [x; xi], written to `out`.
void epi_project_blockwise_packed(std::span<const double> packed, const BlockEpigraph &be,
                                  std::span<double> out);

namespace fn {
/// Indicator of the block epigraph over a packed [x; xi] slice.
ProxFn block_epigraph(BlockEpigraph be);
} // namespace fn

} // namespace erx
