#include "erx/epigraph.hpp"

#include "erx/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace erx {

namespace {

double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

DenseVector sorted_abs(std::span<const double> x, bool descending) {
    DenseVector a(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        a[i] = std::abs(x[i]);
    if (descending)
        std::stable_sort(a.begin(), a.end(), std::greater<>());
    else
        std::stable_sort(a.begin(), a.end());
    return a;
}

} // namespace

EpiPoint epi_project_l2(std::span<const double> x, double xi, double tau) {
    if (!(tau > 0.0))
        throw InvalidInput("epi_project_l2: tau must be positive");
    const double n = norm2(x);
    if (tau * n <= xi)
        return {DenseVector(x.begin(), x.end()), xi};
    if (n <= -tau * xi)
        return {DenseVector(x.size(), 0.0), 0.0};
    const double alpha = (1.0 + tau * xi / n) / (1.0 + tau * tau);
    EpiPoint p{DenseVector(x.size()), alpha * tau * n};
    for (std::size_t i = 0; i < x.size(); ++i)
        p.x[i] = alpha * x[i];
    return p;
}

double epi_l1_lambda_star(std::span<const double> x, double xi) {
    const double total = norm1(x);
    if (!(total > xi))
        throw InvalidInput("epi_l1_lambda_star: requires ||x||_1 > xi");
    const DenseVector a = sorted_abs(x, true);
    const std::size_t n = a.size();
    if (xi < -a[0])
        return -xi;
    double s = 0.0;
    double best = -xi;
    for (std::size_t k = 1; k <= n; ++k) {
        s += a[k - 1];
        const double next = k < n ? a[k] : 0.0;
        const double lo = s - static_cast<double>(k + 1) * a[k - 1];
        const double hi = s - static_cast<double>(k + 1) * next;
        const double lam = (s - xi) / static_cast<double>(k + 1);
        if (lo <= xi && xi < hi)
            return lam;
        best = std::max(best, lam);
    }
    // Rounding can leave xi just outside every interval; the root is then the
    // largest candidate.
    return best;
}

EpiPoint epi_project_l1(std::span<const double> x, double xi) {
    if (norm1(x) <= xi)
        return {DenseVector(x.begin(), x.end()), xi};
    const double lam = epi_l1_lambda_star(x, xi);
    EpiPoint p{DenseVector(x.size()), xi + lam};
    soft_threshold(x, lam, p.x);
    return p;
}

EpiPoint epi_project_linf(std::span<const double> x, double xi) {
    const std::size_t n = x.size();
    if (norm_inf(x) <= xi)
        return {DenseVector(x.begin(), x.end()), xi};
    const DenseVector v = sorted_abs(x, false);
    // v is 1-based in the index below: v_k = v[k-1], v_0 = -inf, v_{N+1} = +inf.
    auto at = [&](std::size_t k) {
        if (k == 0)
            return -std::numeric_limits<double>::infinity();
        if (k == n + 1)
            return std::numeric_limits<double>::infinity();
        return v[k - 1];
    };
    double tail = 0.0;
    double chosen = std::numeric_limits<double>::quiet_NaN();
    double fallback = 0.0, fallback_gap = std::numeric_limits<double>::infinity();
    for (std::size_t nb = n + 1; nb >= 1; --nb) {
        if (nb <= n)
            tail += v[nb - 1];
        const double t = (xi + tail) / static_cast<double>(n - nb + 2);
        const double lo = at(nb - 1), hi = at(nb);
        if (lo < t && t <= hi) {
            chosen = t;
            break;
        }
        const double gap = std::max(lo - t, t - hi);
        if (gap < fallback_gap) {
            fallback_gap = gap;
            fallback = t;
        }
    }
    if (std::isnan(chosen))
        chosen = fallback;
    const double level = std::max(chosen, 0.0);
    EpiPoint p{DenseVector(n), level};
    for (std::size_t i = 0; i < n; ++i)
        p.x[i] = sign(x[i]) * std::min(std::abs(x[i]), level);
    return p;
}

std::pair<DenseMatrix, double> epi_project_schatten(const DenseMatrix &m, double xi,
                                                    SchattenP p) {
    const SvdResult s = svd_thin(m);
    EpiPoint e;
    switch (p) {
    case SchattenP::One: e = epi_project_l1(s.singular_values, xi); break;
    case SchattenP::Two: e = epi_project_l2(s.singular_values, xi, 1.0); break;
    case SchattenP::Inf: e = epi_project_linf(s.singular_values, xi); break;
    }
    // Feasible inputs come back untouched rather than through U S V^T.
    if (e.xi == xi && e.x == s.singular_values)
        return {m, xi};
    return {s.reconstruct(e.x), e.xi};
}

void BlockEpigraph::validate() const {
    gs.validate(gs.total());
    if (kind == EpiKind::Schatten) {
        for (std::size_t g = 0; g < gs.count(); ++g)
            if (gs.sizes[g] != rows * cols)
                throw StructureError("BlockEpigraph: Schatten block size differs from rows*cols");
    }
    if (kind == EpiKind::L2) {
        for (double w : gs.weights)
            if (!(w > 0.0))
                throw StructureError("BlockEpigraph: L2 scale must be positive");
    }
}

namespace {

void project_group(std::span<const double> x, double xi, const BlockEpigraph &be, double tau,
                   std::span<double> xo, double &xio) {
    EpiPoint e;
    switch (be.kind) {
    case EpiKind::L2: e = epi_project_l2(x, xi, tau); break;
    case EpiKind::L1: e = epi_project_l1(x, xi); break;
    case EpiKind::LInf: e = epi_project_linf(x, xi); break;
    case EpiKind::Schatten: {
        const DenseMatrix m(be.rows, be.cols, DenseVector(x.begin(), x.end()));
        auto [pm, pxi] = epi_project_schatten(m, xi, be.p);
        std::copy(pm.vec().begin(), pm.vec().end(), xo.begin());
        xio = pxi;
        return;
    }
    }
    std::copy(e.x.begin(), e.x.end(), xo.begin());
    xio = e.xi;
}

double group_value(std::span<const double> x, const BlockEpigraph &be, double tau) {
    switch (be.kind) {
    case EpiKind::L2: return tau * norm2(x);
    case EpiKind::L1: return norm1(x);
    case EpiKind::LInf: return norm_inf(x);
    case EpiKind::Schatten: {
        const DenseVector s = singular_values(DenseMatrix(be.rows, be.cols,
                                                          DenseVector(x.begin(), x.end())));
        switch (be.p) {
        case SchattenP::One: return norm1(s);
        case SchattenP::Two: return norm2(s);
        case SchattenP::Inf: return norm_inf(s);
        }
    }
    }
    return 0.0;
}

} // namespace

void epi_project_blockwise_packed(std::span<const double> packed, const BlockEpigraph &be,
                                  std::span<double> out) {
    const std::size_t nx = be.gs.total();
    const std::size_t ng = be.gs.count();
    if (packed.size() != nx + ng || out.size() != packed.size())
        throw StructureError("epi_project_blockwise: packed length differs from blocks + xi");
    for (std::size_t g = 0; g < ng; ++g) {
        const std::size_t off = be.gs.offsets[g], len = be.gs.sizes[g];
        const double tau = be.kind == EpiKind::L2 ? be.gs.weights[g] : 1.0;
        project_group(packed.subspan(off, len), packed[nx + g], be, tau, out.subspan(off, len),
                      out[nx + g]);
    }
}

BlockEpiPoint epi_project_blockwise(std::span<const double> x, std::span<const double> xi,
                                    const BlockEpigraph &be) {
    be.gs.validate(x.size());
    if (xi.size() != be.gs.count())
        throw StructureError("epi_project_blockwise: need one xi per group");
    DenseVector packed(x.begin(), x.end());
    packed.insert(packed.end(), xi.begin(), xi.end());
    DenseVector out(packed.size());
    epi_project_blockwise_packed(packed, be, out);
    BlockEpiPoint p;
    p.x.assign(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(x.size()));
    p.xi.assign(out.begin() + static_cast<std::ptrdiff_t>(x.size()), out.end());
    return p;
}

namespace fn {

ProxFn block_epigraph(BlockEpigraph be) {
    be.validate();
    auto prox = [be](std::span<const double> x, double, std::span<double> out) {
        epi_project_blockwise_packed(x, be, out);
    };
    auto value = [be](std::span<const double> x) {
        const std::size_t nx = be.gs.total();
        for (std::size_t g = 0; g < be.gs.count(); ++g) {
            const double tau = be.kind == EpiKind::L2 ? be.gs.weights[g] : 1.0;
            const double f = group_value(x.subspan(be.gs.offsets[g], be.gs.sizes[g]), be, tau);
            if (f > x[nx + g] + kIndicatorTol * std::max(1.0, std::abs(f)))
                return std::numeric_limits<double>::infinity();
        }
        return 0.0;
    };
    return {"epi", prox, value, true};
}

} // namespace fn

} // namespace erx
