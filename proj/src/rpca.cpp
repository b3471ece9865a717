#include "erx/rpca.hpp"

#include "erx/error.hpp"
#include "erx/image.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <random>

namespace erx {

namespace {

using cplx = std::complex<double>;

// Unitary DFT matrix entries exp(-2 pi j k t / m) / sqrt(m), row-major k * m + t.
std::vector<cplx> dft_table(std::size_t m) {
    std::vector<cplx> w(m * m);
    const double s = 1.0 / std::sqrt(static_cast<double>(m));
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t t = 0; t < m; ++t) {
            const double ang = 2.0 * std::numbers::pi * static_cast<double>((k * t) % m) /
                               static_cast<double>(m);
            w[k * m + t] = s * cplx(std::cos(ang), -std::sin(ang));
        }
    return w;
}

// out = W in (conj = false) or conj(W) in, length m.
void dft_1d(const std::vector<cplx> &w, std::size_t m, const cplx *in, std::size_t stride_in,
            cplx *out, std::size_t stride_out, bool conj) {
    for (std::size_t k = 0; k < m; ++k) {
        cplx acc = 0.0;
        for (std::size_t t = 0; t < m; ++t)
            acc += (conj ? std::conj(w[k * m + t]) : w[k * m + t]) * in[t * stride_in];
        out[k * stride_out] = acc;
    }
}

// Transform of one column: 1D, or W X W^T for the column-major m x m array.
void column_transform(const std::vector<cplx> &w, std::size_t m, std::size_t dims,
                      std::vector<cplx> &buf, std::vector<cplx> &tmp, bool conj) {
    if (dims == 1) {
        tmp = buf;
        dft_1d(w, m, tmp.data(), 1, buf.data(), 1, conj);
        return;
    }
    tmp.resize(m * m);
    for (std::size_t c = 0; c < m; ++c)  // along each column (rows index)
        dft_1d(w, m, buf.data() + c * m, 1, tmp.data() + c * m, 1, conj);
    for (std::size_t r = 0; r < m; ++r)  // along each row
        dft_1d(w, m, tmp.data() + r, m, buf.data() + r, m, conj);
}

} // namespace

DftSplitOperator build_dft_split(std::size_t m, std::size_t n, std::size_t dims) {
    if (m == 0 || n == 0)
        throw InvalidInput("build_dft_split: dimensions must be positive");
    if (dims != 1 && dims != 2)
        throw InvalidInput("build_dft_split: only 1D and 2D transforms are supported");
    const std::size_t len = dims == 1 ? m : m * m;
    auto w = std::make_shared<const std::vector<cplx>>(dft_table(m));

    auto fwd = [w, m, n, dims, len](std::span<const double> x, std::span<double> y) {
        std::vector<cplx> buf(len), tmp;
        for (std::size_t col = 0; col < n; ++col) {
            for (std::size_t i = 0; i < len; ++i)
                buf[i] = x[col * len + i];
            column_transform(*w, m, dims, buf, tmp, false);
            for (std::size_t i = 0; i < len; ++i) {
                y[col * 2 * len + 2 * i] = buf[i].real();
                y[col * 2 * len + 2 * i + 1] = buf[i].imag();
            }
        }
    };
    auto adj = [w, m, n, dims, len](std::span<const double> y, std::span<double> x) {
        std::vector<cplx> buf(len), tmp;
        for (std::size_t col = 0; col < n; ++col) {
            for (std::size_t i = 0; i < len; ++i)
                buf[i] = cplx(y[col * 2 * len + 2 * i], y[col * 2 * len + 2 * i + 1]);
            column_transform(*w, m, dims, buf, tmp, true);
            for (std::size_t i = 0; i < len; ++i)
                x[col * len + i] = buf[i].real();
        }
    };
    return {LinearOperator(len * n, 2 * len * n, fwd, adj, "T"), m, n, dims};
}

DenseMatrix amplitude_spectrum(const DenseMatrix &x, const DftSplitOperator &t) {
    const std::size_t len = t.column_length();
    if (x.rows() != len || x.cols() != t.n)
        throw StructureError("amplitude_spectrum: matrix shape does not match the transform");
    const DenseVector tx = t.op(x.vec());
    DenseMatrix a(len, t.n);
    for (std::size_t i = 0; i < len * t.n; ++i)
        a.vec()[i] = std::hypot(tx[2 * i], tx[2 * i + 1]);
    return a;
}

double asnn(const DenseMatrix &x, const DftSplitOperator &t) {
    return nuclear_norm(amplitude_spectrum(x, t));
}

DenseVector circular_shift(std::span<const double> x, std::size_t k) {
    const std::size_t m = x.size();
    DenseVector out(m);
    for (std::size_t i = 0; i < m; ++i)
        out[(i + k) % m] = x[i];
    return out;
}

RpcaResult frpca_solve(const DenseMatrix &x, const RpcaConfig &cfg) {
    if (!(cfg.l1_eps >= 0.0))
        throw InvalidInput("frpca_solve: l1_eps must be nonnegative");
    if (!all_finite(x.vec()))
        throw InvalidInput("frpca_solve: non-finite entry in X");
    const std::size_t rows = x.rows(), cols = x.cols(), mn = rows * cols;

    // primal x = [l; s]
    const LinearOperator take_l = LinearOperator::selection(2 * mn, [&] {
        std::vector<std::size_t> idx(mn);
        for (std::size_t i = 0; i < mn; ++i)
            idx[i] = i;
        return idx;
    }());
    const LinearOperator take_s = LinearOperator::selection(2 * mn, [&] {
        std::vector<std::size_t> idx(mn);
        for (std::size_t i = 0; i < mn; ++i)
            idx[i] = mn + i;
        return idx;
    }());
    BlockOperatorBuilder sum({mn}, {mn, mn});
    sum.add(0, 0, LinearOperator::identity(mn)).add(0, 1, LinearOperator::identity(mn));

    LayeredNorm ln;
    LinearOperator a_op;
    if (cfg.mode == RpcaMode::SignalDomain) {
        ln.input_dim = mn;
        ln.layers = {Layer{NormKind::nuclear(rows, cols), {}}};
        a_op = take_l;
    } else {
        std::size_t m = rows;
        if (cfg.dims == 2) {
            m = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(rows))));
            if (m * m != rows)
                throw StructureError("frpca_solve: 2D mode needs square columns");
        }
        const DftSplitOperator t = build_dft_split(m, cols, cfg.dims);
        ln.input_dim = 2 * mn;
        ln.layers = {Layer{NormKind::l2(), GroupStructure::uniform(mn, 2)},
                     Layer{NormKind::nuclear(rows, cols), {}}};
        a_op = compose(t.op, take_l);
    }
    const RelaxedProblem rp =
        relax(ln, a_op,
              {GTerm{fn::l1_ball(cfg.l1_eps), take_s},
               GTerm{fn::singleton(DenseVector(x.vec().begin(), x.vec().end())), sum.build("L+S")}});

    SolveOptions so;
    so.eps_stop = cfg.eps_stop;
    so.max_iter = cfg.max_iter;
    so.objective_every = cfg.objective_every;
    const StepSizes steps = cfg.steps.value_or(default_steps(problem_f_norm(rp.problem)));
    SolveResult sr = pds_solve(rp.problem, steps, so);

    RpcaResult out;
    out.low_rank = DenseMatrix(rows, cols, DenseVector(sr.primal.begin(), sr.primal.begin() + static_cast<std::ptrdiff_t>(mn)));
    out.sparse = DenseMatrix(rows, cols, DenseVector(sr.primal.begin() + static_cast<std::ptrdiff_t>(mn),
                                                     sr.primal.begin() + static_cast<std::ptrdiff_t>(2 * mn)));
    out.trace = std::move(sr.trace);
    out.status = sr.status;
    out.classification = rp.classification;
    return out;
}

DenseMatrix gen_shifted_target(std::size_t shift, std::size_t m, std::size_t n) {
    if (n == 0 || shift * (n - 1) + 5 > m)
        throw InvalidInput("gen_shifted_target: support runs past row " + std::to_string(m));
    DenseMatrix t(m, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = shift * j; i < shift * j + 5; ++i)
            t(i, j) = 1.0;
    return t;
}

DenseMatrix gen_sparse_noise(const DenseMatrix &target, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0))
        throw InvalidInput("gen_sparse_noise: p must lie in [0, 1]");
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(p);
    DenseMatrix s(target.rows(), target.cols());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const bool hit = coin(rng);
        if (target.vec()[i] == 0.0 && hit)
            s.vec()[i] = 1.0;
    }
    return s;
}

std::uint64_t sweep_seed(std::uint64_t base, std::size_t shift, std::size_t p_index) {
    return base * 1000 + 10 * shift + p_index;
}

SweepRow run_rpca_cell(std::size_t shift, double p, std::uint64_t seed, std::size_t m,
                       std::size_t n, double eps_stop) {
    const DenseMatrix target = gen_shifted_target(shift, m, n);
    const DenseMatrix noise = gen_sparse_noise(target, p, seed);
    DenseMatrix x = target;
    for (std::size_t i = 0; i < x.size(); ++i)
        x.vec()[i] += noise.vec()[i];
    RpcaConfig cfg;
    cfg.l1_eps = norm1(noise.vec());
    cfg.eps_stop = eps_stop;
    cfg.seed = seed;
    cfg.mode = RpcaMode::SignalDomain;
    const RpcaResult sig = frpca_solve(x, cfg);
    cfg.mode = RpcaMode::FrequencyDomain;
    const RpcaResult freq = frpca_solve(x, cfg);
    return {shift, p, seed, psnr(sig.low_rank.vec(), target.vec()),
            psnr(freq.low_rank.vec(), target.vec())};
}

std::vector<SweepRow> run_rpca_sweep(std::uint64_t base_seed, double eps_stop) {
    static constexpr double ps[3] = {0.025, 0.05, 0.1};
    std::vector<SweepRow> rows;
    for (std::size_t shift = 0; shift < 3; ++shift)
        for (std::size_t k = 0; k < 3; ++k)
            rows.push_back(run_rpca_cell(shift, ps[k], sweep_seed(base_seed, shift, k), 43, 20,
                                         eps_stop));
    return rows;
}

void write_sweep_csv(std::ostream &os, const std::vector<SweepRow> &rows) {
    os << "shift,p,seed,rpca_psnr,frpca_psnr\n";
    os.precision(10);
    for (const SweepRow &r : rows)
        os << r.shift << ',' << r.p << ',' << r.seed << ',' << r.rpca_psnr << ','
           << r.frpca_psnr << '\n';
}

} // namespace erx
