#include "erx/linalg.hpp"

#include "erx/error.hpp"

#include <algorithm>
#include <memory>
#include <cmath>
#include <numeric>
#include <random>

namespace erx {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) {
    // scaled accumulation so tiny/huge entries do not under/overflow
    double scale = 0.0, ssq = 1.0;
    for (double v : a) {
        if (v == 0.0)
            continue;
        const double av = std::abs(v);
        if (scale < av) {
            ssq = 1.0 + ssq * (scale / av) * (scale / av);
            scale = av;
        } else {
            ssq += (av / scale) * (av / scale);
        }
    }
    return scale * std::sqrt(ssq);
}

double norm1(std::span<const double> a) {
    double s = 0.0;
    for (double v : a)
        s += std::abs(v);
    return s;
}

double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a)
        m = std::max(m, std::abs(v));
    return m;
}

double distance2(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

bool all_finite(std::span<const double> a) {
    return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------
// DenseMatrix

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> col_major)
    : rows_(rows), cols_(cols), data_(std::move(col_major)) {
    if (data_.size() != rows * cols)
        throw StructureError("DenseMatrix: data length does not match rows*cols");
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    DenseMatrix m(r, c);
    std::size_t i = 0;
    for (const auto &row : rows) {
        if (row.size() != c)
            throw StructureError("DenseMatrix::from_rows: ragged rows");
        std::size_t j = 0;
        for (double v : row)
            m(i, j++) = v;
        ++i;
    }
    return m;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> d) {
    DenseMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        m(i, i) = d[i];
    return m;
}

DenseMatrix DenseMatrix::transpose() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t c = 0; c < cols_; ++c)
        for (std::size_t r = 0; r < rows_; ++r)
            t(c, r) = (*this)(r, c);
    return t;
}

DenseMatrix operator*(const DenseMatrix &a, const DenseMatrix &b) {
    if (a.cols_ != b.rows_)
        throw StructureError("DenseMatrix product: inner dimensions differ");
    DenseMatrix p(a.rows_, b.cols_);
    for (std::size_t j = 0; j < b.cols_; ++j)
        for (std::size_t k = 0; k < a.cols_; ++k) {
            const double bkj = b(k, j);
            if (bkj == 0.0)
                continue;
            for (std::size_t i = 0; i < a.rows_; ++i)
                p(i, j) += a(i, k) * bkj;
        }
    return p;
}

DenseMatrix operator-(const DenseMatrix &a, const DenseMatrix &b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
        throw StructureError("DenseMatrix difference: shapes differ");
    DenseMatrix d = a;
    for (std::size_t i = 0; i < d.data_.size(); ++i)
        d.data_[i] -= b.data_[i];
    return d;
}

// ---------------------------------------------------------------------------
// SVD

namespace {

struct JacobiOutput {
    DenseMatrix w;  // m x n, orthogonal columns
    DenseMatrix v;  // n x n, accumulated rotations
};

// Hestenes one-sided Jacobi on the columns of a (m >= n assumed by caller).
JacobiOutput one_sided_jacobi(DenseMatrix a, bool want_v) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    DenseMatrix v = want_v ? DenseMatrix::identity(n) : DenseMatrix();
    constexpr double eps = 1e-15;
    constexpr int max_sweeps = 80;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                auto cp = a.col(p);
                auto cq = a.col(q);
                for (std::size_t i = 0; i < m; ++i) {
                    alpha += cp[i] * cp[i];
                    beta += cq[i] * cq[i];
                    gamma += cp[i] * cq[i];
                }
                if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta))
                    continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double xp = cp[i], xq = cq[i];
                    cp[i] = c * xp - s * xq;
                    cq[i] = s * xp + c * xq;
                }
                if (want_v) {
                    auto vp = v.col(p);
                    auto vq = v.col(q);
                    for (std::size_t i = 0; i < n; ++i) {
                        const double xp = vp[i], xq = vq[i];
                        vp[i] = c * xp - s * xq;
                        vq[i] = s * xp + c * xq;
                    }
                }
            }
        }
        if (!rotated)
            break;
    }
    return {std::move(a), std::move(v)};
}

void validate_svd_input(const DenseMatrix &m) {
    if (m.rows() == 0 || m.cols() == 0)
        throw InvalidInput("svd_thin: matrix must have at least one row and column");
    if (!all_finite(m.vec()))
        throw InvalidInput("svd_thin: non-finite entry");
}

// Replaces the columns of `u` flagged in `empty` by unit vectors orthogonal to
// all other columns (modified Gram-Schmidt against the canonical basis).
void complete_orthonormal(DenseMatrix &u, const std::vector<bool> &empty) {
    const std::size_t m = u.rows();
    std::size_t candidate = 0;
    for (std::size_t j = 0; j < u.cols(); ++j) {
        if (!empty[j])
            continue;
        while (candidate < m) {
            DenseVector e(m, 0.0);
            e[candidate++] = 1.0;
            for (int pass = 0; pass < 2; ++pass)
                for (std::size_t k = 0; k < u.cols(); ++k) {
                    if (k == j || (empty[k] && k > j))
                        continue;
                    const double proj = dot(u.col(k), e);
                    for (std::size_t i = 0; i < m; ++i)
                        e[i] -= proj * u.col(k)[i];
                }
            const double len = norm2(e);
            if (len > 1e-8) {
                for (std::size_t i = 0; i < m; ++i)
                    u.col(j)[i] = e[i] / len;
                break;
            }
        }
    }
}

SvdResult svd_tall(const DenseMatrix &a) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    auto [w, v] = one_sided_jacobi(a, true);

    DenseVector sigma(n);
    for (std::size_t j = 0; j < n; ++j)
        sigma[j] = norm2(w.col(j));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

    const double smax = sigma[order[0]];
    const double floor = smax * 1e-15 * static_cast<double>(m);

    SvdResult r{DenseMatrix(m, n), DenseVector(n), DenseMatrix(n, n)};
    std::vector<bool> empty(n, false);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = order[k];
        r.singular_values[k] = sigma[j];
        if (sigma[j] > floor && sigma[j] > 0.0) {
            for (std::size_t i = 0; i < m; ++i)
                r.u(i, k) = w(i, j) / sigma[j];
        } else {
            empty[k] = true;
        }
        for (std::size_t i = 0; i < n; ++i)
            r.vt(k, i) = v(i, j);
    }
    if (std::find(empty.begin(), empty.end(), true) != empty.end())
        complete_orthonormal(r.u, empty);
    return r;
}

} // namespace

SvdResult svd_thin(const DenseMatrix &m) {
    validate_svd_input(m);
    if (m.rows() >= m.cols())
        return svd_tall(m);
    // A^T = U' S V'^T  =>  A = V' S U'^T
    SvdResult t = svd_tall(m.transpose());
    return {t.vt.transpose(), std::move(t.singular_values), t.u.transpose()};
}

DenseVector singular_values(const DenseMatrix &m) {
    validate_svd_input(m);
    DenseMatrix a = m.rows() >= m.cols() ? m : m.transpose();
    auto out = one_sided_jacobi(std::move(a), false);
    DenseVector s(out.w.cols());
    for (std::size_t j = 0; j < s.size(); ++j)
        s[j] = norm2(out.w.col(j));
    std::sort(s.begin(), s.end(), std::greater<>());
    return s;
}

double nuclear_norm(const DenseMatrix &m) {
    const DenseVector s = singular_values(m);
    return std::accumulate(s.begin(), s.end(), 0.0);
}

DenseMatrix SvdResult::reconstruct(std::span<const double> s) const {
    const std::size_t m = u.rows();
    const std::size_t n = vt.cols();
    const std::size_t k = s.size();
    DenseMatrix out(m, n);
    for (std::size_t r = 0; r < k; ++r) {
        if (s[r] == 0.0)
            continue;
        for (std::size_t j = 0; j < n; ++j) {
            const double f = s[r] * vt(r, j);
            if (f == 0.0)
                continue;
            for (std::size_t i = 0; i < m; ++i)
                out(i, j) += u(i, r) * f;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// LinearOperator

LinearOperator::LinearOperator(std::size_t in_dim, std::size_t out_dim, Apply forward,
                               Apply adjoint, std::string name)
    : in_dim_(in_dim), out_dim_(out_dim), forward_(std::move(forward)),
      adjoint_(std::move(adjoint)), name_(std::move(name)) {}

void LinearOperator::apply(std::span<const double> x, std::span<double> out) const {
    if (x.size() != in_dim_ || out.size() != out_dim_)
        throw StructureError("LinearOperator '" + name_ + "': forward dimension mismatch");
    forward_(x, out);
}

void LinearOperator::apply_adjoint(std::span<const double> y, std::span<double> out) const {
    if (y.size() != out_dim_ || out.size() != in_dim_)
        throw StructureError("LinearOperator '" + name_ + "': adjoint dimension mismatch");
    adjoint_(y, out);
}

DenseVector LinearOperator::operator()(std::span<const double> x) const {
    DenseVector out(out_dim_);
    apply(x, out);
    return out;
}

DenseVector LinearOperator::adjoint(std::span<const double> y) const {
    DenseVector out(in_dim_);
    apply_adjoint(y, out);
    return out;
}

LinearOperator LinearOperator::transposed() const {
    return {out_dim_, in_dim_, adjoint_, forward_, name_ + "^T"};
}

DenseMatrix LinearOperator::to_dense() const {
    DenseMatrix m(out_dim_, in_dim_);
    DenseVector e(in_dim_, 0.0);
    for (std::size_t j = 0; j < in_dim_; ++j) {
        e[j] = 1.0;
        apply(e, m.col(j));
        e[j] = 0.0;
    }
    return m;
}

LinearOperator LinearOperator::identity(std::size_t n) {
    auto copy = [](std::span<const double> x, std::span<double> y) {
        std::copy(x.begin(), x.end(), y.begin());
    };
    return {n, n, copy, copy, "I"};
}

LinearOperator LinearOperator::zero(std::size_t in_dim, std::size_t out_dim) {
    auto fill = [](std::span<const double>, std::span<double> y) {
        std::fill(y.begin(), y.end(), 0.0);
    };
    return {in_dim, out_dim, fill, fill, "O"};
}

LinearOperator LinearOperator::diagonal(DenseVector d) {
    const std::size_t n = d.size();
    auto apply = [d = std::move(d)](std::span<const double> x, std::span<double> y) {
        for (std::size_t i = 0; i < d.size(); ++i)
            y[i] = d[i] * x[i];
    };
    return {n, n, apply, apply, "diag"};
}

LinearOperator LinearOperator::from_matrix(DenseMatrix m) {
    const std::size_t rows = m.rows(), cols = m.cols();
    auto mat = std::make_shared<const DenseMatrix>(std::move(m));
    auto fwd = [mat](std::span<const double> x, std::span<double> y) {
        std::fill(y.begin(), y.end(), 0.0);
        for (std::size_t j = 0; j < mat->cols(); ++j) {
            const double xj = x[j];
            auto c = mat->col(j);
            for (std::size_t i = 0; i < mat->rows(); ++i)
                y[i] += c[i] * xj;
        }
    };
    auto adj = [mat](std::span<const double> y, std::span<double> x) {
        for (std::size_t j = 0; j < mat->cols(); ++j)
            x[j] = dot(mat->col(j), y);
    };
    return {cols, rows, fwd, adj, "matrix"};
}

LinearOperator LinearOperator::selection(std::size_t in_dim, std::vector<std::size_t> indices) {
    for (std::size_t i : indices)
        if (i >= in_dim)
            throw StructureError("selection: index out of range");
    const std::size_t out_dim = indices.size();
    auto idx = std::make_shared<const std::vector<std::size_t>>(std::move(indices));
    auto fwd = [idx](std::span<const double> x, std::span<double> y) {
        for (std::size_t i = 0; i < idx->size(); ++i)
            y[i] = x[(*idx)[i]];
    };
    auto adj = [idx](std::span<const double> y, std::span<double> x) {
        std::fill(x.begin(), x.end(), 0.0);
        for (std::size_t i = 0; i < idx->size(); ++i)
            x[(*idx)[i]] += y[i];
    };
    return {in_dim, out_dim, fwd, adj, "select"};
}

LinearOperator LinearOperator::permutation(std::vector<std::size_t> target, std::string name) {
    const std::size_t n = target.size();
    std::vector<bool> hit(n, false);
    for (std::size_t t : target) {
        if (t >= n || hit[t])
            throw StructureError("permutation: target is not a bijection");
        hit[t] = true;
    }
    auto tgt = std::make_shared<const std::vector<std::size_t>>(std::move(target));
    auto fwd = [tgt](std::span<const double> x, std::span<double> y) {
        for (std::size_t i = 0; i < tgt->size(); ++i)
            y[(*tgt)[i]] = x[i];
    };
    auto adj = [tgt](std::span<const double> y, std::span<double> x) {
        for (std::size_t i = 0; i < tgt->size(); ++i)
            x[i] = y[(*tgt)[i]];
    };
    return {n, n, fwd, adj, name.empty() ? "P" : std::move(name)};
}

LinearOperator compose(const LinearOperator &a, const LinearOperator &b) {
    if (a.in_dim() != b.out_dim())
        throw StructureError("compose: '" + a.name() + "' input does not match '" + b.name() +
                             "' output");
    const std::size_t mid = b.out_dim();
    auto fwd = [a, b, mid](std::span<const double> x, std::span<double> y) {
        DenseVector t(mid);
        b.apply(x, t);
        a.apply(t, y);
    };
    auto adj = [a, b, mid](std::span<const double> y, std::span<double> x) {
        DenseVector t(mid);
        a.apply_adjoint(y, t);
        b.apply_adjoint(t, x);
    };
    return {b.in_dim(), a.out_dim(), fwd, adj, a.name() + "*" + b.name()};
}

LinearOperator scale(const LinearOperator &a, double s) {
    auto fwd = [a, s](std::span<const double> x, std::span<double> y) {
        a.apply(x, y);
        for (double &v : y)
            v *= s;
    };
    auto adj = [a, s](std::span<const double> y, std::span<double> x) {
        a.apply_adjoint(y, x);
        for (double &v : x)
            v *= s;
    };
    return {a.in_dim(), a.out_dim(), fwd, adj, a.name()};
}

LinearOperator kron_identity(const LinearOperator &a, std::size_t copies) {
    const std::size_t ni = a.in_dim(), no = a.out_dim();
    auto fwd = [a, copies, ni, no](std::span<const double> x, std::span<double> y) {
        for (std::size_t c = 0; c < copies; ++c)
            a.apply(x.subspan(c * ni, ni), y.subspan(c * no, no));
    };
    auto adj = [a, copies, ni, no](std::span<const double> y, std::span<double> x) {
        for (std::size_t c = 0; c < copies; ++c)
            a.apply_adjoint(y.subspan(c * no, no), x.subspan(c * ni, ni));
    };
    return {ni * copies, no * copies, fwd, adj, "I(x)" + a.name()};
}

// ---------------------------------------------------------------------------
// BlockOperatorBuilder

BlockOperatorBuilder::BlockOperatorBuilder(std::vector<std::size_t> row_sizes,
                                           std::vector<std::size_t> col_sizes)
    : row_sizes_(std::move(row_sizes)), col_sizes_(std::move(col_sizes)) {
    row_offsets_.assign(row_sizes_.size() + 1, 0);
    col_offsets_.assign(col_sizes_.size() + 1, 0);
    std::partial_sum(row_sizes_.begin(), row_sizes_.end(), row_offsets_.begin() + 1);
    std::partial_sum(col_sizes_.begin(), col_sizes_.end(), col_offsets_.begin() + 1);
}

BlockOperatorBuilder &BlockOperatorBuilder::add(std::size_t row, std::size_t col,
                                                LinearOperator op) {
    if (row >= row_sizes_.size() || col >= col_sizes_.size())
        throw StructureError("BlockOperatorBuilder: block index out of range");
    if (op.out_dim() != row_sizes_[row] || op.in_dim() != col_sizes_[col])
        throw StructureError("BlockOperatorBuilder: block (" + std::to_string(row) + "," +
                             std::to_string(col) + ") '" + op.name() + "' has wrong shape");
    entries_.push_back({row, col, std::move(op)});
    return *this;
}

LinearOperator BlockOperatorBuilder::build(std::string name) const {
    auto entries = std::make_shared<const std::vector<Entry>>(entries_);
    auto ro = row_offsets_, co = col_offsets_;
    auto rs = row_sizes_, cs = col_sizes_;
    const std::size_t in_dim = co.back(), out_dim = ro.back();

    auto fwd = [=](std::span<const double> x, std::span<double> y) {
        std::fill(y.begin(), y.end(), 0.0);
        DenseVector tmp;
        for (const Entry &e : *entries) {
            tmp.resize(rs[e.row]);
            e.op.apply(x.subspan(co[e.col], cs[e.col]), tmp);
            double *dst = y.data() + ro[e.row];
            for (std::size_t i = 0; i < tmp.size(); ++i)
                dst[i] += tmp[i];
        }
    };
    auto adj = [=](std::span<const double> y, std::span<double> x) {
        std::fill(x.begin(), x.end(), 0.0);
        DenseVector tmp;
        for (const Entry &e : *entries) {
            tmp.resize(cs[e.col]);
            e.op.apply_adjoint(y.subspan(ro[e.row], rs[e.row]), tmp);
            double *dst = x.data() + co[e.col];
            for (std::size_t i = 0; i < tmp.size(); ++i)
                dst[i] += tmp[i];
        }
    };
    return {in_dim, out_dim, fwd, adj, std::move(name)};
}

// ---------------------------------------------------------------------------

DenseVector random_normal(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    DenseVector v(n);
    for (double &x : v)
        x = nd(rng);
    return v;
}

double operator_norm(const LinearOperator &op, std::size_t iters, double tol, std::uint64_t seed) {
    if (op.in_dim() == 0)
        throw InvalidInput("operator_norm: operator has empty domain");
    DenseVector x = random_normal(op.in_dim(), seed);
    DenseVector ax(op.out_dim()), atax(op.in_dim());

    double nx = norm2(x);
    for (double &v : x)
        v /= nx;

    double estimate = 0.0;
    for (std::size_t k = 0; k < iters; ++k) {
        op.apply(x, ax);
        const double current = norm2(ax);
        op.apply_adjoint(ax, atax);
        const double n = norm2(atax);
        if (n == 0.0)
            return 0.0;
        const bool done = k > 0 && std::abs(current - estimate) <= tol * std::max(current, 1e-300);
        estimate = current;
        if (done)
            break;
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = atax[i] / n;
    }
    return estimate;
}

bool adjoint_check(const LinearOperator &op, std::size_t trials, double rel_tol,
                   std::uint64_t seed) {
    for (std::size_t t = 0; t < trials; ++t) {
        const DenseVector x = random_normal(op.in_dim(), seed + 2 * t + 1);
        const DenseVector y = random_normal(op.out_dim(), seed + 2 * t + 2);
        const DenseVector ax = op(x);
        const DenseVector aty = op.adjoint(y);
        const double lhs = dot(ax, y);
        const double rhs = dot(x, aty);
        const double scale = std::max({norm2(ax) * norm2(y), norm2(x) * norm2(aty), 1e-300});
        if (!(std::abs(lhs - rhs) <= rel_tol * scale))
            return false;
    }
    return true;
}

} // namespace erx
