#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace erx {

/// Flat real vector. Every signal, gradient field and spectrum in the
/// library is one of these.
using DenseVector = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm1(std::span<const double> a);
double norm_inf(std::span<const double> a);
double distance2(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> a);

/// Column-major dense matrix; `vec()` stacks columns, so entry (m, n) lives
/// at index n * rows + m.
class DenseMatrix {
  public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> col_major);

    /// Row-wise literal, handy in tests: `from_rows({{1, 2}, {3, 4}})`.
    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static DenseMatrix identity(std::size_t n);
    static DenseMatrix diagonal(std::span<const double> d);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double &operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

    std::span<double> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
    std::span<const double> col(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }

    std::span<double> vec() { return data_; }
    std::span<const double> vec() const { return data_; }

    DenseMatrix transpose() const;
    double frobenius_norm() const { return norm2(data_); }

    friend DenseMatrix operator*(const DenseMatrix &a, const DenseMatrix &b);
    friend DenseMatrix operator-(const DenseMatrix &a, const DenseMatrix &b);
    friend bool operator==(const DenseMatrix &, const DenseMatrix &) = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Thin SVD: for an m x n input with k = min(m, n), `u` is m x k, `vt` is
/// k x n and the k singular values are sorted in descending order.
struct SvdResult {
    DenseMatrix u;
    DenseVector singular_values;
    DenseMatrix vt;

    /// U diag(s) V^T for an arbitrary replacement spectrum `s` (size k).
    DenseMatrix reconstruct(std::span<const double> s) const;
    DenseMatrix reconstruct() const { return reconstruct(singular_values); }
};

/// One-sided (Hestenes) Jacobi SVD. Throws InvalidInput on empty or
/// non-finite input.
SvdResult svd_thin(const DenseMatrix &m);

/// Singular values only; same algorithm as svd_thin.
DenseVector singular_values(const DenseMatrix &m);

double nuclear_norm(const DenseMatrix &m);

/// A matrix-free linear map R^in -> R^out together with its adjoint.
class LinearOperator {
  public:
    using Apply = std::function<void(std::span<const double>, std::span<double>)>;

    LinearOperator() = default;
    LinearOperator(std::size_t in_dim, std::size_t out_dim, Apply forward, Apply adjoint,
                   std::string name = {});

    std::size_t in_dim() const { return in_dim_; }
    std::size_t out_dim() const { return out_dim_; }
    const std::string &name() const { return name_; }

    /// out = A x. `out` must not alias `x`.
    void apply(std::span<const double> x, std::span<double> out) const;
    /// out = A^T y. `out` must not alias `y`.
    void apply_adjoint(std::span<const double> y, std::span<double> out) const;

    DenseVector operator()(std::span<const double> x) const;
    DenseVector adjoint(std::span<const double> y) const;

    LinearOperator transposed() const;
    DenseMatrix to_dense() const;

    static LinearOperator identity(std::size_t n);
    static LinearOperator zero(std::size_t in_dim, std::size_t out_dim);
    static LinearOperator diagonal(DenseVector d);
    static LinearOperator from_matrix(DenseMatrix m);
    /// Gathers `source[indices[i]]` into entry i; adjoint scatters back.
    static LinearOperator selection(std::size_t in_dim, std::vector<std::size_t> indices);
    /// Orthogonal permutation: entry i of the input lands at index `target[i]`.
    static LinearOperator permutation(std::vector<std::size_t> target, std::string name = {});

  private:
    std::size_t in_dim_ = 0;
    std::size_t out_dim_ = 0;
    Apply forward_;
    Apply adjoint_;
    std::string name_;
};

/// a ∘ b (apply b first).
LinearOperator compose(const LinearOperator &a, const LinearOperator &b);
LinearOperator scale(const LinearOperator &a, double s);
/// I_copies ⊗ a: `a` applied independently to `copies` consecutive slices.
LinearOperator kron_identity(const LinearOperator &a, std::size_t copies);

/// Assembles a block-structured operator from sparse (row, col) blocks. Row
/// blocks partition the output, column blocks partition the input; missing
/// blocks are zero.
class BlockOperatorBuilder {
  public:
    BlockOperatorBuilder(std::vector<std::size_t> row_sizes, std::vector<std::size_t> col_sizes);

    BlockOperatorBuilder &add(std::size_t row, std::size_t col, LinearOperator op);
    LinearOperator build(std::string name = "block") const;

  private:
    struct Entry {
        std::size_t row, col;
        LinearOperator op;
    };
    std::vector<std::size_t> row_sizes_, col_sizes_;
    std::vector<std::size_t> row_offsets_, col_offsets_;
    std::vector<Entry> entries_;
};

/// Largest singular value estimate by power iteration on A^T A from a
/// start vector drawn with `seed`.
double operator_norm(const LinearOperator &op, std::size_t iters = 100, double tol = 1e-6,
                     std::uint64_t seed = 0);

/// Checks <A x, y> == <x, A^T y> to `rel_tol` relative to ||A x|| ||y|| over
/// `trials` random pairs.
bool adjoint_check(const LinearOperator &op, std::size_t trials = 5, double rel_tol = 1e-8,
                   std::uint64_t seed = 0);

/// Standard normal vector drawn from a seeded 64-bit Mersenne twister.
DenseVector random_normal(std::size_t n, std::uint64_t seed);

} // namespace erx
