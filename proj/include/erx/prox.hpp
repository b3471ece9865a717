#pragma once

#include "erx/linalg.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace erx {

/// Contiguous, non-overlapping groups covering a vector, each with a
/// nonnegative weight.
struct GroupStructure {
    std::vector<std::size_t> offsets;
    std::vector<std::size_t> sizes;
    std::vector<double> weights;

    std::size_t count() const { return sizes.size(); }
    std::size_t total() const { return sizes.empty() ? 0 : offsets.back() + sizes.back(); }

    /// `count` groups of `size` entries each.
    static GroupStructure uniform(std::size_t count, std::size_t size, double weight = 1.0);
    /// Consecutive groups of the given sizes.
    static GroupStructure from_sizes(const std::vector<std::size_t> &sizes,
                                     std::vector<double> weights = {});

    /// Throws StructureError unless the groups tile [0, dim) in order.
    void validate(std::size_t dim) const;
};

/// A proper lsc convex function exposed through its proximity operator.
/// `value` returns +inf outside the domain of indicator functions.
struct ProxFn {
    using Prox = std::function<void(std::span<const double>, double, std::span<double>)>;
    using Value = std::function<double(std::span<const double>)>;

    std::string name;
    Prox prox;
    Value value;
    /// Indicator functions ignore gamma and are left out of relaxed objectives.
    bool indicator = false;

    DenseVector eval(std::span<const double> x, double gamma) const;
};

// Span kernels. `out` may alias `x` for these.
void soft_threshold(std::span<const double> x, double gamma, std::span<double> out);
void shrink_l2(std::span<const double> x, double gamma, std::span<double> out);
void project_l1_ball(std::span<const double> x, double eps, std::span<double> out);

DenseVector prox_l1(std::span<const double> x, double gamma);
DenseVector prox_l2(std::span<const double> x, double gamma);
DenseVector prox_group_l21(std::span<const double> x, const GroupStructure &gs, double gamma);
DenseVector prox_linf(std::span<const double> x, double gamma);
DenseVector project_l2_ball(std::span<const double> x, std::span<const double> center, double eps);
DenseVector project_l1_ball(std::span<const double> x, double eps);
DenseMatrix prox_nuclear(const DenseMatrix &m, double gamma);
DenseVector project_box(std::span<const double> x, double lo, double hi);
DenseVector project_halfspace_nonpos(std::span<const double> x);
DenseVector project_singleton(std::span<const double> x, std::span<const double> target);

/// prox of gamma f* through x - gamma prox_{f/gamma}(x/gamma).
DenseVector prox_conjugate(const ProxFn &f, std::span<const double> x, double gamma);

namespace fn {
ProxFn zero();
ProxFn l1();
ProxFn l2();
ProxFn group_l21(GroupStructure gs);
ProxFn linf();
/// eps * ||.||_2
ProxFn scaled_l2(double eps);
ProxFn l2_ball(DenseVector center, double eps);
ProxFn l1_ball(double eps);
/// Nuclear norm of the rows x cols column-major matrix held in the vector.
ProxFn nuclear(std::size_t rows, std::size_t cols);
ProxFn box(double lo, double hi);
ProxFn nonpositive();
ProxFn singleton(DenseVector target);
} // namespace fn

/// Feasibility slack used by indicator `value` functions.
inline constexpr double kIndicatorTol = 1e-9;

} // namespace erx
