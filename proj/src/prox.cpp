#include "erx/prox.hpp"

#include "erx/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace erx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

void require_positive(double gamma, const char *who) {
    if (!(gamma > 0.0))
        throw InvalidInput(std::string(who) + ": gamma must be positive");
}

double slack(double scale) { return kIndicatorTol * std::max(1.0, scale); }

} // namespace

// ---------------------------------------------------------------------------

GroupStructure GroupStructure::uniform(std::size_t count, std::size_t size, double weight) {
    GroupStructure gs;
    gs.offsets.resize(count);
    gs.sizes.assign(count, size);
    gs.weights.assign(count, weight);
    for (std::size_t g = 0; g < count; ++g)
        gs.offsets[g] = g * size;
    return gs;
}

GroupStructure GroupStructure::from_sizes(const std::vector<std::size_t> &sizes,
                                          std::vector<double> weights) {
    GroupStructure gs;
    gs.sizes = sizes;
    gs.offsets.resize(sizes.size());
    std::size_t off = 0;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        gs.offsets[g] = off;
        off += sizes[g];
    }
    gs.weights = weights.empty() ? std::vector<double>(sizes.size(), 1.0) : std::move(weights);
    if (gs.weights.size() != sizes.size())
        throw StructureError("GroupStructure: one weight per group required");
    return gs;
}

void GroupStructure::validate(std::size_t dim) const {
    if (offsets.size() != sizes.size() || weights.size() != sizes.size())
        throw StructureError("GroupStructure: offsets, sizes and weights differ in length");
    std::size_t expect = 0;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        if (offsets[g] != expect)
            throw StructureError("GroupStructure: group " + std::to_string(g) +
                                 " is not contiguous with its predecessor");
        if (sizes[g] == 0)
            throw StructureError("GroupStructure: empty group " + std::to_string(g));
        if (!(weights[g] >= 0.0) || !std::isfinite(weights[g]))
            throw StructureError("GroupStructure: weights must be finite and nonnegative");
        expect += sizes[g];
    }
    if (expect != dim)
        throw StructureError("GroupStructure covers " + std::to_string(expect) +
                             " entries, vector has " + std::to_string(dim));
}

DenseVector ProxFn::eval(std::span<const double> x, double gamma) const {
    DenseVector out(x.size());
    prox(x, gamma, out);
    return out;
}

// ---------------------------------------------------------------------------
// kernels

void soft_threshold(std::span<const double> x, double gamma, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = sign(x[i]) * std::max(std::abs(x[i]) - gamma, 0.0);
}

void shrink_l2(std::span<const double> x, double gamma, std::span<double> out) {
    const double n = norm2(x);
    const double f = n > gamma ? 1.0 - gamma / n : 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = f * x[i];
}

void project_l1_ball(std::span<const double> x, double eps, std::span<double> out) {
    if (norm1(x) <= eps) {
        std::copy(x.begin(), x.end(), out.begin());
        return;
    }
    if (eps <= 0.0) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    DenseVector u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        u[i] = std::abs(x[i]);
    std::stable_sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        cum += u[k];
        const double t = (cum - eps) / static_cast<double>(k + 1);
        if (u[k] > t)
            theta = t;
        else
            break;
    }
    soft_threshold(x, theta, out);
}

// ---------------------------------------------------------------------------

DenseVector prox_l1(std::span<const double> x, double gamma) {
    require_positive(gamma, "prox_l1");
    DenseVector out(x.size());
    soft_threshold(x, gamma, out);
    return out;
}

DenseVector prox_l2(std::span<const double> x, double gamma) {
    require_positive(gamma, "prox_l2");
    DenseVector out(x.size());
    shrink_l2(x, gamma, out);
    return out;
}

DenseVector prox_group_l21(std::span<const double> x, const GroupStructure &gs, double gamma) {
    require_positive(gamma, "prox_group_l21");
    gs.validate(x.size());
    DenseVector out(x.size());
    for (std::size_t g = 0; g < gs.count(); ++g)
        shrink_l2(x.subspan(gs.offsets[g], gs.sizes[g]), gamma * gs.weights[g],
                  std::span<double>(out).subspan(gs.offsets[g], gs.sizes[g]));
    return out;
}

DenseVector prox_linf(std::span<const double> x, double gamma) {
    require_positive(gamma, "prox_linf");
    DenseVector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = x[i] / gamma;
    project_l1_ball(out, 1.0, out);
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = x[i] - gamma * out[i];
    return out;
}

DenseVector project_l2_ball(std::span<const double> x, std::span<const double> center,
                            double eps) {
    if (x.size() != center.size())
        throw StructureError("project_l2_ball: center dimension differs");
    if (!(eps >= 0.0))
        throw InvalidInput("project_l2_ball: negative radius");
    DenseVector out(x.begin(), x.end());
    const double d = distance2(x, center);
    if (d <= eps)
        return out;
    const double f = eps / d;
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = center[i] + f * (x[i] - center[i]);
    return out;
}

DenseVector project_l1_ball(std::span<const double> x, double eps) {
    if (!(eps >= 0.0))
        throw InvalidInput("project_l1_ball: negative radius");
    DenseVector out(x.size());
    project_l1_ball(x, eps, out);
    return out;
}

DenseMatrix prox_nuclear(const DenseMatrix &m, double gamma) {
    require_positive(gamma, "prox_nuclear");
    const SvdResult s = svd_thin(m);
    DenseVector t(s.singular_values.size());
    soft_threshold(s.singular_values, gamma, t);
    return s.reconstruct(t);
}

DenseVector project_box(std::span<const double> x, double lo, double hi) {
    if (!(lo <= hi))
        throw InvalidInput("project_box: lower bound exceeds upper bound");
    DenseVector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = std::min(std::max(x[i], lo), hi);
    return out;
}

DenseVector project_halfspace_nonpos(std::span<const double> x) {
    DenseVector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = std::min(x[i], 0.0);
    return out;
}

DenseVector project_singleton(std::span<const double> x, std::span<const double> target) {
    if (x.size() != target.size())
        throw StructureError("project_singleton: target dimension differs");
    return DenseVector(target.begin(), target.end());
}

DenseVector prox_conjugate(const ProxFn &f, std::span<const double> x, double gamma) {
    require_positive(gamma, "prox_conjugate");
    DenseVector scaled(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        scaled[i] = x[i] / gamma;
    DenseVector p(x.size());
    f.prox(scaled, 1.0 / gamma, p);
    for (std::size_t i = 0; i < x.size(); ++i)
        p[i] = x[i] - gamma * p[i];
    return p;
}

// ---------------------------------------------------------------------------

namespace fn {

ProxFn zero() {
    return {"zero",
            [](std::span<const double> x, double, std::span<double> out) {
                std::copy(x.begin(), x.end(), out.begin());
            },
            [](std::span<const double>) { return 0.0; }};
}

ProxFn l1() {
    return {"l1", [](std::span<const double> x, double g, std::span<double> out) {
                soft_threshold(x, g, out);
            },
            [](std::span<const double> x) { return norm1(x); }};
}

ProxFn l2() {
    return {"l2", [](std::span<const double> x, double g, std::span<double> out) {
                shrink_l2(x, g, out);
            },
            [](std::span<const double> x) { return norm2(x); }};
}

ProxFn scaled_l2(double eps) {
    return {"eps*l2", [eps](std::span<const double> x, double g, std::span<double> out) {
                shrink_l2(x, g * eps, out);
            },
            [eps](std::span<const double> x) { return eps * norm2(x); }};
}

ProxFn group_l21(GroupStructure gs) {
    auto prox = [gs](std::span<const double> x, double g, std::span<double> out) {
        if (x.size() != gs.total())
            throw StructureError("group_l21: vector does not match group structure");
        for (std::size_t k = 0; k < gs.count(); ++k)
            shrink_l2(x.subspan(gs.offsets[k], gs.sizes[k]), g * gs.weights[k],
                      out.subspan(gs.offsets[k], gs.sizes[k]));
    };
    auto value = [gs](std::span<const double> x) {
        double s = 0.0;
        for (std::size_t k = 0; k < gs.count(); ++k)
            s += gs.weights[k] * norm2(x.subspan(gs.offsets[k], gs.sizes[k]));
        return s;
    };
    return {"group_l21", prox, value};
}

ProxFn linf() {
    return {"linf",
            [](std::span<const double> x, double g, std::span<double> out) {
                const DenseVector r = prox_linf(x, g);
                std::copy(r.begin(), r.end(), out.begin());
            },
            [](std::span<const double> x) { return norm_inf(x); }};
}

ProxFn l2_ball(DenseVector center, double eps) {
    auto prox = [center, eps](std::span<const double> x, double, std::span<double> out) {
        const DenseVector r = project_l2_ball(x, center, eps);
        std::copy(r.begin(), r.end(), out.begin());
    };
    auto value = [center, eps](std::span<const double> x) {
        return distance2(x, center) <= eps + slack(eps) ? 0.0 : kInf;
    };
    return {"l2_ball", prox, value, true};
}

ProxFn l1_ball(double eps) {
    auto prox = [eps](std::span<const double> x, double, std::span<double> out) {
        project_l1_ball(x, eps, out);
    };
    auto value = [eps](std::span<const double> x) {
        return norm1(x) <= eps + slack(eps) ? 0.0 : kInf;
    };
    return {"l1_ball", prox, value, true};
}

ProxFn nuclear(std::size_t rows, std::size_t cols) {
    auto prox = [rows, cols](std::span<const double> x, double g, std::span<double> out) {
        const DenseMatrix m(rows, cols, DenseVector(x.begin(), x.end()));
        const DenseMatrix r = prox_nuclear(m, g);
        std::copy(r.vec().begin(), r.vec().end(), out.begin());
    };
    auto value = [rows, cols](std::span<const double> x) {
        return nuclear_norm(DenseMatrix(rows, cols, DenseVector(x.begin(), x.end())));
    };
    return {"nuclear", prox, value};
}

ProxFn box(double lo, double hi) {
    if (!(lo <= hi))
        throw InvalidInput("box: lower bound exceeds upper bound");
    auto prox = [lo, hi](std::span<const double> x, double, std::span<double> out) {
        for (std::size_t i = 0; i < x.size(); ++i)
            out[i] = std::min(std::max(x[i], lo), hi);
    };
    auto value = [lo, hi](std::span<const double> x) {
        const double t = slack(std::max(std::abs(lo), std::abs(hi)));
        for (double v : x)
            if (v < lo - t || v > hi + t)
                return kInf;
        return 0.0;
    };
    return {"box", prox, value, true};
}

ProxFn nonpositive() {
    auto prox = [](std::span<const double> x, double, std::span<double> out) {
        for (std::size_t i = 0; i < x.size(); ++i)
            out[i] = std::min(x[i], 0.0);
    };
    auto value = [](std::span<const double> x) {
        for (double v : x)
            if (v > kIndicatorTol)
                return kInf;
        return 0.0;
    };
    return {"nonpositive", prox, value, true};
}

ProxFn singleton(DenseVector target) {
    auto prox = [target](std::span<const double> x, double, std::span<double> out) {
        if (x.size() != target.size())
            throw StructureError("singleton: target dimension differs");
        std::copy(target.begin(), target.end(), out.begin());
    };
    auto value = [target](std::span<const double> x) {
        return distance2(x, target) <= slack(norm2(target)) ? 0.0 : kInf;
    };
    return {"singleton", prox, value, true};
}

} // namespace fn

} // namespace erx
