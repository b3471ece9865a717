#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace erx::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DenseVector normal(Rng &rng, std::size_t n, double s = 1.0) {
    std::normal_distribution<double> nd(0.0, s);
    DenseVector v(n);
    for (double &e : v)
        e = nd(rng);
    return v;
}

double uniform(Rng &rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double pick_scale(Rng &rng) {
    static constexpr double scales[4] = {0.1, 0.5, 1.0, 3.0};
    return scales[std::uniform_int_distribution<int>(0, 3)(rng)];
}

DenseVector clip(std::span<const double> x, double lo, double hi) {
    DenseVector y(x.begin(), x.end());
    for (double &e : y)
        e = std::min(std::max(e, lo), hi);
    return y;
}

DenseVector ball(std::span<const double> x, double r) {
    DenseVector y(x.begin(), x.end());
    double n = 0.0;
    for (double e : y)
        n += e * e;
    n = std::sqrt(n);
    if (n > r)
        for (double &e : y)
            e *= r / n;
    return y;
}

DenseVector soft(std::span<const double> x, double t) {
    DenseVector y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] = std::copysign(std::max(std::abs(x[i]) - t, 0.0), x[i]);
    return y;
}

DenseVector shrink(std::span<const double> x, double t) {
    double n = 0.0;
    for (double e : x)
        n += e * e;
    n = std::sqrt(n);
    DenseVector y(x.size(), 0.0);
    if (n > t)
        for (std::size_t i = 0; i < x.size(); ++i)
            y[i] = x[i] * (1.0 - t / n);
    return y;
}

// Level mu >= 0 with sum (|x_i| - mu)_+ = s, for 0 < s < ||x||_1.
double l1_level(std::span<const double> x, double s) {
    double lo = 0.0, hi = 0.0;
    for (double e : x)
        hi = std::max(hi, std::abs(e));
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi)
            break;
        double sum = 0.0;
        for (double e : x)
            sum += std::max(std::abs(e) - mid, 0.0);
        (sum > s ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double sum_abs(std::span<const double> x) {
    double s = 0.0;
    for (double e : x)
        s += std::abs(e);
    return s;
}

DenseVector spectral_map(std::span<const double> x, std::size_t rows, std::size_t cols,
                         const std::function<DenseVector(std::span<const double>)> &on_sigma) {
    const SvdResult s = svd_thin(DenseMatrix(rows, cols, DenseVector(x.begin(), x.end())));
    const DenseVector sig = on_sigma(s.singular_values);
    const DenseMatrix r = s.reconstruct(sig);
    return DenseVector(r.vec().begin(), r.vec().end());
}

bool everywhere(std::span<const double>) { return true; }

} // namespace

DenseVector l1_ball_bisect(std::span<const double> x, double eps) {
    if (sum_abs(x) <= eps)
        return DenseVector(x.begin(), x.end());
    return soft(x, l1_level(x, eps));
}

DenseVector prox_linf_bisect(std::span<const double> x, double t) {
    if (sum_abs(x) <= t)
        return DenseVector(x.size(), 0.0);
    const double mu = l1_level(x, t);
    return clip(x, -mu, mu);
}

std::vector<ProxCase> prox_catalog(Rng &rng, std::size_t dim) {
    std::vector<ProxCase> cases;
    const std::size_t d = dim;
    auto free_sample = [d](Rng &r) { return normal(r, d, pick_scale(r)); };

    cases.push_back({"l1", fn::l1(), d, everywhere, free_sample,
                     [](std::span<const double> x, double) { return clip(x, -1.0, 1.0); }});
    cases.push_back({"l2", fn::l2(), d, everywhere, free_sample,
                     [](std::span<const double> x, double) { return ball(x, 1.0); }});

    {
        std::vector<std::size_t> sizes;
        std::size_t left = d;
        while (left > 0) {
            const std::size_t s = std::uniform_int_distribution<std::size_t>(1, left)(rng);
            sizes.push_back(s);
            left -= s;
        }
        std::vector<double> w(sizes.size());
        for (double &e : w)
            e = uniform(rng, 0.0, 1.0) < 0.2 ? 0.0 : uniform(rng, 0.1, 2.0);
        const GroupStructure gs = GroupStructure::from_sizes(sizes, w);
        cases.push_back({"group_l21", fn::group_l21(gs), d, everywhere, free_sample,
                         [gs](std::span<const double> x, double) {
                             DenseVector y(x.size());
                             for (std::size_t g = 0; g < gs.count(); ++g) {
                                 const DenseVector b =
                                     ball(x.subspan(gs.offsets[g], gs.sizes[g]), gs.weights[g]);
                                 std::copy(b.begin(), b.end(), y.begin() + static_cast<std::ptrdiff_t>(gs.offsets[g]));
                             }
                             return y;
                         }});
    }

    cases.push_back({"linf", fn::linf(), d, everywhere, free_sample,
                     [](std::span<const double> x, double) { return l1_ball_bisect(x, 1.0); }});

    {
        const double eps = uniform(rng, 0.1, 2.0);
        cases.push_back({"scaled_l2", fn::scaled_l2(eps), d, everywhere, free_sample,
                         [eps](std::span<const double> x, double) { return ball(x, eps); }});
    }

    {
        std::vector<std::size_t> divisors;
        for (std::size_t r = 1; r <= d; ++r)
            if (d % r == 0)
                divisors.push_back(r);
        const std::size_t rows =
            divisors[std::uniform_int_distribution<std::size_t>(0, divisors.size() - 1)(rng)];
        const std::size_t cols = d / rows;
        cases.push_back({"nuclear", fn::nuclear(rows, cols), d, everywhere, free_sample,
                         [rows, cols](std::span<const double> x, double) {
                             return spectral_map(x, rows, cols, [](std::span<const double> s) {
                                 return clip(s, 0.0, 1.0);
                             });
                         }});
    }

    cases.push_back({"zero", fn::zero(), d, everywhere, free_sample,
                     [](std::span<const double> x, double) { return DenseVector(x.size(), 0.0); }});

    {
        const double lo = uniform(rng, -1.0, 0.5);
        const double hi = lo + uniform(rng, 0.0, 1.5);
        cases.push_back(
            {"box", fn::box(lo, hi), d,
             [lo, hi](std::span<const double> y) {
                 return std::all_of(y.begin(), y.end(), [&](double e) { return e >= lo && e <= hi; });
             },
             [d, lo, hi](Rng &r) {
                 DenseVector y(d);
                 for (double &e : y)
                     e = uniform(r, lo, hi);
                 return y;
             },
             [lo, hi](std::span<const double> x, double g) {
                 DenseVector y(x.size());
                 for (std::size_t i = 0; i < x.size(); ++i)
                     y[i] = x[i] > g * hi ? x[i] - g * hi : (x[i] < g * lo ? x[i] - g * lo : 0.0);
                 return y;
             }});
    }

    cases.push_back({"nonpositive", fn::nonpositive(), d,
                     [](std::span<const double> y) {
                         return std::all_of(y.begin(), y.end(), [](double e) { return e <= 0.0; });
                     },
                     [d](Rng &r) {
                         DenseVector y = normal(r, d, pick_scale(r));
                         for (double &e : y)
                             e = uniform(r, 0.0, 1.0) < 0.2 ? 0.0 : -std::abs(e);
                         return y;
                     },
                     [](std::span<const double> x, double) { return clip(x, 0.0, kInf); }});

    {
        const DenseVector t = normal(rng, d);
        cases.push_back({"singleton", fn::singleton(t), d,
                         [t](std::span<const double> y) { return std::equal(y.begin(), y.end(), t.begin()); },
                         [t](Rng &) { return t; },
                         [t](std::span<const double> x, double g) {
                             DenseVector y(x.size());
                             for (std::size_t i = 0; i < x.size(); ++i)
                                 y[i] = x[i] - g * t[i];
                             return y;
                         }});
    }

    {
        const DenseVector c = normal(rng, d);
        const double eps = uniform(rng, 0.1, 2.0);
        cases.push_back({"l2_ball", fn::l2_ball(c, eps), d,
                         [c, eps](std::span<const double> y) { return distance2(y, c) <= eps; },
                         [c, eps, d](Rng &r) {
                             DenseVector u = normal(r, d);
                             const double n = norm2(u);
                             const double rad = 0.999999 * eps *
                                                std::pow(uniform(r, 0.0, 1.0), 1.0 / static_cast<double>(d));
                             for (std::size_t i = 0; i < d; ++i)
                                 u[i] = c[i] + (n > 0.0 ? rad * u[i] / n : 0.0);
                             return u;
                         },
                         [c, eps](std::span<const double> x, double g) {
                             DenseVector v(x.size());
                             for (std::size_t i = 0; i < x.size(); ++i)
                                 v[i] = x[i] - g * c[i];
                             return shrink(v, g * eps);
                         }});
    }

    {
        const double eps = uniform(rng, 0.1, 2.0);
        cases.push_back({"l1_ball", fn::l1_ball(eps), d,
                         [eps](std::span<const double> y) { return sum_abs(y) <= eps; },
                         [eps, d](Rng &r) {
                             DenseVector u = normal(r, d);
                             const double n = sum_abs(u);
                             const double rad = 0.999999 * eps * uniform(r, 0.0, 1.0);
                             for (double &e : u)
                                 e = n > 0.0 ? rad * e / n : 0.0;
                             return u;
                         },
                         [eps](std::span<const double> x, double g) { return prox_linf_bisect(x, g * eps); }});
    }
    return cases;
}

ProxOracleResult prox_argmin_check(const ProxCase &pc, std::span<const double> x, double gamma,
                                   Rng &rng, std::size_t competitors) {
    const std::size_t d = x.size();
    auto objective = [&](std::span<const double> y) {
        const double fit = 0.5 * distance2(x, y) * distance2(x, y);
        if (pc.fn.indicator)
            return pc.member(y) ? fit : kInf;
        return gamma * pc.fn.value(y) + fit;
    };

    ProxOracleResult out;
    const DenseVector p = pc.fn.eval(x, gamma);
    double jp;
    if (pc.fn.indicator) {
        // Rounding may leave p a hair outside; judge it by the library's slack.
        out.feasible = std::isfinite(pc.fn.value(p));
        jp = 0.5 * distance2(x, p) * distance2(x, p);
    } else {
        jp = objective(p);
    }

    DenseVector best;
    double jbest = kInf;
    auto offer = [&](DenseVector y) {
        const double j = objective(y);
        if (j < jbest) {
            jbest = j;
            best = std::move(y);
        }
    };
    for (std::size_t k = 0; k < competitors; ++k) {
        if (!pc.fn.indicator && k % 2 == 1) {
            DenseVector y = normal(rng, d, pick_scale(rng));
            for (std::size_t i = 0; i < d; ++i)
                y[i] += x[i];
            offer(std::move(y));
        } else {
            offer(pc.sample(rng));
        }
    }

    auto refine = [&](DenseVector y, double jy) {
        double h = 0.5 * (1.0 + norm_inf(x));
        std::size_t fails = 0;
        while (h > 1e-11) {
            DenseVector dir = normal(rng, d);
            const double n = norm2(dir);
            if (n == 0.0)
                continue;
            DenseVector cand(d);
            for (std::size_t i = 0; i < d; ++i)
                cand[i] = y[i] + h * dir[i] / n;
            const double jc = objective(cand);
            if (jc < jy) {
                y = std::move(cand);
                jy = jc;
                fails = 0;
            } else if (++fails >= 4 * d + 8) {
                h *= 0.5;
                fails = 0;
            }
        }
        if (jy < jbest) {
            jbest = jy;
            best = std::move(y);
        }
    };
    if (std::isfinite(jbest))
        refine(best, jbest);
    if (!pc.fn.indicator || pc.member(p))
        refine(p, jp);

    out.violation = jp - jbest;
    return out;
}

double l1_phi(std::span<const double> x, double xi, double lambda) {
    double s = 0.0;
    for (double e : x)
        s += std::max(std::abs(e) - lambda, 0.0);
    return s - xi - lambda;
}

double l1_lambda_bisect(std::span<const double> x, double xi) {
    double lo = 0.0, hi = sum_abs(x) + std::abs(xi);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (l1_phi(x, xi, mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

const char *to_string(EpiNorm k) {
    switch (k) {
    case EpiNorm::L2: return "l2";
    case EpiNorm::L1: return "l1";
    case EpiNorm::LInf: return "linf";
    case EpiNorm::S1: return "schatten1";
    case EpiNorm::S2: return "schatten2";
    case EpiNorm::SInf: return "schatten_inf";
    }
    return "?";
}

double epi_norm_value(const EpiInstance &e, std::span<const double> x) {
    switch (e.kind) {
    case EpiNorm::L2: return e.tau * norm2(x);
    case EpiNorm::L1: return norm1(x);
    case EpiNorm::LInf: return norm_inf(x);
    default: break;
    }
    const DenseVector s = singular_values(DenseMatrix(e.rows, e.cols, DenseVector(x.begin(), x.end())));
    if (e.kind == EpiNorm::S1)
        return norm1(s);
    if (e.kind == EpiNorm::S2)
        return norm2(s);
    return s.empty() ? 0.0 : s.front();
}

namespace {

DenseVector epi_prox(const EpiInstance &e, double lambda) {
    switch (e.kind) {
    case EpiNorm::L2: return shrink(e.x, lambda * e.tau);
    case EpiNorm::L1: return soft(e.x, lambda);
    case EpiNorm::LInf: return prox_linf_bisect(e.x, lambda);
    case EpiNorm::S1:
        return spectral_map(e.x, e.rows, e.cols, [&](std::span<const double> s) { return soft(s, lambda); });
    case EpiNorm::S2:
        return spectral_map(e.x, e.rows, e.cols, [&](std::span<const double> s) { return shrink(s, lambda); });
    case EpiNorm::SInf:
        return spectral_map(e.x, e.rows, e.cols,
                            [&](std::span<const double> s) { return prox_linf_bisect(s, lambda); });
    }
    return {};
}

} // namespace

EpiPoint epi_project_bisect(const EpiInstance &e) {
    const double f0 = epi_norm_value(e, e.x);
    if (f0 <= e.xi)
        return {e.x, e.xi};
    double lo = 0.0, hi = f0 + std::abs(e.xi) + 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi)
            break;
        (epi_norm_value(e, epi_prox(e, mid)) - e.xi - mid > 0.0 ? lo : hi) = mid;
    }
    const double lambda = 0.5 * (lo + hi);
    return {epi_prox(e, lambda), e.xi + lambda};
}

EpiPoint epi_project_impl(const EpiInstance &e) {
    switch (e.kind) {
    case EpiNorm::L2: return epi_project_l2(e.x, e.xi, e.tau);
    case EpiNorm::L1: return epi_project_l1(e.x, e.xi);
    case EpiNorm::LInf: return epi_project_linf(e.x, e.xi);
    default: break;
    }
    const SchattenP p = e.kind == EpiNorm::S1 ? SchattenP::One
                        : e.kind == EpiNorm::S2 ? SchattenP::Two
                                                : SchattenP::Inf;
    auto [m, xi] = epi_project_schatten(DenseMatrix(e.rows, e.cols, e.x), e.xi, p);
    return {DenseVector(m.vec().begin(), m.vec().end()), xi};
}

double epi_variational_gap(const EpiInstance &e, const EpiPoint &proj, Rng &rng,
                           std::size_t trials) {
    double worst = -kInf;
    for (std::size_t t = 0; t < trials; ++t) {
        const double s = pick_scale(rng);
        const DenseVector qx = normal(rng, e.x.size(), s);
        const double qxi = epi_norm_value(e, qx) + (t % 3 == 0 ? 0.0 : std::abs(normal(rng, 1, s)[0]));
        double g = (e.xi - proj.xi) * (qxi - proj.xi);
        for (std::size_t i = 0; i < qx.size(); ++i)
            g += (e.x[i] - proj.x[i]) * (qx[i] - proj.x[i]);
        worst = std::max(worst, g);
    }
    return worst;
}

} // namespace erx::oracle
