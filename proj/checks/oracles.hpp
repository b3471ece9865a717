#pragma once

#include "erx/epigraph.hpp"
#include "erx/linalg.hpp"
#include "erx/prox.hpp"

#include <functional>
#include <random>
#include <string>
#include <vector>

// Reference implementations used to cross-check the library. Nothing here is
// on a solver's hot path; everything favours obviousness over speed.
namespace erx::oracle {

using Rng = std::mt19937_64;

/// A proximable function together with an exact membership test for its
/// domain and a sampler of points inside it.
struct ProxCase {
    std::string name;
    ProxFn fn;
    std::size_t dim = 0;
    std::function<bool(std::span<const double>)> member;
    std::function<DenseVector(Rng &)> sample;
    /// prox of gamma f*, from a closed form written independently of prox-ops.
    std::function<DenseVector(std::span<const double>, double)> conj_prox;
};

/// Every operator of the prox catalog on a random instance of dimension
/// `dim` (1..4). Random parameters (centres, radii, weights, groups) are
/// drawn from `rng`.
std::vector<ProxCase> prox_catalog(Rng &rng, std::size_t dim);

struct ProxOracleResult {
    /// J(p) - min J over competitors and refinement; <= 0 when p wins.
    double violation = 0.0;
    bool feasible = true;
};

/// Compares p = prox_{gamma f}(x) against `competitors` sampled feasible
/// points plus a random pattern search started from the best of them and
/// from p itself, on J(y) = gamma f(y) + 0.5 ||x - y||^2.
ProxOracleResult prox_argmin_check(const ProxCase &pc, std::span<const double> x, double gamma,
                                   Rng &rng, std::size_t competitors = 500);

/// Euclidean projection onto {||y||_1 <= eps}, by bisection on the
/// soft-threshold level.
DenseVector l1_ball_bisect(std::span<const double> x, double eps);
/// prox of t ||.||_inf, by the same bisection.
DenseVector prox_linf_bisect(std::span<const double> x, double t);

/// phi(lambda) = ||T_lambda(x)||_1 - xi - lambda.
double l1_phi(std::span<const double> x, double xi, double lambda);
/// Root of phi by 200 bisection steps on [0, ||x||_1 + |xi|].
double l1_lambda_bisect(std::span<const double> x, double xi);

enum class EpiNorm { L2, L1, LInf, S1, S2, SInf };
const char *to_string(EpiNorm k);

/// Epigraph instance; matrices use rows x cols column-major in `x`.
struct EpiInstance {
    EpiNorm kind = EpiNorm::L2;
    DenseVector x;
    double xi = 0.0;
    double tau = 1.0;
    std::size_t rows = 0;
    std::size_t cols = 0;
};

double epi_norm_value(const EpiInstance &e, std::span<const double> x);

/// Projection onto epi f computed as (prox_{lambda f}(x0), xi0 + lambda)
/// where lambda solves f(prox_{lambda f}(x0)) = xi0 + lambda by bisection.
EpiPoint epi_project_bisect(const EpiInstance &e);

/// The projection under test, dispatched to epi-proj.
EpiPoint epi_project_impl(const EpiInstance &e);

/// Largest value of <z0 - z*, q - z*> over `trials` random points q of the
/// epigraph. Nonpositive up to rounding at a true projection z*.
double epi_variational_gap(const EpiInstance &e, const EpiPoint &proj, Rng &rng,
                           std::size_t trials = 50);

} // namespace erx::oracle
