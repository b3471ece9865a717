#pragma once

#include "erx/linalg.hpp"
#include "erx/prox.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace erx {

/// A proximable term acting on the slice [offset, offset + length).
struct SliceTerm {
    ProxFn fn;
    std::size_t offset = 0;
    std::size_t length = 0;
};

/// min_p G(p) + H(F p). G is separable over `g_blocks` (slices not covered
/// are unconstrained); H is separable over `h_blocks`, which must tile the
/// dual vector.
struct SplitProblem {
    std::size_t primal_dim = 0;
    std::size_t dual_dim = 0;
    std::vector<SliceTerm> g_blocks;
    std::vector<SliceTerm> h_blocks;
    LinearOperator f_op;
    /// Upper bound on ||F||; estimated by power iteration when absent.
    std::optional<double> f_norm;

    void validate() const;
    /// G(p) + H(F p) with indicator terms skipped.
    double relaxed_objective(std::span<const double> p) const;
    /// Same, with F p already computed.
    double relaxed_objective(std::span<const double> p, std::span<const double> fp) const;
};

struct StepSizes {
    double gamma1 = 0.01;
    double gamma2 = 1.0 / 12.0 / 0.01;
};

/// gamma1 = 0.01, gamma2 = 1 / (12 gamma1), with gamma2 lowered to
/// 1 / (gamma1 ||F||^2) when ||F||^2 > 12.
StepSizes default_steps(double f_norm);

struct SolveTrace {
    std::size_t iter = 0;
    std::vector<double> primal_residual;
    std::vector<double> objective;
    std::vector<double> elapsed_ms;

    /// Header `iter,residual,objective,elapsed_ms`, one row per iteration.
    void write_csv(std::ostream &os) const;
};

enum class SolveStatus { Converged, MaxIterations };

struct SolveOptions {
    double eps_stop = 1e-7;
    std::size_t max_iter = 50000;
    std::optional<DenseVector> init_primal;
    std::optional<DenseVector> init_dual;
    /// Logged objective; the relaxed objective is used when empty.
    std::function<double(std::span<const double>)> objective;
    /// Objective evaluated every k iterations (NaN in between); 0 disables it.
    std::size_t objective_every = 1;
    /// Called after every iteration with the new primal iterate.
    std::function<void(std::size_t, std::span<const double>)> callback;
};

struct SolveResult {
    DenseVector primal;
    DenseVector dual;
    SolveTrace trace;
    SolveStatus status = SolveStatus::MaxIterations;
};

/// Raised when an iterate stops being finite.
struct DivergenceError : std::runtime_error {
    DivergenceError(const std::string &what, SolveTrace trace)
        : std::runtime_error(what), trace(std::move(trace)) {}
    SolveTrace trace;
};

SolveResult pds_solve(const SplitProblem &prob, const StepSizes &steps,
                      const SolveOptions &opts = {});

/// Operator norm used by the solver: the stored bound, or 1.01 times the
/// power-iteration estimate.
double problem_f_norm(const SplitProblem &prob);

} // namespace erx
