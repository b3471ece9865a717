#include "erx/pds.hpp"

#include "erx/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

namespace erx {

void SplitProblem::validate() const {
    if (f_op.in_dim() != primal_dim || f_op.out_dim() != dual_dim)
        throw StructureError("SplitProblem: F is " + std::to_string(f_op.out_dim()) + "x" +
                             std::to_string(f_op.in_dim()) + ", expected " +
                             std::to_string(dual_dim) + "x" + std::to_string(primal_dim));
    std::size_t expect = 0;
    for (const SliceTerm &h : h_blocks) {
        if (h.offset != expect)
            throw StructureError("SplitProblem: H block '" + h.fn.name +
                                 "' is not contiguous with its predecessor");
        expect += h.length;
    }
    if (expect != dual_dim)
        throw StructureError("SplitProblem: H blocks cover " + std::to_string(expect) +
                             " of " + std::to_string(dual_dim) + " dual entries");
    std::vector<bool> used(primal_dim, false);
    for (const SliceTerm &g : g_blocks) {
        if (g.offset + g.length > primal_dim)
            throw StructureError("SplitProblem: G block '" + g.fn.name + "' out of range");
        for (std::size_t i = g.offset; i < g.offset + g.length; ++i) {
            if (used[i])
                throw StructureError("SplitProblem: G blocks overlap");
            used[i] = true;
        }
    }
}

double SplitProblem::relaxed_objective(std::span<const double> p) const {
    const DenseVector fp = f_op(p);
    return relaxed_objective(p, fp);
}

double SplitProblem::relaxed_objective(std::span<const double> p,
                                       std::span<const double> fp) const {
    double v = 0.0;
    for (const SliceTerm &g : g_blocks)
        if (!g.fn.indicator)
            v += g.fn.value(p.subspan(g.offset, g.length));
    for (const SliceTerm &h : h_blocks)
        if (!h.fn.indicator)
            v += h.fn.value(fp.subspan(h.offset, h.length));
    return v;
}

StepSizes default_steps(double f_norm) {
    const double f = std::max(f_norm, 1e-8);
    StepSizes s;
    s.gamma1 = 0.01;
    s.gamma2 = 1.0 / (12.0 * s.gamma1);
    if (s.gamma1 * s.gamma2 * f * f > 1.0)
        s.gamma2 = 1.0 / (s.gamma1 * f * f);
    return s;
}

void SolveTrace::write_csv(std::ostream &os) const {
    os << "iter,residual,objective,elapsed_ms\n";
    os.precision(17);
    for (std::size_t i = 0; i < primal_residual.size(); ++i) {
        os << (i + 1) << ',' << primal_residual[i] << ',';
        if (i < objective.size() && !std::isnan(objective[i]))
            os << objective[i];
        os << ',' << (i < elapsed_ms.size() ? elapsed_ms[i] : 0.0) << '\n';
    }
}

double problem_f_norm(const SplitProblem &prob) {
    if (prob.f_norm)
        return *prob.f_norm;
    return 1.01 * operator_norm(prob.f_op);
}

SolveResult pds_solve(const SplitProblem &prob, const StepSizes &steps, const SolveOptions &opts) {
    prob.validate();
    const double g1 = steps.gamma1, g2 = steps.gamma2;
    if (!(g1 > 0.0) || !(g2 > 0.0))
        throw ConfigurationError("pds_solve: step sizes must be positive");
    const double fn = problem_f_norm(prob);
    if (g1 * g2 * fn * fn > 1.0 + 1e-12)
        throw ConfigurationError("pds_solve: gamma1*gamma2*||F||^2 = " +
                                 std::to_string(g1 * g2 * fn * fn) + " exceeds 1");
    if (!(opts.eps_stop > 0.0))
        throw ConfigurationError("pds_solve: eps_stop must be positive");

    const std::size_t np = prob.primal_dim, nd = prob.dual_dim;
    SolveResult res;
    DenseVector &p = res.primal;
    DenseVector &z = res.dual;
    p = opts.init_primal.value_or(DenseVector(np, 0.0));
    z = opts.init_dual.value_or(DenseVector(nd, 0.0));
    if (p.size() != np || z.size() != nd)
        throw StructureError("pds_solve: initial point has wrong dimension");

    DenseVector fp = prob.f_op(p);
    DenseVector ftz(np), pn(np), fpn(nd), v(nd), scaled, inner;
    SolveTrace &tr = res.trace;
    const auto t0 = std::chrono::steady_clock::now();

    for (std::size_t it = 1; it <= opts.max_iter; ++it) {
        // primal step
        prob.f_op.apply_adjoint(z, ftz);
        for (std::size_t i = 0; i < np; ++i)
            pn[i] = p[i] - g1 * ftz[i];
        for (const SliceTerm &g : prob.g_blocks) {
            auto s = std::span<double>(pn).subspan(g.offset, g.length);
            g.fn.prox(DenseVector(s.begin(), s.end()), g1, s);
        }

        // dual step via the conjugate prox of each block
        prob.f_op.apply(pn, fpn);
        for (std::size_t i = 0; i < nd; ++i)
            v[i] = z[i] + g2 * (2.0 * fpn[i] - fp[i]);
        for (const SliceTerm &h : prob.h_blocks) {
            scaled.resize(h.length);
            inner.resize(h.length);
            for (std::size_t i = 0; i < h.length; ++i)
                scaled[i] = v[h.offset + i] / g2;
            h.fn.prox(scaled, 1.0 / g2, inner);
            for (std::size_t i = 0; i < h.length; ++i)
                z[h.offset + i] = v[h.offset + i] - g2 * inner[i];
        }

        const double r = distance2(pn, p);
        p.swap(pn);
        fp.swap(fpn);

        tr.iter = it;
        tr.primal_residual.push_back(r);
        double obj = std::numeric_limits<double>::quiet_NaN();
        if (opts.objective_every > 0 && (it % opts.objective_every == 0 || (it >= 2 && r <= opts.eps_stop)))
            obj = opts.objective ? opts.objective(p) : prob.relaxed_objective(p, fp);
        tr.objective.push_back(obj);
        tr.elapsed_ms.push_back(
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count());

        if (!std::isfinite(r) || !all_finite(z))
            throw DivergenceError("pds_solve: non-finite iterate at iteration " +
                                      std::to_string(it),
                                  tr);
        if (opts.callback)
            opts.callback(it, p);
        // From a zero dual the first primal step cannot move, so the residual
        // is only meaningful from the second iteration on.
        if (it >= 2 && r <= opts.eps_stop) {
            res.status = SolveStatus::Converged;
            return res;
        }
    }
    res.status = SolveStatus::MaxIterations;
    return res;
}

} // namespace erx
