#pragma once

#include "erx/image.hpp"
#include "erx/layered.hpp"
#include "erx/pds.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace erx {

enum class Regularizer { VTV, VTVwoERx, DVTV, DSTV };

std::string to_string(Regularizer r);
/// Accepts vtv, vtv-direct, dvtv, dstv.
Regularizer regularizer_from_string(const std::string &s);

struct RecoveryConfig {
    Regularizer regularizer = Regularizer::DSTV;
    std::size_t width = 0;
    std::size_t height = 0;
    /// Luma weight.
    double w = 0.5;
    PatchConfig patch{3};
    /// Radius of the data-fidelity ball ||Phi x - y||_2 <= eps_fid.
    double eps_fid = 0.0;
    double eps_stop = 1e-7;
    std::size_t max_iter = 50000;
    std::uint64_t seed = 0;
    /// Overrides default_steps(||F||).
    std::optional<StepSizes> steps;
    std::size_t objective_every = 0;
};

/// The layered norm and its linear operator A (regularizer = f(A x)).
struct RegularizerModel {
    LayeredNorm norm;
    LinearOperator a_op;
};

RegularizerModel regularizer_model(Regularizer r, std::size_t width, std::size_t height,
                                   double w, const PatchConfig &patch);

struct RecoveryResult {
    ImagePlane image;
    SolveTrace trace;
    SolveStatus status = SolveStatus::MaxIterations;
    /// Full primal vector [x; auxiliaries].
    DenseVector primal;
    VariableLayout layout;
};

/// Box-constrained recovery min f(A x) s.t. ||Phi x - y|| <= eps_fid,
/// x in [0, 1]. `on_iter` sees the image part of each iterate.
RecoveryResult recover(std::span<const double> y, const LinearOperator &phi,
                       const RecoveryConfig &cfg,
                       std::function<void(std::size_t, std::span<const double>)> on_iter = {});

struct EquivalenceCurves {
    /// (1 / 3N) ||x_n - x*||_2 against the direct VTV minimizer x*.
    std::vector<double> with_erx;
    std::vector<double> without_erx;
    DenseVector minimizer;
    DenseVector erx_final;
    SolveStatus erx_status = SolveStatus::MaxIterations;
    SolveStatus direct_status = SolveStatus::MaxIterations;
};

/// Solves the direct VTV problem to `reference_eps_stop`, then runs both
/// assemblies at cfg.eps_stop logging the distance of every iterate to that
/// minimizer.
EquivalenceCurves vtv_pair_equivalence(std::span<const double> y, const LinearOperator &phi,
                                       const RecoveryConfig &cfg,
                                       double reference_eps_stop = 1e-11);

double dstv_norm(const ImagePlane &x, double w, const PatchConfig &patch);
double dvtv_norm(const ImagePlane &x, double w);
double vtv_norm(const ImagePlane &x);

/// Piecewise-smooth synthetic color test images, variants 0..2.
ImagePlane synthetic_image(std::size_t variant, std::size_t width, std::size_t height);

/// A compressed-sensing instance: y = Phi x + sigma n with the oracle radius
/// eps_fid = ||Phi x - y||.
struct CsInstance {
    LinearOperator phi;
    DenseVector y;
    double eps_fid = 0.0;
};

CsInstance make_cs_instance(const ImagePlane &truth, double sampling, double sigma,
                            std::uint64_t seed);

} // namespace erx
