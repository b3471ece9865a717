#include "erx/recovery.hpp"

#include "erx/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace erx {

std::string to_string(Regularizer r) {
    switch (r) {
    case Regularizer::VTV: return "vtv";
    case Regularizer::VTVwoERx: return "vtv-direct";
    case Regularizer::DVTV: return "dvtv";
    case Regularizer::DSTV: return "dstv";
    }
    return "?";
}

Regularizer regularizer_from_string(const std::string &s) {
    if (s == "vtv")
        return Regularizer::VTV;
    if (s == "vtv-direct")
        return Regularizer::VTVwoERx;
    if (s == "dvtv")
        return Regularizer::DVTV;
    if (s == "dstv")
        return Regularizer::DSTV;
    throw InvalidInput("unknown regularizer '" + s + "'");
}

namespace {

GroupStructure luma_chroma_groups(std::size_t n, std::size_t luma, std::size_t chroma, double w) {
    std::vector<std::size_t> sizes(n, luma);
    sizes.insert(sizes.end(), n, chroma);
    std::vector<double> weights(n, w);
    weights.insert(weights.end(), n, 1.0);
    return GroupStructure::from_sizes(sizes, std::move(weights));
}

} // namespace

RegularizerModel regularizer_model(Regularizer r, std::size_t width, std::size_t height,
                                   double w, const PatchConfig &patch) {
    if (!(w >= 0.0))
        throw InvalidInput("regularizer_model: luma weight must be nonnegative");
    const std::size_t n = width * height;
    const LinearOperator d = gradient_op(width, height, 3);
    RegularizerModel m;
    m.norm.input_dim = 6 * n;
    switch (r) {
    case Regularizer::VTV:
        m.a_op = compose(permute_gradients(GradientLayout::P4, width, height), d);
        m.norm.layers = {Layer{NormKind::l2(), GroupStructure::uniform(n, 6)},
                         Layer{NormKind::l1(), {}}};
        break;
    case Regularizer::VTVwoERx:
        m.a_op = compose(permute_gradients(GradientLayout::P4, width, height), d);
        m.norm.layers = {Layer{NormKind::l2(), GroupStructure::uniform(n, 6)}};
        break;
    case Regularizer::DVTV:
        m.a_op = compose(permute_gradients(GradientLayout::P1, width, height),
                         compose(d, color_transform(n)));
        m.norm.layers = {Layer{NormKind::l2(), luma_chroma_groups(n, 2, 4, w)}};
        break;
    case Regularizer::DSTV: {
        patch.validate();
        const std::size_t ww = patch.w * patch.w;
        m.a_op = compose(patch_expand(patch, width, height),
                         compose(permute_gradients(GradientLayout::P1, width, height),
                                 compose(d, color_transform(n))));
        m.norm.input_dim = 6 * ww * n;
        m.norm.layers = {Layer{NormKind::nuclear(ww, 2), GroupStructure::uniform(3 * n, 2 * ww)},
                         Layer{NormKind::l2(), luma_chroma_groups(n, 1, 2, w)}};
        break;
    }
    }
    return m;
}

RecoveryResult recover(std::span<const double> y, const LinearOperator &phi,
                       const RecoveryConfig &cfg,
                       std::function<void(std::size_t, std::span<const double>)> on_iter) {
    const std::size_t n = cfg.width * cfg.height;
    if (phi.in_dim() != 3 * n)
        throw StructureError("recover: measurement operator does not match the image size");
    if (y.size() != phi.out_dim())
        throw StructureError("recover: observation length differs from Phi rows");
    if (!(cfg.eps_fid >= 0.0))
        throw InvalidInput("recover: eps_fid must be nonnegative");

    const RegularizerModel model =
        regularizer_model(cfg.regularizer, cfg.width, cfg.height, cfg.w, cfg.patch);
    RelaxOptions ro;
    ro.g_on_x = fn::box(0.0, 1.0);
    const RelaxedProblem rp =
        relax(model.norm, model.a_op,
              {GTerm{fn::l2_ball(DenseVector(y.begin(), y.end()), cfg.eps_fid), phi}}, ro);

    const StepSizes steps = cfg.steps.value_or(default_steps(problem_f_norm(rp.problem)));
    SolveOptions so;
    so.eps_stop = cfg.eps_stop;
    so.max_iter = cfg.max_iter;
    so.objective_every = cfg.objective_every;
    so.objective = rp.original_objective;
    if (on_iter)
        so.callback = [&](std::size_t it, std::span<const double> p) { on_iter(it, p.first(3 * n)); };

    SolveResult sr = pds_solve(rp.problem, steps, so);
    RecoveryResult out;
    DenseVector x(sr.primal.begin(), sr.primal.begin() + static_cast<std::ptrdiff_t>(3 * n));
    for (double &v : x)
        v = std::clamp(v, 0.0, 1.0);
    out.image = ImagePlane(cfg.width, cfg.height, 3, std::move(x));
    out.trace = std::move(sr.trace);
    out.status = sr.status;
    out.primal = std::move(sr.primal);
    out.layout = rp.layout;
    return out;
}

EquivalenceCurves vtv_pair_equivalence(std::span<const double> y, const LinearOperator &phi,
                                       const RecoveryConfig &cfg, double reference_eps_stop) {
    const double scale = 1.0 / static_cast<double>(3 * cfg.width * cfg.height);
    RecoveryConfig direct = cfg;
    direct.regularizer = Regularizer::VTVwoERx;
    RecoveryConfig relaxed = cfg;
    relaxed.regularizer = Regularizer::VTV;

    EquivalenceCurves c;
    RecoveryConfig reference = direct;
    reference.eps_stop = reference_eps_stop;
    reference.max_iter = std::max<std::size_t>(cfg.max_iter, 200000);
    RecoveryResult ref = recover(y, phi, reference);
    c.direct_status = ref.status;
    c.minimizer.assign(ref.primal.begin(),
                       ref.primal.begin() + static_cast<std::ptrdiff_t>(phi.in_dim()));

    auto logger = [&](std::vector<double> &curve) {
        return [&c, &curve, scale](std::size_t, std::span<const double> x) {
            curve.push_back(scale * distance2(x, c.minimizer));
        };
    };
    recover(y, phi, direct, logger(c.without_erx));
    RecoveryResult r = recover(y, phi, relaxed, logger(c.with_erx));
    c.erx_status = r.status;
    c.erx_final.assign(r.primal.begin(), r.primal.begin() + static_cast<std::ptrdiff_t>(phi.in_dim()));
    return c;
}

namespace {

double model_norm(Regularizer r, const ImagePlane &x, double w, const PatchConfig &patch) {
    if (x.channels != 3)
        throw InvalidInput("color regularizers need a 3-channel image");
    const RegularizerModel m = regularizer_model(r, x.width, x.height, w, patch);
    return eval_layered(m.norm, m.a_op(x.pixels));
}

} // namespace

double dstv_norm(const ImagePlane &x, double w, const PatchConfig &patch) {
    return model_norm(Regularizer::DSTV, x, w, patch);
}

double dvtv_norm(const ImagePlane &x, double w) {
    return model_norm(Regularizer::DVTV, x, w, PatchConfig{1});
}

double vtv_norm(const ImagePlane &x) { return model_norm(Regularizer::VTV, x, 1.0, PatchConfig{1}); }

ImagePlane synthetic_image(std::size_t variant, std::size_t width, std::size_t height) {
    // Edges live mostly in luminance; chroma is weak and smooth, as in natural
    // photographs.
    ImagePlane img(width, height, 3);
    const double W = static_cast<double>(width), H = static_cast<double>(height);
    for (std::size_t col = 0; col < width; ++col)
        for (std::size_t row = 0; row < height; ++row) {
            const double u = (static_cast<double>(col) + 0.5) / W;
            const double v = (static_cast<double>(row) + 0.5) / H;
            double lum = 0.0;
            double tint[3] = {0.0, 0.0, 0.0};
            const double bg[3] = {0.06 * std::cos(2.0 * u), 0.04 * std::sin(2.5 * v),
                                  -0.05 * std::cos(1.5 * (u + v))};
            switch (variant % 3) {
            case 0: {
                lum = 0.35 + 0.2 * u;
                if (u > 0.15 && u < 0.55 && v > 0.2 && v < 0.6) {
                    lum = 0.75 - 0.1 * v;
                    tint[0] = 0.06;
                    tint[2] = -0.04;
                }
                const double dx = u - 0.68, dy = v - 0.7;
                if (dx * dx + dy * dy < 0.045) {
                    lum = 0.15 + 0.1 * u;
                    tint[1] = 0.05;
                }
                break;
            }
            case 1: {
                if (u + v < 1.0) {
                    lum = 0.65 - 0.2 * v;
                    tint[0] = 0.05;
                    tint[1] = 0.02;
                } else {
                    lum = 0.3 + 0.15 * u;
                    tint[2] = 0.06;
                }
                if (u > 0.6 && u < 0.85 && v > 0.1 && v < 0.35) {
                    lum = 0.9;
                    tint[0] = 0.03;
                    tint[1] = 0.03;
                    tint[2] = -0.06;
                }
                break;
            }
            default: {
                static constexpr double level[4] = {0.3, 0.6, 0.45, 0.8};
                const std::size_t band = std::min<std::size_t>(3, static_cast<std::size_t>(u * 4.0));
                lum = level[band] * (0.8 + 0.25 * v);
                tint[band % 3] = 0.05;
                const double dx = u - 0.5, dy = v - 0.45;
                if (dx * dx + dy * dy < 0.04) {
                    lum = 0.2 + 0.2 * dy;
                    tint[2] = 0.05;
                    tint[0] = -0.03;
                }
                break;
            }
            }
            for (std::size_t c = 0; c < 3; ++c)
                img.at(row, col, c) = std::clamp(lum + tint[c] + bg[c], 0.0, 1.0);
        }
    return img;
}

CsInstance make_cs_instance(const ImagePlane &truth, double sampling, double sigma,
                            std::uint64_t seed) {
    if (!(sampling > 0.0 && sampling <= 1.0))
        throw InvalidInput("make_cs_instance: sampling ratio must lie in (0, 1]");
    if (!(sigma >= 0.0))
        throw InvalidInput("make_cs_instance: sigma must be nonnegative");
    const std::size_t n = truth.pixel_count();
    const std::size_t total = n * truth.channels;
    const auto m = static_cast<std::size_t>(std::llround(sampling * static_cast<double>(total)));
    CsInstance cs;
    cs.phi = measurement_op(m, total, n, seed);
    cs.y = cs.phi(truth.pixels);
    const DenseVector noise = random_normal(m, seed ^ 0x9e3779b97f4a7c15ULL);
    for (std::size_t i = 0; i < m; ++i)
        cs.y[i] += sigma * noise[i];
    cs.eps_fid = sigma * norm2(noise);
    return cs;
}

} // namespace erx
