#pragma once

#include "erx/epigraph.hpp"
#include "erx/linalg.hpp"
#include "erx/pds.hpp"
#include "erx/prox.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace erx {

/// Norm applied by one layer (to each block for inner layers, to the whole
/// vector for the outermost one).
struct NormKind {
    enum class Tag { L1, L2, LInf, LInfEps, Nuclear, Spectral };
    Tag tag = Tag::L2;
    /// ||.||_inf + eps ||.||_2 for LInfEps.
    double eps = 1e-3;
    /// Matrix shape for Nuclear and Spectral, column-major.
    std::size_t rows = 0;
    std::size_t cols = 0;

    static NormKind l1() { return {Tag::L1}; }
    static NormKind l2() { return {Tag::L2}; }
    static NormKind linf() { return {Tag::LInf}; }
    static NormKind linf_eps(double eps = 1e-3) { return {Tag::LInfEps, eps}; }
    static NormKind nuclear(std::size_t rows, std::size_t cols) {
        return {Tag::Nuclear, 0.0, rows, cols};
    }
    static NormKind spectral(std::size_t rows, std::size_t cols) {
        return {Tag::Spectral, 0.0, rows, cols};
    }

    std::string label() const;
};

enum class Monotonicity { StrictlyIncreasing, NonDecreasing, Neither };

/// Behaviour of a norm on the nonnegative orthant.
Monotonicity monotonicity(NormKind::Tag tag);

/// One layer. Inner layers map each block of `blocks` to one output entry
/// (no blocks means a single block). On the outermost layer `blocks` turns
/// the norm into a weighted sum of block norms (L1 and L2 only). Block
/// weights other than 1 scale the norm and are accepted on L2 layers only.
struct Layer {
    NormKind norm;
    std::optional<GroupStructure> blocks;
};

/// f^(K) o ... o f^(1), layers listed innermost first.
struct LayeredNorm {
    std::vector<Layer> layers;
    std::size_t input_dim = 0;

    std::size_t depth() const { return layers.size(); }
    /// Input dimension of layer k (0-based); dim(depth()) == 1.
    std::size_t dim(std::size_t k) const;
};

enum class ErxClass { SolutionPreserving, ConvexRelaxationOnly, Invalid };

struct Classification {
    ErxClass cls = ErxClass::Invalid;
    std::string diagnostic;
};

Classification validate_assumptions(const LayeredNorm &ln);

/// Direct evaluation of the composite on v = A x.
double eval_layered(const LayeredNorm &ln, std::span<const double> v);

/// A proximable term g(B x).
struct GTerm {
    ProxFn fn;
    LinearOperator op;
};

struct RelaxOptions {
    /// Proximable constraint/penalty on x itself (the G part).
    std::optional<ProxFn> g_on_x;
};

/// Where each variable sits in the primal vector p = [x; z2..zK; eta...].
struct VariableLayout {
    std::size_t x_dim = 0;
    /// z_offsets[k] / z_dims[k] describe z^(k+2).
    std::vector<std::size_t> z_offsets;
    std::vector<std::size_t> z_dims;
    /// (eta1 offset, eta2 offset, length) for each LInfEps inner layer.
    struct EtaPair {
        std::size_t layer;
        std::size_t eta1, eta2, length;
    };
    std::vector<EtaPair> etas;
    std::size_t total = 0;

    std::span<const double> x(std::span<const double> p) const { return p.first(x_dim); }
    std::span<const double> z(std::span<const double> p, std::size_t k) const {
        return p.subspan(z_offsets.at(k - 2), z_dims.at(k - 2));
    }
};

struct RelaxedProblem {
    SplitProblem problem;
    VariableLayout layout;
    Classification classification;
    /// f^(1,K)(A x) plus the non-indicator g terms, evaluated on p.
    std::function<double(std::span<const double>)> original_objective;
};

/// Epigraphical relaxation: auxiliary variables for every inner layer, one
/// block epigraph constraint per inner layer (split in two plus a
/// nonpositivity constraint for LInfEps layers). Throws ConfigurationError
/// for outer norms without a usable proximity operator and for invalid trees.
RelaxedProblem relax(const LayeredNorm &ln, const LinearOperator &a_op,
                     const std::vector<GTerm> &g_terms, const RelaxOptions &opts = {});

/// Two-layer ||.||_{inf,eps} mixed norm over the blocks of `blocks`, plus g(x).
RelaxedProblem relax_modified_linf_2layer(const LinearOperator &a_op, double eps, const ProxFn &g,
                                          const GroupStructure &blocks);

/// Parses e.g. `l1(group6:l2)`, `l2(group18:nuclear9x2)`,
/// `linfeps0.01(group4:linfeps0.01)`. Inner groups are uniform of the given
/// size. Throws ParseError.
LayeredNorm parse_layered(std::string_view text, std::size_t input_dim);

} // namespace erx
