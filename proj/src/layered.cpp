#include "erx/layered.hpp"

#include "erx/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

namespace erx {

std::string NormKind::label() const {
    std::ostringstream os;
    switch (tag) {
    case Tag::L1: os << "l1"; break;
    case Tag::L2: os << "l2"; break;
    case Tag::LInf: os << "linf"; break;
    case Tag::LInfEps: os << "linfeps" << eps; break;
    case Tag::Nuclear: os << "nuclear" << rows << 'x' << cols; break;
    case Tag::Spectral: os << "spectral" << rows << 'x' << cols; break;
    }
    return os.str();
}

Monotonicity monotonicity(NormKind::Tag tag) {
    switch (tag) {
    case NormKind::Tag::L1:
    case NormKind::Tag::L2:
    case NormKind::Tag::LInfEps: return Monotonicity::StrictlyIncreasing;
    case NormKind::Tag::LInf:
    case NormKind::Tag::Spectral: return Monotonicity::NonDecreasing;
    case NormKind::Tag::Nuclear: return Monotonicity::Neither;
    }
    return Monotonicity::Neither;
}

std::size_t LayeredNorm::dim(std::size_t k) const {
    std::size_t d = input_dim;
    for (std::size_t j = 0; j < k && j < layers.size(); ++j) {
        if (j + 1 == layers.size())
            return 1;
        d = layers[j].blocks ? layers[j].blocks->count() : 1;
    }
    return d;
}

namespace {

using Tag = NormKind::Tag;

double norm_value(const NormKind &k, std::span<const double> v) {
    switch (k.tag) {
    case Tag::L1: return norm1(v);
    case Tag::L2: return norm2(v);
    case Tag::LInf: return norm_inf(v);
    case Tag::LInfEps: return norm_inf(v) + k.eps * norm2(v);
    case Tag::Nuclear:
        return nuclear_norm(DenseMatrix(k.rows, k.cols, DenseVector(v.begin(), v.end())));
    case Tag::Spectral:
        return singular_values(DenseMatrix(k.rows, k.cols, DenseVector(v.begin(), v.end())))[0];
    }
    return 0.0;
}

GroupStructure blocks_or_single(const Layer &layer, std::size_t dim) {
    return layer.blocks ? *layer.blocks : GroupStructure::uniform(1, dim);
}

std::string check_structure(const LayeredNorm &ln) {
    if (ln.layers.empty())
        return "layered norm has no layers";
    if (ln.input_dim == 0)
        return "input dimension is zero";
    std::size_t dim = ln.input_dim;
    for (std::size_t j = 0; j < ln.layers.size(); ++j) {
        const Layer &layer = ln.layers[j];
        const bool outer = j + 1 == ln.layers.size();
        const std::string where = "layer " + std::to_string(j + 1) + " (" + layer.norm.label() + ")";
        if (layer.norm.tag == Tag::LInfEps && !(layer.norm.eps > 0.0))
            return where + ": eps must be positive";
        const bool matrix = layer.norm.tag == Tag::Nuclear || layer.norm.tag == Tag::Spectral;
        if (matrix && layer.norm.rows * layer.norm.cols == 0)
            return where + ": matrix shape is empty";
        GroupStructure gs = blocks_or_single(layer, dim);
        try {
            gs.validate(dim);
        } catch (const StructureError &e) {
            return where + ": " + e.what();
        }
        if (outer && layer.blocks && layer.norm.tag != Tag::L1 && layer.norm.tag != Tag::L2)
            return where + ": weighted block sums are supported for l1 and l2 only";
        for (std::size_t g = 0; g < gs.count(); ++g) {
            if (matrix && gs.sizes[g] != layer.norm.rows * layer.norm.cols)
                return where + ": block " + std::to_string(g) + " has " +
                       std::to_string(gs.sizes[g]) + " entries, matrix shape needs " +
                       std::to_string(layer.norm.rows * layer.norm.cols);
            if (!outer && layer.norm.tag != Tag::L2 && gs.weights[g] != 1.0)
                return where + ": block weights are supported on l2 layers only";
            if (!outer && layer.norm.tag == Tag::L2 && !(gs.weights[g] > 0.0))
                return where + ": l2 block weights must be positive";
        }
        dim = gs.count();
    }
    return {};
}

} // namespace

Classification validate_assumptions(const LayeredNorm &ln) {
    if (std::string why = check_structure(ln); !why.empty())
        return {ErxClass::Invalid, why};
    for (std::size_t j = 1; j < ln.layers.size(); ++j) {
        const Layer &layer = ln.layers[j];
        const Monotonicity m = monotonicity(layer.norm.tag);
        if (m != Monotonicity::StrictlyIncreasing)
            return {ErxClass::ConvexRelaxationOnly,
                    "layer " + std::to_string(j + 1) + " (" + layer.norm.label() + ") is " +
                        (m == Monotonicity::NonDecreasing ? "non-decreasing only"
                                                          : "not monotone") +
                        " on the nonnegative orthant"};
        if (layer.blocks)
            for (double w : layer.blocks->weights)
                if (!(w > 0.0))
                    return {ErxClass::ConvexRelaxationOnly,
                            "layer " + std::to_string(j + 1) + " has a zero block weight"};
    }
    return {ErxClass::SolutionPreserving, "all outer layers strictly increasing"};
}

double eval_layered(const LayeredNorm &ln, std::span<const double> v) {
    if (std::string why = check_structure(ln); !why.empty())
        throw StructureError("eval_layered: " + why);
    if (v.size() != ln.input_dim)
        throw StructureError("eval_layered: input has " + std::to_string(v.size()) +
                             " entries, norm expects " + std::to_string(ln.input_dim));
    DenseVector cur(v.begin(), v.end());
    for (std::size_t j = 0; j < ln.layers.size(); ++j) {
        const Layer &layer = ln.layers[j];
        const bool outer = j + 1 == ln.layers.size();
        if (outer && !layer.blocks)
            return norm_value(layer.norm, cur);
        const GroupStructure gs = blocks_or_single(layer, cur.size());
        DenseVector next(gs.count());
        for (std::size_t g = 0; g < gs.count(); ++g)
            next[g] = gs.weights[g] *
                      norm_value(layer.norm, std::span<const double>(cur).subspan(gs.offsets[g],
                                                                                 gs.sizes[g]));
        if (outer)
            return std::accumulate(next.begin(), next.end(), 0.0);
        cur = std::move(next);
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// relax

namespace {

ProxFn weighted_l1(GroupStructure gs) {
    auto prox = [gs](std::span<const double> x, double g, std::span<double> out) {
        for (std::size_t k = 0; k < gs.count(); ++k)
            soft_threshold(x.subspan(gs.offsets[k], gs.sizes[k]), g * gs.weights[k],
                           out.subspan(gs.offsets[k], gs.sizes[k]));
    };
    auto value = [gs](std::span<const double> x) {
        double s = 0.0;
        for (std::size_t k = 0; k < gs.count(); ++k)
            s += gs.weights[k] * norm1(x.subspan(gs.offsets[k], gs.sizes[k]));
        return s;
    };
    return {"weighted_l1", prox, value};
}

ProxFn spectral(std::size_t rows, std::size_t cols) {
    auto prox = [rows, cols](std::span<const double> x, double g, std::span<double> out) {
        const SvdResult s = svd_thin(DenseMatrix(rows, cols, DenseVector(x.begin(), x.end())));
        const DenseVector t = prox_linf(s.singular_values, g);
        const DenseMatrix r = s.reconstruct(t);
        std::copy(r.vec().begin(), r.vec().end(), out.begin());
    };
    auto value = [rows, cols](std::span<const double> x) {
        return singular_values(DenseMatrix(rows, cols, DenseVector(x.begin(), x.end())))[0];
    };
    return {"spectral", prox, value};
}

std::vector<ProxFn> outer_prox(const Layer &layer) {
    const NormKind &k = layer.norm;
    if (layer.blocks) {
        if (k.tag == Tag::L2)
            return {fn::group_l21(*layer.blocks)};
        if (k.tag == Tag::L1)
            return {weighted_l1(*layer.blocks)};
        throw ConfigurationError("relax: no proximity operator for a weighted block sum of " +
                                 k.label());
    }
    switch (k.tag) {
    case Tag::L1: return {fn::l1()};
    case Tag::L2: return {fn::l2()};
    case Tag::LInf: return {fn::linf()};
    case Tag::LInfEps: return {fn::linf(), fn::scaled_l2(k.eps)};
    case Tag::Nuclear: return {fn::nuclear(k.rows, k.cols)};
    case Tag::Spectral: return {spectral(k.rows, k.cols)};
    }
    throw ConfigurationError("relax: unsupported outer norm");
}

BlockEpigraph epigraph_for(const NormKind &k, GroupStructure gs) {
    BlockEpigraph be;
    be.gs = std::move(gs);
    switch (k.tag) {
    case Tag::L2: be.kind = EpiKind::L2; break;
    case Tag::L1: be.kind = EpiKind::L1; break;
    case Tag::LInf: be.kind = EpiKind::LInf; break;
    case Tag::Nuclear:
        be.kind = EpiKind::Schatten;
        be.p = SchattenP::One;
        be.rows = k.rows;
        be.cols = k.cols;
        break;
    case Tag::Spectral:
        be.kind = EpiKind::Schatten;
        be.p = SchattenP::Inf;
        be.rows = k.rows;
        be.cols = k.cols;
        break;
    case Tag::LInfEps: throw ConfigurationError("relax: LInfEps epigraph needs splitting");
    }
    return be;
}

// One row block of F: the operator applied to a primal column block.
struct RowPart {
    std::size_t size;
    std::vector<std::pair<std::size_t, LinearOperator>> cols;
};

} // namespace

RelaxedProblem relax(const LayeredNorm &ln, const LinearOperator &a_op,
                     const std::vector<GTerm> &g_terms, const RelaxOptions &opts) {
    RelaxedProblem rp;
    rp.classification = validate_assumptions(ln);
    if (rp.classification.cls == ErxClass::Invalid)
        throw ConfigurationError("relax: " + rp.classification.diagnostic);
    if (a_op.out_dim() != ln.input_dim)
        throw StructureError("relax: A maps to " + std::to_string(a_op.out_dim()) +
                             " entries, norm expects " + std::to_string(ln.input_dim));
    const std::size_t K = ln.depth();
    const std::size_t nx = a_op.in_dim();
    for (const GTerm &g : g_terms)
        if (g.op.in_dim() != nx)
            throw StructureError("relax: g term '" + g.fn.name + "' operator has wrong input size");

    // primal column blocks: x, w_1..w_{K-1} (input of layer j), then eta pairs
    std::vector<std::size_t> dims(K + 1);
    for (std::size_t j = 0; j <= K; ++j)
        dims[j] = ln.dim(j);
    VariableLayout &lay = rp.layout;
    lay.x_dim = nx;
    std::vector<std::size_t> col_sizes{nx};
    std::size_t off = nx;
    for (std::size_t j = 1; j < K; ++j) {
        lay.z_offsets.push_back(off);
        lay.z_dims.push_back(dims[j]);
        col_sizes.push_back(dims[j]);
        off += dims[j];
    }
    std::vector<std::size_t> eta_col;  // column index of eta1 for each inner LInfEps layer
    for (std::size_t j = 0; j + 1 < K; ++j) {
        if (ln.layers[j].norm.tag != Tag::LInfEps)
            continue;
        const std::size_t len = dims[j + 1];
        lay.etas.push_back({j, off, off + len, len});
        eta_col.push_back(col_sizes.size());
        col_sizes.push_back(len);
        col_sizes.push_back(len);
        off += 2 * len;
    }
    lay.total = off;

    auto input_of = [&](std::size_t j) -> std::pair<std::size_t, LinearOperator> {
        if (j == 0)
            return {0, a_op};
        return {j, LinearOperator::identity(dims[j])};
    };

    std::vector<RowPart> rows;
    std::vector<SliceTerm> h;
    std::size_t q = 0;
    auto add_term = [&](ProxFn f, std::size_t len) {
        h.push_back({std::move(f), q, len});
        q += len;
    };

    // outermost norm
    for (ProxFn &f : outer_prox(ln.layers[K - 1])) {
        rows.push_back({dims[K - 1], {input_of(K - 1)}});
        add_term(std::move(f), dims[K - 1]);
    }
    // g terms
    for (const GTerm &g : g_terms) {
        rows.push_back({g.op.out_dim(), {{0, g.op}}});
        add_term(g.fn, g.op.out_dim());
    }
    // one epigraph constraint per inner layer
    std::size_t eta_idx = 0;
    for (std::size_t j = 0; j + 1 < K; ++j) {
        const Layer &layer = ln.layers[j];
        const GroupStructure gs = blocks_or_single(layer, dims[j]);
        const std::size_t nin = dims[j], nout = dims[j + 1];
        const LinearOperator out_id = LinearOperator::identity(nout);
        if (layer.norm.tag != Tag::LInfEps) {
            rows.push_back({nin, {input_of(j)}});
            rows.push_back({nout, {{j + 1, out_id}}});
            add_term(fn::block_epigraph(epigraph_for(layer.norm, gs)), nin + nout);
            continue;
        }
        const std::size_t c1 = eta_col[eta_idx++];
        BlockEpigraph inf_part = epigraph_for(NormKind::linf(), gs);
        GroupStructure scaled = gs;
        std::fill(scaled.weights.begin(), scaled.weights.end(), layer.norm.eps);
        BlockEpigraph l2_part = epigraph_for(NormKind::l2(), scaled);
        rows.push_back({nin, {input_of(j)}});
        rows.push_back({nout, {{c1, out_id}}});
        add_term(fn::block_epigraph(inf_part), nin + nout);
        rows.push_back({nin, {input_of(j)}});
        rows.push_back({nout, {{c1 + 1, out_id}}});
        add_term(fn::block_epigraph(l2_part), nin + nout);
        rows.push_back({nout, {{c1, out_id}, {c1 + 1, out_id}, {j + 1, scale(out_id, -1.0)}}});
        add_term(fn::nonpositive(), nout);
    }

    std::vector<std::size_t> row_sizes;
    for (const RowPart &r : rows)
        row_sizes.push_back(r.size);
    BlockOperatorBuilder fb(row_sizes, col_sizes);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (const auto &[c, op] : rows[r].cols)
            fb.add(r, c, op);

    SplitProblem &sp = rp.problem;
    sp.primal_dim = lay.total;
    sp.dual_dim = q;
    sp.h_blocks = std::move(h);
    sp.f_op = fb.build("F");
    if (opts.g_on_x)
        sp.g_blocks.push_back({*opts.g_on_x, 0, nx});

    rp.original_objective = [ln, a_op, g_terms, g_on_x = opts.g_on_x,
                             nx](std::span<const double> p) {
        const auto x = p.first(nx);
        double v = eval_layered(ln, a_op(x));
        for (const GTerm &g : g_terms)
            if (!g.fn.indicator)
                v += g.fn.value(g.op(x));
        if (g_on_x && !g_on_x->indicator)
            v += g_on_x->value(x);
        return v;
    };
    return rp;
}

RelaxedProblem relax_modified_linf_2layer(const LinearOperator &a_op, double eps, const ProxFn &g,
                                          const GroupStructure &blocks) {
    if (!(eps > 0.0))
        throw InvalidInput("relax_modified_linf_2layer: eps must be positive");
    LayeredNorm ln;
    ln.input_dim = a_op.out_dim();
    ln.layers = {Layer{NormKind::linf_eps(eps), blocks}, Layer{NormKind::linf_eps(eps), {}}};
    return relax(ln, a_op, {GTerm{g, LinearOperator::identity(a_op.in_dim())}});
}

// ---------------------------------------------------------------------------
// parser

namespace {

class NormParser {
  public:
    explicit NormParser(std::string_view s) : s_(s) {}

    struct Parsed {
        NormKind norm;
        std::size_t group = 0;  // block size of the layer, 0 for the outermost
    };

    std::vector<Parsed> parse() {
        std::vector<Parsed> out;
        out.push_back({norm(), 0});
        while (eat('(')) {
            expect_word("group");
            const std::size_t g = integer();
            if (g == 0)
                fail("group size must be positive");
            if (!eat(':'))
                fail("expected ':'");
            out.push_back({norm(), g});
            ++depth_;
        }
        for (; depth_ > 0; --depth_)
            if (!eat(')'))
                fail("expected ')'");
        if (pos_ != s_.size())
            fail("trailing characters");
        return out;
    }

  private:
    NormKind norm() {
        if (word("linfeps")) {
            NormKind k = NormKind::linf_eps();
            if (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
                k.eps = number();
            return k;
        }
        if (word("linf"))
            return NormKind::linf();
        if (word("l1"))
            return NormKind::l1();
        if (word("l2"))
            return NormKind::l2();
        const bool nuc = word("nuclear");
        if (nuc || word("spectral")) {
            const std::size_t r = integer();
            if (!eat('x'))
                fail("expected 'x' in matrix shape");
            const std::size_t c = integer();
            return nuc ? NormKind::nuclear(r, c) : NormKind::spectral(r, c);
        }
        fail("unknown norm");
    }

    bool word(std::string_view w) {
        if (s_.substr(pos_, w.size()) == w) {
            pos_ += w.size();
            return true;
        }
        return false;
    }
    void expect_word(std::string_view w) {
        if (!word(w))
            fail("expected '" + std::string(w) + "'");
    }
    bool eat(char c) {
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    std::size_t integer() {
        std::size_t v = 0;
        auto [p, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
        if (ec != std::errc())
            fail("expected an integer");
        pos_ = static_cast<std::size_t>(p - s_.data());
        return v;
    }
    double number() {
        double v = 0;
        auto [p, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
        if (ec != std::errc())
            fail("expected a number");
        pos_ = static_cast<std::size_t>(p - s_.data());
        return v;
    }
    [[noreturn]] void fail(const std::string &msg) const {
        throw ParseError("norm tree: " + msg, pos_);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    std::size_t depth_ = 0;
};

} // namespace

LayeredNorm parse_layered(std::string_view text, std::size_t input_dim) {
    auto parsed = NormParser(text).parse();
    std::reverse(parsed.begin(), parsed.end());
    LayeredNorm ln;
    ln.input_dim = input_dim;
    std::size_t dim = input_dim;
    for (std::size_t j = 0; j < parsed.size(); ++j) {
        Layer layer{parsed[j].norm, {}};
        if (j + 1 < parsed.size()) {
            const std::size_t g = parsed[j].group;
            if (dim % g != 0)
                throw ParseError("norm tree: group size " + std::to_string(g) +
                                     " does not divide dimension " + std::to_string(dim),
                                 0);
            layer.blocks = GroupStructure::uniform(dim / g, g);
            dim /= g;
        }
        ln.layers.push_back(std::move(layer));
    }
    return ln;
}

} // namespace erx
