#include "erx/image.hpp"

#include "erx/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

namespace erx {

ImagePlane::ImagePlane(std::size_t width, std::size_t height, std::size_t channels, double fill)
    : width(width), height(height), channels(channels), pixels(width * height * channels, fill) {}

ImagePlane::ImagePlane(std::size_t width, std::size_t height, std::size_t channels,
                       DenseVector pixels)
    : width(width), height(height), channels(channels), pixels(std::move(pixels)) {
    if (this->pixels.size() != width * height * channels)
        throw StructureError("ImagePlane: pixel count does not match dimensions");
}

void PatchConfig::validate() const {
    if (w == 0 || w % 2 == 0)
        throw InvalidInput("PatchConfig: patch side must be odd and positive");
}

// ---------------------------------------------------------------------------

std::pair<LinearOperator, LinearOperator> diff_ops(std::size_t width, std::size_t height) {
    if (width < 2 || height < 2)
        throw InvalidInput("diff_ops: image must be at least 2x2");
    const std::size_t w = width, h = height, n = w * h;
    auto dv = [w, h](std::span<const double> x, std::span<double> y) {
        for (std::size_t c = 0; c < w; ++c)
            for (std::size_t r = 0; r < h; ++r)
                y[c * h + r] = x[c * h + (r + 1) % h] - x[c * h + r];
    };
    auto dvt = [w, h](std::span<const double> y, std::span<double> x) {
        for (std::size_t c = 0; c < w; ++c)
            for (std::size_t r = 0; r < h; ++r)
                x[c * h + r] = y[c * h + (r + h - 1) % h] - y[c * h + r];
    };
    auto dh = [w, h](std::span<const double> x, std::span<double> y) {
        for (std::size_t c = 0; c < w; ++c)
            for (std::size_t r = 0; r < h; ++r)
                y[c * h + r] = x[((c + 1) % w) * h + r] - x[c * h + r];
    };
    auto dht = [w, h](std::span<const double> y, std::span<double> x) {
        for (std::size_t c = 0; c < w; ++c)
            for (std::size_t r = 0; r < h; ++r)
                x[c * h + r] = y[((c + w - 1) % w) * h + r] - y[c * h + r];
    };
    return {LinearOperator(n, n, dv, dvt, "Dv"), LinearOperator(n, n, dh, dht, "Dh")};
}

LinearOperator gradient_op(std::size_t width, std::size_t height, std::size_t channels) {
    auto [dv, dh] = diff_ops(width, height);
    const std::size_t n = width * height;
    BlockOperatorBuilder b({n, n}, {n});
    b.add(0, 0, dv).add(1, 0, dh);
    return kron_identity(b.build("D0"), channels);
}

DenseMatrix dct3_matrix() {
    const double a = 1.0 / std::sqrt(3.0), b = 1.0 / std::sqrt(2.0), c = 1.0 / std::sqrt(6.0);
    return DenseMatrix::from_rows({{a, a, a}, {b, 0.0, -b}, {c, -2.0 * c, c}});
}

LinearOperator color_transform(std::size_t n) {
    const DenseMatrix c0 = dct3_matrix();
    auto fwd = [c0, n](std::span<const double> x, std::span<double> y) {
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t r = 0; r < 3; ++r)
                y[r * n + p] = c0(r, 0) * x[p] + c0(r, 1) * x[n + p] + c0(r, 2) * x[2 * n + p];
    };
    auto adj = [c0, n](std::span<const double> y, std::span<double> x) {
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t r = 0; r < 3; ++r)
                x[r * n + p] = c0(0, r) * y[p] + c0(1, r) * y[n + p] + c0(2, r) * y[2 * n + p];
    };
    return {3 * n, 3 * n, fwd, adj, "C"};
}

LinearOperator permute_gradients(GradientLayout layout, std::size_t width, std::size_t height) {
    const std::size_t n = width * height;
    std::vector<std::size_t> target(6 * n);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t p = 0; p < n; ++p) {
                const std::size_t in = c * 2 * n + j * n + p;
                if (layout == GradientLayout::P4)
                    target[in] = 6 * p + 2 * c + j;
                else if (c == 0)
                    target[in] = 2 * p + j;
                else
                    target[in] = 2 * n + 4 * p + 2 * (c - 1) + j;
            }
    return LinearOperator::permutation(std::move(target),
                                       layout == GradientLayout::P1 ? "P1" : "P4");
}

LinearOperator patch_expand(const PatchConfig &cfg, std::size_t width, std::size_t height) {
    cfg.validate();
    const std::size_t w = cfg.w, half = w / 2, ww = w * w;
    const std::size_t n = width * height;
    // source[k] is the P1 index copied into output entry k
    std::vector<std::size_t> source(6 * ww * n);
    auto neighbour = [&](std::size_t p, std::size_t i) {
        const std::size_t r = p % height, c = p / height;
        const std::size_t dr = i % w, dc = i / w;
        const std::size_t rr = (r + height + dr - half) % height;
        const std::size_t cc = (c + width + dc - half) % width;
        return cc * height + rr;
    };
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t i = 0; i < ww; ++i) {
            const std::size_t q = neighbour(p, i);
            for (std::size_t j = 0; j < 2; ++j) {
                source[p * 2 * ww + j * ww + i] = 2 * q + j;
                for (std::size_t c = 0; c < 2; ++c)
                    source[2 * ww * n + p * 4 * ww + c * 2 * ww + j * ww + i] =
                        2 * n + 4 * q + 2 * c + j;
            }
        }
    LinearOperator op = LinearOperator::selection(6 * n, std::move(source));
    return {op.in_dim(), op.out_dim(),
            [op](std::span<const double> x, std::span<double> y) { op.apply(x, y); },
            [op](std::span<const double> y, std::span<double> x) { op.apply_adjoint(y, x); },
            "E"};
}

void fwht(std::span<double> v) {
    const std::size_t n = v.size();
    for (std::size_t len = 1; len < n; len <<= 1)
        for (std::size_t i = 0; i < n; i += len << 1)
            for (std::size_t j = i; j < i + len; ++j) {
                const double a = v[j], b = v[j + len];
                v[j] = a + b;
                v[j + len] = a - b;
            }
    const double s = 1.0 / std::sqrt(static_cast<double>(n));
    for (double &x : v)
        x *= s;
}

LinearOperator measurement_op(std::size_t m_rows, std::size_t n_cols, std::size_t block,
                              std::uint64_t seed, const MeasurementOptions &opts) {
    if (block == 0 || (block & (block - 1)) != 0)
        throw InvalidInput("measurement_op: block length must be a power of two");
    if (n_cols % block != 0)
        throw InvalidInput("measurement_op: column count must be a multiple of the block length");
    if (m_rows > n_cols)
        throw InvalidInput("measurement_op: more rows than columns");

    std::mt19937_64 rng(seed);
    auto signs = std::make_shared<DenseVector>(n_cols, 1.0);
    if (opts.random_signs) {
        std::bernoulli_distribution coin(0.5);
        for (double &s : *signs)
            s = coin(rng) ? 1.0 : -1.0;
    }
    std::vector<std::size_t> all(n_cols);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::shuffle(all.begin(), all.end(), rng);
    auto rows = std::make_shared<std::vector<std::size_t>>(all.begin(),
                                                           all.begin() + static_cast<std::ptrdiff_t>(m_rows));
    std::sort(rows->begin(), rows->end());

    auto fwd = [signs, rows, n_cols, block](std::span<const double> x, std::span<double> y) {
        DenseVector t(n_cols);
        for (std::size_t i = 0; i < n_cols; ++i)
            t[i] = (*signs)[i] * x[i];
        for (std::size_t b = 0; b < n_cols; b += block)
            fwht(std::span<double>(t).subspan(b, block));
        for (std::size_t i = 0; i < rows->size(); ++i)
            y[i] = t[(*rows)[i]];
    };
    // H is symmetric, so the adjoint is D H S^T.
    auto adj = [signs, rows, n_cols, block](std::span<const double> y, std::span<double> x) {
        std::fill(x.begin(), x.end(), 0.0);
        for (std::size_t i = 0; i < rows->size(); ++i)
            x[(*rows)[i]] = y[i];
        for (std::size_t b = 0; b < n_cols; b += block)
            fwht(x.subspan(b, block));
        for (std::size_t i = 0; i < n_cols; ++i)
            x[i] *= (*signs)[i];
    };
    return {n_cols, m_rows, fwd, adj, "Phi"};
}

double psnr(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty())
        throw StructureError("psnr: sizes differ");
    double mse = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        mse += (a[i] - b[i]) * (a[i] - b[i]);
    mse /= static_cast<double>(a.size());
    if (mse == 0.0)
        return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double psnr(const ImagePlane &a, const ImagePlane &b) {
    if (a.width != b.width || a.height != b.height || a.channels != b.channels)
        throw StructureError("psnr: image dimensions differ");
    return psnr(a.pixels, b.pixels);
}

// ---------------------------------------------------------------------------
// PNM

namespace {

class HeaderReader {
  public:
    explicit HeaderReader(const std::string &b) : b_(b) {}

    void skip_space() {
        bool any = false;
        while (pos_ < b_.size()) {
            const char c = b_[pos_];
            if (c == '#') {
                while (pos_ < b_.size() && b_[pos_] != '\n')
                    ++pos_;
                any = true;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
                any = true;
            } else {
                break;
            }
        }
        if (!any)
            throw ParseError("pnm: expected whitespace", pos_);
    }

    std::size_t number() {
        const std::size_t start = pos_;
        std::size_t v = 0;
        while (pos_ < b_.size() && std::isdigit(static_cast<unsigned char>(b_[pos_]))) {
            v = v * 10 + static_cast<std::size_t>(b_[pos_] - '0');
            if (v > 1u << 24)
                throw ParseError("pnm: header value too large", start);
            ++pos_;
        }
        if (pos_ == start)
            throw ParseError("pnm: expected a decimal number", pos_);
        return v;
    }

    std::size_t pos() const { return pos_; }
    void advance(std::size_t n) { pos_ += n; }

  private:
    const std::string &b_;
    std::size_t pos_ = 0;
};

} // namespace

ImagePlane decode_pnm(const std::string &bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
        throw ParseError("pnm: expected magic P5 or P6", 0);
    const std::size_t channels = bytes[1] == '6' ? 3 : 1;
    HeaderReader r(bytes);
    r.advance(2);
    r.skip_space();
    const std::size_t width = r.number();
    r.skip_space();
    const std::size_t height = r.number();
    r.skip_space();
    const std::size_t maxpos = r.pos();
    const std::size_t maxval = r.number();
    if (width == 0 || height == 0)
        throw ParseError("pnm: zero image dimension", maxpos);
    if (maxval != 255)
        throw ParseError("pnm: only maxval 255 is supported", maxpos);
    if (r.pos() >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[r.pos()])))
        throw ParseError("pnm: expected a single whitespace after maxval", r.pos());
    r.advance(1);
    const std::size_t need = width * height * channels;
    if (bytes.size() - r.pos() < need)
        throw ParseError("pnm: truncated pixel data", bytes.size());
    if (bytes.size() - r.pos() > need)
        throw ParseError("pnm: trailing bytes after pixel data", r.pos() + need);

    ImagePlane img(width, height, channels);
    const auto *data = reinterpret_cast<const unsigned char *>(bytes.data() + r.pos());
    for (std::size_t row = 0; row < height; ++row)
        for (std::size_t col = 0; col < width; ++col)
            for (std::size_t c = 0; c < channels; ++c)
                img.at(row, col, c) = data[(row * width + col) * channels + c] / 255.0;
    return img;
}

std::string encode_pnm(const ImagePlane &img) {
    if (img.channels != 1 && img.channels != 3)
        throw InvalidInput("encode_pnm: 1 or 3 channels required");
    std::ostringstream os;
    os << (img.channels == 3 ? "P6" : "P5") << '\n'
       << img.width << ' ' << img.height << "\n255\n";
    std::string out = os.str();
    const std::size_t head = out.size();
    out.resize(head + img.width * img.height * img.channels);
    for (std::size_t row = 0; row < img.height; ++row)
        for (std::size_t col = 0; col < img.width; ++col)
            for (std::size_t c = 0; c < img.channels; ++c) {
                const double v = std::clamp(img.at(row, col, c), 0.0, 1.0);
                out[head + (row * img.width + col) * img.channels + c] =
                    static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
            }
    return out;
}

ImagePlane load_ppm(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InvalidInput("load_ppm: cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return decode_pnm(ss.str());
}

void write_file_atomic(const std::filesystem::path &path, const std::string &contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw InvalidInput("cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out)
            throw InvalidInput("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void save_ppm(const std::filesystem::path &path, const ImagePlane &img) {
    write_file_atomic(path, encode_pnm(img));
}

} // namespace erx
