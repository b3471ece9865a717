#include "erx/error.hpp"
#include "erx/image.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <string>

using namespace erx;

namespace {

DenseVector basis(std::size_t n, std::size_t i) {
    DenseVector e(n, 0.0);
    e[i] = 1.0;
    return e;
}

double max_abs_diff(const DenseMatrix &a, const DenseMatrix &b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a.vec()[i] - b.vec()[i]));
    return m;
}

} // namespace

TEST(DiffOps, PeriodicForwardDifferences) {
    const std::size_t w = 3, h = 2;
    auto [dv, dh] = diff_ops(w, h);
    // x(row, col) = 10 col + row, column-major
    DenseVector x(w * h);
    for (std::size_t c = 0; c < w; ++c)
        for (std::size_t r = 0; r < h; ++r)
            x[c * h + r] = 10.0 * c + r;
    const DenseVector v = dv(x), hz = dh(x);
    EXPECT_EQ(v, (DenseVector{1, -1, 1, -1, 1, -1}));
    EXPECT_EQ(hz, (DenseVector{10, 10, 10, 10, -20, -20}));
}

TEST(DiffOps, AdjointAndNorm) {
    auto [dv, dh] = diff_ops(8, 8);
    EXPECT_TRUE(adjoint_check(dv));
    EXPECT_TRUE(adjoint_check(dh));
    const LinearOperator g = gradient_op(8, 8, 3);
    EXPECT_TRUE(adjoint_check(g));
    EXPECT_EQ(g.out_dim(), 6u * 64u);
    const double s = singular_values(g.to_dense())[0];
    EXPECT_LE(s, 2.0 * std::sqrt(2.0) + 1e-12);
    EXPECT_NEAR(s, 2.0 * std::sqrt(2.0), 1e-9);  // even side: the checkerboard attains it
}

TEST(ColorTransform, OrthonormalAndLuma) {
    const DenseMatrix c = dct3_matrix();
    EXPECT_LE(max_abs_diff(c * c.transpose(), DenseMatrix::identity(3)), 1e-15);
    const LinearOperator ct = color_transform(4);
    EXPECT_TRUE(adjoint_check(ct));
    DenseVector gray(12, 0.0);
    for (std::size_t ch = 0; ch < 3; ++ch)
        gray[ch * 4 + 1] = 0.5;
    const DenseVector y = ct(gray);
    EXPECT_NEAR(y[1], 0.5 * std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(y[4 + 1], 0.0, 1e-15);
    EXPECT_NEAR(y[8 + 1], 0.0, 1e-15);
}

TEST(PermuteGradients, DocumentedPositions) {
    const std::size_t w = 3, h = 2, n = 6;
    const LinearOperator p1 = permute_gradients(GradientLayout::P1, w, h);
    const LinearOperator p4 = permute_gradients(GradientLayout::P4, w, h);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t p = 0; p < n; ++p) {
                const DenseVector e = basis(6 * n, c * 2 * n + j * n + p);
                const std::size_t at1 = c == 0 ? 2 * p + j : 2 * n + 4 * p + 2 * (c - 1) + j;
                EXPECT_EQ(p1(e)[at1], 1.0);
                EXPECT_EQ(p4(e)[6 * p + 2 * c + j], 1.0);
            }
    for (const LinearOperator *op : {&p1, &p4}) {
        const DenseMatrix m = op->to_dense();
        EXPECT_EQ(m * m.transpose(), DenseMatrix::identity(6 * n));
    }
}

TEST(PermuteGradients, VtvOfTwoByTwoImage) {
    ImagePlane img(2, 2, 3);
    img.at(0, 0, 0) = 1.0;
    img.at(1, 1, 2) = 0.5;
    const DenseVector g = compose(permute_gradients(GradientLayout::P4, 2, 2), gradient_op(2, 2, 3))(img.pixels);
    double vtv = 0;
    for (std::size_t p = 0; p < 4; ++p)
        vtv += norm2(std::span<const double>(g).subspan(6 * p, 6));
    // each pixel sees one vertical and one horizontal jump per nonzero channel
    double expect = 0;
    for (std::size_t col = 0; col < 2; ++col)
        for (std::size_t row = 0; row < 2; ++row) {
            double s = 0;
            for (std::size_t c = 0; c < 3; ++c) {
                const double v = img.at((row + 1) % 2, col, c) - img.at(row, col, c);
                const double hz = img.at(row, (col + 1) % 2, c) - img.at(row, col, c);
                s += v * v + hz * hz;
            }
            expect += std::sqrt(s);
        }
    EXPECT_NEAR(vtv, expect, 1e-15);
}

TEST(PatchExpand, WidthOneIsIdentity) {
    const LinearOperator e = patch_expand(PatchConfig{1}, 3, 4);
    EXPECT_EQ(e.to_dense(), DenseMatrix::identity(6 * 12));
}

TEST(PatchExpand, EachEntryCopiedWSquaredTimes) {
    const LinearOperator e = patch_expand(PatchConfig{3}, 4, 3);
    EXPECT_EQ(e.out_dim(), 9u * e.in_dim());
    EXPECT_TRUE(adjoint_check(e));
    const DenseVector counts = e.adjoint(DenseVector(e.out_dim(), 1.0));
    for (double c : counts)
        EXPECT_EQ(c, 9.0);
    EXPECT_THROW(patch_expand(PatchConfig{2}, 4, 3), InvalidInput);
}

TEST(PatchExpand, CentredWindow) {
    const std::size_t w = 4, h = 3, n = 12;
    const LinearOperator e = patch_expand(PatchConfig{3}, w, h);
    // luma vertical entry of pixel q = (row 0, col 0)
    const DenseVector out = e(basis(6 * n, 0));
    // pixel (row 1, col 1) has (0, 0) at window offset (-1, -1), the first row
    const std::size_t p = 1 * h + 1;
    EXPECT_EQ(out[p * 18 + 0], 1.0);
    // pixel (row 2, col 3) wraps to (0, 0) at offset (+1, +1), the last row
    const std::size_t p2 = 3 * h + 2;
    EXPECT_EQ(out[p2 * 18 + 8], 1.0);
}

TEST(Measurement, OrthonormalRowsWithoutSigns) {
    const LinearOperator phi = measurement_op(6, 16, 8, 3, MeasurementOptions{false});
    const DenseMatrix m = phi.to_dense();
    EXPECT_LE(max_abs_diff(m * m.transpose(), DenseMatrix::identity(6)), 1e-15);
    for (double v : m.vec())
        EXPECT_TRUE(v == 0.0 || std::abs(std::abs(v) - 1 / std::sqrt(8.0)) < 1e-15) << v;
}

TEST(Measurement, AdjointEnergyDeterminism) {
    const LinearOperator phi = measurement_op(20, 48, 16, 9);
    EXPECT_TRUE(adjoint_check(phi));
    const DenseVector x = random_normal(48, 1);
    EXPECT_LE(norm2(phi(x)), norm2(x) * (1 + 1e-14));
    EXPECT_EQ(phi(x), measurement_op(20, 48, 16, 9)(x));
    EXPECT_NE(phi(x), measurement_op(20, 48, 16, 10)(x));
    const DenseMatrix m = phi.to_dense();
    EXPECT_LE(max_abs_diff(m * m.transpose(), DenseMatrix::identity(20)), 1e-14);
}

TEST(Measurement, RejectsBadShapes) {
    EXPECT_THROW(measurement_op(4, 12, 3, 0), InvalidInput);
    EXPECT_THROW(measurement_op(4, 12, 8, 0), InvalidInput);
    EXPECT_THROW(measurement_op(17, 16, 8, 0), InvalidInput);
}

TEST(Fwht, Involution) {
    DenseVector v{1, 2, 3, 4, 5, 6, 7, 8};
    const DenseVector orig = v;
    fwht(v);
    EXPECT_NEAR(v[0], 36 / std::sqrt(8.0), 1e-14);
    fwht(v);
    for (std::size_t i = 0; i < 8; ++i)
        EXPECT_NEAR(v[i], orig[i], 1e-14);
}

TEST(Psnr, Values) {
    const DenseVector zero(10, 0.0), one(10, 1.0);
    EXPECT_EQ(psnr(zero, zero), kPsnrCap);
    EXPECT_NEAR(psnr(zero, one), 0.0, 1e-12);
    EXPECT_NEAR(psnr(zero, DenseVector(10, std::sqrt(1e-3))), 30.0, 1e-10);
    EXPECT_THROW(psnr(zero, DenseVector(3, 0.0)), StructureError);
}

TEST(Pnm, DecodeExample) {
    const std::string bytes = std::string("P6\n# comment\n2 1\n255\n") + std::string("\xff\x00\x00\x00\x80\xff", 6);
    const ImagePlane img = decode_pnm(bytes);
    EXPECT_EQ(img.width, 2u);
    EXPECT_EQ(img.height, 1u);
    EXPECT_EQ(img.channels, 3u);
    EXPECT_EQ(img.at(0, 0, 0), 1.0);
    EXPECT_EQ(img.at(0, 1, 1), 128.0 / 255.0);
    EXPECT_EQ(img.at(0, 1, 2), 1.0);
    const ImagePlane gray = decode_pnm(std::string("P5 1 2 255\n\x10\x20", 13));
    EXPECT_EQ(gray.channels, 1u);
    EXPECT_EQ(gray.at(1, 0, 0), 32.0 / 255.0);
}

TEST(Pnm, RoundTripThroughFile) {
    ImagePlane img(3, 2, 3);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        img.pixels[i] = static_cast<double>(i * 13 % 256) / 255.0;
    EXPECT_EQ(decode_pnm(encode_pnm(img)).pixels, img.pixels);
    const auto path = std::filesystem::temp_directory_path() / "erx_roundtrip_test.ppm";
    save_ppm(path, img);
    EXPECT_EQ(load_ppm(path).pixels, img.pixels);
    std::filesystem::remove(path);
}

TEST(Pnm, EncodeClampsAndRounds) {
    ImagePlane img(2, 1, 1, DenseVector{-0.2, 1.7});
    const ImagePlane back = decode_pnm(encode_pnm(img));
    EXPECT_EQ(back.pixels, (DenseVector{0.0, 1.0}));
}

TEST(Pnm, MalformedInputs) {
    struct Case {
        std::string bytes;
        std::size_t offset;
    };
    const std::string px4(4, '\x01');
    const Case cases[] = {
        {"P3 1 1 255\n\x01", 0},
        {"", 0},
        {"P6x", 2},
        {"P5 a 1 255\n", 3},
        {"P5 0 1 255\n", 7},
        {"P5 2 2 65535\n" + px4, 7},
        {"P5 2 2 255" + px4, 10},
        {"P5 2 2 255\n\x01\x01\x01", 14},
        {"P5 2 2 255\n" + px4 + "x", 15},
        {"P5 99999999 1 255\n", 3},
    };
    for (const Case &c : cases) {
        try {
            decode_pnm(c.bytes);
            ADD_FAILURE() << "accepted " << c.bytes.size() << "-byte input";
        } catch (const ParseError &e) {
            EXPECT_EQ(e.offset, c.offset) << e.what();
        }
    }
}
