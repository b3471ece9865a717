#pragma once

#include "erx/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>

namespace erx {

/// Channel-planar image; within a channel pixels are stored column-major, so
/// sample (row, col) of channel c sits at c * N + col * height + row.
struct ImagePlane {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 0;
    DenseVector pixels;

    ImagePlane() = default;
    ImagePlane(std::size_t width, std::size_t height, std::size_t channels, double fill = 0.0);
    ImagePlane(std::size_t width, std::size_t height, std::size_t channels, DenseVector pixels);

    std::size_t pixel_count() const { return width * height; }
    double &at(std::size_t row, std::size_t col, std::size_t c) {
        return pixels[c * pixel_count() + col * height + row];
    }
    double at(std::size_t row, std::size_t col, std::size_t c) const {
        return pixels[c * pixel_count() + col * height + row];
    }
};

struct PatchConfig {
    std::size_t w = 3;
    void validate() const;
};

/// Periodic forward differences on one width x height channel.
std::pair<LinearOperator, LinearOperator> diff_ops(std::size_t width, std::size_t height);

/// I_channels (x) [Dv; Dh]: output block of channel c is [Dv x_c; Dh x_c].
LinearOperator gradient_op(std::size_t width, std::size_t height, std::size_t channels);

/// Orthonormal 3-point DCT across the channels of each pixel (C0 (x) I).
LinearOperator color_transform(std::size_t n_pixels);

/// The 3x3 matrix C0, rows are luma, chroma 1, chroma 2.
DenseMatrix dct3_matrix();

enum class GradientLayout { P1, P4 };

/// Reorders a 6N gradient vector laid out as by gradient_op.
/// P1: N luma (v, h) pairs, then N chroma 4-tuples (c1 v, c1 h, c2 v, c2 h).
/// P4: N per-pixel 6-tuples (c0 v, c0 h, c1 v, c1 h, c2 v, c2 h).
LinearOperator permute_gradients(GradientLayout layout, std::size_t width, std::size_t height);

/// Duplicates P1-ordered gradients into W^2 x 2 patch matrices (column-major,
/// rows in window order, periodic wrap). Output: N luma patches, then per
/// pixel the chroma-1 and chroma-2 patches. Identity for W = 1.
LinearOperator patch_expand(const PatchConfig &cfg, std::size_t width, std::size_t height);

struct MeasurementOptions {
    bool random_signs = true;
};

/// Phi = S H D: random signs D, block-diagonal normalized Walsh-Hadamard H
/// with blocks of `block` samples, then `m_rows` rows chosen without
/// replacement (kept in increasing order).
LinearOperator measurement_op(std::size_t m_rows, std::size_t n_cols, std::size_t block,
                              std::uint64_t seed, const MeasurementOptions &opts = {});

/// In-place normalized fast Walsh-Hadamard transform (length power of two).
void fwht(std::span<double> v);

inline constexpr double kPsnrCap = 999.0;

/// 10 log10(1 / MSE) with peak 1, capped at kPsnrCap.
double psnr(std::span<const double> a, std::span<const double> b);
double psnr(const ImagePlane &a, const ImagePlane &b);

/// Binary PPM (P6) or PGM (P5), maxval 255. Throws ParseError.
ImagePlane decode_pnm(const std::string &bytes);
std::string encode_pnm(const ImagePlane &img);
ImagePlane load_ppm(const std::filesystem::path &path);
/// Writes through a temporary file and a rename.
void save_ppm(const std::filesystem::path &path, const ImagePlane &img);

/// Writes `contents` to `path` via a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path &path, const std::string &contents);

} // namespace erx
