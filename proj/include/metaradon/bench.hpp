#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "metaradon/image.hpp"
#include "metaradon/projector.hpp"
#include "metaradon/reconstruction.hpp"

namespace metaradon {

inline constexpr int kGlyphW = 4;
inline constexpr int kGlyphH = 7;

// Built-in 4x7 digit font, one row string per glyph row ('#' = lit).
const std::array<std::array<const char*, kGlyphH>, 10>& digit_font();

// Tiles the scene with cells of (glyph_h + 1) x (glyph_h + 1) pixels, each
// holding one random digit (intensity 1 on a 0 background). Glyphs at sizes
// other than 4x7 are nearest-neighbor scaled from the built-in font.
ImageGrid generate_digit_scene(int width, int height, int glyph_h, int glyph_w,
                               std::uint64_t seed);

// Non-overlapping k x k mean pooling; partial blocks at the right and bottom
// edges are dropped.
ImageGrid average_pool(const ImageGrid& img, int k);

// Nearest-neighbor expansion of a pooled image back to width x height; pixels
// past the last full block reuse the last block.
ImageGrid upsample_nearest(const ImageGrid& pooled, int k, int width, int height);

enum class CompressionMethod { Radon, AvgPool };

struct CompressionResult {
  CompressionMethod method;
  long long captured_pixels = 0;
  long long reconstructed_pixels = 0;
  double ratio = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
};

std::string to_string(CompressionMethod m);

enum class StudyRecon { Fbp, Sart };

struct StudyOptions {
  StudyRecon recon = StudyRecon::Fbp;
  FbpFilter filter = FbpFilter::RamLak;
  int sart_iterations = 20;
  // 0: one detector bin per scene column, so each projection captures as many
  // pixels as a line detector spanning the scene width.
  int n_detectors = 0;
};

struct StudyResult {
  CompressionResult radon;
  CompressionResult pool;
  Sinogram sinogram;
  ImageGrid radon_image;  // clamped to [0, 1]
  ImageGrid pool_image;   // pooled then upsampled
};

// captured / reconstructed pixel counts for each branch.
double radon_compression_ratio(int n_angles, int n_detectors, int width, int height);
double pool_compression_ratio(int k, int width, int height);

StudyResult run_compression_study(const ImageGrid& scene, int n_angles, int pool_k,
                                  const StudyOptions& opts = {});

}  // namespace metaradon
