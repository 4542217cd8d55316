#include "metaradon/bench.hpp"

#include <algorithm>
#include <cstring>

#include "metaradon/error.hpp"
#include "metaradon/metrics.hpp"
#include "metaradon/rng.hpp"

namespace metaradon {

const std::array<std::array<const char*, kGlyphH>, 10>& digit_font() {
  static const std::array<std::array<const char*, kGlyphH>, 10> font{{
      {".##.", "#..#", "#..#", "#..#", "#..#", "#..#", ".##."},
      {"..#.", ".##.", "..#.", "..#.", "..#.", "..#.", ".###"},
      {".##.", "#..#", "...#", "..#.", ".#..", "#...", "####"},
      {"###.", "...#", "...#", ".##.", "...#", "...#", "###."},
      {"..#.", ".##.", "#.#.", "####", "..#.", "..#.", "..#."},
      {"####", "#...", "###.", "...#", "...#", "#..#", ".##."},
      {".##.", "#...", "#...", "###.", "#..#", "#..#", ".##."},
      {"####", "...#", "..#.", "..#.", ".#..", ".#..", ".#.."},
      {".##.", "#..#", "#..#", ".##.", "#..#", "#..#", ".##."},
      {".##.", "#..#", "#..#", ".###", "...#", "...#", ".##."},
  }};
  return font;
}

ImageGrid generate_digit_scene(int width, int height, int glyph_h, int glyph_w,
                               std::uint64_t seed) {
  require(glyph_h >= 1 && glyph_w >= 1, "glyph dims must be >= 1");
  const int cell = glyph_h + 1;
  require(glyph_w <= cell && cell <= width && cell <= height,
          "glyph cells must fit inside the scene");
  ImageGrid img(width, height);
  Rng rng(seed);
  const auto& font = digit_font();
  const int off_x = (cell - glyph_w) / 2;
  for (int cy = 0; cy + cell <= height; cy += cell)
    for (int cx = 0; cx + cell <= width; cx += cell) {
      const auto& g = font[rng.below(10)];
      for (int r = 0; r < glyph_h; ++r) {
        const int fr = r * kGlyphH / glyph_h;
        for (int c = 0; c < glyph_w; ++c) {
          const int fc = c * kGlyphW / glyph_w;
          if (g[fr][fc] == '#') img.at(cx + off_x + c, cy + r) = 1.0;
        }
      }
    }
  return img;
}

ImageGrid average_pool(const ImageGrid& img, int k) {
  require(k >= 1, "pool window must be >= 1");
  if (k > std::min(img.width(), img.height()))
    fail(ErrorKind::Validation, "pool window exceeds image dimensions");
  const int ow = img.width() / k;
  const int oh = img.height() / k;
  ImageGrid out(ow, oh, 0.0, img.pitch() * k);
  const double inv = 1.0 / (static_cast<double>(k) * k);
  for (int r = 0; r < oh; ++r)
    for (int c = 0; c < ow; ++c) {
      double s = 0.0;
      for (int dr = 0; dr < k; ++dr)
        for (int dc = 0; dc < k; ++dc) s += img.at(c * k + dc, r * k + dr);
      out.at(c, r) = s * inv;
    }
  return out;
}

ImageGrid upsample_nearest(const ImageGrid& pooled, int k, int width, int height) {
  ImageGrid out(width, height, 0.0, pooled.pitch() / k);
  for (int r = 0; r < height; ++r) {
    const int pr = std::min(r / k, pooled.height() - 1);
    for (int c = 0; c < width; ++c) out.at(c, r) = pooled.at(std::min(c / k, pooled.width() - 1), pr);
  }
  return out;
}

std::string to_string(CompressionMethod m) {
  return m == CompressionMethod::Radon ? "radon" : "avgpool";
}

double radon_compression_ratio(int n_angles, int n_detectors, int width, int height) {
  return static_cast<double>(n_angles) * n_detectors /
         (static_cast<double>(width) * height);
}

double pool_compression_ratio(int k, int width, int height) {
  return static_cast<double>(width / k) * (height / k) / (static_cast<double>(width) * height);
}

StudyResult run_compression_study(const ImageGrid& scene, int n_angles, int pool_k,
                                  const StudyOptions& opts) {
  require(n_angles >= 2, "compression study needs at least 2 angles");
  const int w = scene.width();
  const int h = scene.height();
  const int nd = opts.n_detectors > 0 ? opts.n_detectors : w;
  const long long total = static_cast<long long>(w) * h;

  auto geom = ProjectionGeometry::for_image(w, h, make_uniform_angles(n_angles), nd);
  geom.pixel_pitch = scene.pitch();
  Sinogram sino = radon_fft_dc(scene, geom);

  ImageGrid rec;
  if (opts.recon == StudyRecon::Fbp) {
    rec = fbp(sino, opts.filter);
  } else {
    SartConfig cfg;
    cfg.n_iterations = opts.sart_iterations;
    cfg.nonnegativity = true;
    cfg.snapshot_iters.clear();
    rec = sart(sino, cfg).image;
  }
  rec = clamp01(rec);

  const ImageGrid pooled = average_pool(scene, pool_k);
  ImageGrid up = upsample_nearest(pooled, pool_k, w, h);

  StudyResult out;
  out.radon.method = CompressionMethod::Radon;
  out.radon.captured_pixels = static_cast<long long>(n_angles) * nd;
  out.radon.reconstructed_pixels = total;
  out.radon.ratio = radon_compression_ratio(n_angles, nd, w, h);
  out.radon.psnr = psnr(rec, scene);
  out.radon.ssim = ssim(rec, scene);

  out.pool.method = CompressionMethod::AvgPool;
  out.pool.captured_pixels = static_cast<long long>(pooled.width()) * pooled.height();
  out.pool.reconstructed_pixels = total;
  out.pool.ratio = pool_compression_ratio(pool_k, w, h);
  out.pool.psnr = psnr(up, scene);
  out.pool.ssim = ssim(up, scene);

  out.sinogram = std::move(sino);
  out.radon_image = std::move(rec);
  out.pool_image = std::move(up);
  return out;
}

}  // namespace metaradon
