#include "metaradon/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "metaradon/error.hpp"
#include "metaradon/parallel.hpp"
#include "metaradon/rng.hpp"

namespace metaradon {

ImageGrid::ImageGrid(int width, int height, double fill, double pitch)
    : width_(width), height_(height), pitch_(pitch) {
  require(width >= 1 && height >= 1, "image dimensions must be >= 1");
  require(pitch > 0.0 && std::isfinite(pitch), "pixel pitch must be positive");
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

ImageGrid::ImageGrid(int width, int height, std::vector<double> data, double pitch)
    : width_(width), height_(height), pitch_(pitch), data_(std::move(data)) {
  require(width >= 1 && height >= 1, "image dimensions must be >= 1");
  require(pitch > 0.0 && std::isfinite(pitch), "pixel pitch must be positive");
  if (data_.size() != static_cast<std::size_t>(width) * height)
    fail(ErrorKind::Dimension, "image data length " + std::to_string(data_.size()) +
                                   " does not match " + std::to_string(width) + "x" +
                                   std::to_string(height));
}

void ImageGrid::set_pitch(double pitch) {
  require(pitch > 0.0 && std::isfinite(pitch), "pixel pitch must be positive");
  pitch_ = pitch;
}

double ImageGrid::sample(double fc, double fr) const {
  const double c0f = std::floor(fc);
  const double r0f = std::floor(fr);
  if (c0f < -1.0 || r0f < -1.0 || c0f >= width_ || r0f >= height_) return 0.0;
  const int c0 = static_cast<int>(c0f);
  const int r0 = static_cast<int>(r0f);
  const double ac = fc - c0f;
  const double ar = fr - r0f;
  auto px = [&](int c, int r) -> double {
    if (c < 0 || r < 0 || c >= width_ || r >= height_) return 0.0;
    return data_[index(c, r)];
  };
  const double top = px(c0, r0) + ac * (px(c0 + 1, r0) - px(c0, r0));
  const double bot = px(c0, r0 + 1) + ac * (px(c0 + 1, r0 + 1) - px(c0, r0 + 1));
  return top + ar * (bot - top);
}

double ImageGrid::sum() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

double ImageGrid::min_value() const {
  return data_.empty() ? 0.0 : *std::min_element(data_.begin(), data_.end());
}

double ImageGrid::max_value() const {
  return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end());
}

bool ImageGrid::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void AffineSpec::validate() const {
  require(std::isfinite(rotation_deg), "rotation must be finite");
  require(scale > 0.0 && std::isfinite(scale), "affine scale must be > 0");
  require(std::abs(translate_x) < 1.0 && std::abs(translate_y) < 1.0,
          "affine translation fractions must satisfy |t| < 1");
}

void NoiseSpec::validate() const {
  require(sigma_frac >= 0.0 && std::isfinite(sigma_frac), "noise sigma must be >= 0");
}

namespace {

// cos/sin that are exact at multiples of 90 degrees.
void cos_sin_deg(double deg, double& c, double& s) {
  const double q = deg / 90.0;
  if (q == std::round(q)) {
    const long k = ((static_cast<long>(std::round(q)) % 4) + 4) % 4;
    constexpr double kc[4] = {1.0, 0.0, -1.0, 0.0};
    constexpr double ks[4] = {0.0, 1.0, 0.0, -1.0};
    c = kc[k];
    s = ks[k];
    return;
  }
  const double r = deg * std::numbers::pi / 180.0;
  c = std::cos(r);
  s = std::sin(r);
}

}  // namespace

ImageGrid affine_transform(const ImageGrid& img, const AffineSpec& spec) {
  spec.validate();
  if (spec.rotation_deg == 0.0 && spec.translate_x == 0.0 && spec.translate_y == 0.0 &&
      spec.scale == 1.0)
    return img;

  const int w = img.width();
  const int h = img.height();
  double c, s;
  cos_sin_deg(spec.rotation_deg, c, s);
  const double tx = spec.translate_x * w;
  const double ty = -spec.translate_y * h;  // +translate_y moves content down
  const double inv = 1.0 / spec.scale;

  ImageGrid out(w, h, 0.0, img.pitch());
  parallel_for(static_cast<std::size_t>(h), [&](std::size_t r) {
    const double y_out = h / 2.0 - (static_cast<double>(r) + 0.5);
    auto dst = out.row(static_cast<int>(r));
    for (int col = 0; col < w; ++col) {
      const double x_out = (col + 0.5) - w / 2.0;
      const double dx = (x_out - tx) * inv;
      const double dy = (y_out - ty) * inv;
      // inverse rotation
      const double xs = c * dx + s * dy;
      const double ys = -s * dx + c * dy;
      dst[col] = img.sample(xs + w / 2.0 - 0.5, h / 2.0 - ys - 0.5);
    }
  });
  return out;
}

ImageGrid add_gaussian_noise(const ImageGrid& img, const NoiseSpec& spec) {
  spec.validate();
  if (spec.sigma_frac == 0.0) return img;
  ImageGrid out = img;
  Rng rng(spec.seed);
  for (double& v : out.data()) v = std::clamp(v + spec.sigma_frac * rng.normal(), 0.0, 1.0);
  return out;
}

ImageGrid pad_image(const ImageGrid& img, int pad, double fill) {
  require(pad >= 0, "pad must be >= 0");
  if (pad == 0) return img;
  ImageGrid out(img.width() + 2 * pad, img.height() + 2 * pad, fill, img.pitch());
  for (int r = 0; r < img.height(); ++r) {
    auto src = img.row(r);
    std::copy(src.begin(), src.end(), out.row(r + pad).begin() + pad);
  }
  return out;
}

ImageGrid crop_center(const ImageGrid& img, int pad) {
  require(pad >= 0 && 2 * pad < img.width() && 2 * pad < img.height(),
          "crop exceeds image dimensions");
  if (pad == 0) return img;
  ImageGrid out(img.width() - 2 * pad, img.height() - 2 * pad, 0.0, img.pitch());
  for (int r = 0; r < out.height(); ++r) {
    auto src = img.row(r + pad);
    std::copy(src.begin() + pad, src.begin() + pad + out.width(), out.row(r).begin());
  }
  return out;
}

ImageGrid resize(const ImageGrid& img, int new_width, int new_height) {
  require(new_width >= 1 && new_height >= 1, "resize dimensions must be >= 1");
  if (new_width == img.width() && new_height == img.height()) return img;
  const int w = img.width();
  const int h = img.height();
  const double sx = static_cast<double>(w) / new_width;
  const double sy = static_cast<double>(h) / new_height;

  struct Tap {
    int i0, i1;
    double a;
  };
  auto taps = [](int n_out, int n_in, double scale) {
    std::vector<Tap> t(static_cast<std::size_t>(n_out));
    for (int u = 0; u < n_out; ++u) {
      double f = (u + 0.5) * scale - 0.5;
      f = std::clamp(f, 0.0, static_cast<double>(n_in - 1));
      const int i0 = static_cast<int>(std::floor(f));
      const int i1 = std::min(i0 + 1, n_in - 1);
      t[u] = {i0, i1, f - i0};
    }
    return t;
  };
  const auto tx = taps(new_width, w, sx);
  const auto ty = taps(new_height, h, sy);

  ImageGrid out(new_width, new_height, 0.0, img.pitch());
  parallel_for(static_cast<std::size_t>(new_height), [&](std::size_t r) {
    const Tap& t = ty[r];
    auto top = img.row(t.i0);
    auto bot = img.row(t.i1);
    auto dst = out.row(static_cast<int>(r));
    for (int c = 0; c < new_width; ++c) {
      const Tap& k = tx[c];
      const double a = top[k.i0] + k.a * (top[k.i1] - top[k.i0]);
      const double b = bot[k.i0] + k.a * (bot[k.i1] - bot[k.i0]);
      dst[c] = a + t.a * (b - a);
    }
  });
  return out;
}

ImageGrid normalize(const ImageGrid& img) {
  const double lo = img.min_value();
  const double hi = img.max_value();
  ImageGrid out(img.width(), img.height(), 0.0, img.pitch());
  if (hi > lo) {
    auto src = img.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = (src[i] - lo) / (hi - lo);
  }
  return out;
}

ImageGrid clamp01(const ImageGrid& img) {
  ImageGrid out = img;
  for (double& v : out.data()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

}  // namespace metaradon
