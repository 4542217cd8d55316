#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace metaradon {

// Row-major grayscale image. Pixel (col, row) has its center at
// (col + 0.5, row + 0.5) in grid units; geometric operations rotate and scale
// about (width / 2, height / 2).
class ImageGrid {
 public:
  ImageGrid() = default;
  ImageGrid(int width, int height, double fill = 0.0, double pitch = 1.0);
  ImageGrid(int width, int height, std::vector<double> data, double pitch = 1.0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double pitch() const noexcept { return pitch_; }
  void set_pitch(double pitch);
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& at(int col, int row) { return data_[index(col, row)]; }
  double at(int col, int row) const { return data_[index(col, row)]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(int r) {
    return {data_.data() + static_cast<std::size_t>(r) * width_,
            static_cast<std::size_t>(width_)};
  }
  std::span<const double> row(int r) const {
    return {data_.data() + static_cast<std::size_t>(r) * width_,
            static_cast<std::size_t>(width_)};
  }

  // Bilinear sample at continuous pixel-index coordinates (fc, fr), where
  // integer values land on pixel centers. Outside the grid reads as 0.
  double sample(double fc, double fr) const;

  double sum() const;
  double min_value() const;
  double max_value() const;
  bool all_finite() const;

  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;

 private:
  std::size_t index(int col, int row) const noexcept {
    return static_cast<std::size_t>(row) * width_ + col;
  }

  int width_ = 0;
  int height_ = 0;
  double pitch_ = 1.0;
  std::vector<double> data_;
};

struct AffineSpec {
  double rotation_deg = 0.0;
  double translate_x = 0.0;  // fraction of width
  double translate_y = 0.0;  // fraction of height
  double scale = 1.0;

  void validate() const;
};

struct NoiseSpec {
  double sigma_frac = 0.0;  // std as a fraction of the [0,1] dynamic range
  std::uint64_t seed = 0;

  void validate() const;
};

// Rotation (counter-clockwise in the displayed image, y up), then scale, then
// translation, all about the image center. Output keeps input dims; samples
// falling outside the input read as 0. The identity spec copies the input.
ImageGrid affine_transform(const ImageGrid& img, const AffineSpec& spec);

// Adds N(0, sigma_frac^2) per pixel and clamps to [0,1].
ImageGrid add_gaussian_noise(const ImageGrid& img, const NoiseSpec& spec);

ImageGrid pad_image(const ImageGrid& img, int pad, double fill = 0.0);

// Inverse of pad_image with the same `pad`.
ImageGrid crop_center(const ImageGrid& img, int pad);

// Bilinear resample on the pixel-center convention: output pixel center u maps
// to input coordinate (u + 0.5) * in / out - 0.5, clamped to the edge. The
// pixel pitch is carried over unchanged.
ImageGrid resize(const ImageGrid& img, int new_width, int new_height);

// Scales [min,max] to [0,1]; a constant image maps to zeros.
ImageGrid normalize(const ImageGrid& img);

ImageGrid clamp01(const ImageGrid& img);

}  // namespace metaradon
