#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "metaradon/image.hpp"

namespace metaradon {

// n evenly spaced angles in [lo, hi), endpoint excluded.
std::vector<double> make_uniform_angles(int n, double lo_deg = 0.0, double hi_deg = 180.0);

// ceil(sqrt(w^2 + h^2)) + 1, bumped by one when needed so that
// (n_detectors - w) is even. With matching parity the detector bin centers
// line up with pixel column centers at 0 degrees.
int auto_detector_count(int width, int height);

// Parallel-beam geometry. The line for (s, theta) is
//   x(z) = z sin(theta) + s cos(theta),  y(z) = -z cos(theta) + s sin(theta)
// in image-centered coordinates with y pointing up. Detector bin k sits at
// s_k = (k + 0.5 - n_detectors / 2) / detector_pitch pixels.
struct ProjectionGeometry {
  std::vector<double> angles_deg;
  int n_detectors = 0;
  double detector_pitch = 1.0;  // bins per pixel
  int image_w = 0;
  int image_h = 0;
  double pixel_pitch = 1.0;  // line integrals are scaled by this

  static ProjectionGeometry for_image(int width, int height, std::vector<double> angles_deg,
                                      int n_detectors = 0);

  int n_angles() const noexcept { return static_cast<int>(angles_deg.size()); }
  double bin_spacing() const noexcept { return 1.0 / detector_pitch; }
  double bin_center(int k) const noexcept {
    return (k + 0.5 - n_detectors / 2.0) * bin_spacing();
  }
  void validate() const;
  void check_image(const ImageGrid& img) const;
};

class Sinogram {
 public:
  Sinogram() = default;
  explicit Sinogram(ProjectionGeometry geometry);
  Sinogram(ProjectionGeometry geometry, std::vector<double> data);

  const ProjectionGeometry& geometry() const noexcept { return geom_; }
  int n_angles() const noexcept { return geom_.n_angles(); }
  int n_detectors() const noexcept { return geom_.n_detectors; }

  double& at(int angle, int bin) { return data_[index(angle, bin)]; }
  double at(int angle, int bin) const { return data_[index(angle, bin)]; }
  std::span<double> projection(int angle) {
    return {data_.data() + index(angle, 0), static_cast<std::size_t>(geom_.n_detectors)};
  }
  std::span<const double> projection(int angle) const {
    return {data_.data() + index(angle, 0), static_cast<std::size_t>(geom_.n_detectors)};
  }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool all_finite() const;

 private:
  std::size_t index(int angle, int bin) const noexcept {
    return static_cast<std::size_t>(angle) * geom_.n_detectors + bin;
  }

  ProjectionGeometry geom_;
  std::vector<double> data_;
};

enum class RadonMethod { RotateSum, RayDriven, FftDc };

RadonMethod parse_radon_method(const std::string& name);
std::string to_string(RadonMethod m);

// Rotates the content by -theta on a zero-padded canvas and sums each column.
// The rotation is an exact quarter turn followed by three cubic-interpolated
// shears for the remainder, so 0 and 90 degrees reduce to plain column sums.
Sinogram radon_rotate_sum(const ImageGrid& img, const ProjectionGeometry& geom);

// Footprint projector. A unit pixel projected at angle theta casts a trapezoid
// on the detector axis (two boxes of widths |cos| and |sin| convolved); each
// bin receives the trapezoid's integral over the bin, divided by the bin width.
// A pixel touches at most four bins and its weights sum to one.
Sinogram radon_ray_driven(const ImageGrid& img, const ProjectionGeometry& geom);

// Optical emulation of the cylindrical-lens measurement: rotate as above,
// take the 1-D DFT along each canvas column and keep the DC term.
Sinogram radon_fft_dc(const ImageGrid& img, const ProjectionGeometry& geom);

Sinogram radon(const ImageGrid& img, const ProjectionGeometry& geom, RadonMethod method);

// Matrix-free system operator A (ray-driven) and its exact transpose.
Sinogram forward_apply(const ImageGrid& x, const ProjectionGeometry& geom);
ImageGrid adjoint_apply(const Sinogram& y);

// Single-angle pieces used by block-iterative solvers.
void forward_angle(const ImageGrid& x, const ProjectionGeometry& geom, int angle,
                   std::span<double> out);
// Accumulates A_angle^T y into `acc` (row-major, image_w * image_h).
void adjoint_angle(std::span<const double> y, const ProjectionGeometry& geom, int angle,
                   std::span<double> acc);

// RSG1: "RSG1", u32 n_angles, u32 n_detectors, f64 angles[n_angles],
// f32 data[n_angles * n_detectors]; all little-endian.
std::vector<std::uint8_t> encode_rsg(const Sinogram& sino);
// Image dims are not stored; they come from the arguments or, when zero, from
// infer_image_size().
Sinogram decode_rsg(const std::vector<std::uint8_t>& bytes, int image_w = 0, int image_h = 0);
void save_rsg(const Sinogram& sino, const std::filesystem::path& path);
Sinogram load_rsg(const std::filesystem::path& path, int image_w = 0, int image_h = 0);

// Largest square image whose auto detector count fits n_detectors.
int infer_image_size(int n_detectors);

// angle_deg,bin,value
void save_sinogram_csv(const Sinogram& sino, const std::filesystem::path& path);

// Sinogram as an image: one row per angle, normalized to [0,1].
ImageGrid sinogram_image(const Sinogram& sino);

}  // namespace metaradon
