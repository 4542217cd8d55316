#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metaradon/image.hpp"
#include "metaradon/projector.hpp"

namespace metaradon {

enum class AngleOrder { Sequential, Shuffled };

struct SartConfig {
  int n_iterations = 100;
  double relaxation = 1.0;  // lambda, must lie in (0, 2)
  AngleOrder ordering = AngleOrder::Sequential;
  std::uint64_t seed = 0;  // used by Shuffled
  bool nonnegativity = false;
  std::vector<int> snapshot_iters{1, 20, 100, 150};  // 1-based

  void validate() const;
};

struct Snapshot {
  int iteration;
  ImageGrid image;
};

struct ReconReport {
  std::vector<double> residuals;  // ||A x_k - b||_2 after iteration k = 1..n
  double initial_residual = 0.0;  // ||b||_2 for the zero start
  std::vector<Snapshot> snapshots;
  double elapsed_seconds = 0.0;
  // Pixels whose centers lie outside the circle inscribed in the detector
  // span; their values are less constrained by the data.
  int outside_support_pixels = 0;
};

struct SartResult {
  ImageGrid image;
  ReconReport report;
};

// Block-iterative SART with one block per angle:
//   x <- x + lambda * A_t^T[(b_t - A_t x) / R_t] / C_t
// with R_t = A_t 1 and C_t = A_t^T 1. Divisors below 1e-12 contribute zero.
// Starts from the zero image.
SartResult sart(const Sinogram& sino, const SartConfig& cfg);

enum class FbpFilter { RamLak, SheppLogan, None };

FbpFilter parse_fbp_filter(const std::string& name);

// Frequency-domain ramp filtering (zero padded to the next power of two
// >= 2 * n_detectors) followed by linear-interpolated back projection scaled by
// pi / (2 * n_angles). The ramp is the band-limited discrete ramp of
// Kak & Slaney doubled, so that scale factor recovers absolute intensities.
ImageGrid fbp(const Sinogram& sino, FbpFilter filter = FbpFilter::RamLak);

// Residual ||A x - b||_2 with the ray-driven operator.
double residual_norm(const ImageGrid& x, const Sinogram& b);

}  // namespace metaradon
