#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "metaradon/image.hpp"

namespace metaradon {

enum class LensProfile { Cylindrical, Hyperboloid };

LensProfile parse_lens_profile(const std::string& name);

struct LensSpec {
  double wavelength = 780e-9;  // m
  double focal_length = 0.0;   // m, required
  double aperture_w = 0.0;     // m, required
  double aperture_h = 0.0;     // m, required
  double period = 330e-9;      // m
  LensProfile profile = LensProfile::Cylindrical;

  void validate() const;
  // Pillar sites per axis: floor(aperture / period).
  int sites_x() const;
  int sites_y() const;
};

// Cylindrical: (2 pi / lambda)(F - sqrt(F^2 + x^2)), independent of y.
// Hyperboloid: (2 pi / lambda)(F - sqrt(F^2 + x^2 + y^2)).
double phase_profile(const LensSpec& spec, double x, double y);

// Maps any finite phase into [0, 2 pi).
double wrap_phase(double phi);

// Circular distance between two phases, in [0, pi].
double phase_distance(double a, double b);

inline constexpr double kMinPillarDiameter = 70e-9;
inline constexpr double kMaxPillarDiameter = 200e-9;

struct PillarEntry {
  double diameter;   // m
  double phase;      // rad
  double amplitude;  // [0, 1]
};

struct PillarLibrary {
  std::vector<PillarEntry> entries;  // strictly increasing diameter
  double height = 500e-9;
  double period = 330e-9;
  double wavelength = 780e-9;
  std::vector<std::string> warnings;

  // Enforces the invariants; sorts unsorted rows (recording a warning).
  void normalize_and_validate();
  // 2 pi minus the largest circular gap between wrapped entry phases.
  double phase_coverage() const;
  // Largest circular gap between adjacent wrapped phases.
  double largest_phase_gap() const;
};

// CSV with header diameter_nm,phase_rad,amplitude.
PillarLibrary load_library(const std::filesystem::path& path);
PillarLibrary parse_library_csv(const std::string& text);
void save_library(const PillarLibrary& lib, const std::filesystem::path& path);

// Synthetic stand-in for a simulated scatterer table: n diameters evenly
// spaced over [70, 200] nm with
//   phase(d)     = 2 pi * 1.05 * u^1.3,
//   amplitude(d) = 0.97 - 0.12 * u^2,    u = (d - 70 nm) / 130 nm.
// Smooth, monotone, and spanning slightly more than 2 pi.
PillarLibrary synthetic_library(int n = 64);

struct LensDesign {
  LensSpec spec;
  int nx = 0;
  int ny = 0;
  std::vector<double> diameter;     // m, row-major [j][i]
  std::vector<double> target;       // wrapped target phase per site
  std::vector<double> residual;     // circular phase error per site, rad
  std::vector<double> amplitude;    // amplitude of the chosen pillar
  std::vector<std::string> warnings;

  double diameter_at(int i, int j) const { return diameter[static_cast<std::size_t>(j) * nx + i]; }
  double residual_at(int i, int j) const { return residual[static_cast<std::size_t>(j) * nx + i]; }
  double max_residual() const;
  // Site coordinates relative to the optical axis (lens center).
  double site_x(int i) const { return (i - (nx - 1) / 2.0) * spec.period; }
  double site_y(int j) const { return (j - (ny - 1) / 2.0) * spec.period; }
};

// Per site, picks the pillar whose phase is circularly closest to the wrapped
// target; ties go to the smaller diameter. Amplitude does not enter selection.
LensDesign quantize_lens(const LensSpec& spec, const PillarLibrary& lib);

// Layout CSV rows: x_um,y_um,diameter_nm with x = i * period, y = j * period.
void export_layout(const LensDesign& design, const std::filesystem::path& csv_path);
// Residual map scaled by 1/pi into a 16-bit PGM.
void export_residual_map(const LensDesign& design, const std::filesystem::path& pgm_path);
ImageGrid residual_image(const LensDesign& design);

struct LayoutGrid {
  int nx = 0;
  int ny = 0;
  std::vector<double> diameter_nm;  // row-major [j][i], exactly as written
};
LayoutGrid read_layout(const std::filesystem::path& csv_path, double period);

}  // namespace metaradon
