#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "metaradon/metaoptic.hpp"
#include "metaradon/pgm.hpp"
#include "error_kind.hpp"
#include "phantoms.hpp"

using namespace metaradon;
using testing_util::kind_of;

namespace {

constexpr double kPi = std::numbers::pi;

LensSpec small_lens(LensProfile profile = LensProfile::Cylindrical) {
  LensSpec s;
  s.focal_length = 20e-6;
  s.aperture_w = 10e-6;
  s.aperture_h = 3e-6;
  s.profile = profile;
  return s;
}

std::filesystem::path fixture() {
  return std::filesystem::path(METARADON_DATA_DIR) / "pillars_synthetic.csv";
}

}  // namespace

TEST(Phase, ZeroOnAxis) {
  EXPECT_EQ(phase_profile(small_lens(), 0, 0), 0.0);
  EXPECT_EQ(phase_profile(small_lens(LensProfile::Hyperboloid), 0, 0), 0.0);
}

TEST(Phase, CylindricalIgnoresY) {
  const auto s = small_lens();
  for (double x : {-4e-6, 1e-6, 3.3e-6})
    EXPECT_EQ(phase_profile(s, x, -1e-6), phase_profile(s, x, 2.5e-6));
  const auto h = small_lens(LensProfile::Hyperboloid);
  EXPECT_NE(phase_profile(h, 1e-6, 0), phase_profile(h, 1e-6, 1e-6));
}

TEST(Phase, ParaxialWithinOnePercent) {
  const auto s = small_lens();
  const double F = s.focal_length;
  for (int i = 1; i <= 20; ++i) {
    const double x = F / 10.0 * i / 20.0;
    const double parax = -kPi * x * x / (s.wavelength * F);
    EXPECT_LT(std::abs(phase_profile(s, x, 0) - parax) / std::abs(parax), 0.01);
  }
}

TEST(Phase, WrapIntoZeroTwoPi) {
  EXPECT_EQ(wrap_phase(0.0), 0.0);
  EXPECT_NEAR(wrap_phase(2 * kPi), 0.0, 1e-15);
  EXPECT_NEAR(wrap_phase(-kPi / 2), 3 * kPi / 2, 1e-15);
  for (double p : {-100.0, -7.0, 13.0, 1e4}) {
    const double w = wrap_phase(p);
    EXPECT_GE(w, 0.0);
    EXPECT_LT(w, 2 * kPi);
  }
  EXPECT_NEAR(phase_distance(0.1, 2 * kPi - 0.1), 0.2, 1e-12);
}

TEST(Library, TwoRowCsv) {
  const auto lib = parse_library_csv("diameter_nm,phase_rad,amplitude\n80,0.5,0.9\n150,2.0,0.8\n");
  ASSERT_EQ(lib.entries.size(), 2u);
  EXPECT_DOUBLE_EQ(lib.entries[1].diameter, 150e-9);
  EXPECT_FALSE(lib.warnings.empty());  // span below 2 pi
}

TEST(Library, OutOfRangeDiameterRejected) {
  EXPECT_EQ(kind_of([] { parse_library_csv("diameter_nm,phase_rad,amplitude\n250,0.5,0.9\n"); }),
            ErrorKind::Validation);
  EXPECT_EQ(kind_of([] { parse_library_csv("diameter_nm,phase_rad,amplitude\n60,0.5,0.9\n"); }),
            ErrorKind::Validation);
  EXPECT_EQ(kind_of([] { parse_library_csv("d,p,a\n80,0.5,0.9\n"); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { parse_library_csv("diameter_nm,phase_rad,amplitude\n80,x,1\n"); }),
            ErrorKind::Parse);
}

TEST(Library, UnsortedRowsSortedWithWarning) {
  const auto lib =
      parse_library_csv("diameter_nm,phase_rad,amplitude\n150,2.0,0.8\n80,0.5,0.9\n");
  EXPECT_DOUBLE_EQ(lib.entries[0].diameter, 80e-9);
  EXPECT_GE(lib.warnings.size(), 2u);
}

TEST(Library, FixtureHas64EntriesSpanningTwoPi) {
  const auto lib = load_library(fixture());
  ASSERT_EQ(lib.entries.size(), 64u);
  EXPECT_GE(lib.entries.back().phase - lib.entries.front().phase, 2 * kPi);
  EXPECT_TRUE(lib.warnings.empty());
  const auto syn = synthetic_library(64);
  for (std::size_t i = 0; i < 64; ++i)
    EXPECT_NEAR(lib.entries[i].phase, syn.entries[i].phase, 1e-15);
}

TEST(Quantize, ExactMatchGivesZeroResidual) {
  auto s = small_lens();
  s.aperture_w = 4 * s.period;
  s.aperture_h = s.period;
  PillarLibrary lib;
  // Phases copied from the targets themselves.
  LensDesign probe = quantize_lens(s, synthetic_library(8));
  double d = 80e-9;
  for (int i = 0; i < probe.nx; ++i) {
    bool seen = false;
    for (const auto& e : lib.entries) seen = seen || e.phase == probe.target[i];
    if (!seen) lib.entries.push_back({d, probe.target[i], 0.5});
    d += 20e-9;
  }
  lib.normalize_and_validate();
  const auto design = quantize_lens(s, lib);
  EXPECT_EQ(design.max_residual(), 0.0);
  const auto map = residual_image(design);
  for (double v : map.data()) EXPECT_EQ(v, 0.0);
}

TEST(Quantize, ResidualBoundedByHalfLargestGap) {
  const auto lib = load_library(fixture());
  const auto design = quantize_lens(small_lens(), lib);
  EXPECT_LE(design.max_residual(), lib.largest_phase_gap() / 2.0 + 1e-12);
  EXPECT_EQ(design.nx, 30);
  EXPECT_EQ(design.ny, 9);
}

TEST(Quantize, AmplitudeScalingDoesNotChangeSelection) {
  auto lib = synthetic_library(64);
  const auto a = quantize_lens(small_lens(LensProfile::Hyperboloid), lib);
  for (auto& e : lib.entries) e.amplitude *= 0.3;
  const auto b = quantize_lens(small_lens(LensProfile::Hyperboloid), lib);
  EXPECT_EQ(a.diameter, b.diameter);
}

TEST(Quantize, PhaseOffsetsOfTwoPiDoNotChangeSelection) {
  auto lib = synthetic_library(64);
  const auto a = quantize_lens(small_lens(), lib);
  for (std::size_t i = 0; i < lib.entries.size(); i += 3) lib.entries[i].phase += 4 * kPi;
  const auto b = quantize_lens(small_lens(), lib);
  EXPECT_EQ(a.diameter, b.diameter);
}

TEST(Quantize, CylindricalLayoutIsColumnConstant) {
  const auto d = quantize_lens(small_lens(), synthetic_library(64));
  for (int j = 1; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) EXPECT_EQ(d.diameter_at(i, j), d.diameter_at(i, 0));
  for (double v : d.diameter) {
    EXPECT_GE(v, kMinPillarDiameter);
    EXPECT_LE(v, kMaxPillarDiameter);
  }
}

TEST(Layout, TwoByTwoRowsAndRoundTrip) {
  auto s = small_lens(LensProfile::Hyperboloid);
  s.aperture_w = 2.5 * s.period;
  s.aperture_h = 2.1 * s.period;
  const auto d = quantize_lens(s, synthetic_library(64));
  ASSERT_EQ(d.nx * d.ny, 4);
  const auto dir = testing_util::temp_dir("layout");
  export_layout(d, dir / "layout.csv");
  std::ifstream in(dir / "layout.csv");
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 4);
  const auto grid = read_layout(dir / "layout.csv", s.period);
  ASSERT_EQ(grid.nx, 2);
  ASSERT_EQ(grid.ny, 2);
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i)
      EXPECT_EQ(grid.diameter_nm[j * 2 + i], d.diameter_at(i, j) * 1e9);
  export_residual_map(d, dir / "res.pgm");
  EXPECT_EQ(load_pgm(dir / "res.pgm").width(), 2);
}

TEST(Lens, InvalidSpecsRejected) {
  auto s = small_lens();
  s.focal_length = 0;
  EXPECT_EQ(kind_of([&] { quantize_lens(s, synthetic_library(8)); }), ErrorKind::Validation);
  s = small_lens();
  s.aperture_w = 100e-9;
  EXPECT_EQ(kind_of([&] { quantize_lens(s, synthetic_library(8)); }), ErrorKind::Validation);
  EXPECT_EQ(kind_of([] { parse_lens_profile("spherical"); }), ErrorKind::Validation);
  EXPECT_EQ(kind_of([] { load_library("/nonexistent/lib.csv"); }), ErrorKind::Io);
}
